//! Experiment orchestration: graph resolution, parallel trial dispatch,
//! summary statistics, and deterministic CSV / JSONL emission.
//!
//! Determinism contract: a rerun with the same spec produces byte-identical
//! CSV and JSONL, whether trials run serially or on a worker pool. Trial i
//! always uses the rng stream derived from `(master_seed, i)`, aggregation
//! is by trial index, and wall-clock time is never written into the
//! artifacts (the CLI reports it on stderr).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use blindcast_core::broadcast::{
    run_broadcast_cd_directed, run_broadcast_no_cd, RunConfig, TrialRecord,
};
use blindcast_core::coins::Constants;
use blindcast_core::radio::ModelVariant;
use blindcast_core::topology::{bfs, from_shorthand, load_edge_list, Network};
use blindcast_core::trace::NullTrace;

use crate::quantiles;

/// Everything one experiment needs. `graph` is a generator shorthand
/// (`path:100`, `clique:32`, ...) or `file:<path>` for an edge-list file.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub graph: String,
    pub collision_detection: bool,
    pub constants: [f64; 4],
    pub use_analysis_constants: bool,
    pub trials: u32,
    pub master_seed: u64,
    pub budget: u64,
    pub y2_cap: u64,
}

impl ExperimentSpec {
    pub fn new(graph: &str, collision_detection: bool) -> Self {
        ExperimentSpec {
            graph: graph.to_string(),
            collision_detection,
            constants: [1.0; 4],
            use_analysis_constants: false,
            trials: 20,
            master_seed: 0,
            budget: 10_000_000,
            y2_cap: blindcast_core::coins::DEFAULT_Y2_CAP,
        }
    }

    pub fn resolved_constants(&self) -> Constants {
        let c = if self.collision_detection { 4 } else { 2 };
        if self.use_analysis_constants {
            Constants::analysis(c)
        } else {
            let [c1, c2, c3, c4] = self.constants;
            Constants {
                protocols: c,
                c1,
                c2,
                c3,
                c4,
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.budget == 0 {
            bail!("budget must be at least 1 round");
        }
        let c = self.resolved_constants();
        if [c.c1, c.c2, c.c3, c.c4].iter().any(|&v| v <= 0.0) {
            bail!("constants must be strictly positive");
        }
        Ok(())
    }
}

/// Resolve a graph argument into a family label and a network.
pub fn resolve_graph(spec: &str) -> Result<(String, Network)> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let net = load_edge_list(&text).with_context(|| format!("parsing {path}"))?;
        let family = Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "file".to_string());
        return Ok((family, net));
    }
    let family = spec.split(':').next().unwrap_or(spec).to_string();
    let net = from_shorthand(spec).with_context(|| format!("parsing graph spec {spec:?}"))?;
    Ok((family, net))
}

/// One line of the summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub family: String,
    pub n: u64,
    pub eccentricity: u32,
    pub variant: &'static str,
    pub constants: Constants,
    pub trials: u32,
    pub completed: u32,
    pub incomplete: u32,
    /// Quantiles over completed trials only; absent when nothing completed.
    pub quantiles: Option<quantiles::Quantiles>,
}

pub const CSV_HEADER: &str =
    "family,n,D,variant,c1,c2,c3,c4,trials,completed,incomplete,min_rounds,median_rounds,p95_rounds,max_rounds";

impl SummaryRow {
    pub fn to_csv_line(&self) -> String {
        let q = |f: fn(&quantiles::Quantiles) -> u64| -> String {
            self.quantiles.as_ref().map(|q| f(q).to_string()).unwrap_or_default()
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.n,
            self.eccentricity,
            self.variant,
            self.constants.c1,
            self.constants.c2,
            self.constants.c3,
            self.constants.c4,
            self.trials,
            self.completed,
            self.incomplete,
            q(|q| q.min),
            q(|q| q.median),
            q(|q| q.p95),
            q(|q| q.max),
        )
    }
}

pub fn rows_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn records_to_jsonl(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        let line = serde_json::to_string(rec).expect("trial records always serialize");
        let _ = writeln!(out, "{line}");
    }
    out
}

/// Run every trial of a spec on `threads` workers (rayon default when
/// `None`), returning records ordered by trial index.
pub fn run_trials(
    network: &Network,
    spec: &ExperimentSpec,
    threads: Option<usize>,
) -> Result<Vec<TrialRecord>> {
    let config = RunConfig {
        variant: ModelVariant {
            collision_detection: spec.collision_detection,
            directed: network.directed(),
        },
        constants: spec.resolved_constants(),
        max_global_rounds: spec.budget,
        master_seed: spec.master_seed,
        y2_cap: spec.y2_cap,
        trace: false,
    };

    let run_one = |trial: u32| -> Result<TrialRecord> {
        if spec.collision_detection {
            run_broadcast_cd_directed(network, &config, trial, &mut NullTrace)
                .map_err(anyhow::Error::from)
        } else {
            Ok(run_broadcast_no_cd(network, &config, trial, &mut NullTrace))
        }
    };

    let trial_ids: Vec<u32> = (0..spec.trials).collect();
    let records: Result<Vec<TrialRecord>> = match threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .context("building worker pool")?;
            pool.install(|| trial_ids.par_iter().map(|&i| run_one(i)).collect())
        }
        None => trial_ids.par_iter().map(|&i| run_one(i)).collect(),
    };
    records
}

pub fn summarize(
    family: &str,
    network: &Network,
    spec: &ExperimentSpec,
    records: &[TrialRecord],
) -> SummaryRow {
    let completions: Vec<u64> = records
        .iter()
        .filter_map(|r| r.completion_round)
        .collect();
    let completed = completions.len() as u32;
    SummaryRow {
        family: family.to_string(),
        n: network.node_count() as u64,
        eccentricity: bfs(network).eccentricity,
        variant: if spec.collision_detection {
            "cd-directed"
        } else {
            "no-cd"
        },
        constants: spec.resolved_constants(),
        trials: spec.trials,
        completed,
        incomplete: spec.trials - completed,
        quantiles: quantiles::summarize(&completions),
    }
}

/// Output bundle of one experiment or sweep.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<SummaryRow>,
    pub records: Vec<TrialRecord>,
}

impl ExperimentOutput {
    pub fn csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn jsonl(&self) -> String {
        records_to_jsonl(&self.records)
    }
}

/// Run one experiment end to end.
pub fn run_experiment(spec: &ExperimentSpec, threads: Option<usize>) -> Result<ExperimentOutput> {
    spec.validate()?;
    let (family, network) = resolve_graph(&spec.graph)?;
    let records = run_trials(&network, spec, threads)?;
    let row = summarize(&family, &network, spec, &records);
    Ok(ExperimentOutput {
        rows: vec![row],
        records,
    })
}

/// Run one experiment per sweep value, rows sorted by (family, n).
pub fn run_sweep(specs: &[ExperimentSpec], threads: Option<usize>) -> Result<ExperimentOutput> {
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for spec in specs {
        let out = run_experiment(spec, threads)?;
        rows.extend(out.rows);
        records.extend(out.records);
    }
    rows.sort_by(|a, b| a.family.cmp(&b.family).then(a.n.cmp(&b.n)));
    Ok(ExperimentOutput { rows, records })
}
