//! `blindcast` — simulate randomized broadcasting in blind multi-hop radio
//! networks and validate the protocol's probabilistic building blocks.

use std::env;
use std::fs;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use blindcast::experiment::{self, ExperimentSpec};
use blindcast::fit::{fit_scaling, FitModel, FitPoint};
use blindcast::lemma::validate_single_tx_lemma;
use blindcast_core::broadcast::{run_broadcast_cd_directed, run_broadcast_no_cd, RunConfig};
use blindcast_core::coins::{pmf_y1, pmf_y4, GeneralDist, SemiShallowDist};
use blindcast_core::radio::ModelVariant;
use blindcast_core::trace::TraceSink;

#[derive(Parser)]
#[command(
    name = "blindcast",
    about = "Randomized broadcast simulator for blind multi-hop radio networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment on a single graph.
    Run(RunArgs),
    /// Validate the single-transmission hitting bound on random vectors.
    Lemma(LemmaArgs),
    /// Inspect the shared-coin distributions.
    Coins(CoinsArgs),
    /// Sweep a graph family over a list of sizes.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model variant: no-cd or cd-directed.
    #[arg(long, default_value = "no-cd")]
    model: String,
    /// Constants c1,c2,c3,c4 (comma separated).
    #[arg(long, default_value = "1,1,1,1")]
    constants: String,
    /// Use the large analysis constants (c1=30C, c2=3500C, c3=2280C,
    /// c4=3840C) instead of --constants.
    #[arg(long, default_value_t = false)]
    paper_constants: bool,
    /// Round budget per trial.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    /// Trials per configuration.
    #[arg(long, default_value_t = 20)]
    trials: u32,
    /// Master seed; trial i uses the stream derived from (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation cap for the general distribution.
    #[arg(long, default_value_t = 1 << 16)]
    ymax: u64,
}

impl ModelArgs {
    fn collision_detection(&self) -> Result<bool> {
        match self.model.as_str() {
            "no-cd" => Ok(false),
            "cd-directed" => Ok(true),
            other => bail!("unknown model {other:?} (expected no-cd or cd-directed)"),
        }
    }

    fn apply(&self, spec: &mut ExperimentSpec) -> Result<()> {
        let parts: Vec<&str> = self.constants.split(',').collect();
        if parts.len() != 4 {
            bail!("--constants wants four comma-separated values");
        }
        let mut cs = [0.0f64; 4];
        for (slot, part) in cs.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .with_context(|| format!("parsing constant {part:?}"))?;
        }
        spec.constants = cs;
        spec.use_analysis_constants = self.paper_constants;
        spec.trials = self.trials;
        spec.master_seed = self.seed;
        spec.budget = self.budget;
        spec.y2_cap = self.ymax;
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    /// Graph: shorthand (path:100, star:64, clique:32, layered:D:W,
    /// grid:RxC, gnp:N:P[:SEED]) or file:<edge-list path>.
    #[arg(long)]
    graph: String,
    #[command(flatten)]
    model: ModelArgs,
    /// Write the summary CSV here (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// Write one JSON object per trial here.
    #[arg(long)]
    trials_out: Option<String>,
    /// Print per-round traces (single-trial runs only).
    #[arg(long, default_value_t = false)]
    trace: bool,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 100)]
    max_len: usize,
    /// Monte Carlo samples per vector for the 4-sigma cross-check.
    #[arg(long, default_value_t = 2000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct CoinsArgs {
    #[command(subcommand)]
    command: CoinsCommand,
}

#[derive(Subcommand)]
enum CoinsCommand {
    /// Dump (y, pmf) pairs of a distribution as CSV.
    Pmf(PmfArgs),
}

#[derive(Args)]
struct PmfArgs {
    /// One of y1, y2, y3, y4.
    #[arg(long)]
    dist: String,
    /// Horizon T (y1, y3, y4).
    #[arg(long, default_value_t = 1024)]
    t: u64,
    /// Scaling constant (c1 for y1, c3 for y3).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Truncation cap (y2).
    #[arg(long, default_value_t = 1 << 16)]
    ymax: u64,
    /// Write the CSV here (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Graph family: path, star, clique, grid (square), layered, gnp.
    #[arg(long)]
    family: String,
    /// Sweep values: node counts, or depths for layered.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<u32>,
    /// Layer width for the layered family.
    #[arg(long, default_value_t = 8)]
    width: u32,
    /// Edge probability for the gnp family.
    #[arg(long, default_value_t = 0.03)]
    p: f64,
    #[command(flatten)]
    model: ModelArgs,
    /// Fit the medians against a model: dlognd, log2n, dlognd-logloglog.
    #[arg(long)]
    fit: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    trials_out: Option<String>,
}

fn worker_threads() -> Option<usize> {
    env::var("BLINDCAST_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
}

fn emit(path: &Option<String>, contents: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).with_context(|| format!("writing {p}"))?,
        None => print!("{contents}"),
    }
    Ok(())
}

struct StdoutTrace;

impl TraceSink for StdoutTrace {
    fn line(&mut self, line: &str) {
        println!("{line}");
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cd = args.model.collision_detection()?;
    let mut spec = ExperimentSpec::new(&args.graph, cd);
    args.model.apply(&mut spec)?;
    spec.validate()?;

    if args.trace {
        // Traced runs go through a single trial with the sink attached.
        let (_, network) = experiment::resolve_graph(&spec.graph)?;
        let config = RunConfig {
            variant: ModelVariant {
                collision_detection: cd,
                directed: network.directed(),
            },
            constants: spec.resolved_constants(),
            max_global_rounds: spec.budget,
            master_seed: spec.master_seed,
            y2_cap: spec.y2_cap,
            trace: true,
        };
        let mut sink = StdoutTrace;
        let record = if cd {
            run_broadcast_cd_directed(&network, &config, 0, &mut sink)?
        } else {
            run_broadcast_no_cd(&network, &config, 0, &mut sink)
        };
        eprintln!(
            "trial 0: completion {:?} after {} framework steps",
            record.completion_round, record.framework_steps
        );
        return Ok(());
    }

    let started = Instant::now();
    let output = experiment::run_experiment(&spec, worker_threads())?;
    let elapsed = started.elapsed();

    emit(&args.out, &output.csv())?;
    if let Some(path) = &args.trials_out {
        fs::write(path, output.jsonl()).with_context(|| format!("writing {path}"))?;
    }
    let row = &output.rows[0];
    eprintln!(
        "{} n={} D={} {}: {}/{} completed, wall {:.3}s [{}]",
        row.family,
        row.n,
        row.eccentricity,
        row.variant,
        row.completed,
        row.trials,
        elapsed.as_secs_f64(),
        row.constants,
    );
    Ok(())
}

fn cmd_lemma(args: LemmaArgs) -> Result<()> {
    let report = validate_single_tx_lemma(args.trials, args.max_len, args.mc_samples, args.seed);
    println!(
        "single-transmission bound: {} vectors, min margin {:.3e}, {} violations, {} Monte Carlo mismatches",
        report.vectors,
        report.min_margin,
        report.violations.len(),
        report.mc_mismatches.len()
    );
    for v in &report.violations {
        println!(
            "VIOLATION vector {}: exact {:.9} < bound {:.9} ({:?})",
            v.vector_index, v.exact, v.bound, v.probabilities
        );
    }
    for m in &report.mc_mismatches {
        println!(
            "MC MISMATCH vector {}: exact {:.6} empirical {:.6} tolerance {:.6}",
            m.vector_index, m.exact, m.empirical, m.tolerance
        );
    }
    if !report.passed() {
        bail!("single-transmission validation failed");
    }
    Ok(())
}

fn cmd_coins(args: CoinsArgs) -> Result<()> {
    let CoinsCommand::Pmf(args) = args.command;
    let mut out = String::from("y,pmf\n");
    let mut push = |y: u64, p: f64| out.push_str(&format!("{y},{p}\n"));
    match args.dist.as_str() {
        "y1" => {
            let k = libm::floor(libm::sqrt(args.t as f64) / args.c) as u64;
            for y in 0..=k {
                push(y, pmf_y1(args.t, args.c, y));
            }
        }
        "y2" => {
            let d = GeneralDist::new(args.ymax);
            for y in 0..=d.y_cap() {
                push(y, d.pmf(y));
            }
        }
        "y3" => {
            let d = SemiShallowDist::new(args.t, args.c);
            for y in 0..=d.support_max() {
                push(y, d.pmf(y));
            }
        }
        "y4" => {
            for y in 1..=args.t {
                push(y, pmf_y4(args.t, y));
            }
        }
        other => bail!("unknown distribution {other:?} (expected y1..y4)"),
    }
    emit(&args.out, &out)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let cd = args.model.collision_detection()?;
    if args.ns.is_empty() {
        bail!("--ns wants at least one sweep value");
    }
    let mut specs = Vec::new();
    for &n in &args.ns {
        let graph = match args.family.as_str() {
            "path" | "star" | "clique" => format!("{}:{}", args.family, n),
            "grid" => format!("grid:{n}x{n}"),
            "layered" => format!("layered:{}:{}", n, args.width),
            "gnp" => format!("gnp:{}:{}", n, args.p),
            other => bail!("unknown family {other:?}"),
        };
        let mut spec = ExperimentSpec::new(&graph, cd);
        args.model.apply(&mut spec)?;
        specs.push(spec);
    }

    let started = Instant::now();
    let output = experiment::run_sweep(&specs, worker_threads())?;
    let elapsed = started.elapsed();

    emit(&args.out, &output.csv())?;
    if let Some(path) = &args.trials_out {
        fs::write(path, output.jsonl()).with_context(|| format!("writing {path}"))?;
    }
    eprintln!(
        "sweep over {} configurations, wall {:.3}s",
        output.rows.len(),
        elapsed.as_secs_f64()
    );

    if let Some(model) = &args.fit {
        let model = FitModel::from_str(model).map_err(anyhow::Error::msg)?;
        let points: Vec<FitPoint> = output
            .rows
            .iter()
            .filter_map(|r| {
                r.quantiles.map(|q| FitPoint {
                    n: r.n,
                    d: r.eccentricity as u64,
                    median: q.median as f64,
                })
            })
            .collect();
        let report = fit_scaling(&points, model)?;
        println!(
            "fit model={} kappa={:.4} spread={:.4} ratios={:?}",
            report.model.label(),
            report.kappa,
            report.spread,
            report
                .ratios
                .iter()
                .map(|r| (r * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    // Flush stdout promptly when piped.
    let result = match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Lemma(args) => cmd_lemma(args),
        Command::Coins(args) => cmd_coins(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    std::io::stdout().flush().ok();
    result
}
