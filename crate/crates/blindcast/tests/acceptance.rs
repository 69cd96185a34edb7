//! Acceptance suite: one test per verification criterion, each printing a
//! pass/fail line (run with `--nocapture` to see them on success).
//!
//! Two criteria are expected to fail at desk scale and are kept honest
//! rather than loosened:
//!
//! * Criterion 6 fits clique medians against log^2 n. Broadcast in a
//!   single-hop network completes at the first round in which the source
//!   transmits alone — no other node is ever active before that — so the
//!   median is a small constant independent of n and the two-sided
//!   residual-spread bound cannot hold. The log^2 n law is an upper
//!   envelope, not an observed growth rate, on this family.
//! * Criterion 7's second clause compares collision-detection medians
//!   against no-CD on width-8 layered graphs. The CD variant spends every
//!   odd round on beep waves and dilutes the general protocol to a 1/4
//!   share; with per-hop in-neighborhoods of size 8 the distance-aware
//!   protocol's gain is a small constant and cannot repay that 2x-4x
//!   overhead. Measured CD medians run 1.3x-2x above no-CD.

use blindcast::experiment::{run_experiment, run_sweep, ExperimentSpec};
use blindcast::fit::{fit_scaling, FitModel, FitPoint};
use blindcast::lemma::validate_single_tx_lemma;
use blindcast::quantiles;
use blindcast_core::broadcast::{run_broadcast_cd_directed, RunConfig, TrialRecord};
use blindcast_core::coins::{
    kahan_sum, pmf_y1, pmf_y4, sample_y1, sample_y4, Constants, GeneralDist, SemiShallowDist,
};
use blindcast_core::radio::{step, ModelVariant, NodeId, Reception};
use blindcast_core::topology::{bfs, from_shorthand, make_clique, make_grid, make_path, make_star, Network};
use blindcast_core::trace::NullTrace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

const BENCHMARKS: [&str; 6] = [
    "path:100",
    "star:64",
    "clique:32",
    "grid:10x10",
    "layered:32:8",
    "gnp:256:0.03",
];

fn pass(criterion: u32, name: &str, detail: String) {
    println!("criterion {criterion} ({name}): PASS - {detail}");
}

fn fail(criterion: u32, name: &str, detail: String) -> String {
    let line = format!("criterion {criterion} ({name}): FAIL - {detail}");
    println!("{line}");
    line
}

// ---------------------------------------------------------------------------
// 1. Reception semantics oracle
// ---------------------------------------------------------------------------

fn naive_reception(net: &Network, cd: bool, tx: &[NodeId], v: NodeId) -> Option<Reception> {
    if tx.contains(&v) {
        return None;
    }
    let senders: Vec<NodeId> = net
        .in_neighbors(v)
        .iter()
        .copied()
        .filter(|u| tx.contains(u))
        .collect();
    Some(match senders.len() {
        0 => Reception::Silence,
        1 => Reception::Message { from: senders[0] },
        _ if cd => Reception::Collision,
        _ => Reception::Silence,
    })
}

#[test]
fn criterion_1_reception_semantics() {
    let mut nets: Vec<Network> = Vec::new();
    for n in 1..=6u32 {
        nets.push(make_path(n).unwrap());
        nets.push(make_star(n).unwrap());
        nets.push(make_clique(n).unwrap());
    }
    nets.push(make_grid(2, 3).unwrap());
    nets.push(make_grid(3, 2).unwrap());
    let mut rng = ChaCha12Rng::seed_from_u64(61);
    for n in 2..=6u32 {
        for _ in 0..15 {
            let mut edges: Vec<(NodeId, NodeId)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.random::<f64>() < 0.4 {
                        edges.push((u, v));
                    }
                }
            }
            nets.push(Network::from_edges(n, true, 0, &edges).unwrap());
        }
    }

    let mut checked = 0u64;
    for net in &nets {
        let n = net.node_count();
        for mask in 0u32..(1 << n) {
            let tx: Vec<NodeId> = (0..n as NodeId).filter(|&v| mask >> v & 1 == 1).collect();
            for cd in [false, true] {
                let variant = ModelVariant {
                    collision_detection: cd,
                    directed: net.directed(),
                };
                let out = step(net, variant, &tx, 1);
                for v in 0..n as NodeId {
                    assert_eq!(
                        out.reception(v),
                        naive_reception(net, cd, &tx, v),
                        "node {v} tx {tx:?} cd {cd}"
                    );
                    checked += 1;
                }
            }
        }
    }
    pass(
        1,
        "reception semantics",
        format!("{checked} node outcomes matched the naive in-neighbor count across {} networks", nets.len()),
    );
}

// ---------------------------------------------------------------------------
// 2. Single-transmission bound
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_single_transmission_bound() {
    let report = validate_single_tx_lemma(1000, 100, 2000, 7);
    assert!(
        report.violations.is_empty(),
        "{}",
        fail(2, "single-transmission bound", format!("{} violations", report.violations.len()))
    );
    assert!(
        report.mc_mismatches.is_empty(),
        "{}",
        fail(2, "single-transmission bound", format!("{} Monte Carlo mismatches", report.mc_mismatches.len()))
    );
    pass(
        2,
        "single-transmission bound",
        format!(
            "1000 exact Poisson-binomial checks, zero violations, min margin {:.3e}",
            report.min_margin
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. Distribution fidelity
// ---------------------------------------------------------------------------

fn empirical_tv(pmf: impl Fn(u64) -> f64, support_max: u64, samples: &[u64]) -> f64 {
    let mut counts = vec![0u64; support_max as usize + 1];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let n = samples.len() as f64;
    (0..=support_max)
        .map(|y| (counts[y as usize] as f64 / n - pmf(y)).abs())
        .sum::<f64>()
        / 2.0
}

#[test]
fn criterion_3_distribution_fidelity() {
    const MASS_TOL: f64 = 1e-12;
    const SAMPLES: usize = 1_000_000;
    const TV_LIMIT: f64 = 0.01;

    // Exact mass accounting, including the mass at zero.
    for e in 1..=40u32 {
        let t = 1u64 << e;
        for c1 in [1.0, 60.0] {
            let k = libm::floor(libm::sqrt(t as f64) / c1) as u64;
            let mass = kahan_sum((0..=k).map(|y| pmf_y1(t, c1, y)));
            assert!((mass - 1.0).abs() < MASS_TOL, "y1 T=2^{e} c1={c1}: {mass}");
        }
        for c3 in [1.0, 2280.0 * 4.0] {
            let d = SemiShallowDist::new(t, c3);
            let mass = d.pmf(0) + kahan_sum((1..=d.support_max()).map(|y| d.pmf(y)));
            assert!((mass - 1.0).abs() < MASS_TOL, "y3 T=2^{e} c3={c3}: {mass}");
        }
    }
    let y2 = GeneralDist::new(1 << 16);
    let y2_mass = kahan_sum((0..=y2.y_cap()).map(|y| y2.pmf(y)));
    assert!((y2_mass - 1.0).abs() < MASS_TOL, "y2 mass {y2_mass}");
    for e in [1u32, 8, 16, 24] {
        let t = 1u64 << e;
        let mass = kahan_sum((1..=t).map(|y| pmf_y4(t, y)));
        assert!((mass - 1.0).abs() < MASS_TOL, "y4 T=2^{e}: {mass}");
    }

    // Empirical histograms at one million samples per distribution.
    let mut rng = ChaCha12Rng::seed_from_u64(303);
    let s1: Vec<u64> = (0..SAMPLES).map(|_| sample_y1(4096, 1.0, &mut rng)).collect();
    let tv1 = empirical_tv(|y| pmf_y1(4096, 1.0, y), 64, &s1);

    let s2: Vec<u64> = (0..SAMPLES).map(|_| y2.sample(&mut rng)).collect();
    let tv2 = empirical_tv(|y| y2.pmf(y), y2.y_cap(), &s2);

    let y3 = SemiShallowDist::new(1024, 1.0);
    let y3_sampler = y3.sampler();
    let s3: Vec<u64> = (0..SAMPLES).map(|_| y3_sampler.sample(&mut rng)).collect();
    let tv3 = empirical_tv(|y| y3.pmf(y), y3.support_max(), &s3);

    let s4: Vec<u64> = (0..SAMPLES).map(|_| sample_y4(256, &mut rng)).collect();
    let tv4 = empirical_tv(|y| pmf_y4(256, y), 256, &s4);

    for (name, tv) in [("y1", tv1), ("y2", tv2), ("y3", tv3), ("y4", tv4)] {
        assert!(
            tv < TV_LIMIT,
            "{}",
            fail(3, "distribution fidelity", format!("{name} total variation {tv:.5} >= {TV_LIMIT}"))
        );
    }
    pass(
        3,
        "distribution fidelity",
        format!(
            "masses 1 +/- 1e-12; TV at 1e6 samples: y1 {tv1:.4}, y2 {tv2:.4}, y3 {tv3:.4}, y4 {tv4:.4}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. Beep-wave exactness
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_beep_wave_exactness() {
    let mut checked = 0u64;
    for graph in BENCHMARKS {
        let net = from_shorthand(graph).unwrap();
        let truth = bfs(&net);
        for seed in 0..20u64 {
            let config = RunConfig::new(
                ModelVariant::cd(net.directed()),
                Constants::unit(4),
                1_000_000,
                seed,
            );
            let rec = run_broadcast_cd_directed(&net, &config, 0, &mut NullTrace).unwrap();
            let dists = rec.beep_distances.as_ref().unwrap();
            for (v, d) in dists.iter().enumerate() {
                assert_eq!(*d, Some(truth.dist[v]), "{graph} seed {seed}: node {v}");
                checked += 1;
            }
        }
    }
    pass(
        4,
        "beep-wave exactness",
        format!("{checked} node distances equal BFS across {} graphs x 20 seeds", BENCHMARKS.len()),
    );
}

// ---------------------------------------------------------------------------
// 5. Completion under no-CD
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_no_cd_completion() {
    let mut details = Vec::new();
    for graph in BENCHMARKS {
        let mut spec = ExperimentSpec::new(graph, false);
        spec.trials = 20;
        spec.master_seed = 42;
        spec.budget = 10_000_000;
        let out = run_experiment(&spec, None).unwrap();
        let row = &out.rows[0];
        assert!(
            row.completed >= 19,
            "{}",
            fail(5, "no-cd completion", format!("{graph}: {}/20 trials completed", row.completed))
        );
        details.push(format!("{graph} {}/20", row.completed));
    }

    // Degenerate single-node network completes at round 0.
    let mut spec = ExperimentSpec::new("path:1", false);
    spec.trials = 1;
    let out = run_experiment(&spec, None).unwrap();
    assert_eq!(out.records[0].completion_round, Some(0));
    details.push("path:1 at round 0".to_string());

    pass(5, "no-cd completion", details.join(", "));
}

// ---------------------------------------------------------------------------
// 6. Shallow regime scaling (expected FAIL at desk scale; see module docs)
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_shallow_regime_fit() {
    let specs: Vec<ExperimentSpec> = [16u32, 32, 64, 128, 256]
        .iter()
        .map(|n| {
            let mut s = ExperimentSpec::new(&format!("clique:{n}"), false);
            s.trials = 50;
            s.master_seed = 642;
            s
        })
        .collect();
    let out = run_sweep(&specs, None).unwrap();
    let points: Vec<FitPoint> = out
        .rows
        .iter()
        .map(|r| FitPoint {
            n: r.n,
            d: r.eccentricity as u64,
            median: r.quantiles.expect("cliques complete").median as f64,
        })
        .collect();
    let medians: Vec<f64> = points.iter().map(|p| p.median).collect();
    let report = fit_scaling(&points, FitModel::Log2N).unwrap();

    if report.spread < 2.0 {
        pass(
            6,
            "shallow regime fit",
            format!("medians {medians:?}, kappa {:.4}, spread {:.3}", report.kappa, report.spread),
        );
    } else {
        let line = fail(
            6,
            "shallow regime fit",
            format!(
                "medians {medians:?} are flat in n (single-hop broadcast ends at the source's first solo \
                 transmission), so the log^2 n fit has residual spread {:.3} >= 2; the quadratic-log law \
                 is an upper envelope, not an observable growth rate, on cliques",
                report.spread
            ),
        );
        panic!("{line}");
    }
}

// ---------------------------------------------------------------------------
// 7. Deep regime envelope and CD benefit (second clause expected FAIL)
// ---------------------------------------------------------------------------

fn layered_sweep(cd: bool) -> Vec<ExperimentSpec> {
    [16u32, 32, 64]
        .iter()
        .map(|d| {
            let mut s = ExperimentSpec::new(&format!("layered:{d}:8"), cd);
            s.trials = 20;
            s.master_seed = 742;
            s.budget = 1_000_000;
            s
        })
        .collect()
}

#[test]
fn criterion_7_deep_regime_envelope_and_cd_benefit() {
    let cd_out = run_sweep(&layered_sweep(true), None).unwrap();
    let nocd_out = run_sweep(&layered_sweep(false), None).unwrap();

    let points: Vec<FitPoint> = cd_out
        .rows
        .iter()
        .map(|r| FitPoint {
            n: r.n,
            d: r.eccentricity as u64,
            median: r.quantiles.expect("layered runs complete").median as f64,
        })
        .collect();
    let report = fit_scaling(&points, FitModel::DLogNdLogLogLog).unwrap();
    let cd_medians: Vec<u64> = cd_out.rows.iter().map(|r| r.quantiles.unwrap().median).collect();
    let nocd_medians: Vec<u64> = nocd_out.rows.iter().map(|r| r.quantiles.unwrap().median).collect();

    let envelope_ok = report.spread < 2.0;
    let cd_wins = cd_medians.iter().zip(&nocd_medians).all(|(c, n)| c <= n);

    if envelope_ok && cd_wins {
        pass(
            7,
            "deep regime",
            format!(
                "envelope spread {:.3}; cd medians {cd_medians:?} <= no-cd {nocd_medians:?}",
                report.spread
            ),
        );
    } else {
        let mut reasons = Vec::new();
        if envelope_ok {
            reasons.push(format!(
                "envelope fit holds (kappa {:.2}, spread {:.3})",
                report.kappa, report.spread
            ));
        } else {
            reasons.push(format!("envelope spread {:.3} >= 2", report.spread));
        }
        if !cd_wins {
            reasons.push(format!(
                "cd medians {cd_medians:?} exceed no-cd medians {nocd_medians:?}: beep interleaving \
                 halves throughput and the four-way protocol split dilutes the general protocol, \
                 which at width 8 is already near-optimal, so the distance-aware speedup cannot \
                 repay the overhead at these sizes"
            ));
        }
        let line = fail(7, "deep regime", reasons.join("; "));
        panic!("{line}");
    }
}

// ---------------------------------------------------------------------------
// 8. Determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_determinism() {
    let mut spec = ExperimentSpec::new("layered:16:8", true);
    spec.trials = 10;
    spec.master_seed = 842;
    spec.budget = 1_000_000;

    let serial = run_experiment(&spec, Some(1)).unwrap();
    let parallel = run_experiment(&spec, Some(4)).unwrap();
    let rerun = run_experiment(&spec, Some(4)).unwrap();

    assert_eq!(serial.csv(), parallel.csv(), "serial vs parallel CSV");
    assert_eq!(serial.jsonl(), parallel.jsonl(), "serial vs parallel JSONL");
    assert_eq!(parallel.csv(), rerun.csv(), "rerun CSV");
    assert_eq!(parallel.jsonl(), rerun.jsonl(), "rerun JSONL");

    let mut other_seed = spec.clone();
    other_seed.master_seed = 843;
    let different = run_experiment(&other_seed, Some(4)).unwrap();
    assert_ne!(different.jsonl(), serial.jsonl(), "seed change must show");

    pass(
        8,
        "determinism",
        format!(
            "byte-identical CSV ({} bytes) and JSONL ({} bytes) across serial, parallel, and rerun",
            serial.csv().len(),
            serial.jsonl().len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 9. CD ordering invariant
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_cd_ordering() {
    let mut checked = 0u64;
    for spec in layered_sweep(true) {
        let out = run_experiment(&spec, None).unwrap();
        let (_, net) = blindcast::experiment::resolve_graph(&spec.graph).unwrap();
        for rec in &out.records {
            checked += check_cd_ordering(rec, net.source());
        }
    }
    pass(
        9,
        "cd ordering",
        format!("distance_known strictly precedes first inform for {checked} node observations"),
    );
}

fn check_cd_ordering(rec: &TrialRecord, source: NodeId) -> u64 {
    let set_rounds = rec.distance_set_round.as_ref().expect("cd trial");
    let dists = rec.beep_distances.as_ref().expect("cd trial");
    let mut checked = 0u64;
    for v in 0..rec.first_informed_round.len() {
        if v == source as usize {
            continue;
        }
        let set = set_rounds[v].expect("beep wave covers the graph");
        let informed = rec.first_informed_round[v].expect("criterion 7 trials complete");
        assert!(
            set < informed,
            "node {v}: distance at round {set}, informed at {informed}"
        );
        assert_eq!(set, 2 * dists[v].unwrap() as u64 - 1);
        checked += 1;
    }
    checked
}

// ---------------------------------------------------------------------------
// Quantile oracle (supports the summary rows the criteria read)
// ---------------------------------------------------------------------------

#[test]
fn summary_quantiles_match_sort_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(4242);
    for _ in 0..200 {
        let len = rng.random_range(1..=60);
        let values: Vec<u64> = (0..len).map(|_| rng.random_range(0..10_000)).collect();
        let mut sorted = values.clone();
        sorted.sort_unstable();
        let q = quantiles::summarize(&values).unwrap();
        assert_eq!(q.min, sorted[0]);
        assert_eq!(q.max, sorted[len - 1]);
        assert_eq!(q.median, sorted[((len as u64 - 1) + 1) as usize / 2]);
    }
}
