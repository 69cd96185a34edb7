//! Validation suite for the single-transmission hitting bound.
//!
//! For independent 0/1 variables with success probabilities `p_i <= 1/2`
//! and `f = sum p_i`, the probability that exactly one fires is at least
//! `f * 4^-f`. The suite draws random probability vectors, computes the
//! exact probability with the Poisson-binomial recurrence, checks the
//! bound, and cross-checks the exact value against Monte Carlo at 4 sigma.

use blindcast_core::coins::{kahan_sum, poisson_binomial_pmf, single_hit_bound};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct LemmaViolation {
    pub vector_index: usize,
    pub probabilities: Vec<f64>,
    pub exact: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct McMismatch {
    pub vector_index: usize,
    pub exact: f64,
    pub empirical: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub vectors: usize,
    pub mc_samples_per_vector: usize,
    pub violations: Vec<LemmaViolation>,
    pub mc_mismatches: Vec<McMismatch>,
    /// Smallest `exact - bound` margin seen; the bound's headroom.
    pub min_margin: f64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.mc_mismatches.is_empty()
    }
}

/// Run `vectors` random probability vectors of length `1..=max_len` with
/// entries below 1/2, exact check plus Monte Carlo cross-check.
pub fn validate_single_tx_lemma(
    vectors: usize,
    max_len: usize,
    mc_samples: usize,
    seed: u64,
) -> LemmaReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut report = LemmaReport {
        vectors,
        mc_samples_per_vector: mc_samples,
        violations: Vec::new(),
        mc_mismatches: Vec::new(),
        min_margin: f64::MAX,
    };

    for vector_index in 0..vectors {
        let len = rng.random_range(1..=max_len);
        let ps: Vec<f64> = (0..len).map(|_| 0.5 * rng.random::<f64>()).collect();

        let exact = poisson_binomial_pmf(&ps)[1];
        let bound = single_hit_bound(&ps);
        report.min_margin = report.min_margin.min(exact - bound);
        if exact < bound {
            report.violations.push(LemmaViolation {
                vector_index,
                probabilities: ps.clone(),
                exact,
                bound,
            });
        }

        if mc_samples > 0 {
            let mut hits = 0usize;
            for _ in 0..mc_samples {
                let fired = ps.iter().filter(|&&p| rng.random::<f64>() < p).count();
                if fired == 1 {
                    hits += 1;
                }
            }
            let empirical = hits as f64 / mc_samples as f64;
            let sigma = (exact * (1.0 - exact) / mc_samples as f64).sqrt();
            // 4 sigma, plus a six-count absolute floor: for tiny exact
            // probabilities the hit count is Poisson and the Gaussian band
            // is narrower than a single observed hit.
            let tolerance = 4.0 * sigma + 6.0 / mc_samples as f64;
            if (empirical - exact).abs() > tolerance {
                report.mc_mismatches.push(McMismatch {
                    vector_index,
                    exact,
                    empirical,
                    tolerance,
                });
            }
        }
    }
    report
}

/// Exact expectation `f = sum p_i` of a vector, exposed for reporting.
pub fn vector_mass(ps: &[f64]) -> f64 {
    kahan_sum(ps.iter().copied())
}
