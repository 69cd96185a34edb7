//! Least-squares scaling fits against the asymptotic envelopes.
//!
//! Fits are directional evidence only: the single free constant kappa is
//! recovered by least squares and the report carries the spread of the
//! per-point residual ratios, which is what the checks bound.

use blindcast_core::coins::log_conv;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// D * log(n/D)
    DLogNd,
    /// log^2 n
    Log2N,
    /// D * log(n/D) * logloglog(n/D)
    DLogNdLogLogLog,
}

impl FitModel {
    pub fn value(&self, n: u64, d: u64) -> f64 {
        let n = n as f64;
        let d = (d as f64).max(1.0);
        match self {
            FitModel::DLogNd => d * log_conv(n / d),
            FitModel::Log2N => {
                let l = log_conv(n);
                l * l
            }
            FitModel::DLogNdLogLogLog => d * log_conv(n / d) * log_conv(log_conv(log_conv(n / d))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FitModel::DLogNd => "dlognd",
            FitModel::Log2N => "log2n",
            FitModel::DLogNdLogLogLog => "dlognd-logloglog",
        }
    }
}

impl std::str::FromStr for FitModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dlognd" => Ok(FitModel::DLogNd),
            "log2n" => Ok(FitModel::Log2N),
            "dlognd-logloglog" => Ok(FitModel::DLogNdLogLogLog),
            other => Err(format!(
                "unknown fit model {other:?} (expected dlognd, log2n, or dlognd-logloglog)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub n: u64,
    pub d: u64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: FitModel,
    pub kappa: f64,
    /// Per-point `median / (kappa * model)`.
    pub ratios: Vec<f64>,
    /// max ratio / min ratio.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("scaling fit needs at least two sweep points, got {0}")]
    DegenerateSweep(usize),
    #[error("medians must be positive for a ratio fit")]
    NonPositiveMedian,
}

pub fn fit_scaling(points: &[FitPoint], model: FitModel) -> Result<FitReport, FitError> {
    if points.len() < 2 {
        return Err(FitError::DegenerateSweep(points.len()));
    }
    if points.iter().any(|p| p.median <= 0.0) {
        return Err(FitError::NonPositiveMedian);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for p in points {
        let m = model.value(p.n, p.d);
        num += p.median * m;
        den += m * m;
    }
    let kappa = num / den;
    let ratios: Vec<f64> = points
        .iter()
        .map(|p| p.median / (kappa * model.value(p.n, p.d)))
        .collect();
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
        / ratios.iter().cloned().fold(f64::MAX, f64::min);
    Ok(FitReport {
        model,
        kappa,
        ratios,
        spread,
    })
}
