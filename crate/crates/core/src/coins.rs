//! Shared randomness for the doubling framework.
//!
//! For every step `j` of an iteration of length `T`, the source draws a
//! protocol index `S[j]` uniformly from the active set and a global variable
//! `x[j]` from that protocol's distribution. Conceptually both are appended
//! to the source message so every active node sees the same pair; here they
//! are plain shared state. Active nodes convert `(S[j], x[j])` into a
//! transmission probability with [`transmit_prob`].
//!
//! Four distributions are implemented:
//!
//! * `Y1` (shallow): uniform weight `c1/sqrt(T)` on `1..=floor(sqrt(T)/c1)`,
//!   remaining mass on 0.
//! * `Y2` (general): `P(y) = 1/(3 y log^2 y)` for `y >= 1` under the clamped
//!   log convention, remaining mass on 0. Infinite support is truncated at a
//!   configurable cap with the tail mass folded into the cap.
//! * `Y3` (semi-shallow): a two-piece density over `1..=B` with remaining
//!   mass on 0; see [`SemiShallowDist`] for the normalization caveat.
//! * `Y4` (deep): uniform on `1..=T`.
//!
//! Throughout, `log x` means `max(log2 x, 1)` ([`log_conv`]), which keeps
//! every logarithm of a small quantity pinned at 1.

use alloc::vec::Vec;

use rand::Rng;

/// Default truncation cap for the general distribution's infinite support.
///
/// Beyond small `y` the induced transmission probability `2^-y` is far below
/// any event a simulation could observe, so folding the tail into the cap
/// changes nothing observable while keeping the sampler exact.
pub const DEFAULT_Y2_CAP: u64 = 1 << 16;

/// The clamped logarithm used by every formula in this crate:
/// `max(log2 x, 1)`.
///
/// Rejects non-positive inputs (panics): callers own the positivity of
/// their arguments.
pub fn log_conv(x: f64) -> f64 {
    assert!(x > 0.0, "log_conv requires a positive argument, got {x}");
    let l = libm::log2(x);
    if l > 1.0 {
        l
    } else {
        1.0
    }
}

/// Compensated (Kahan) summation. Mass checks in the 1e-12 range need it;
/// plain accumulation over 1e7 terms drifts to ~1e-9.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// One of the four transmission protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ProtocolId {
    Shallow,
    General,
    SemiShallow,
    Deep,
}

impl ProtocolId {
    /// Active set without collision detection (C = 2).
    pub const NO_CD: &'static [ProtocolId] = &[ProtocolId::Shallow, ProtocolId::General];

    /// Active set with collision detection (C = 4).
    pub const CD: &'static [ProtocolId] = &[
        ProtocolId::Shallow,
        ProtocolId::General,
        ProtocolId::SemiShallow,
        ProtocolId::Deep,
    ];

    pub fn active_set(collision_detection: bool) -> &'static [ProtocolId] {
        if collision_detection {
            Self::CD
        } else {
            Self::NO_CD
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProtocolId::Shallow => "shallow",
            ProtocolId::General => "general",
            ProtocolId::SemiShallow => "semi-shallow",
            ProtocolId::Deep => "deep",
        }
    }
}

/// Protocol constants. `protocols` is the size C of the active set; the
/// remaining fields scale the distribution supports and the deep exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constants {
    pub protocols: u32,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Constants {
    /// All scaling constants set to 1. The analysis constants below make
    /// desk-scale runs astronomically long; unit constants preserve the
    /// structure of every distribution while keeping runs observable.
    pub fn unit(protocols: u32) -> Self {
        Constants {
            protocols,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
        }
    }

    /// The constants used by the correctness analysis: c1 = 30C,
    /// c2 = 3500C, c3 = 2280C, c4 = 3840C.
    pub fn analysis(protocols: u32) -> Self {
        let c = protocols as f64;
        Constants {
            protocols,
            c1: 30.0 * c,
            c2: 3500.0 * c,
            c3: 2280.0 * c,
            c4: 3840.0 * c,
        }
    }
}

impl core::fmt::Display for Constants {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "C={} c1={} c2={} c3={} c4={}",
            self.protocols, self.c1, self.c2, self.c3, self.c4
        )
    }
}

// ---------------------------------------------------------------------------
// Y1: shallow
// ---------------------------------------------------------------------------

fn y1_support(t_len: u64, c1: f64) -> (u64, f64) {
    let sq = libm::sqrt(t_len as f64);
    let k = libm::floor(sq / c1);
    let k = if k < 0.0 { 0 } else { k as u64 };
    (k, c1 / sq)
}

/// PMF of the shallow distribution: weight `c1/sqrt(T)` on each
/// `y in 1..=floor(sqrt(T)/c1)`, remaining mass on 0.
pub fn pmf_y1(t_len: u64, c1: f64, y: u64) -> f64 {
    let (k, q) = y1_support(t_len, c1);
    if y == 0 {
        let used = k as f64 * q;
        if used >= 1.0 {
            0.0
        } else {
            1.0 - used
        }
    } else if y <= k {
        q
    } else {
        0.0
    }
}

/// Draw from the shallow distribution. If `c1 > sqrt(T)` the support is
/// empty and 0 is returned always.
pub fn sample_y1<R: Rng + ?Sized>(t_len: u64, c1: f64, rng: &mut R) -> u64 {
    let (k, q) = y1_support(t_len, c1);
    if k == 0 {
        return 0;
    }
    let u: f64 = rng.random();
    let used = k as f64 * q;
    if u < used {
        let idx = libm::floor(u / q) as u64;
        1 + idx.min(k - 1)
    } else {
        0
    }
}

// ---------------------------------------------------------------------------
// Y2: general
// ---------------------------------------------------------------------------

fn y2_term(y: u64) -> f64 {
    let yf = y as f64;
    let l = log_conv(yf);
    1.0 / (3.0 * yf * l * l)
}

/// Mass of `sum_{y > cap} 1/(3 y log2^2 y)`, via the integral with
/// Euler-Maclaurin corrections. For caps >= 16 the neglected terms are
/// below 1e-15.
fn y2_tail_beyond(cap: u64) -> f64 {
    let b = (cap + 1) as f64;
    let ln2 = core::f64::consts::LN_2;
    let u = libm::log2(b);
    let integral = ln2 / (3.0 * u);
    let f_b = 1.0 / (3.0 * b * u * u);
    // f'(b) = -(1/3) b^-2 u^-2 (1 + 2/(u ln 2))
    let fp_b = -(1.0 / 3.0) / (b * b * u * u) * (1.0 + 2.0 / (u * ln2));
    integral + f_b / 2.0 - fp_b / 12.0
}

/// The general distribution `P(y) = 1/(3 y log^2 y)` truncated at `y_cap`,
/// with the tail mass folded into `y_cap` and the leftover mass on 0.
///
/// Sampling uses a precomputed inverse-CDF table; build once and share
/// read-only across trials.
#[derive(Debug, Clone)]
pub struct GeneralDist {
    y_cap: u64,
    p_zero: f64,
    tail_fold: f64,
    cdf: Vec<f64>,
}

impl GeneralDist {
    pub fn new(y_cap: u64) -> Self {
        assert!(y_cap >= 2, "y2 truncation cap must be at least 2");
        let tail_fold = y2_tail_beyond(y_cap);
        let positive_mass = kahan_sum((1..=y_cap).map(y2_term)) + tail_fold;
        debug_assert!(positive_mass < 1.0);
        let p_zero = (1.0 - positive_mass).max(0.0);

        let mut cdf = Vec::with_capacity(y_cap as usize + 1);
        let mut running = p_zero;
        let mut comp = 0.0f64;
        cdf.push(running);
        for y in 1..=y_cap {
            let mut term = y2_term(y);
            if y == y_cap {
                term += tail_fold;
            }
            let adj = term - comp;
            let t = running + adj;
            comp = (t - running) - adj;
            running = t;
            cdf.push(running);
        }
        GeneralDist {
            y_cap,
            p_zero,
            tail_fold,
            cdf,
        }
    }

    pub fn y_cap(&self) -> u64 {
        self.y_cap
    }

    pub fn pmf(&self, y: u64) -> f64 {
        if y == 0 {
            self.p_zero
        } else if y < self.y_cap {
            y2_term(y)
        } else if y == self.y_cap {
            y2_term(y) + self.tail_fold
        } else {
            0.0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u) as u64;
        idx.min(self.y_cap)
    }
}

/// Closed-form PMF of the general distribution, matching
/// [`GeneralDist::pmf`]. `pmf_y2(0, cap)` costs a pass over the support.
pub fn pmf_y2(y: u64, y_cap: u64) -> f64 {
    if y == 0 {
        let positive = kahan_sum((1..=y_cap).map(y2_term)) + y2_tail_beyond(y_cap);
        (1.0 - positive).max(0.0)
    } else if y < y_cap {
        y2_term(y)
    } else if y == y_cap {
        y2_term(y) + y2_tail_beyond(y_cap)
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Y3: semi-shallow
// ---------------------------------------------------------------------------

/// The semi-shallow two-piece distribution for one `(T, c3)` pair.
///
/// Piece one puts weight `sqrt(c3^2 log^2 T loglog T / 2T)` on each
/// `y in 1..=A`; piece two puts `1/(3 y loglog T)` on `A < y <= B`, where
/// `A` and `B` are the floors of `sqrt(T / (c3^2 log^2 T loglog T))` and
/// `sqrt(T log^2 T / (c3^2 loglog T))`. Remaining mass goes to 0.
///
/// For many `(T, c3)` the raw pieces sum to slightly more than 1 (up to
/// ~1.17); the written-out mass bound for piece two is loose. When that
/// happens the whole density is scaled down by the raw mass so that it is a
/// genuine distribution with no mass left at 0. [`Self::normalization`]
/// exposes the factor; 1.0 means the raw pieces were already valid.
#[derive(Debug, Clone)]
pub struct SemiShallowDist {
    t_len: u64,
    loglog_t: f64,
    a: u64,
    b: u64,
    q1: f64,
    norm: f64,
    p_zero: f64,
}

impl SemiShallowDist {
    pub fn new(t_len: u64, c3: f64) -> Self {
        assert!(t_len >= 2, "semi-shallow needs T >= 2");
        let t = t_len as f64;
        let l = log_conv(t);
        let ll = log_conv(l);
        let denom = c3 * c3 * l * l * ll;
        let q1 = libm::sqrt(denom / (2.0 * t));
        let mut a = libm::floor(libm::sqrt(t / denom)) as u64;
        if q1 > 1.0 {
            // Empty first piece: a single entry would already overshoot.
            a = 0;
        }
        let b = libm::floor(libm::sqrt(t * l * l / (c3 * c3 * ll))) as u64;
        let b = b.max(a);

        let piece1 = a as f64 * q1;
        let piece2 = kahan_sum((a + 1..=b).map(|y| 1.0 / (3.0 * y as f64 * ll)));
        let raw = piece1 + piece2;
        let norm = if raw > 1.0 { raw } else { 1.0 };
        let p_zero = (1.0 - raw / norm).max(0.0);
        SemiShallowDist {
            t_len,
            loglog_t: ll,
            a,
            b,
            q1,
            norm,
            p_zero,
        }
    }

    pub fn t_len(&self) -> u64 {
        self.t_len
    }

    /// Largest value with positive mass (0 when both pieces are empty).
    pub fn support_max(&self) -> u64 {
        self.b
    }

    pub fn piece_boundary(&self) -> u64 {
        self.a
    }

    /// Factor the raw pieces were divided by; 1.0 when they already summed
    /// to at most 1.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn pmf(&self, y: u64) -> f64 {
        if y == 0 {
            self.p_zero
        } else if y <= self.a {
            self.q1 / self.norm
        } else if y <= self.b {
            1.0 / (3.0 * y as f64 * self.loglog_t * self.norm)
        } else {
            0.0
        }
    }

    /// Build the inverse-CDF table for sampling. Table size is `B + 1`; at
    /// in-simulation horizons (`T <= 2^24`) that stays below ~50k entries.
    pub fn sampler(&self) -> SemiShallowSampler {
        let mut cdf = Vec::with_capacity(self.b as usize + 1);
        let mut running = self.p_zero;
        let mut comp = 0.0f64;
        cdf.push(running);
        for y in 1..=self.b {
            let term = self.pmf(y);
            let adj = term - comp;
            let t = running + adj;
            comp = (t - running) - adj;
            running = t;
            cdf.push(running);
        }
        SemiShallowSampler { b: self.b, cdf }
    }
}

/// Inverse-CDF sampler for [`SemiShallowDist`].
#[derive(Debug, Clone)]
pub struct SemiShallowSampler {
    b: u64,
    cdf: Vec<f64>,
}

impl SemiShallowSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u) as u64;
        idx.min(self.b)
    }
}

/// Convenience wrappers matching the sampler naming of the other
/// distributions.
pub fn pmf_y3(t_len: u64, c3: f64, y: u64) -> f64 {
    SemiShallowDist::new(t_len, c3).pmf(y)
}

pub fn sample_y3<R: Rng + ?Sized>(t_len: u64, c3: f64, rng: &mut R) -> u64 {
    SemiShallowDist::new(t_len, c3).sampler().sample(rng)
}

// ---------------------------------------------------------------------------
// Y4: deep
// ---------------------------------------------------------------------------

/// PMF of the deep distribution: uniform on `1..=T`.
pub fn pmf_y4(t_len: u64, y: u64) -> f64 {
    if y >= 1 && y <= t_len {
        1.0 / t_len as f64
    } else {
        0.0
    }
}

pub fn sample_y4<R: Rng + ?Sized>(t_len: u64, rng: &mut R) -> u64 {
    rng.random_range(1..=t_len)
}

// ---------------------------------------------------------------------------
// Transmission probability
// ---------------------------------------------------------------------------

/// Probability with which an active node transmits given the shared pair
/// `(protocol, x)`, the horizon `T`, and (for the deep protocol) its hop
/// distance from the source.
///
/// Shallow, general and semi-shallow all use `2^-x`. Deep uses
/// `2^(-x / (c4 * d * loglog(T/d)))` with the distance clamped to at least 1:
/// the source sits at distance 0, where the formula is undefined, and the
/// clamp keeps it transmitting with a valid probability.
///
/// The result is clamped into `(0, 1]`; `2^-x` underflows to zero for
/// x beyond ~1074 and a sub-1e-300 floor is observationally identical.
pub fn transmit_prob(protocol: ProtocolId, t_len: u64, x: u64, dist: u32, constants: &Constants) -> f64 {
    let p = match protocol {
        ProtocolId::Shallow | ProtocolId::General | ProtocolId::SemiShallow => {
            libm::exp2(-(x as f64))
        }
        ProtocolId::Deep => {
            let d = dist.max(1) as f64;
            let ratio = t_len as f64 / d;
            let denom = constants.c4 * d * log_conv(log_conv(ratio));
            libm::exp2(-(x as f64) / denom)
        }
    };
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

// ---------------------------------------------------------------------------
// Iteration randomness
// ---------------------------------------------------------------------------

/// The source's shared coins for one doubling iteration: protocol sequence
/// and global variables, both of length `T = 2^t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRandomness {
    pub t: u32,
    pub steps: u64,
    pub seq: Vec<ProtocolId>,
    pub xs: Vec<u64>,
}

/// Uniform iid protocol sequence over the active set.
pub fn sample_sequence<R: Rng + ?Sized>(
    t_len: u64,
    active: &[ProtocolId],
    rng: &mut R,
) -> Vec<ProtocolId> {
    assert!(!active.is_empty());
    (0..t_len)
        .map(|_| active[rng.random_range(0..active.len())])
        .collect()
}

/// Per-iteration coin source: draws `(S[j], x[j])` pairs in step order.
///
/// Engines stream pairs one step at a time so that memory stays flat and a
/// budget-truncated run consumes exactly the prefix of the stream a full
/// run would.
pub struct CoinSource<'a> {
    t_len: u64,
    active: &'static [ProtocolId],
    constants: &'a Constants,
    y2: &'a GeneralDist,
    y3: Option<SemiShallowSampler>,
}

impl<'a> CoinSource<'a> {
    pub fn new(t: u32, collision_detection: bool, constants: &'a Constants, y2: &'a GeneralDist) -> Self {
        let t_len = 1u64 << t;
        let active = ProtocolId::active_set(collision_detection);
        let y3 = if active.contains(&ProtocolId::SemiShallow) && t_len >= 2 {
            Some(SemiShallowDist::new(t_len, constants.c3).sampler())
        } else {
            None
        };
        CoinSource {
            t_len,
            active,
            constants,
            y2,
            y3,
        }
    }

    pub fn t_len(&self) -> u64 {
        self.t_len
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (ProtocolId, u64) {
        let proto = self.active[rng.random_range(0..self.active.len())];
        let x = match proto {
            ProtocolId::Shallow => sample_y1(self.t_len, self.constants.c1, rng),
            ProtocolId::General => self.y2.sample(rng),
            ProtocolId::SemiShallow => match &self.y3 {
                Some(s) => s.sample(rng),
                // T = 1 has no semi-shallow table; the distribution for
                // T < 2 carries no positive support anyway.
                None => 0,
            },
            ProtocolId::Deep => sample_y4(self.t_len, rng),
        };
        (proto, x)
    }
}

/// Materialize a whole iteration's coins, in the same stream order the
/// engines consume them.
pub fn sample_iteration<R: Rng + ?Sized>(
    t: u32,
    collision_detection: bool,
    constants: &Constants,
    y2: &GeneralDist,
    rng: &mut R,
) -> IterationRandomness {
    let source = CoinSource::new(t, collision_detection, constants, y2);
    let steps = source.t_len();
    let mut seq = Vec::with_capacity(steps as usize);
    let mut xs = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let (s, x) = source.draw(rng);
        seq.push(s);
        xs.push(x);
    }
    IterationRandomness { t, steps, seq, xs }
}

// ---------------------------------------------------------------------------
// Poisson-binomial kernel
// ---------------------------------------------------------------------------

/// Exact PMF of the number of successes among independent non-identical
/// Bernoulli trials, by the O(n^2) convolution recurrence.
pub fn poisson_binomial_pmf(ps: &[f64]) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(ps.len() + 1);
    pmf.push(1.0);
    for (i, &p) in ps.iter().enumerate() {
        debug_assert!((0.0..=1.0).contains(&p));
        pmf.push(0.0);
        for k in (0..=i + 1).rev() {
            let stay = pmf[k] * (1.0 - p);
            let up = if k > 0 { pmf[k - 1] * p } else { 0.0 };
            pmf[k] = stay + up;
        }
    }
    pmf
}

/// Exact probability that exactly one trial succeeds.
pub fn prob_exactly_one(ps: &[f64]) -> f64 {
    if ps.is_empty() {
        return 0.0;
    }
    poisson_binomial_pmf(ps)[1]
}

/// The hitting lower bound `f * 4^-f` with `f = sum(ps)`, valid whenever
/// every entry is at most 1/2.
pub fn single_hit_bound(ps: &[f64]) -> f64 {
    let f = kahan_sum(ps.iter().copied());
    f * libm::exp2(-2.0 * f)
}
