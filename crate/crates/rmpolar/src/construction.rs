//! Code construction: bit-channel reliabilities and information sets.
//!
//! Reliabilities come from Gaussian-approximation density evolution of
//! the mean channel LLR. The Polar flavor takes the most reliable
//! positions outright; the RM-Polar flavor restricts the candidate pool
//! to rows of `F^{⊗n}` whose Hamming weight clears a threshold, which
//! raises the code's minimum distance.

use serde::{Deserialize, Serialize};

use crate::gf2::row_weight;
use crate::{Error, Result};

/// Information-set selection flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeFlavor {
    /// Top positions by reliability alone.
    Polar,
    /// Top positions by reliability among rows with weight at or above
    /// the resolved threshold.
    RmPolar,
}

impl std::fmt::Display for CodeFlavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodeFlavor::Polar => write!(f, "polar"),
            CodeFlavor::RmPolar => write!(f, "rm-polar"),
        }
    }
}

/// Where the pre-transformation matrix comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TSource {
    /// No pre-transformation.
    Identity,
    /// Bernoulli strict-upper entries from a seeded stream.
    SeededRandom { seed: u64, density: f64 },
}

/// RM-Polar row-weight threshold: resolved automatically or user-pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightThreshold {
    Auto,
    Fixed(u64),
}

/// Everything needed to reproduce one code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    /// Block length `N`, a power of two (at least 2).
    pub n: usize,
    /// Payload bits, CRC excluded.
    pub k: usize,
    /// CRC bits appended to the payload; 0 disables the CRC.
    #[serde(default)]
    pub k_crc: usize,
    pub flavor: CodeFlavor,
    /// Construction design SNR in dB, read as Eb/No against the total
    /// rate `(k + k_crc)/n`; the GA start mean is `4·R·10^(snr/10)`.
    #[serde(default = "default_design_snr_db")]
    pub design_snr_db: f64,
    #[serde(default = "default_weight_threshold")]
    pub weight_threshold: WeightThreshold,
    #[serde(default = "default_t_source")]
    pub t_source: TSource,
    /// CRC generator with explicit leading coefficient; `None` picks the
    /// stock polynomial for `k_crc`.
    #[serde(default)]
    pub crc_generator: Option<u32>,
}

fn default_design_snr_db() -> f64 {
    DEFAULT_DESIGN_SNR_DB
}

fn default_weight_threshold() -> WeightThreshold {
    WeightThreshold::Auto
}

fn default_t_source() -> TSource {
    TSource::Identity
}

/// Shipped construction design SNR (Eb/No dB against the total rate).
pub const DEFAULT_DESIGN_SNR_DB: f64 = 1.0;

impl CodeSpec {
    pub fn new(n: usize, k: usize, k_crc: usize, flavor: CodeFlavor) -> Self {
        Self {
            n,
            k,
            k_crc,
            flavor,
            design_snr_db: DEFAULT_DESIGN_SNR_DB,
            weight_threshold: WeightThreshold::Auto,
            t_source: TSource::Identity,
            crc_generator: None,
        }
    }

    pub fn with_design_snr_db(mut self, snr: f64) -> Self {
        self.design_snr_db = snr;
        self
    }

    pub fn with_t_source(mut self, t: TSource) -> Self {
        self.t_source = t;
        self
    }

    pub fn with_weight_threshold(mut self, w: WeightThreshold) -> Self {
        self.weight_threshold = w;
        self
    }

    pub fn with_crc_generator(mut self, g: u32) -> Self {
        self.crc_generator = Some(g);
        self
    }

    /// Information plus CRC bits.
    pub fn k_total(&self) -> usize {
        self.k + self.k_crc
    }

    /// `log2(n)`.
    pub fn stages(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    /// Payload rate `k/n`.
    pub fn rate_payload(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Occupied-position rate `(k + k_crc)/n`.
    pub fn rate_total(&self) -> f64 {
        self.k_total() as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 2 {
            return Err(Error::Construction(format!(
                "block length {} is not a power of two >= 2",
                self.n
            )));
        }
        if self.k_total() == 0 || self.k_total() > self.n {
            return Err(Error::Construction(format!(
                "k + k_crc = {} outside 1..={}",
                self.k_total(),
                self.n
            )));
        }
        if !self.design_snr_db.is_finite() {
            return Err(Error::Construction("design SNR must be finite".into()));
        }
        if let TSource::SeededRandom { density, .. } = self.t_source {
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::Construction(format!(
                    "pre-transform density {density} outside [0, 1]"
                )));
            }
        }
        if let WeightThreshold::Fixed(w) = self.weight_threshold {
            if w == 0 {
                return Err(Error::Construction("weight threshold must be positive".into()));
            }
        }
        Ok(())
    }
}

/// The frozen/information partition of the `n` positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoSet {
    /// Information positions, ascending. Size `k + k_crc`.
    pub info_positions: Vec<u32>,
    /// Complement of `info_positions`, ascending.
    pub frozen_positions: Vec<u32>,
    /// All positions from least to most reliable.
    pub reliability_rank: Vec<u32>,
    /// Resolved row-weight threshold (RM-Polar only).
    pub threshold: Option<u64>,
}

impl InfoSet {
    /// Smallest `F^{⊗n}` row weight over the information positions.
    pub fn min_info_row_weight(&self, stages: usize) -> u64 {
        self.info_positions
            .iter()
            .map(|&i| row_weight(stages, i as usize).expect("in-range row"))
            .min()
            .unwrap_or(0)
    }
}

/// Positions of `0..n` sorted from least to most reliable under GA
/// density evolution. `design_snr_db` here is the symbol SNR Es/N0 in dB
/// (start mean `4·10^(snr/10)`); ties rank the lower index as more
/// reliable. Deterministic for fixed inputs.
pub fn reliability_order(n: usize, design_snr_db: f64) -> Result<Vec<u32>> {
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::Construction(format!(
            "block length {n} is not a power of two >= 2"
        )));
    }
    let mu0 = 4.0 * 10f64.powf(design_snr_db / 10.0);
    let chans = ga_evolve(n, mu0);
    let mut order: Vec<u32> = (0..n as u32).collect();
    // Ascending reliability. ln_success separates the degraded tail
    // exactly; the mean breaks its saturation ties at the reliable end;
    // remaining exact ties rank the lower index as more reliable (later
    // in ascending order).
    order.sort_by(|&a, &b| {
        let (ca, cb) = (chans[a as usize], chans[b as usize]);
        ca.ln_success
            .total_cmp(&cb.ln_success)
            .then(ca.mean.total_cmp(&cb.mean))
            .then(b.cmp(&a))
    });
    Ok(order)
}

/// GA evolution of the mean LLR of every bit channel, natural order.
pub fn ga_llr_means(n: usize, initial_mean: f64) -> Vec<f64> {
    ga_evolve(n, initial_mean).iter().map(|c| c.mean).collect()
}

/// One bit channel's GA state in two redundant coordinates: the LLR mean
/// and `ln(1 - φ(mean))`. The check branch squares `1 - φ` exactly, so
/// carrying its log keeps deeply degraded channels distinguishable; the
/// mean stays accurate at the upgraded end where `1 - φ` rounds to 1.
#[derive(Clone, Copy)]
struct GaChannel {
    mean: f64,
    ln_success: f64,
}

/// Tracks every bit channel through the polarization stages in natural
/// order: the split closest to the channel is the most significant index
/// bit; a clear bit takes the degraded (check) transform, a set bit the
/// upgraded one with `mu⁺ = 2mu`.
fn ga_evolve(n: usize, initial_mean: f64) -> Vec<GaChannel> {
    let stages = n.trailing_zeros() as usize;
    let init = GaChannel {
        mean: initial_mean,
        ln_success: ln_q_from_mean(initial_mean),
    };
    let mut ch = vec![init; n];
    for stage in (0..stages).rev() {
        let half = 1usize << stage;
        let mut next = vec![init; n];
        for i in 0..n {
            let j = i ^ half;
            if i < j {
                next[i] = ga_check(ch[i]);
                next[j] = ga_variable(ch[i]);
            }
        }
        ch = next;
    }
    ch
}

/// Upgraded branch: exact in the mean, `ln(1-φ)` recomputed from it.
fn ga_variable(c: GaChannel) -> GaChannel {
    let mean = 2.0 * c.mean;
    GaChannel {
        mean,
        ln_success: ln_q_from_mean(mean),
    }
}

/// Degraded branch: `1 - φ(mu⁻) = (1 - φ(mu))²`, exact in log domain.
fn ga_check(c: GaChannel) -> GaChannel {
    let ln_success = 2.0 * c.ln_success;
    GaChannel {
        mean: mean_from_ln_q(ln_success),
        ln_success,
    }
}

/// Seam between the small-argument quadratic and the mid fit.
const PHI_SMALL: f64 = 0.2;
/// Seam between the mid fit and the asymptotic piece.
const PHI_LARGE: f64 = 10.0;

/// `ln(1 - φ(x))` under a three-piece φ: the Taylor quadratic
/// `φ ≈ 1 - x/2 + x²/4` below 0.2, the usual mid-range exponential fit,
/// and the `sqrt(π/x)·e^(-x/4)` asymptotic beyond 10.
fn ln_q_from_mean(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else if x < PHI_SMALL {
        // q = x/2 - x²/4, accurate however small x gets.
        (x / 2.0).ln() + (-x / 2.0).ln_1p()
    } else if x < PHI_LARGE {
        (-ln_phi_mid(x).exp()).ln_1p()
    } else {
        let phi = ln_phi_large(x).exp();
        (-phi).ln_1p()
    }
}

/// Inverse of [`ln_q_from_mean`], branch-dispatched on the seam images.
fn mean_from_ln_q(ln_q: f64) -> f64 {
    if ln_q == f64::NEG_INFINITY {
        return 0.0;
    }
    let q_small = ln_q_from_mean(PHI_SMALL);
    let q_large = ln_q_from_mean(PHI_LARGE);
    if ln_q <= q_small {
        // Quadratic root of q = x/2 - x²/4.
        let q = ln_q.exp();
        1.0 - (1.0 - 4.0 * q).max(0.0).sqrt()
    } else if ln_q <= q_large {
        let ln_phi = (-ln_q.exp()).ln_1p();
        ((0.0218 - ln_phi) / 0.4527).powf(1.0 / 0.86)
    } else {
        // 1 - q is tiny; recover ln φ without cancellation.
        let phi = -ln_q.exp_m1();
        if phi <= 0.0 {
            return f64::INFINITY;
        }
        invert_ln_phi_large(phi.ln())
    }
}

/// Mid-range `ln φ(x)` fit, `0.2 <= x < 10`.
fn ln_phi_mid(x: f64) -> f64 {
    -0.4527 * x.powf(0.86) + 0.0218
}

/// Asymptotic `ln φ(x)`, `x >= 10`.
fn ln_phi_large(x: f64) -> f64 {
    0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (-10.0 / (7.0 * x)).ln_1p()
}

/// Bisection inverse of [`ln_phi_large`] on `[10, ∞)`.
fn invert_ln_phi_large(target: f64) -> f64 {
    let mut lo = PHI_LARGE;
    let mut hi = (-4.0 * target).max(2.0 * PHI_LARGE);
    while ln_phi_large(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi_large(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Resolves the RM-Polar row-weight threshold.
///
/// `Auto` picks the largest power of two `w` for which strictly more than
/// `k + k_crc` rows weigh at least `w`, so the reliability ranking keeps
/// a say in the selection; when no `w` qualifies (`k + k_crc = n`) every
/// row is needed and the threshold collapses to 1.
pub fn resolved_weight_threshold(spec: &CodeSpec) -> Result<u64> {
    spec.validate()?;
    match spec.weight_threshold {
        WeightThreshold::Fixed(w) => Ok(w),
        WeightThreshold::Auto => {
            let stages = spec.stages();
            let k_total = spec.k_total() as u64;
            for t in (1..=stages).rev() {
                let count: u64 = (t..=stages)
                    .map(|j| binomial(stages as u64, j as u64))
                    .sum();
                if count > k_total {
                    return Ok(1u64 << t);
                }
            }
            Ok(1)
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Builds the frozen/information partition for `spec`.
///
/// The code's Eb/No-style design SNR is mapped to the symbol SNR through
/// the total rate before calling [`reliability_order`].
pub fn select_info_set(spec: &CodeSpec) -> Result<InfoSet> {
    spec.validate()?;
    let es_db = spec.design_snr_db + 10.0 * spec.rate_total().log10();
    let rank = reliability_order(spec.n, es_db)?;
    let k_total = spec.k_total();
    let stages = spec.stages();

    let (selected, threshold): (Vec<u32>, Option<u64>) = match spec.flavor {
        CodeFlavor::Polar => (rank[spec.n - k_total..].to_vec(), None),
        CodeFlavor::RmPolar => {
            let w = resolved_weight_threshold(spec)?;
            let pool: Vec<u32> = rank
                .iter()
                .copied()
                .filter(|&i| row_weight(stages, i as usize).expect("in-range row") >= w)
                .collect();
            if pool.len() < k_total {
                return Err(Error::Construction(format!(
                    "RM-Polar pool has {} rows of weight >= {w}, need {k_total}",
                    pool.len()
                )));
            }
            (pool[pool.len() - k_total..].to_vec(), Some(w))
        }
    };

    let mut info_positions = selected;
    info_positions.sort_unstable();
    let mut is_info = vec![false; spec.n];
    for &i in &info_positions {
        is_info[i as usize] = true;
    }
    let frozen_positions: Vec<u32> = (0..spec.n as u32)
        .filter(|&i| !is_info[i as usize])
        .collect();

    Ok(InfoSet {
        info_positions,
        frozen_positions,
        reliability_rank: rank,
        threshold,
    })
}
