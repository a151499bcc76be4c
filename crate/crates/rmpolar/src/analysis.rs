//! Distance-spectrum estimation and the finite-blocklength baseline.
//!
//! Two routes to `(d_min, N_min, N*_min)`: exhaustive Gray-code
//! enumeration of the codebook for small codes, and the high-SNR list
//! probe — decode the all-zero codeword's noiseless LLR pattern with a
//! large list and tally the weights of the surviving re-encoded paths.
//! Probe results are estimates (`exact = false`); enumeration is exact.
//!
//! The comparison baseline is the BI-AWGN normal approximation, a stated
//! proxy for the RCU bound (close at these blocklengths, not identical).

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::codec::Codec;
use crate::gf2::BitWord;
use crate::par;
use crate::scl::{SclDecoder, LLR_CLIP};
use crate::{Error, Result};

/// Exhaustive enumeration cap on `k + k_crc`.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

/// How a spectrum estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    Exhaustive,
    ListProbe { list_size: usize },
}

/// Minimum-distance estimate with multiplicities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub d_min: u64,
    /// Codewords at weight `d_min`.
    pub n_min: u64,
    /// Of those, how many carry CRC-consistent information content.
    /// Equals `n_min` for codes without a CRC.
    pub n_min_crc: u64,
    pub method: SpectrumMethod,
    /// True only for exhaustive enumeration.
    pub exact: bool,
}

#[derive(Clone, Copy)]
struct Tally {
    d: u64,
    n: u64,
    n_crc: u64,
}

impl Tally {
    const EMPTY: Tally = Tally {
        d: u64::MAX,
        n: 0,
        n_crc: 0,
    };

    fn hit(&mut self, w: u64, crc_ok: bool) {
        use std::cmp::Ordering;
        match w.cmp(&self.d) {
            Ordering::Less => {
                self.d = w;
                self.n = 1;
                self.n_crc = crc_ok as u64;
            }
            Ordering::Equal => {
                self.n += 1;
                self.n_crc += crc_ok as u64;
            }
            Ordering::Greater => {}
        }
    }

    fn merge(a: Tally, b: Tally) -> Tally {
        use std::cmp::Ordering;
        match a.d.cmp(&b.d) {
            Ordering::Less => a,
            Ordering::Greater => b,
            Ordering::Equal => Tally {
                d: a.d,
                n: a.n + b.n,
                n_crc: a.n_crc + b.n_crc,
            },
        }
    }
}

/// Exact spectrum by enumerating all `2^(k+k_crc)` codewords.
///
/// Walks the message space in Gray-code order so each step is a single
/// generator-row XOR; the space is partitioned across workers and merged
/// with an associative min/sum reduction.
pub fn brute_force_spectrum(codec: &Codec) -> Result<SpectrumEstimate> {
    brute_force_spectrum_with(codec, DEFAULT_BRUTE_FORCE_CAP, 0)
}

/// [`brute_force_spectrum`] with an explicit cap and worker count.
pub fn brute_force_spectrum_with(
    codec: &Codec,
    cap: usize,
    workers: usize,
) -> Result<SpectrumEstimate> {
    let k_total = codec.spec().k_total();
    if k_total > cap {
        return Err(Error::SizeLimit {
            what: "exhaustive enumeration dimension",
            got: k_total,
            max: cap,
        });
    }
    // Generator rows: the codeword of each unit information vector.
    let mut gen_rows = Vec::with_capacity(k_total);
    for t in 0..k_total {
        let mut info = BitWord::zeros(k_total);
        info.set(t, true);
        gen_rows.push(codec.encode_u(&codec.build_u(&info)?)?);
    }
    let info_of = |gray: u64| {
        let bits: Vec<u8> = (0..k_total).map(|t| ((gray >> t) & 1) as u8).collect();
        BitWord::from_bits(&bits)
    };
    let crc_ok = |gray: u64| match codec.crc() {
        Some(poly) => poly.check(&info_of(gray)).expect("info wider than CRC"),
        None => true,
    };

    let total: u64 = 1u64 << k_total;
    let chunk: u64 = ((total - 1) / 256).max(1 << 12);
    let chunks = (total - 1).div_ceil(chunk);

    let tally = par::fold_indices(
        0..chunks,
        workers,
        || (),
        |_, c| {
            let lo = 1 + c * chunk;
            let hi = (lo + chunk).min(total);
            let mut t = Tally::EMPTY;
            // Codeword of gray(lo), built from scratch once per chunk.
            let mut gray = lo ^ (lo >> 1);
            let mut cw = BitWord::zeros(codec.block_len());
            for (row, g) in gen_rows.iter().enumerate() {
                if (gray >> row) & 1 == 1 {
                    cw.xor_assign(g).expect("row lengths agree");
                }
            }
            for i in lo..hi {
                let w = cw.weight();
                if w <= t.d {
                    t.hit(w, crc_ok(gray));
                }
                if i + 1 < total {
                    let flip = (i + 1).trailing_zeros() as usize;
                    cw.xor_assign(&gen_rows[flip]).expect("row lengths agree");
                    gray ^= 1 << flip;
                }
            }
            t
        },
        Tally::EMPTY,
        Tally::merge,
    );

    Ok(SpectrumEstimate {
        d_min: tally.d,
        n_min: tally.n,
        n_min_crc: tally.n_crc,
        method: SpectrumMethod::Exhaustive,
        exact: true,
    })
}

/// Spectrum estimate by list-decoding the all-zero codeword's noiseless
/// LLR pattern and tallying the weights of all surviving paths.
///
/// Valid only for linear configurations (frozen bits zero, CRC `init`
/// zero, linear `T`), where weight equals distance; asserted up front.
pub fn list_probe_spectrum(codec: &Codec, list_size: usize) -> Result<SpectrumEstimate> {
    let mut dec = SclDecoder::new(codec.block_len(), list_size)?;
    list_probe_spectrum_with(codec, &mut dec, list_size)
}

/// [`list_probe_spectrum`] reusing a caller-owned workspace.
pub fn list_probe_spectrum_with(
    codec: &Codec,
    dec: &mut SclDecoder,
    list_size: usize,
) -> Result<SpectrumEstimate> {
    if let Some(poly) = codec.crc() {
        if poly.init() != 0 {
            return Err(Error::InvalidInput(
                "list probe requires a linear code: CRC init must be zero".into(),
            ));
        }
    }
    let llrs = vec![LLR_CLIP; codec.block_len()];
    let paths = dec.decode_list(codec, &llrs, list_size)?;

    let mut d = u64::MAX;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut n_crc = 0u64;
    for p in &paths {
        let cw = codec.encode_u(&p.u)?;
        let w = cw.weight();
        if w == 0 || w > d {
            continue;
        }
        if w < d {
            d = w;
            seen.clear();
            n_crc = 0;
        }
        if seen.insert(cw.words().to_vec()) && codec.crc_pass(&p.u) {
            n_crc += 1;
        }
    }
    if d == u64::MAX {
        return Err(Error::InvalidInput(
            "probe saw no nonzero codeword; list size too small".into(),
        ));
    }
    Ok(SpectrumEstimate {
        d_min: d,
        n_min: seen.len() as u64,
        n_min_crc: if codec.crc().is_some() {
            n_crc
        } else {
            seen.len() as u64
        },
        method: SpectrumMethod::ListProbe { list_size },
        exact: false,
    })
}

/// CRC-filtered minimum-distance count: the probe restricted to paths
/// whose information content satisfies the CRC.
pub fn crc_filtered_nmin(codec: &Codec, list_size: usize) -> Result<SpectrumEstimate> {
    list_probe_spectrum(codec, list_size)
}

/// BI-AWGN capacity (bits) and dispersion (bits²) at noise level `sigma`,
/// by Simpson quadrature over the information density.
pub fn biawgn_capacity_dispersion(sigma: f64) -> (f64, f64) {
    // i(z) = 1 - log2(1 + exp(-2(1 + sigma z)/sigma^2)), z ~ N(0,1).
    let ln2 = std::f64::consts::LN_2;
    let dens = |z: f64| {
        let t = -2.0 * (1.0 + sigma * z) / (sigma * sigma);
        let softplus = t.max(0.0) + (-t.abs()).exp().ln_1p();
        1.0 - softplus / ln2
    };
    let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();

    let (lo, hi, steps) = (-12.0f64, 12.0f64, 4800usize);
    let h = (hi - lo) / steps as f64;
    let mut c = 0.0;
    let mut m2 = 0.0;
    for j in 0..=steps {
        let z = lo + h * j as f64;
        let wgt = if j == 0 || j == steps {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let i = dens(z);
        let p = pdf(z) * wgt;
        c += i * p;
        m2 += i * i * p;
    }
    c *= h / 3.0;
    m2 *= h / 3.0;
    (c, m2 - c * c)
}

/// Gaussian tail `Q(x)`.
fn q_func(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Normal-approximation frame error probability for a binary-input AWGN
/// channel at blocklength `n` and `k_total` carried bits:
/// `Q((nC - k + ½·log2 n) / sqrt(nV))`. A proxy baseline for the RCU
/// bound, strictly decreasing in Eb/No and increasing in rate.
pub fn normal_approx_fer(n: usize, k_total: usize, ebno_db: f64) -> Result<f64> {
    if n == 0 || k_total == 0 || k_total >= n {
        return Err(Error::InvalidInput(format!(
            "rate {k_total}/{n} outside (0, 1)"
        )));
    }
    if !ebno_db.is_finite() {
        return Err(Error::InvalidInput("Eb/No must be finite".into()));
    }
    let rate = k_total as f64 / n as f64;
    let sigma = (1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0))).sqrt();
    let (c, v) = biawgn_capacity_dispersion(sigma);
    let nf = n as f64;
    let arg = (nf * c - k_total as f64 + 0.5 * nf.log2()) / (nf * v).sqrt();
    Ok(q_func(arg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{CodeFlavor, CodeSpec, TSource};

    #[test]
    fn capacity_dispersion_frozen_quadrature_values() {
        // Reference values from an independent adaptive-quadrature oracle
        // evaluated before this module was written.
        let (c, v) = biawgn_capacity_dispersion(0.7989139417);
        assert!((c - 0.6381696787).abs() < 1e-7, "C = {c}");
        assert!((v - 0.6091610559).abs() < 1e-7, "V = {v}");
    }

    #[test]
    fn normal_approx_frozen_operating_points() {
        let fer = normal_approx_fer(256, 128, 1.95).unwrap();
        assert!(
            (fer / 8.08586838e-4 - 1.0).abs() < 1e-5,
            "fer(256,128,1.95) = {fer}"
        );
        let fer = normal_approx_fer(512, 256, 1.6).unwrap();
        assert!(
            (fer / 3.32857098e-4 - 1.0).abs() < 1e-5,
            "fer(512,256,1.6) = {fer}"
        );
        // Both operating points sit near 1e-3.
        for fer in [
            normal_approx_fer(256, 128, 1.95).unwrap(),
            normal_approx_fer(512, 256, 1.6).unwrap(),
        ] {
            assert!(fer > 1e-4 && fer < 1e-2);
        }
    }

    #[test]
    fn normal_approx_limits_and_errors() {
        // Rate far above capacity: failure is certain.
        assert!(normal_approx_fer(256, 250, 0.0).unwrap() > 0.999);
        // Far below capacity at a long blocklength: vanishing.
        assert!(normal_approx_fer(1024, 128, 3.0).unwrap() < 1e-10);
        assert!(normal_approx_fer(256, 0, 1.0).is_err());
        assert!(normal_approx_fer(256, 256, 1.0).is_err());
        assert!(normal_approx_fer(256, 128, f64::NAN).is_err());
    }

    #[test]
    fn normal_approx_monotone_in_snr_and_rate() {
        let mut prev = 1.0;
        for tenth in -20..=40 {
            let fer = normal_approx_fer(256, 128, tenth as f64 / 10.0).unwrap();
            assert!(fer < prev, "not decreasing at {tenth}");
            prev = fer;
        }
        let mut prev = 0.0;
        for k in [64, 96, 128, 160, 192] {
            let fer = normal_approx_fer(256, k, 1.5).unwrap();
            assert!(fer > prev, "not increasing at k={k}");
            prev = fer;
        }
    }

    #[test]
    fn brute_force_two_bit_repetition() {
        let codec = Codec::new(CodeSpec::new(2, 1, 0, CodeFlavor::Polar)).unwrap();
        let s = brute_force_spectrum(&codec).unwrap();
        assert_eq!((s.d_min, s.n_min, s.n_min_crc), (2, 1, 1));
        assert!(s.exact);
    }

    #[test]
    fn brute_force_cap() {
        let codec = Codec::new(CodeSpec::new(64, 30, 0, CodeFlavor::Polar)).unwrap();
        assert!(matches!(
            brute_force_spectrum_with(&codec, 24, 1),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn brute_force_worker_counts_agree() {
        let spec = CodeSpec::new(32, 14, 0, CodeFlavor::RmPolar)
            .with_t_source(TSource::SeededRandom { seed: 5, density: 0.5 });
        let codec = Codec::new(spec).unwrap();
        let a = brute_force_spectrum_with(&codec, 24, 1).unwrap();
        let b = brute_force_spectrum_with(&codec, 24, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn probe_equals_brute_force_on_a_small_code() {
        for spec in [
            CodeSpec::new(16, 6, 0, CodeFlavor::Polar),
            CodeSpec::new(32, 10, 3, CodeFlavor::RmPolar)
                .with_t_source(TSource::SeededRandom { seed: 19, density: 0.5 }),
        ] {
            let codec = Codec::new(spec).unwrap();
            let exact = brute_force_spectrum(&codec).unwrap();
            let probe =
                list_probe_spectrum(&codec, 1 << codec.spec().k_total()).unwrap();
            assert_eq!(probe.d_min, exact.d_min);
            assert_eq!(probe.n_min, exact.n_min);
            assert_eq!(probe.n_min_crc, exact.n_min_crc);
            assert!(!probe.exact);
        }
    }

    #[test]
    fn probe_estimates_refine_monotonically_with_list_size() {
        let spec = CodeSpec::new(32, 12, 0, CodeFlavor::RmPolar)
            .with_t_source(TSource::SeededRandom { seed: 23, density: 0.5 });
        let codec = Codec::new(spec).unwrap();
        let mut prev: Option<SpectrumEstimate> = None;
        for l in [16usize, 64, 256, 1024, 4096] {
            let s = list_probe_spectrum(&codec, l).unwrap();
            if let Some(p) = prev {
                assert!(s.d_min <= p.d_min);
                if s.d_min == p.d_min {
                    assert!(s.n_min >= p.n_min);
                }
            }
            prev = Some(s);
        }
    }

    #[test]
    fn no_crc_probe_reports_n_min_crc_equal_n_min() {
        let codec = Codec::new(CodeSpec::new(16, 8, 0, CodeFlavor::RmPolar)).unwrap();
        let s = list_probe_spectrum(&codec, 256).unwrap();
        assert_eq!(s.n_min_crc, s.n_min);
        let s = crc_filtered_nmin(&codec, 256).unwrap();
        assert_eq!(s.n_min_crc, s.n_min);
    }

    #[test]
    fn pretransform_never_reduces_brute_force_distance() {
        // Ten sampled matrices on a small RM-Polar code; exhaustive both
        // sides.
        let base = Codec::new(CodeSpec::new(32, 12, 0, CodeFlavor::RmPolar)).unwrap();
        let d_base = brute_force_spectrum(&base).unwrap().d_min;
        for seed in 0..10u64 {
            let spec = CodeSpec::new(32, 12, 0, CodeFlavor::RmPolar)
                .with_t_source(TSource::SeededRandom { seed, density: 0.5 });
            let pt = Codec::new(spec).unwrap();
            let s = brute_force_spectrum(&pt).unwrap();
            assert!(
                s.d_min >= d_base,
                "seed {seed}: d_min {} fell below base {d_base}",
                s.d_min
            );
        }
    }

    #[test]
    fn all_zero_word_never_counted() {
        let codec = Codec::new(CodeSpec::new(16, 4, 0, CodeFlavor::Polar)).unwrap();
        let s = brute_force_spectrum(&codec).unwrap();
        assert!(s.d_min >= 1 && s.n_min >= 1);
    }
}
