//! BPSK modulation over the AWGN channel, reported as LLRs.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::gf2::BitWord;
use crate::{Error, Result};

/// Channel operating point: Eb/No against a stated rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub ebno_db: f64,
    pub rate: f64,
    /// Noise standard deviation, `sigma^2 = 1 / (2 · rate · 10^(ebno/10))`.
    pub sigma: f64,
}

impl ChannelParams {
    pub fn new(ebno_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "rate {rate} outside (0, 1]"
            )));
        }
        if !ebno_db.is_finite() {
            return Err(Error::InvalidInput("Eb/No must be finite".into()));
        }
        let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0));
        Ok(Self {
            ebno_db,
            rate,
            sigma: sigma2.sqrt(),
        })
    }
}

/// Modulates bit `b` to `s = 1 - 2b`, adds `sigma`-scaled Gaussian noise,
/// and returns per-symbol LLRs `2y/sigma^2` (positive favors bit 0).
pub fn awgn_llrs<R: Rng + ?Sized>(
    codeword: &BitWord,
    params: &ChannelParams,
    rng: &mut R,
) -> Vec<f64> {
    let sigma = params.sigma;
    let scale = 2.0 / (sigma * sigma);
    (0..codeword.len())
        .map(|i| {
            let s = if codeword.get(i) { -1.0 } else { 1.0 };
            let z: f64 = StandardNormal.sample(rng);
            scale * (s + sigma * z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_follows_the_definition() {
        let p = ChannelParams::new(0.0, 0.5).unwrap();
        assert!((p.sigma * p.sigma - 1.0).abs() < 1e-12);
        let p = ChannelParams::new(1.95, 0.5).unwrap();
        assert!((p.sigma - 0.7989139417).abs() < 1e-9);
        assert!(ChannelParams::new(1.0, 0.0).is_err());
        assert!(ChannelParams::new(1.0, 1.5).is_err());
    }

    #[test]
    fn llr_signs_match_symbols_at_high_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ChannelParams::new(40.0, 0.5).unwrap();
        let w = BitWord::from_bits(&[0, 1, 1, 0, 1, 0, 0, 1]);
        let llrs = awgn_llrs(&w, &p, &mut rng);
        for (i, &l) in llrs.iter().enumerate() {
            assert_eq!(l < 0.0, w.get(i), "position {i}");
        }
    }

    #[test]
    fn llr_moments_match_gaussian_oracle() {
        // For b = 0 the LLR is N(2/sigma^2, 4/sigma^2); check both moments
        // against the analytic values with 5-sigma slack.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = ChannelParams::new(1.0, 0.5).unwrap();
        let n = 1_000_000usize;
        let cw = BitWord::zeros(64);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut count = 0usize;
        while count < n {
            for l in awgn_llrs(&cw, &p, &mut rng) {
                sum += l;
                sumsq += l * l;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let var = sumsq / count as f64 - mean * mean;
        let s2 = p.sigma * p.sigma;
        let expect_mean = 2.0 / s2;
        let expect_var = 4.0 / s2;
        let mean_tol = 5.0 * (expect_var / count as f64).sqrt();
        assert!(
            (mean - expect_mean).abs() < mean_tol,
            "mean {mean} vs {expect_mean} ± {mean_tol}"
        );
        assert!(
            (var - expect_var).abs() < 0.02 * expect_var,
            "variance {var} vs {expect_var}"
        );
    }
}
