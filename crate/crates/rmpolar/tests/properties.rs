//! Cross-module properties that need the whole stack.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rmpolar::analysis::brute_force_spectrum;
use rmpolar::channel::{awgn_llrs, ChannelParams};
use rmpolar::scl::LLR_CLIP;
use rmpolar::{BitWord, CodeFlavor, CodeSpec, Codec, SclDecoder, TSource};

/// Pre-transformation never reduces the exhaustive minimum distance,
/// checked per sample over a hundred random matrices.
#[test]
fn distance_non_reduction_over_100_sampled_t() {
    for (n, k) in [(32usize, 12usize), (16, 8)] {
        let base = Codec::new(CodeSpec::new(n, k, 0, CodeFlavor::RmPolar)).unwrap();
        let d_base = brute_force_spectrum(&base).unwrap().d_min;
        for seed in 0..50u64 {
            let spec = CodeSpec::new(n, k, 0, CodeFlavor::RmPolar)
                .with_t_source(TSource::SeededRandom { seed, density: 0.5 });
            let pt = Codec::new(spec).unwrap();
            let d_pt = brute_force_spectrum(&pt).unwrap().d_min;
            assert!(
                d_pt >= d_base,
                "({n},{k}) seed {seed}: d_min {d_pt} < base {d_base}"
            );
        }
    }
}

/// Doubling the list size never hurts: paired-seed FER comparison with
/// shared noise realizations.
#[test]
fn doubling_the_list_never_hurts_paired_seeds() {
    let spec = CodeSpec::new(64, 24, 6, CodeFlavor::RmPolar)
        .with_t_source(TSource::SeededRandom { seed: 3, density: 0.5 });
    let codec = Codec::new(spec).unwrap();
    let params = ChannelParams::new(1.5, codec.spec().rate_payload()).unwrap();
    let frames = 3000u64;

    let mut errors = [0u64; 3]; // L = 2, 4, 8
    let mut small = SclDecoder::new(64, 8).unwrap();
    for frame in 0..frames {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        rng.set_stream(frame);
        let payload = BitWord::random(24, &mut rng);
        let x = codec.encode(&payload).unwrap();
        let llrs = awgn_llrs(&x, &params, &mut rng);
        for (slot, l) in [2usize, 4, 8].into_iter().enumerate() {
            let out = small.decode(&codec, &llrs, l).unwrap();
            if out.payload != payload {
                errors[slot] += 1;
            }
        }
    }
    // Exact nesting is not guaranteed path-by-path, so allow binomial
    // slack: FER(2L) <= FER(L) + 3 sigma.
    for w in 1..errors.len() {
        let p = errors[w - 1] as f64 / frames as f64;
        let sigma = (p * (1.0 - p) * frames as f64).sqrt().max(1.0);
        assert!(
            (errors[w] as f64) <= errors[w - 1] as f64 + 3.0 * sigma,
            "errors by list size: {errors:?}"
        );
    }
    assert!(errors[0] > 0, "noise level should produce errors at L=2");
}

/// A full-rate code (frozen set empty) still round-trips.
#[test]
fn full_rate_code_roundtrips() {
    let codec = Codec::new(CodeSpec::new(16, 16, 0, CodeFlavor::Polar)).unwrap();
    let mut dec = SclDecoder::new(16, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let payload = BitWord::random(16, &mut rng);
        let x = codec.encode(&payload).unwrap();
        let llrs: Vec<f64> = (0..16)
            .map(|i| if x.get(i) { -LLR_CLIP } else { LLR_CLIP })
            .collect();
        let out = dec.decode(&codec, &llrs, 2).unwrap();
        assert_eq!(out.payload, payload);
    }
}

/// Single-information-bit code: the decoder sees N copies of the bit.
#[test]
fn rate_one_over_n_repetition_behavior() {
    let codec = Codec::new(CodeSpec::new(16, 1, 0, CodeFlavor::Polar)).unwrap();
    // Most reliable position is the last one; its row is all-ones, so the
    // code is exactly a repetition code.
    let x = codec.encode(&BitWord::from_bits(&[1])).unwrap();
    assert_eq!(x.weight(), 16);
    let mut dec = SclDecoder::new(16, 1).unwrap();
    // Majority vote survives four flipped symbols.
    let mut llrs = vec![-3.0f64; 16];
    for l in llrs.iter_mut().take(4) {
        *l = 3.0;
    }
    let out = dec.decode(&codec, &llrs, 1).unwrap();
    assert_eq!(out.payload, BitWord::from_bits(&[1]));
}
