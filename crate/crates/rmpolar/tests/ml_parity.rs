//! Slow decode-quality checks: list sizes large enough to pin the
//! decoder against its own genie ML lower bound, and the qualitative
//! behavior of the adaptive schedule across an SNR sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rmpolar::channel::{awgn_llrs, ChannelParams};
use rmpolar::sim::{run_fer_point, DecoderConfig, StopRule};
use rmpolar::{BitWord, CodeFlavor, CodeSpec, Codec, SclDecoder, TSource};

/// At L = 2048 the 6-bit-CRC pre-transformed code decodes at its ML
/// bound: nearly every frame error is also flagged by the genie
/// comparison against the transmitted word.
#[test]
fn six_bit_crc_code_achieves_ml_bound_at_l2048() {
    let spec = CodeSpec::new(256, 128, 6, CodeFlavor::RmPolar)
        .with_t_source(TSource::SeededRandom { seed: 42, density: 0.5 });
    let codec = Codec::new(spec).unwrap();
    let decoder = DecoderConfig { list: 2048, adaptive: false };
    let params = ChannelParams::new(1.7, codec.spec().rate_payload()).unwrap();
    let stop = StopRule { target_errors: 30, max_frames: 10_000 };
    let rec = run_fer_point(&codec, &decoder, &params, &stop, 0x6B17, 0).unwrap();
    assert!(rec.frame_errors >= 30, "budget too small: {rec:?}");
    let ratio = rec.ml_lb_errors as f64 / rec.frame_errors as f64;
    println!(
        "L=2048 @1.7dB: fer {:.3e}, ml_lb {:.3e}, flagged fraction {ratio:.2}",
        rec.fer, rec.ml_lb_fer
    );
    assert!(
        ratio >= 0.8,
        "decoder should sit on its ML bound at L=2048, flagged fraction {ratio:.2}"
    );
}

/// The average terminal list size of the adaptive schedule shrinks as
/// the channel improves.
#[test]
fn adaptive_average_list_size_decreases_with_snr() {
    let spec = CodeSpec::new(128, 56, 8, CodeFlavor::RmPolar)
        .with_crc_generator(0x1D5)
        .with_t_source(TSource::SeededRandom { seed: 9, density: 0.5 });
    let codec = Codec::new(spec).unwrap();
    let mut dec = SclDecoder::new(128, 64).unwrap();
    let mut means = Vec::new();
    for ebno in [1.0f64, 2.0, 3.0] {
        let params = ChannelParams::new(ebno, codec.spec().rate_payload()).unwrap();
        let mut total = 0u64;
        let frames = 1500u64;
        for frame in 0..frames {
            let mut rng = ChaCha8Rng::seed_from_u64(0xADA9);
            rng.set_stream(frame);
            let payload = BitWord::random(56, &mut rng);
            let x = codec.encode(&payload).unwrap();
            let llrs = awgn_llrs(&x, &params, &mut rng);
            let out = codec.adaptive_scl_decode_with(&mut dec, &llrs, 64).unwrap();
            total += out.list_size_used as u64;
        }
        means.push(total as f64 / frames as f64);
    }
    println!("mean terminal list sizes: {means:?}");
    assert!(
        means[0] > means[1] && means[1] > means[2],
        "expected strictly decreasing means, got {means:?}"
    );
}

/// FER is non-increasing along an Eb/No sweep, within binomial slack.
#[test]
fn fer_monotone_nonincreasing_in_snr() {
    let spec = CodeSpec::new(64, 32, 0, CodeFlavor::RmPolar);
    let codec = Codec::new(spec).unwrap();
    let decoder = DecoderConfig { list: 8, adaptive: false };
    let stop = StopRule { target_errors: u64::MAX, max_frames: 6_000 };
    let mut prev: Option<f64> = None;
    for ebno in [1.0f64, 2.0, 3.0] {
        let params = ChannelParams::new(ebno, 0.5).unwrap();
        let rec = run_fer_point(&codec, &decoder, &params, &stop, 0x50E, 0).unwrap();
        if let Some(p) = prev {
            let sigma = (p * (1.0 - p) / rec.frames as f64).sqrt();
            assert!(
                rec.fer <= p + 3.0 * sigma,
                "FER rose along the sweep: {p} -> {} at {ebno} dB",
                rec.fer
            );
        }
        prev = Some(rec.fer);
    }
}
