//! Criterion benches for the hot paths: SCL decoding at several list
//! sizes, the exhaustive spectrum walk, and a full FER point, each in
//! single-worker and data-parallel form where that distinction exists.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rmpolar::analysis::brute_force_spectrum_with;
use rmpolar::channel::{awgn_llrs, ChannelParams};
use rmpolar::sim::{run_fer_point, DecoderConfig, StopRule};
use rmpolar::{BitWord, CodeFlavor, CodeSpec, Codec, SclDecoder, TSource};

fn pt_rm_polar_256() -> Codec {
    Codec::new(
        CodeSpec::new(256, 128, 9, CodeFlavor::RmPolar)
            .with_t_source(TSource::SeededRandom { seed: 42, density: 0.5 }),
    )
    .unwrap()
}

fn bench_scl_decode(c: &mut Criterion) {
    let codec = pt_rm_polar_256();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = ChannelParams::new(2.0, 0.5).unwrap();
    let payload = BitWord::random(codec.payload_len(), &mut rng);
    let x = codec.encode(&payload).unwrap();
    let llrs = awgn_llrs(&x, &params, &mut rng);

    let mut group = c.benchmark_group("scl_decode_256_137");
    for l in [1usize, 8, 32, 128] {
        let mut dec = SclDecoder::new(codec.block_len(), l).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(l), &l, |b, &l| {
            b.iter(|| dec.decode(&codec, &llrs, l).unwrap());
        });
    }
    group.finish();
}

fn bench_encode(c: &mut Criterion) {
    let codec = pt_rm_polar_256();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let payload = BitWord::random(codec.payload_len(), &mut rng);
    c.bench_function("encode_256_137", |b| {
        b.iter(|| codec.encode(&payload).unwrap())
    });
}

fn bench_brute_force_spectrum(c: &mut Criterion) {
    let codec = Codec::new(
        CodeSpec::new(64, 20, 0, CodeFlavor::RmPolar)
            .with_t_source(TSource::SeededRandom { seed: 7, density: 0.5 }),
    )
    .unwrap();
    let mut group = c.benchmark_group("brute_force_spectrum_64_20");
    group.sample_size(20);
    group.bench_function("sequential", |b| {
        b.iter(|| brute_force_spectrum_with(&codec, 24, 1).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| brute_force_spectrum_with(&codec, 24, 0).unwrap())
    });
    group.finish();
}

fn bench_fer_point(c: &mut Criterion) {
    let codec = pt_rm_polar_256();
    let params = ChannelParams::new(2.0, 0.5).unwrap();
    let decoder = DecoderConfig { list: 8, adaptive: false };
    let stop = StopRule { target_errors: u64::MAX, max_frames: 512 };
    let mut group = c.benchmark_group("fer_point_512_frames_l8");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| run_fer_point(&codec, &decoder, &params, &stop, 3, 1).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| run_fer_point(&codec, &decoder, &params, &stop, 3, 0).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_scl_decode,
    bench_encode,
    bench_brute_force_spectrum,
    bench_fer_point
);
criterion_main!(benches);
