//! Command-line workbench for pre-transformed RM-Polar codes:
//! construction inspection, single-word encode/decode, FER sweeps,
//! distance-spectrum estimation, and the normal-approximation baseline.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rmpolar::analysis::{
    brute_force_spectrum_with, list_probe_spectrum, normal_approx_fer, SpectrumEstimate,
};
use rmpolar::scl::LLR_CLIP;
use rmpolar::sim::{run_sweep, DecoderConfig, RateBasis, SweepConfig, SweepParams};
use rmpolar::{BitWord, CodeFlavor, CodeSpec, Codec, TSource, WeightThreshold};

#[derive(Parser)]
#[command(name = "rmpolar", version, about = "Pre-transformed RM-Polar code workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the information/frozen partition and resolved threshold.
    Construct(CodeArgs),
    /// Encode one payload given as a bit or hex string.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        /// Payload of k bits, e.g. "1011..." or "0x2f" (hex).
        #[arg(long)]
        msg: String,
    },
    /// Decode one received word (hard decisions or raw LLRs).
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        /// Received word of n hard bits ("0110..." or hex); mapped to
        /// clipped LLRs.
        #[arg(long, conflicts_with = "llrs")]
        word: Option<String>,
        /// Comma-separated n channel LLRs (positive favors bit 0).
        #[arg(long)]
        llrs: Option<String>,
        #[arg(long, default_value_t = 8)]
        list: usize,
        /// Double the list size until the CRC passes (needs k_crc > 0).
        #[arg(long)]
        adaptive: bool,
    },
    /// Monte Carlo FER sweep over an Eb/No grid.
    Simulate(SimulateArgs),
    /// Estimate (d_min, N_min, N*_min) exhaustively or by list probe.
    Spectrum {
        #[command(flatten)]
        code: CodeArgs,
        /// brute | probe
        #[arg(long, default_value = "probe")]
        method: String,
        #[arg(long, default_value_t = 1 << 14)]
        list_size: usize,
        /// Exhaustive-enumeration cap on k + k_crc.
        #[arg(long, default_value_t = rmpolar::analysis::DEFAULT_BRUTE_FORCE_CAP)]
        brute_cap: usize,
        /// json | csv
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Normal-approximation FER baseline over an Eb/No grid (CSV).
    Bounds {
        /// Block length n.
        #[arg(long)]
        n: usize,
        /// Carried bits (payload, or payload + CRC as you prefer).
        #[arg(long)]
        k: usize,
        /// Grid "start:stop:step" in dB, e.g. "1.0:3.0:0.25".
        #[arg(long)]
        ebno: String,
    },
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Block length N (power of two).
    #[arg(long)]
    n: usize,
    /// Payload bits.
    #[arg(long)]
    k: usize,
    /// CRC bits appended to the payload (0 = none).
    #[arg(long, default_value_t = 0)]
    kcrc: usize,
    /// polar | rm-polar
    #[arg(long, default_value = "rm-polar")]
    flavor: String,
    /// Construction design SNR (Eb/No dB against (k+kcrc)/n).
    #[arg(long, default_value_t = rmpolar::construction::DEFAULT_DESIGN_SNR_DB)]
    design_snr: f64,
    /// RM-Polar row-weight threshold; omit for auto.
    #[arg(long)]
    weight_threshold: Option<u64>,
    /// Pre-transform "seed,density", e.g. "42,0.5"; omit for identity.
    #[arg(long)]
    pretransform: Option<String>,
    /// CRC generator in hex with the leading coefficient, e.g. 0x313.
    #[arg(long)]
    crc_poly: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config file; flags below override nothing when present.
    #[arg(long, conflicts_with = "n")]
    config: Option<PathBuf>,
    #[command(flatten)]
    code: OptionalCodeArgs,
    /// List size (fixed), or the cap with --adaptive.
    #[arg(long, default_value_t = 32)]
    list: usize,
    #[arg(long)]
    adaptive: bool,
    /// Grid "start:stop:step" or a single value, in dB.
    #[arg(long)]
    ebno: Option<String>,
    #[arg(long, default_value_t = 100)]
    target_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// 0 = default parallelism, 1 = single-threaded.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Append records to this CSV (resumes finished points).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Eb/No rate accounting: payload (k/n) | total ((k+kcrc)/n).
    #[arg(long, default_value = "payload")]
    rate_basis: String,
}

/// CodeArgs with everything optional, for --config override detection.
#[derive(Args)]
struct OptionalCodeArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    kcrc: usize,
    #[arg(long, default_value = "rm-polar")]
    flavor: String,
    #[arg(long)]
    design_snr: Option<f64>,
    #[arg(long)]
    weight_threshold: Option<u64>,
    #[arg(long)]
    pretransform: Option<String>,
    #[arg(long)]
    crc_poly: Option<String>,
}

fn parse_flavor(s: &str) -> Result<CodeFlavor> {
    match s {
        "polar" => Ok(CodeFlavor::Polar),
        "rm-polar" | "rmpolar" => Ok(CodeFlavor::RmPolar),
        other => bail!("unknown flavor {other:?} (expected polar | rm-polar)"),
    }
}

fn parse_pretransform(s: &str) -> Result<TSource> {
    let (seed, density) = s
        .split_once(',')
        .context("--pretransform needs \"seed,density\"")?;
    Ok(TSource::SeededRandom {
        seed: seed.trim().parse().context("pre-transform seed")?,
        density: density.trim().parse().context("pre-transform density")?,
    })
}

fn parse_hex_u32(s: &str) -> Result<u32> {
    let t = s.trim_start_matches("0x").trim_start_matches("0X");
    u32::from_str_radix(t, 16).with_context(|| format!("hex value {s:?}"))
}

fn parse_word(s: &str, expect_len: usize) -> Result<BitWord> {
    let w = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        BitWord::from_hex_str(hex)?
    } else if s.chars().all(|c| c == '0' || c == '1') {
        BitWord::from_bin_str(s)?
    } else {
        BitWord::from_hex_str(s)?
    };
    if w.len() != expect_len {
        bail!("word has {} bits, expected {expect_len}", w.len());
    }
    Ok(w)
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    if let Some((a, rest)) = s.split_once(':') {
        let (b, step) = rest
            .split_once(':')
            .context("grid must be start:stop:step")?;
        let (a, b, step): (f64, f64, f64) = (a.parse()?, b.parse()?, step.parse()?);
        if step <= 0.0 || b < a {
            bail!("grid must satisfy start <= stop, step > 0");
        }
        let mut grid = Vec::new();
        let mut i = 0usize;
        loop {
            let v = a + step * i as f64;
            if v > b + 1e-9 {
                break;
            }
            // Round to the step lattice to keep CSV keys tidy.
            grid.push((v * 1e6).round() / 1e6);
            i += 1;
        }
        Ok(grid)
    } else {
        Ok(vec![s.parse()?])
    }
}

fn build_spec(args: &CodeArgs) -> Result<CodeSpec> {
    let mut spec = CodeSpec::new(args.n, args.k, args.kcrc, parse_flavor(&args.flavor)?)
        .with_design_snr_db(args.design_snr);
    if let Some(w) = args.weight_threshold {
        spec = spec.with_weight_threshold(WeightThreshold::Fixed(w));
    }
    if let Some(pt) = &args.pretransform {
        spec = spec.with_t_source(parse_pretransform(pt)?);
    }
    if let Some(poly) = &args.crc_poly {
        spec = spec.with_crc_generator(parse_hex_u32(poly)?);
    }
    spec.validate()?;
    Ok(spec)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Construct(args) => construct(&args),
        Command::Encode { code, msg } => encode(&code, &msg),
        Command::Decode { code, word, llrs, list, adaptive } => {
            decode(&code, word.as_deref(), llrs.as_deref(), list, adaptive)
        }
        Command::Simulate(args) => simulate(args),
        Command::Spectrum { code, method, list_size, brute_cap, format, workers } => {
            spectrum(&code, &method, list_size, brute_cap, &format, workers)
        }
        Command::Bounds { n, k, ebno } => bounds(n, k, &ebno),
    }
}

fn construct(args: &CodeArgs) -> Result<()> {
    let spec = build_spec(args)?;
    let codec = Codec::new(spec.clone())?;
    let set = codec.info_set();
    println!(
        "code: ({}, {}+{}) flavor={} design_snr_db={} (Eb/No vs rate {})",
        spec.n,
        spec.k,
        spec.k_crc,
        spec.flavor,
        spec.design_snr_db,
        spec.rate_total()
    );
    if let Some(w) = set.threshold {
        println!("resolved weight threshold: {w}");
    }
    println!(
        "min info row weight: {}",
        set.min_info_row_weight(spec.stages())
    );
    if let Some(poly) = codec.crc() {
        println!("crc: width={} generator=0x{:x}", poly.width(), poly.generator());
    }
    match spec.t_source {
        TSource::Identity => println!("pre-transform: identity"),
        TSource::SeededRandom { seed, density } => {
            println!("pre-transform: seeded(seed={seed}, density={density})")
        }
    }
    println!(
        "info positions ({}): {:?}",
        set.info_positions.len(),
        set.info_positions
    );
    println!(
        "frozen positions ({}): {:?}",
        set.frozen_positions.len(),
        set.frozen_positions
    );
    Ok(())
}

fn encode(args: &CodeArgs, msg: &str) -> Result<()> {
    let codec = Codec::new(build_spec(args)?)?;
    let payload = parse_word(msg, codec.payload_len())?;
    let x = codec.encode(&payload)?;
    println!("bin: {}", x.to_bin_string());
    if x.len() % 4 == 0 {
        println!("hex: 0x{}", x.to_hex_string()?);
    }
    Ok(())
}

fn decode(
    args: &CodeArgs,
    word: Option<&str>,
    llrs: Option<&str>,
    list: usize,
    adaptive: bool,
) -> Result<()> {
    let codec = Codec::new(build_spec(args)?)?;
    let llr_vec: Vec<f64> = match (word, llrs) {
        (Some(w), None) => {
            let w = parse_word(w, codec.block_len())?;
            (0..w.len())
                .map(|i| if w.get(i) { -LLR_CLIP } else { LLR_CLIP })
                .collect()
        }
        (None, Some(l)) => l
            .split(',')
            .map(|t| t.trim().parse::<f64>().context("LLR value"))
            .collect::<Result<_>>()?,
        _ => bail!("pass exactly one of --word or --llrs"),
    };
    let outcome = if adaptive {
        codec.adaptive_scl_decode(&llr_vec, list)?
    } else {
        codec.scl_decode(&llr_vec, list)?
    };
    println!("payload: {}", outcome.payload.to_bin_string());
    println!(
        "crc_pass: {}  metric: {}  list_size_used: {}",
        outcome.crc_pass, outcome.selected_metric, outcome.list_size_used
    );
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = SweepConfig::from_toml_str(&text)?;
        if let Some(out) = args.out {
            cfg.sweep.out = Some(out);
        }
        cfg
    } else {
        let code = CodeArgs {
            n: args.code.n.context("--n (or --config) is required")?,
            k: args.code.k.context("--k (or --config) is required")?,
            kcrc: args.code.kcrc,
            flavor: args.code.flavor.clone(),
            design_snr: args
                .code
                .design_snr
                .unwrap_or(rmpolar::construction::DEFAULT_DESIGN_SNR_DB),
            weight_threshold: args.code.weight_threshold,
            pretransform: args.code.pretransform.clone(),
            crc_poly: args.code.crc_poly.clone(),
        };
        let rate_basis = match args.rate_basis.as_str() {
            "payload" => RateBasis::Payload,
            "total" => RateBasis::Total,
            other => bail!("unknown rate basis {other:?} (payload | total)"),
        };
        SweepConfig {
            code: build_spec(&code)?,
            decoder: DecoderConfig { list: args.list, adaptive: args.adaptive },
            sweep: SweepParams {
                ebno_db: parse_grid(args.ebno.as_deref().context("--ebno is required")?)?,
                target_errors: args.target_errors,
                max_frames: args.max_frames,
                seed: args.seed,
                workers: args.workers,
                out: args.out,
                rate_basis,
            },
        }
    };
    let records = run_sweep(&cfg)?;
    println!("{}", rmpolar::sim::CSV_HEADER);
    for r in &records {
        println!("{}", r.to_csv_row());
    }
    Ok(())
}

fn spectrum(
    args: &CodeArgs,
    method: &str,
    list_size: usize,
    brute_cap: usize,
    format: &str,
    workers: usize,
) -> Result<()> {
    let spec = build_spec(args)?;
    let codec = Codec::new(spec.clone())?;
    let estimate: SpectrumEstimate = match method {
        "brute" => brute_force_spectrum_with(&codec, brute_cap, workers)?,
        "probe" => list_probe_spectrum(&codec, list_size)?,
        other => bail!("unknown method {other:?} (brute | probe)"),
    };
    match format {
        "json" => {
            let report = serde_json::json!({
                "code": spec,
                "estimate": estimate,
            });
            println!("{report}");
        }
        "csv" => {
            println!("n,k,k_crc,flavor,t_seed,t_density,crc_generator,method,d_min,n_min,n_min_crc,exact");
            let (seed, density) = match spec.t_source {
                TSource::Identity => (String::new(), String::new()),
                TSource::SeededRandom { seed, density } => {
                    (seed.to_string(), density.to_string())
                }
            };
            let generator = codec
                .crc()
                .map(|p| format!("0x{:x}", p.generator()))
                .unwrap_or_default();
            println!(
                "{},{},{},{},{},{},{},{:?},{},{},{},{}",
                spec.n,
                spec.k,
                spec.k_crc,
                spec.flavor,
                seed,
                density,
                generator,
                estimate.method,
                estimate.d_min,
                estimate.n_min,
                estimate.n_min_crc,
                estimate.exact
            );
        }
        other => bail!("unknown format {other:?} (json | csv)"),
    }
    Ok(())
}

fn bounds(n: usize, k: usize, ebno: &str) -> Result<()> {
    let grid = parse_grid(ebno)?;
    println!("# normal-approximation baseline (proxy for the RCU bound)");
    println!("# n={n} k={k} rate={}", k as f64 / n as f64);
    println!("ebno_db,na_fer");
    for e in grid {
        println!("{e},{}", normal_approx_fer(n, k, e)?);
    }
    Ok(())
}
