//! Seeded Monte Carlo FER measurement and sweep persistence.
//!
//! Every frame derives its RNG from `(master_seed, frame_index)` via a
//! per-frame ChaCha stream, and frames are consumed in fixed-size
//! batches with stopping decided only at batch boundaries, so a point's
//! counts are bit-identical for any worker count. Records append to CSV
//! with the full configuration fingerprint in the header; rerunning a
//! sweep skips points already on disk.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{awgn_llrs, ChannelParams};
use crate::codec::Codec;
use crate::construction::CodeSpec;
use crate::gf2::BitWord;
use crate::par;
use crate::scl::SclDecoder;
use crate::{Error, Result};

/// Frames consumed between stop-rule checks; fixed so that results do
/// not depend on the worker count.
pub const FRAME_BATCH: u64 = 256;

/// Which rate feeds the Eb/No → sigma conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateBasis {
    /// `k / n`: CRC bits count as overhead.
    #[default]
    Payload,
    /// `(k + k_crc) / n`.
    Total,
}

impl RateBasis {
    pub fn rate(&self, spec: &CodeSpec) -> f64 {
        match self {
            RateBasis::Payload => spec.rate_payload(),
            RateBasis::Total => spec.rate_total(),
        }
    }
}

impl std::fmt::Display for RateBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateBasis::Payload => write!(f, "payload"),
            RateBasis::Total => write!(f, "total"),
        }
    }
}

/// List-decoder settings for a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    /// Fixed list size, or the adaptive cap when `adaptive` is set.
    pub list: usize,
    #[serde(default)]
    pub adaptive: bool,
}

/// Stop a point at `target_errors` frame errors or `max_frames`,
/// whichever comes first (checked per batch).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRule {
    #[serde(default = "default_target_errors")]
    pub target_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
}

fn default_target_errors() -> u64 {
    100
}

fn default_max_frames() -> u64 {
    1_000_000
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            target_errors: default_target_errors(),
            max_frames: default_max_frames(),
        }
    }
}

/// One measured FER point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerRecord {
    pub fingerprint: String,
    pub ebno_db: f64,
    pub list: usize,
    pub frames: u64,
    pub frame_errors: u64,
    pub ml_lb_errors: u64,
    pub fer: f64,
    pub ml_lb_fer: f64,
    pub wall_seconds: f64,
    pub master_seed: u64,
}

/// Exact CSV column order for FER records.
pub const CSV_HEADER: &str =
    "ebno_db,L,frames,frame_errors,fer,ml_lb_errors,ml_lb_fer,wall_seconds,seed";

impl FerRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.ebno_db,
            self.list,
            self.frames,
            self.frame_errors,
            self.fer,
            self.ml_lb_errors,
            self.ml_lb_fer,
            self.wall_seconds,
            self.master_seed
        )
    }
}

/// Measures one `(code, decoder, Eb/No)` point.
///
/// Deterministic in everything but `wall_seconds` for a fixed
/// `master_seed`, independent of `workers`.
pub fn run_fer_point(
    codec: &Codec,
    decoder: &DecoderConfig,
    params: &ChannelParams,
    stop: &StopRule,
    master_seed: u64,
    workers: usize,
) -> Result<FerRecord> {
    if decoder.list == 0 {
        return Err(Error::InvalidInput("list size must be at least 1".into()));
    }
    if decoder.adaptive {
        if codec.crc().is_none() {
            return Err(Error::InvalidInput(
                "adaptive decoding needs a CRC to test against".into(),
            ));
        }
        if !decoder.list.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "adaptive list bound {} is not a power of two",
                decoder.list
            )));
        }
    }
    if stop.max_frames == 0 {
        return Err(Error::InvalidInput("max_frames must be positive".into()));
    }

    let start = Instant::now();
    let mut frames = 0u64;
    let mut frame_errors = 0u64;
    let mut ml_lb_errors = 0u64;
    while frames < stop.max_frames && frame_errors < stop.target_errors {
        let take = FRAME_BATCH.min(stop.max_frames - frames);
        let (e, m) = par::fold_indices(
            frames..frames + take,
            workers,
            || SclDecoder::new(codec.block_len(), decoder.list).expect("validated decoder"),
            |ws, frame| simulate_frame(codec, decoder, params, master_seed, frame, ws),
            (0u64, 0u64),
            |a, b| (a.0 + b.0, a.1 + b.1),
        );
        frames += take;
        frame_errors += e;
        ml_lb_errors += m;
    }

    Ok(FerRecord {
        fingerprint: String::new(),
        ebno_db: params.ebno_db,
        list: decoder.list,
        frames,
        frame_errors,
        ml_lb_errors,
        fer: frame_errors as f64 / frames as f64,
        ml_lb_fer: ml_lb_errors as f64 / frames as f64,
        wall_seconds: start.elapsed().as_secs_f64(),
        master_seed,
    })
}

/// One frame: payload draw, encode, channel, decode, genie on error.
/// Returns (frame error, ML-lower-bound error) as 0/1 counts.
fn simulate_frame(
    codec: &Codec,
    decoder: &DecoderConfig,
    params: &ChannelParams,
    master_seed: u64,
    frame: u64,
    ws: &mut SclDecoder,
) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(frame);
    let payload = BitWord::random(codec.payload_len(), &mut rng);
    let x = codec.encode(&payload).expect("payload sized to codec");
    let llrs = awgn_llrs(&x, params, &mut rng);
    let outcome = if decoder.adaptive {
        codec
            .adaptive_scl_decode_with(ws, &llrs, decoder.list)
            .expect("inputs validated")
    } else {
        ws.decode(codec, &llrs, decoder.list).expect("inputs validated")
    };
    if outcome.payload == payload {
        return (0, 0);
    }
    let info = codec.info_vector(&payload).expect("payload sized to codec");
    let u = codec.build_u(&info).expect("info sized to codec");
    let pm_tx = ws
        .forced_metric(codec, &llrs, &u)
        .expect("inputs validated");
    (1, (outcome.selected_metric < pm_tx) as u64)
}

/// A whole sweep: code, decoder, grid, and persistence settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub code: CodeSpec,
    pub decoder: DecoderConfig,
    pub sweep: SweepParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    /// Eb/No grid in dB.
    pub ebno_db: Vec<f64>,
    #[serde(default = "default_target_errors")]
    pub target_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    pub seed: u64,
    /// 0 = library default parallelism, 1 = single-threaded.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub rate_basis: RateBasis,
}

impl SweepConfig {
    /// Parses TOML, rejecting unknown keys with the offending path.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SweepConfig =
            toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.code.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Stable 16-hex-digit digest of everything that shapes the numbers.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct Salient<'a> {
            code: &'a CodeSpec,
            decoder: &'a DecoderConfig,
            target_errors: u64,
            max_frames: u64,
            seed: u64,
            rate_basis: RateBasis,
        }
        let canon = serde_json::to_string(&Salient {
            code: &self.code,
            decoder: &self.decoder,
            target_errors: self.sweep.target_errors,
            max_frames: self.sweep.max_frames,
            seed: self.sweep.seed,
            rate_basis: self.sweep.rate_basis,
        })
        .expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn header_lines(&self, fingerprint: &str) -> Vec<String> {
        vec![
            format!("# rmpolar-fer-v1 fingerprint={fingerprint}"),
            format!(
                "# code: n={} k={} k_crc={} flavor={} design_snr_db={} threshold={:?} t_source={:?} crc_generator={:?}",
                self.code.n,
                self.code.k,
                self.code.k_crc,
                self.code.flavor,
                self.code.design_snr_db,
                self.code.weight_threshold,
                self.code.t_source,
                self.code.crc_generator,
            ),
            format!(
                "# decoder: list={} adaptive={} rate_basis={} rate={}",
                self.decoder.list,
                self.decoder.adaptive,
                self.sweep.rate_basis,
                self.sweep.rate_basis.rate(&self.code),
            ),
            format!(
                "# stop: target_errors={} max_frames={} seed={}",
                self.sweep.target_errors, self.sweep.max_frames, self.sweep.seed
            ),
            CSV_HEADER.to_string(),
        ]
    }
}

/// Runs every grid point not already in the sink, appending as it goes.
/// Returns the newly computed records in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<FerRecord>> {
    cfg.code.validate()?;
    let codec = Codec::new(cfg.code.clone())?;
    let fingerprint = cfg.fingerprint();
    let stop = StopRule {
        target_errors: cfg.sweep.target_errors,
        max_frames: cfg.sweep.max_frames,
    };

    let mut sink: Option<std::fs::File> = None;
    let mut done: Vec<String> = Vec::new();
    if let Some(path) = &cfg.sweep.out {
        if path.exists() {
            let file = std::fs::File::open(path)?;
            let mut lines = std::io::BufReader::new(file).lines();
            match lines.next() {
                Some(Ok(first)) if first.contains(&format!("fingerprint={fingerprint}")) => {}
                Some(Ok(first)) => {
                    return Err(Error::Config(format!(
                        "sink {} holds data for another configuration ({first})",
                        path.display()
                    )));
                }
                _ => {
                    return Err(Error::Config(format!(
                        "sink {} exists but is not a sweep file",
                        path.display()
                    )));
                }
            }
            for line in lines {
                let line = line?;
                if line.starts_with('#') || line.starts_with("ebno_db") || line.is_empty() {
                    continue;
                }
                if let Some(key) = line.split(',').next() {
                    done.push(key.to_string());
                }
            }
            sink = Some(std::fs::OpenOptions::new().append(true).open(path)?);
        } else {
            let mut file = std::fs::File::create(path)?;
            for line in cfg.header_lines(&fingerprint) {
                writeln!(file, "{line}")?;
            }
            file.flush()?;
            sink = Some(file);
        }
    }

    let mut records = Vec::new();
    for &ebno in &cfg.sweep.ebno_db {
        let key = format!("{ebno}");
        if done.contains(&key) {
            continue;
        }
        let params = ChannelParams::new(ebno, cfg.sweep.rate_basis.rate(&cfg.code))?;
        let mut record = run_fer_point(
            &codec,
            &cfg.decoder,
            &params,
            &stop,
            cfg.sweep.seed,
            cfg.sweep.workers,
        )?;
        record.fingerprint = fingerprint.clone();
        if let Some(file) = sink.as_mut() {
            writeln!(file, "{}", record.to_csv_row())?;
            file.flush()?;
        }
        records.push(record);
    }
    Ok(records)
}
