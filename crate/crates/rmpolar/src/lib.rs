//! Pre-transformed RM-Polar codes.
//!
//! This crate builds polar-family block codes from the Kronecker kernel
//! `F = [1 0; 1 1]`, optionally restricts the information set to heavy
//! rows (RM-Polar), applies a unit-upper-triangular pre-transformation,
//! and concatenates a CRC. It ships an LLR-based successive-cancellation
//! list decoder with dynamic frozen bits, distance-spectrum estimators
//! (exhaustive and list-probe), a BPSK/AWGN Monte Carlo harness with
//! reproducible seeded parallelism, and a normal-approximation baseline
//! for finite-blocklength comparisons.
//!
//! Bit-index convention: everything is 0-based and uses the natural
//! (non-bit-reversed) ordering of `F^{⊗n}` throughout.

pub mod analysis;
pub mod channel;
pub mod codec;
pub mod construction;
pub mod crc;
pub mod gf2;
mod par;
pub mod pretransform;
pub mod scl;
pub mod sim;

pub use analysis::{SpectrumEstimate, SpectrumMethod};
pub use channel::ChannelParams;
pub use codec::{Codec, DecodeOutcome};
pub use construction::{CodeFlavor, CodeSpec, InfoSet, TSource, WeightThreshold};
pub use crc::CrcPoly;
pub use gf2::{BitMatrix, BitWord};
pub use pretransform::UpperTriangular;
pub use scl::SclDecoder;
pub use sim::{DecoderConfig, FerRecord, RateBasis, StopRule};

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("size limit exceeded: {what} = {got}, maximum {max}")]
    SizeLimit {
        what: &'static str,
        got: usize,
        max: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
