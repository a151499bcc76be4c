//! End-to-end encoder and decode entry points for one configured code.
//!
//! A [`Codec`] freezes everything derived from a [`CodeSpec`]: the
//! information set, the pre-transformation, and the CRC. Encoding places
//! payload-then-CRC bits at the information positions in increasing
//! position order, runs the vector through `T`, then through the polar
//! butterfly. Decoding lives in [`crate::scl`]; the methods here wrap it
//! with CRC selection and adaptive list scheduling.

use crate::construction::{select_info_set, CodeSpec, InfoSet, TSource};
use crate::crc::CrcPoly;
use crate::gf2::{polar_transform_in_place, BitWord};
use crate::pretransform::UpperTriangular;
use crate::scl::SclDecoder;
use crate::{Error, Result};

/// A fully-resolved code: spec, information set, `T`, and CRC.
#[derive(Debug, Clone)]
pub struct Codec {
    spec: CodeSpec,
    info_set: InfoSet,
    t: UpperTriangular,
    poly: Option<CrcPoly>,
    frozen: Vec<bool>,
}

/// Result of one decode call.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    /// Decoded payload, `k` bits.
    pub payload: BitWord,
    /// The selected path's full `u` vector.
    pub u_hat: BitWord,
    /// Whether the selected path passed the CRC (`true` when no CRC).
    pub crc_pass: bool,
    /// Path metric of the selected path; lower is better.
    pub selected_metric: f64,
    /// Genie flag: an ML decoder would also have erred. Left `false` by
    /// the decoder, filled in by [`Codec::genie_ml_flag`] callers.
    pub ml_lb_flag: bool,
    /// List size that produced this outcome.
    pub list_size_used: usize,
}

impl Codec {
    /// Resolves `spec` into a ready-to-use codec.
    pub fn new(spec: CodeSpec) -> Result<Self> {
        spec.validate()?;
        let info_set = select_info_set(&spec)?;
        let t = match spec.t_source {
            TSource::Identity => UpperTriangular::identity(spec.n),
            TSource::SeededRandom { seed, density } => {
                UpperTriangular::sample(spec.n, seed, density)?
            }
        };
        let poly = if spec.k_crc > 0 {
            Some(match spec.crc_generator {
                Some(g) => CrcPoly::new(spec.k_crc, g, 0)?,
                None => CrcPoly::default_for_width(spec.k_crc)?,
            })
        } else {
            None
        };
        Self::from_parts(spec, info_set, t, poly)
    }

    /// Assembles a codec from parts built elsewhere.
    pub fn from_parts(
        spec: CodeSpec,
        info_set: InfoSet,
        t: UpperTriangular,
        poly: Option<CrcPoly>,
    ) -> Result<Self> {
        spec.validate()?;
        if info_set.info_positions.len() != spec.k_total() {
            return Err(Error::Construction(format!(
                "info set holds {} positions, spec needs {}",
                info_set.info_positions.len(),
                spec.k_total()
            )));
        }
        if t.dim() != spec.n {
            return Err(Error::Shape(format!(
                "pre-transform is {}x{0}, block length is {}",
                t.dim(),
                spec.n
            )));
        }
        match (&poly, spec.k_crc) {
            (None, 0) => {}
            (Some(p), w) if p.width() == w => {}
            _ => {
                return Err(Error::Construction(
                    "CRC width does not match k_crc".into(),
                ))
            }
        }
        let mut frozen = vec![true; spec.n];
        for &i in &info_set.info_positions {
            frozen[i as usize] = false;
        }
        Ok(Self {
            spec,
            info_set,
            t,
            poly,
            frozen,
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn info_set(&self) -> &InfoSet {
        &self.info_set
    }

    pub fn pretransform(&self) -> &UpperTriangular {
        &self.t
    }

    pub fn crc(&self) -> Option<&CrcPoly> {
        self.poly.as_ref()
    }

    pub fn block_len(&self) -> usize {
        self.spec.n
    }

    pub fn payload_len(&self) -> usize {
        self.spec.k
    }

    #[inline]
    pub fn is_frozen(&self, position: usize) -> bool {
        self.frozen[position]
    }

    /// Payload with CRC bits appended (the information vector).
    pub fn info_vector(&self, payload: &BitWord) -> Result<BitWord> {
        if payload.len() != self.spec.k {
            return Err(Error::Shape(format!(
                "payload of {} bits, expected {}",
                payload.len(),
                self.spec.k
            )));
        }
        Ok(match &self.poly {
            Some(p) => p.append(payload),
            None => payload.clone(),
        })
    }

    /// Scatters an information vector onto the `u` positions.
    pub fn build_u(&self, info_vec: &BitWord) -> Result<BitWord> {
        if info_vec.len() != self.spec.k_total() {
            return Err(Error::Shape(format!(
                "information vector of {} bits, expected {}",
                info_vec.len(),
                self.spec.k_total()
            )));
        }
        let mut u = BitWord::zeros(self.spec.n);
        for (t, &pos) in self.info_set.info_positions.iter().enumerate() {
            if info_vec.get(t) {
                u.set(pos as usize, true);
            }
        }
        Ok(u)
    }

    /// `x = u × T × H_N` for an already-assembled `u`.
    pub fn encode_u(&self, u: &BitWord) -> Result<BitWord> {
        let mut v = self.t.apply(u)?;
        polar_transform_in_place(&mut v);
        Ok(v)
    }

    /// Encodes a `k`-bit payload into an `n`-bit codeword.
    pub fn encode(&self, payload: &BitWord) -> Result<BitWord> {
        let info_vec = self.info_vector(payload)?;
        let u = self.build_u(&info_vec)?;
        self.encode_u(&u)
    }

    /// The information sub-vector of a decoded `u`.
    pub fn extract_info(&self, u: &BitWord) -> BitWord {
        u.gather(&self.info_set.info_positions)
    }

    /// Payload portion (CRC tail dropped) of a decoded `u`.
    pub fn extract_payload(&self, u: &BitWord) -> BitWord {
        let mut payload = BitWord::zeros(self.spec.k);
        for (t, &pos) in self.info_set.info_positions[..self.spec.k].iter().enumerate() {
            if u.get(pos as usize) {
                payload.set(t, true);
            }
        }
        payload
    }

    /// True iff the information content of `u` satisfies the CRC.
    /// Codes without a CRC accept everything.
    pub fn crc_pass(&self, u: &BitWord) -> bool {
        match &self.poly {
            Some(p) => p
                .check(&self.extract_info(u))
                .expect("info vector at least as wide as the CRC"),
            None => true,
        }
    }

    /// One-shot SCL decode with a fresh workspace. Hot loops should hold
    /// an [`SclDecoder`] and call it directly.
    pub fn scl_decode(&self, llrs: &[f64], list_size: usize) -> Result<DecodeOutcome> {
        let mut dec = SclDecoder::new(self.block_len(), list_size)?;
        dec.decode(self, llrs, list_size)
    }

    /// Doubles the list size from 1 until a path passes the CRC or
    /// `l_max` is reached; returns the first success or the final try.
    pub fn adaptive_scl_decode(&self, llrs: &[f64], l_max: usize) -> Result<DecodeOutcome> {
        let mut dec = SclDecoder::new(self.block_len(), l_max)?;
        self.adaptive_scl_decode_with(&mut dec, llrs, l_max)
    }

    /// Adaptive decode reusing a caller-owned workspace.
    ///
    /// Intermediate attempts terminate only when the list's best-metric
    /// path itself passes the CRC; a CRC pass on a worse path escalates
    /// instead. With short CRCs an accept-any-passer rule false-stops
    /// often enough to multiply the frame error rate, breaking parity
    /// with the fixed-`l_max` decoder. The final attempt applies the
    /// ordinary selection (best passing path, else best overall).
    pub fn adaptive_scl_decode_with(
        &self,
        dec: &mut SclDecoder,
        llrs: &[f64],
        l_max: usize,
    ) -> Result<DecodeOutcome> {
        if self.poly.is_none() {
            return Err(Error::InvalidInput(
                "adaptive decoding needs a CRC to test against".into(),
            ));
        }
        if !l_max.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "adaptive list bound {l_max} is not a power of two"
            )));
        }
        let mut l = 1;
        loop {
            let outcome = dec.decode(self, llrs, l)?;
            if l >= l_max
                || (outcome.crc_pass && outcome.selected_metric <= dec.best_active_metric())
            {
                return Ok(outcome);
            }
            l *= 2;
        }
    }

    /// Path metric the transmitted word would have scored on `llrs`.
    pub fn transmitted_metric(&self, llrs: &[f64], transmitted_u: &BitWord) -> Result<f64> {
        let mut dec = SclDecoder::new(self.block_len(), 1)?;
        dec.forced_metric(self, llrs, transmitted_u)
    }

    /// Genie ML lower-bound flag: the decoder erred and its winning path
    /// scored strictly better than the transmitted word, so a
    /// maximum-likelihood decoder errs on this frame too.
    pub fn genie_ml_flag(
        &self,
        outcome: &DecodeOutcome,
        transmitted_u: &BitWord,
        llrs: &[f64],
    ) -> Result<bool> {
        let tx_payload = self.extract_payload(transmitted_u);
        if outcome.payload == tx_payload {
            return Ok(false);
        }
        let pm_tx = self.transmitted_metric(llrs, transmitted_u)?;
        Ok(outcome.selected_metric < pm_tx)
    }
}

/// Forced value of the decoder-side symbol `v[j]` for a frozen `u[j]`:
/// the XOR of `u[i]·T[i][j]` over already-decided `i < j`.
pub fn dynamic_frozen_value(t: &UpperTriangular, u_prefix: &BitWord, j: usize) -> Result<u8> {
    if u_prefix.len() < j {
        return Err(Error::Shape(format!(
            "prefix of {} bits cannot determine position {j}",
            u_prefix.len()
        )));
    }
    let mut acc = 0u8;
    for i in 0..j {
        if u_prefix.get(i) && t.row_mask(i).get(j) {
            acc ^= 1;
        }
    }
    Ok(acc)
}
