//! Bit-serial CRC of configurable width.
//!
//! Conventions are fixed once: the generator is given with its leading
//! coefficient explicit (so a width-`w` polynomial has bit `w` set), the
//! register is preloaded with `init`, the first payload bit is processed
//! first, and there is no reflection or final XOR. With `init = 0` the
//! map payload → CRC bits is linear over GF(2), which the distance
//! estimators rely on.

use crate::gf2::BitWord;
use crate::{Error, Result};

/// Maximum supported CRC width in bits.
pub const MAX_WIDTH: usize = 16;

/// A CRC generator polynomial plus register conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrcPoly {
    width: usize,
    generator: u32,
    init: u32,
}

impl CrcPoly {
    /// Builds a polynomial of degree `width`; `generator` carries the
    /// leading coefficient (bit `width` must be set).
    pub fn new(width: usize, generator: u32, init: u32) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::InvalidInput(format!(
                "CRC width {width} outside 1..={MAX_WIDTH}"
            )));
        }
        if generator >> width != 1 {
            return Err(Error::InvalidInput(format!(
                "generator {generator:#x} does not have degree {width}"
            )));
        }
        if init >> width != 0 {
            return Err(Error::InvalidInput(format!(
                "init {init:#x} wider than {width} bits"
            )));
        }
        Ok(Self {
            width,
            generator,
            init,
        })
    }

    /// The stock polynomial for a width, `init = 0`.
    ///
    /// Widths without an entry must be given explicitly.
    pub fn default_for_width(width: usize) -> Result<Self> {
        let generator = match width {
            3 => 0xB,
            5 => 0x25,
            6 => 0x61,
            7 => 0x89,
            8 => 0x1D5,
            9 => 0x313,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "no default generator for CRC width {width}; pass one explicitly"
                )))
            }
        };
        Self::new(width, generator, 0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    pub fn init(&self) -> u32 {
        self.init
    }

    /// Runs the division register over `bits`, returning the remainder.
    fn run_register(&self, word: &BitWord) -> u32 {
        let mask = (1u32 << self.width) - 1;
        let g_low = self.generator & mask;
        let mut reg = self.init;
        for i in 0..word.len() {
            let top = (reg >> (self.width - 1)) & 1;
            reg = (reg << 1) & mask;
            if top ^ word.get(i) as u32 == 1 {
                reg ^= g_low;
            }
        }
        reg
    }

    /// The `width` CRC bits for `payload`, MSB of the register first.
    pub fn remainder(&self, payload: &BitWord) -> BitWord {
        let reg = self.run_register(payload);
        let mut out = BitWord::zeros(self.width);
        for i in 0..self.width {
            if (reg >> (self.width - 1 - i)) & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    /// `payload` with its CRC bits appended; the result passes
    /// [`CrcPoly::check`].
    pub fn append(&self, payload: &BitWord) -> BitWord {
        payload.concat(&self.remainder(payload))
    }

    /// True iff `word` divides the generator exactly (given `init`).
    pub fn check(&self, word: &BitWord) -> Result<bool> {
        if word.len() < self.width {
            return Err(Error::Shape(format!(
                "word of {} bits is shorter than the {}-bit CRC",
                word.len(),
                self.width
            )));
        }
        Ok(self.run_register(word) == 0)
    }
}
