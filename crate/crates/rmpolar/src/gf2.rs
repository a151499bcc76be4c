//! Dense GF(2) linear algebra on bit-packed storage.
//!
//! [`BitWord`] is a fixed-length bit vector packed into `u64` limbs,
//! [`BitMatrix`] a row-major packed matrix. Values are immutable after
//! construction in all hot paths, so they can be shared freely across
//! worker threads. Bit `i` of a word lives in limb `i / 64`, position
//! `i % 64` (LSB first).

use crate::{Error, Result};

/// Largest exponent accepted by [`kronecker_power`].
pub const MAX_KRONECKER_EXPONENT: usize = 20;

const WORD_BITS: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask selecting the valid bits of the last limb.
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A fixed-length bit vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    words: Vec<u64>,
    len: usize,
}

impl BitWord {
    /// All-zero word of `len` bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    /// Builds a word from `{0,1}` bytes in transmission order.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut w = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            debug_assert!(b <= 1, "bit values must be 0 or 1");
            if b != 0 {
                w.set(i, true);
            }
        }
        w
    }

    /// Uniformly random word drawn from `rng`.
    pub fn random<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..words_for(len)).map(|_| rng.next_u64()).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    /// XORs `other` into `self`; lengths must match.
    pub fn xor_assign(&mut self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::Shape(format!(
                "xor of {}-bit and {}-bit words",
                self.len, other.len
            )));
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Number of set bits.
    pub fn weight(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Backing limbs, LSB-first.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Bits as `{0,1}` bytes in transmission order.
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Gathers the bits at `positions` into a new word.
    pub fn gather(&self, positions: &[u32]) -> Self {
        let mut out = Self::zeros(positions.len());
        for (t, &p) in positions.iter().enumerate() {
            if self.get(p as usize) {
                out.set(t, true);
            }
        }
        out
    }

    /// Concatenation `self ++ tail`.
    pub fn concat(&self, tail: &Self) -> Self {
        let mut out = Self::zeros(self.len + tail.len);
        for i in 0..self.len {
            if self.get(i) {
                out.set(i, true);
            }
        }
        for i in 0..tail.len {
            if tail.get(i) {
                out.set(self.len + i, true);
            }
        }
        out
    }

    /// Renders as a `0`/`1` string in transmission order.
    pub fn to_bin_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    /// Parses a `0`/`1` string in transmission order.
    pub fn from_bin_str(s: &str) -> Result<Self> {
        let mut w = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => w.set(i, true),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "invalid binary digit {other:?} at offset {i}"
                    )))
                }
            }
        }
        Ok(w)
    }

    /// Hex rendering; the first bit is the MSB of the first digit.
    /// Requires the length to be a multiple of 4.
    pub fn to_hex_string(&self) -> Result<String> {
        if !self.len.is_multiple_of(4) {
            return Err(Error::Shape(format!(
                "hex output needs a multiple-of-4 length, got {}",
                self.len
            )));
        }
        let mut s = String::with_capacity(self.len / 4);
        for nib in 0..self.len / 4 {
            let mut v = 0u8;
            for k in 0..4 {
                v = (v << 1) | self.get(nib * 4 + k) as u8;
            }
            s.push(char::from_digit(v as u32, 16).unwrap());
        }
        Ok(s)
    }

    /// Parses the hex form produced by [`BitWord::to_hex_string`].
    pub fn from_hex_str(s: &str) -> Result<Self> {
        let mut w = Self::zeros(s.len() * 4);
        for (nib, c) in s.chars().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::InvalidInput(format!("invalid hex digit {c:?}")))?
                as u8;
            for k in 0..4 {
                if (v >> (3 - k)) & 1 == 1 {
                    w.set(nib * 4 + k, true);
                }
            }
        }
        Ok(w)
    }
}

impl std::fmt::Debug for BitWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.len <= 64 {
            write!(f, "BitWord({})", self.to_bin_string())
        } else {
            write!(f, "BitWord(len={}, weight={})", self.len, self.weight())
        }
    }
}

/// A dense GF(2) matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let wpr = words_for(cols);
        Self {
            rows,
            cols,
            words_per_row: wpr,
            data: vec![0; rows * wpr],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let w = self.data[r * self.words_per_row + c / WORD_BITS];
        (w >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let idx = r * self.words_per_row + c / WORD_BITS;
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    /// Packed limbs of row `r`.
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub fn row_bitword(&self, r: usize) -> BitWord {
        BitWord {
            words: self.row(r).to_vec(),
            len: self.cols,
        }
    }

    /// GF(2) product `self × other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let (dst_start, dst_end) = (r * out.words_per_row, (r + 1) * out.words_per_row);
            for j in 0..self.cols {
                if self.get(r, j) {
                    let src = other.row(j);
                    for (d, s) in out.data[dst_start..dst_end].iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        Ok(out)
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        if self.rows <= 16 && self.cols <= 64 {
            for r in 0..self.rows {
                writeln!(f, "  {}", self.row_bitword(r).to_bin_string())?;
            }
        }
        Ok(())
    }
}

/// Row-vector times matrix over GF(2): `result[j] = XOR_i v[i]·m[i][j]`.
pub fn gf2_vec_mat_mul(v: &BitWord, m: &BitMatrix) -> Result<BitWord> {
    if v.len() != m.rows() {
        return Err(Error::Shape(format!(
            "{}-bit vector times {}x{} matrix",
            v.len(),
            m.rows(),
            m.cols()
        )));
    }
    let mut out = BitWord::zeros(m.cols());
    for i in 0..v.len() {
        if v.get(i) {
            for (d, s) in out.words.iter_mut().zip(m.row(i)) {
                *d ^= s;
            }
        }
    }
    Ok(out)
}

/// The polar kernel power `H_N = F^{⊗n}`, `N = 2^n`, built by doubling:
/// `H_{2N} = [[H_N, 0], [H_N, H_N]]`. Lower-triangular with unit diagonal
/// in the natural bit ordering.
pub fn kronecker_power(n: usize) -> Result<BitMatrix> {
    if n > MAX_KRONECKER_EXPONENT {
        return Err(Error::SizeLimit {
            what: "kronecker exponent",
            got: n,
            max: MAX_KRONECKER_EXPONENT,
        });
    }
    let mut m = BitMatrix::identity(1);
    for _ in 0..n {
        let sz = m.rows;
        let mut next = BitMatrix::zeros(2 * sz, 2 * sz);
        for r in 0..sz {
            for c in 0..sz {
                if m.get(r, c) {
                    next.set(r, c, true);
                    next.set(sz + r, c, true);
                    next.set(sz + r, sz + c, true);
                }
            }
        }
        m = next;
    }
    Ok(m)
}

/// Hamming weight of row `i` (0-based) of `F^{⊗n}`: `2^popcount(i)`.
pub fn row_weight(n: usize, i: usize) -> Result<u64> {
    if n > MAX_KRONECKER_EXPONENT {
        return Err(Error::SizeLimit {
            what: "kronecker exponent",
            got: n,
            max: MAX_KRONECKER_EXPONENT,
        });
    }
    if i >= (1usize << n) {
        return Err(Error::InvalidInput(format!(
            "row index {i} out of range for N = {}",
            1usize << n
        )));
    }
    Ok(1u64 << i.count_ones())
}

/// In-place multiplication by `F^{⊗n}` (the encode butterfly).
///
/// Stage `s` XORs the lane `i+s` into lane `i` for every `i` whose bit `s`
/// is clear; stages commute, so ascending order is as good as any. Steps
/// below the limb width run as masked shifts inside each limb.
pub fn polar_transform_in_place(w: &mut BitWord) {
    let n = w.len();
    assert!(n.is_power_of_two(), "polar transform needs a power-of-two length");
    let words = &mut w.words;
    let mut step = 1usize;
    while step < n {
        if step < WORD_BITS {
            let mask = lane_mask(step);
            for limb in words.iter_mut() {
                *limb ^= (*limb >> step) & mask;
            }
        } else {
            let sw = step / WORD_BITS;
            let mut base = 0;
            while base < words.len() {
                for k in 0..sw {
                    words[base + k] ^= words[base + sw + k];
                }
                base += 2 * sw;
            }
        }
        step <<= 1;
    }
}

/// Limb mask with the low `s` bits of every `2s` group set, `s < 64`.
fn lane_mask(s: usize) -> u64 {
    match s {
        1 => 0x5555_5555_5555_5555,
        2 => 0x3333_3333_3333_3333,
        4 => 0x0f0f_0f0f_0f0f_0f0f,
        8 => 0x00ff_00ff_00ff_00ff,
        16 => 0x0000_ffff_0000_ffff,
        32 => 0x0000_0000_ffff_ffff,
        _ => unreachable!("lane widths are powers of two below 64"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matrix_from_rows(rows: &[&[u8]]) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b == 1);
            }
        }
        m
    }

    #[test]
    fn kronecker_base_cases() {
        assert_eq!(kronecker_power(0).unwrap(), matrix_from_rows(&[&[1]]));
        assert_eq!(
            kronecker_power(1).unwrap(),
            matrix_from_rows(&[&[1, 0], &[1, 1]])
        );
        assert_eq!(
            kronecker_power(2).unwrap(),
            matrix_from_rows(&[
                &[1, 0, 0, 0],
                &[1, 1, 0, 0],
                &[1, 0, 1, 0],
                &[1, 1, 1, 1]
            ])
        );
    }

    #[test]
    fn kronecker_exponent_limit() {
        assert!(matches!(
            kronecker_power(MAX_KRONECKER_EXPONENT + 1),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn kronecker_matches_subset_support_formula() {
        // Independent route: entry (r, c) of F^{⊗n} is 1 iff c is a bitwise
        // subset of r.
        for n in 0..=6 {
            let m = kronecker_power(n).unwrap();
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    assert_eq!(m.get(r, c), (c & r) == c, "n={n} r={r} c={c}");
                }
            }
        }
    }

    #[test]
    fn kronecker_is_lower_triangular_with_unit_diagonal() {
        let m = kronecker_power(5).unwrap();
        for r in 0..m.rows() {
            assert!(m.get(r, r));
            for c in r + 1..m.cols() {
                assert!(!m.get(r, c));
            }
        }
    }

    #[test]
    fn kronecker_involution_up_to_n10() {
        for n in 0..=10 {
            let h = kronecker_power(n).unwrap();
            let sq = h.mul(&h).unwrap();
            assert_eq!(sq, BitMatrix::identity(1 << n), "H^2 != I at n={n}");
        }
    }

    #[test]
    fn row_weight_formula_matches_constructed_rows() {
        for n in 0..=10 {
            let h = kronecker_power(n).unwrap();
            for i in 0..(1usize << n) {
                assert_eq!(
                    row_weight(n, i).unwrap(),
                    h.row_bitword(i).weight(),
                    "n={n} i={i}"
                );
            }
        }
    }

    #[test]
    fn row_weight_endpoints() {
        assert_eq!(row_weight(8, 0).unwrap(), 1);
        assert_eq!(row_weight(8, 255).unwrap(), 256);
        // 0-based index 5: popcount(0b101) = 2, so weight 4.
        assert_eq!(row_weight(3, 5).unwrap(), 4);
        assert!(row_weight(3, 8).is_err());
    }

    #[test]
    fn vec_mat_mul_basics() {
        let f = kronecker_power(1).unwrap();
        let v = BitWord::from_bits(&[1, 1]);
        assert_eq!(
            gf2_vec_mat_mul(&v, &f).unwrap(),
            BitWord::from_bits(&[0, 1])
        );

        let id = BitMatrix::identity(16);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let v = BitWord::random(16, &mut rng);
            assert_eq!(gf2_vec_mat_mul(&v, &id).unwrap(), v);
        }
        let z = BitWord::zeros(16);
        let h = kronecker_power(4).unwrap();
        assert!(gf2_vec_mat_mul(&z, &h).unwrap().is_zero());
        assert!(gf2_vec_mat_mul(&BitWord::zeros(3), &h).is_err());
    }

    #[test]
    fn vec_mat_mul_distributes_over_xor() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = kronecker_power(6).unwrap();
        for _ in 0..50 {
            let a = BitWord::random(64, &mut rng);
            let b = BitWord::random(64, &mut rng);
            let mut ab = a.clone();
            ab.xor_assign(&b).unwrap();
            let mut rhs = gf2_vec_mat_mul(&a, &h).unwrap();
            rhs.xor_assign(&gf2_vec_mat_mul(&b, &h).unwrap()).unwrap();
            assert_eq!(gf2_vec_mat_mul(&ab, &h).unwrap(), rhs);
        }
    }

    #[test]
    fn butterfly_agrees_with_matrix_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..=8 {
            let h = kronecker_power(n).unwrap();
            for _ in 0..10 {
                let v = BitWord::random(1 << n, &mut rng);
                let mut fast = v.clone();
                polar_transform_in_place(&mut fast);
                assert_eq!(fast, gf2_vec_mat_mul(&v, &h).unwrap(), "n={n}");
            }
        }
    }

    #[test]
    fn butterfly_large_block_uses_word_path() {
        // N = 256 exercises both the masked-shift and whole-limb branches.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = kronecker_power(8).unwrap();
        let v = BitWord::random(256, &mut rng);
        let mut fast = v.clone();
        polar_transform_in_place(&mut fast);
        assert_eq!(fast, gf2_vec_mat_mul(&v, &h).unwrap());
    }

    #[test]
    fn bitword_xor_self_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for len in [0usize, 1, 63, 64, 65, 200] {
            let w = BitWord::random(len, &mut rng);
            let mut x = w.clone();
            x.xor_assign(&w).unwrap();
            assert!(x.is_zero(), "len={len}");
        }
    }

    #[test]
    fn bitword_string_roundtrips() {
        let w = BitWord::from_bits(&[1, 0, 1, 1, 0, 0, 1, 0]);
        assert_eq!(w.to_bin_string(), "10110010");
        assert_eq!(BitWord::from_bin_str("10110010").unwrap(), w);
        assert_eq!(w.to_hex_string().unwrap(), "b2");
        assert_eq!(BitWord::from_hex_str("b2").unwrap(), w);
        assert!(BitWord::from_bits(&[1, 0, 1]).to_hex_string().is_err());
        assert!(BitWord::from_bin_str("10x").is_err());
    }

    #[test]
    fn bitword_gather_and_concat() {
        let w = BitWord::from_bits(&[1, 0, 1, 1, 0]);
        assert_eq!(w.gather(&[0, 2, 4]), BitWord::from_bits(&[1, 1, 0]));
        let tail = BitWord::from_bits(&[1, 1]);
        assert_eq!(w.concat(&tail), BitWord::from_bits(&[1, 0, 1, 1, 0, 1, 1]));
    }
}
