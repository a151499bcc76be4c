//! Unit-upper-triangular pre-transformation.
//!
//! The message vector is multiplied by an `N×N` matrix `T` with unit
//! diagonal and (optionally random) strict-upper content before the polar
//! transform. Rows are stored sparsely as lists of set strict-upper
//! columns, plus packed masks for the decoder's running accumulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf2::BitWord;
use crate::{Error, Result};

/// A unit-upper-triangular GF(2) matrix with reproducible provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    n: usize,
    /// Strict-upper set columns per row, ascending.
    rows: Vec<Vec<u32>>,
    /// Strict-upper content of each row as a packed `n`-bit mask.
    row_masks: Vec<BitWord>,
    seed: Option<u64>,
    density: f64,
}

impl UpperTriangular {
    /// The identity matrix, i.e. no pre-transformation.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
            row_masks: vec![BitWord::zeros(n); n],
            seed: None,
            density: 0.0,
        }
    }

    /// Samples the strict-upper entries i.i.d. Bernoulli(`density`) from a
    /// ChaCha stream seeded by `seed`, row-major order. The same
    /// `(n, seed, density)` always reproduces the same matrix.
    pub fn sample(n: usize, seed: u64, density: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::InvalidInput(format!(
                "density {density} outside [0, 1]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut row_masks = Vec::with_capacity(n);
        for i in 0..n {
            let mut cols = Vec::new();
            let mut mask = BitWord::zeros(n);
            for j in i + 1..n {
                if rng.random_bool(density) {
                    cols.push(j as u32);
                    mask.set(j, true);
                }
            }
            rows.push(cols);
            row_masks.push(mask);
        }
        Ok(Self {
            n,
            rows,
            row_masks,
            seed: Some(seed),
            density,
        })
    }

    /// Builds a matrix from explicit strict-upper columns per row, for
    /// externally supplied pre-transforms.
    pub fn from_strict_upper(n: usize, strict_upper: &[Vec<u32>]) -> Result<Self> {
        if strict_upper.len() != n {
            return Err(Error::Shape(format!(
                "{} rows supplied for dimension {n}",
                strict_upper.len()
            )));
        }
        let mut rows = Vec::with_capacity(n);
        let mut row_masks = Vec::with_capacity(n);
        for (i, cols) in strict_upper.iter().enumerate() {
            let mut cols = cols.clone();
            cols.sort_unstable();
            cols.dedup();
            let mut mask = BitWord::zeros(n);
            for &j in &cols {
                if j as usize <= i || j as usize >= n {
                    return Err(Error::Shape(format!(
                        "entry ({i}, {j}) is not strictly upper for dimension {n}"
                    )));
                }
                mask.set(j as usize, true);
            }
            rows.push(cols);
            row_masks.push(mask);
        }
        Ok(Self {
            n,
            rows,
            row_masks,
            seed: None,
            density: f64::NAN,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    /// Seed used to sample the matrix, if it was sampled.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// Strict-upper set columns of row `i`, ascending.
    pub fn strict_upper_cols(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    /// Strict-upper content of row `i` as a packed mask.
    pub fn row_mask(&self, i: usize) -> &BitWord {
        &self.row_masks[i]
    }

    /// Entry `T[i][j]`.
    pub fn get(&self, i: usize, j: usize) -> bool {
        if i == j {
            true
        } else if i > j {
            false
        } else {
            self.row_masks[i].get(j)
        }
    }

    /// `v = u × T`: `v[j] = u[j] ⊕ XOR_{i<j} u[i]·T[i][j]`.
    pub fn apply(&self, u: &BitWord) -> Result<BitWord> {
        if u.len() != self.n {
            return Err(Error::Shape(format!(
                "{}-bit vector through a {0}x{0}-for-{1} pre-transform",
                self.n,
                u.len()
            )));
        }
        let mut v = u.clone();
        for i in 0..self.n {
            if u.get(i) {
                v.xor_assign(&self.row_masks[i])?;
            }
        }
        Ok(v)
    }

    /// Inverse of [`UpperTriangular::apply`] by forward substitution on
    /// the unit diagonal.
    pub fn invert(&self, v: &BitWord) -> Result<BitWord> {
        if v.len() != self.n {
            return Err(Error::Shape(format!(
                "{}-bit vector through a {0}x{0}-for-{1} pre-transform",
                self.n,
                v.len()
            )));
        }
        let mut u = v.clone();
        for i in 0..self.n {
            if u.get(i) {
                // u[i] is now final; push its contribution to later rows.
                u.xor_assign(&self.row_masks[i])?;
                u.set(i, true); // the mask is strictly upper, keep the pivot
            }
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_density_is_identity() {
        let t = UpperTriangular::sample(16, 9, 0.0).unwrap();
        assert!(t.is_identity());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = BitWord::random(16, &mut rng);
        assert_eq!(t.apply(&u).unwrap(), u);
        assert_eq!(t.invert(&u).unwrap(), u);
    }

    #[test]
    fn one_by_one_is_the_unit() {
        let t = UpperTriangular::sample(1, 5, 0.7).unwrap();
        assert!(t.get(0, 0));
        let u = BitWord::from_bits(&[1]);
        assert_eq!(t.apply(&u).unwrap(), u);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = UpperTriangular::sample(8, 42, 0.5).unwrap();
        let b = UpperTriangular::sample(8, 42, 0.5).unwrap();
        assert_eq!(a, b);
        let c = UpperTriangular::sample(8, 43, 0.5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn triangular_shape_holds() {
        let t = UpperTriangular::sample(32, 1, 0.8).unwrap();
        for i in 0..32 {
            assert!(t.get(i, i));
            for j in 0..i {
                assert!(!t.get(i, j));
            }
            for &j in t.strict_upper_cols(i) {
                assert!(j as usize > i);
            }
        }
    }

    #[test]
    fn worked_three_bit_example() {
        // T has a single strict-upper one at row 0, column 2:
        // v[2] = u[2] ⊕ u[0], so [1,0,0] maps to [1,0,1] and back.
        let t = UpperTriangular::from_strict_upper(3, &[vec![2], vec![], vec![]]).unwrap();
        let u = BitWord::from_bits(&[1, 0, 0]);
        let v = t.apply(&u).unwrap();
        assert_eq!(v, BitWord::from_bits(&[1, 0, 1]));
        assert_eq!(t.invert(&v).unwrap(), u);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let t = UpperTriangular::identity(8);
        assert!(t.apply(&BitWord::zeros(7)).is_err());
        assert!(t.invert(&BitWord::zeros(9)).is_err());
    }

    #[test]
    fn explicit_construction_validates_shape() {
        assert!(UpperTriangular::from_strict_upper(3, &[vec![1], vec![]]).is_err());
        assert!(UpperTriangular::from_strict_upper(3, &[vec![0], vec![], vec![]]).is_err());
        assert!(UpperTriangular::from_strict_upper(3, &[vec![3], vec![], vec![]]).is_err());
        let t = UpperTriangular::from_strict_upper(3, &[vec![2, 1], vec![2], vec![]]).unwrap();
        assert!(t.get(0, 1) && t.get(0, 2) && t.get(1, 2));
    }

    #[test]
    fn bad_density_rejected() {
        assert!(UpperTriangular::sample(4, 0, -0.1).is_err());
        assert!(UpperTriangular::sample(4, 0, 1.5).is_err());
    }

    #[test]
    fn apply_is_linear() {
        let t = UpperTriangular::sample(64, 77, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let a = BitWord::random(64, &mut rng);
            let b = BitWord::random(64, &mut rng);
            let mut ab = a.clone();
            ab.xor_assign(&b).unwrap();
            let mut rhs = t.apply(&a).unwrap();
            rhs.xor_assign(&t.apply(&b).unwrap()).unwrap();
            assert_eq!(t.apply(&ab).unwrap(), rhs);
        }
    }

    proptest! {
        #[test]
        fn invert_undoes_apply(seed in any::<u64>(), density in 0.0f64..=1.0, bits in proptest::collection::vec(0u8..=1, 1..=96)) {
            let n = bits.len();
            let t = UpperTriangular::sample(n, seed, density).unwrap();
            let u = BitWord::from_bits(&bits);
            let v = t.apply(&u).unwrap();
            prop_assert_eq!(t.invert(&v).unwrap(), u);
        }
    }
}
