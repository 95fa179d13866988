//! Congruence of finite integer sequences, complete residue systems, and
//! witness verification.
//!
//! Residues are normalized to `[0, n)`. The canonical representative set
//! `{1, ..., n}` only shows up at the boundary: permutations are 1-indexed and
//! take values in `[1, n]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modarith::pow_mod_u;

/// Largest modulus for which a [`PowerTable`] is built unless the caller
/// asks for a different cap.
pub const DEFAULT_TABLE_CAP: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResidueError {
    #[error("sequence has length {len}, expected {expected}")]
    LengthMismatch { len: usize, expected: usize },
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("sigma is not a permutation of 1..={n}: {detail}")]
    NotAPermutation { n: u64, detail: String },
    #[error("powers are not a complete residue system mod {n}: class {class} is hit by bases {first} and {second}")]
    NotACrs {
        n: u64,
        class: u64,
        first: u64,
        second: u64,
    },
    #[error("power table for n = {n} exceeds the cap of {cap}")]
    CapExceeded { n: u64, cap: u64 },
}

/// True iff the residues of `values` mod `n` are pairwise distinct.
pub fn is_crs(values: &[i64], n: u64) -> Result<bool, ResidueError> {
    if n < 2 {
        return Err(ResidueError::ModulusTooSmall(n));
    }
    if values.len() as u64 != n {
        return Err(ResidueError::LengthMismatch {
            len: values.len(),
            expected: n as usize,
        });
    }
    let mut seen = vec![false; n as usize];
    for &v in values {
        let r = v.rem_euclid(n as i64) as usize;
        if std::mem::replace(&mut seen[r], true) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `A ~_m B`: some bijection pairs each element of `A` with a congruent element of `B`.
///
/// Decided by comparing residue counts, which is equivalent to the existence of the bijection.
pub fn check_sim(a: &[i64], b: &[i64], m: u64) -> Result<bool, ResidueError> {
    if m < 2 {
        return Err(ResidueError::ModulusTooSmall(m));
    }
    if a.len() != b.len() {
        return Err(ResidueError::LengthMismatch {
            len: b.len(),
            expected: a.len(),
        });
    }
    let mut counts = std::collections::HashMap::<i64, i64>::new();
    for &x in a {
        *counts.entry(x.rem_euclid(m as i64)).or_default() += 1;
    }
    for &y in b {
        *counts.entry(y.rem_euclid(m as i64)).or_default() -= 1;
    }
    Ok(counts.values().all(|&c| c == 0))
}

/// A candidate permutation `sigma` of `{1, ..., n}`.
///
/// `sigma[i - 1]` is the exponent assigned to base `i`. Only [`verify_witness`]
/// can produce a value with [`Witness::is_verified`] set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    n: u64,
    sigma: Vec<u64>,
    #[serde(skip)]
    verified: bool,
}

impl Witness {
    pub fn new(n: u64, sigma: Vec<u64>) -> Self {
        Witness {
            n,
            sigma,
            verified: false,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sigma(&self) -> &[u64] {
        &self.sigma
    }

    /// Exponent assigned to base `i` (1-indexed).
    pub fn exponent(&self, base: u64) -> u64 {
        self.sigma[base as usize - 1]
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// The values `i^sigma(i) mod n` in `[0, n)`, for `i = 1..=n`.
    pub fn powers(&self) -> Vec<u64> {
        (1..=self.n)
            .zip(&self.sigma)
            .map(|(i, &e)| pow_mod_u(i, e, self.n))
            .collect()
    }
}

/// Checks that `sigma` permutes `1..=n` and that `i^sigma(i)` is a complete residue system.
///
/// On a collision the smallest colliding residue class is reported, together
/// with the two smallest bases landing in it.
pub fn verify_witness(w: Witness) -> Result<Witness, ResidueError> {
    let n = w.n;
    if n < 2 {
        return Err(ResidueError::ModulusTooSmall(n));
    }
    if w.sigma.len() as u64 != n {
        return Err(ResidueError::LengthMismatch {
            len: w.sigma.len(),
            expected: n as usize,
        });
    }
    let mut used = vec![false; n as usize + 1];
    for (i, &e) in w.sigma.iter().enumerate() {
        if e == 0 || e > n {
            return Err(ResidueError::NotAPermutation {
                n,
                detail: format!("sigma({}) = {e} is outside 1..={n}", i + 1),
            });
        }
        if std::mem::replace(&mut used[e as usize], true) {
            return Err(ResidueError::NotAPermutation {
                n,
                detail: format!("exponent {e} is used twice"),
            });
        }
    }
    let mut first_base = vec![0u64; n as usize];
    let mut collision: Option<(u64, u64, u64)> = None;
    for (base, r) in (1..=n).zip(w.powers()) {
        let slot = &mut first_base[r as usize];
        if *slot == 0 {
            *slot = base;
        } else if collision.is_none_or(|(c, _, _)| r < c) {
            collision = Some((r, *slot, base));
        }
    }
    if let Some((class, first, second)) = collision {
        return Err(ResidueError::NotACrs {
            n,
            class,
            first,
            second,
        });
    }
    Ok(Witness {
        verified: true,
        ..w
    })
}

/// `table[i][e] = i^e mod n` for `i, e` in `[1, n]`, stored row-major.
#[derive(Debug, Clone)]
pub struct PowerTable {
    n: u64,
    entries: Vec<u32>,
}

impl PowerTable {
    pub fn new(n: u64) -> Result<Self, ResidueError> {
        Self::with_cap(n, DEFAULT_TABLE_CAP)
    }

    pub fn with_cap(n: u64, cap: u64) -> Result<Self, ResidueError> {
        if n < 2 {
            return Err(ResidueError::ModulusTooSmall(n));
        }
        if n > cap || n > u32::MAX as u64 {
            return Err(ResidueError::CapExceeded { n, cap });
        }
        let size = n as usize;
        let mut entries = vec![0u32; size * size];
        for base in 1..=n {
            let row = &mut entries[(base as usize - 1) * size..base as usize * size];
            let b = base % n;
            let mut acc = 1 % n;
            for slot in row.iter_mut() {
                acc = acc * b % n;
                *slot = acc as u32;
            }
        }
        Ok(PowerTable { n, entries })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `base^exp mod n` for `base, exp` in `[1, n]`.
    #[inline]
    pub fn get(&self, base: u64, exp: u64) -> u64 {
        self.entries[self.index(base, exp)] as u64
    }

    /// Row of `base`: entry `e - 1` is `base^e mod n`.
    pub fn row(&self, base: u64) -> &[u32] {
        let size = self.n as usize;
        &self.entries[(base as usize - 1) * size..base as usize * size]
    }

    #[inline]
    fn index(&self, base: u64, exp: u64) -> usize {
        debug_assert!((1..=self.n).contains(&base) && (1..=self.n).contains(&exp));
        (base as usize - 1) * self.n as usize + exp as usize - 1
    }
}

pub fn power_table(n: u64) -> Result<PowerTable, ResidueError> {
    PowerTable::new(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::pow_mod;
    use proptest::prelude::*;

    #[test]
    fn is_crs_examples() {
        assert_eq!(is_crs(&[1, 2, 3, 4], 4), Ok(true));
        assert_eq!(is_crs(&[1, 2, 27, 256], 4), Ok(true));
        assert_eq!(is_crs(&[1, 1, 3, 4], 4), Ok(false));
        assert_eq!(is_crs(&[-1, 0, 1, 2], 4), Ok(true));
        assert!(matches!(
            is_crs(&[1, 2], 4),
            Err(ResidueError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn check_sim_examples() {
        assert_eq!(check_sim(&[1, 2, 3], &[4, 5, 6], 3), Ok(true));
        assert_eq!(check_sim(&[1, 2], &[1, 3], 2), Ok(false));
        assert_eq!(check_sim(&[1, 5], &[3, 7], 2), Ok(true));
        assert_eq!((6 - 10) % 2, 0);
        assert!(check_sim(&[1], &[1, 2], 2).is_err());
    }

    #[test]
    fn verify_witness_examples() {
        let w = verify_witness(Witness::new(3, vec![2, 1, 3])).unwrap();
        assert!(w.is_verified());
        assert!(verify_witness(Witness::new(7, vec![6, 2, 1, 5, 7, 3, 4])).is_ok());
        let err = verify_witness(Witness::new(4, vec![1, 2, 3, 4])).unwrap_err();
        assert_eq!(
            err,
            ResidueError::NotACrs {
                n: 4,
                class: 0,
                first: 2,
                second: 4
            }
        );
    }

    #[test]
    fn verify_witness_rejects_non_permutations() {
        assert!(matches!(
            verify_witness(Witness::new(3, vec![1, 1, 3])),
            Err(ResidueError::NotAPermutation { .. })
        ));
        assert!(matches!(
            verify_witness(Witness::new(3, vec![0, 1, 3])),
            Err(ResidueError::NotAPermutation { .. })
        ));
        assert!(matches!(
            verify_witness(Witness::new(3, vec![1, 2])),
            Err(ResidueError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn earliest_collision_is_reported() {
        // n = 5, identity: 1,4,2,1,0 -> class 1 hit by bases 1 and 4
        let err = verify_witness(Witness::new(5, vec![1, 2, 3, 4, 5])).unwrap_err();
        assert!(matches!(
            err,
            ResidueError::NotACrs {
                class: 1,
                first: 1,
                second: 4,
                ..
            }
        ));
    }

    #[test]
    fn witness_json_shape() {
        let w = Witness::new(3, vec![2, 1, 3]);
        assert_eq!(
            serde_json::to_string(&w).unwrap(),
            r#"{"n":3,"sigma":[2,1,3]}"#
        );
        let back: Witness = serde_json::from_str(r#"{"n":3,"sigma":[2,1,3]}"#).unwrap();
        assert!(!back.is_verified());
        assert!(verify_witness(back).unwrap().is_verified());
    }

    #[test]
    fn power_table_examples() {
        let t4 = power_table(4).unwrap();
        assert_eq!(t4.get(2, 2), 0);
        assert_eq!(t4.get(1, 3), 1);
        assert_eq!(power_table(7).unwrap().get(3, 6), 1);
        assert_eq!(
            PowerTable::with_cap(10, 8).unwrap_err(),
            ResidueError::CapExceeded { n: 10, cap: 8 }
        );
    }

    #[test]
    fn power_table_matches_pow_mod() {
        for n in 2u64..=64 {
            let t = power_table(n).unwrap();
            for i in 1..=n {
                assert_eq!(t.get(i, 1), i % n);
                assert_eq!(t.get(1, i), 1);
                for e in 1..=n {
                    assert_eq!(t.get(i, e), pow_mod(i as i64, e, n));
                }
            }
        }
    }

    fn seq(len: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-50i64..50, len)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn sim_is_an_equivalence(
            (a, b, c) in (1usize..8).prop_flat_map(|l| (seq(l), seq(l), seq(l))),
            m in 2u64..12,
        ) {
            prop_assert!(check_sim(&a, &a, m).unwrap());
            prop_assert_eq!(check_sim(&a, &b, m).unwrap(), check_sim(&b, &a, m).unwrap());
            if check_sim(&a, &b, m).unwrap() && check_sim(&b, &c, m).unwrap() {
                prop_assert!(check_sim(&a, &c, m).unwrap());
            }
        }

        #[test]
        fn shifted_permutations_are_congruent(
            a in prop::collection::vec(-1000i64..1000, 1..20),
            m in 2u64..30,
            shifts in prop::collection::vec(-20i64..20, 20),
            rot in 0usize..20,
        ) {
            let mut b: Vec<i64> = a.iter().zip(&shifts).map(|(x, k)| x + k * m as i64).collect();
            let len = b.len();
            b.rotate_left(rot % len);
            prop_assert!(check_sim(&a, &b, m).unwrap());
            let diff: i64 = a.iter().sum::<i64>() - b.iter().sum::<i64>();
            prop_assert_eq!(diff.rem_euclid(m as i64), 0);
        }

        #[test]
        fn verification_is_idempotent(n in 2u64..12, seed in any::<u64>()) {
            let mut sigma: Vec<u64> = (1..=n).collect();
            let mut s = seed;
            for i in (1..sigma.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                sigma.swap(i, (s >> 33) as usize % (i + 1));
            }
            if let Ok(w) = verify_witness(Witness::new(n, sigma)) {
                let vals: Vec<i64> = w.powers().iter().map(|&x| x as i64).collect();
                prop_assert!(is_crs(&vals, n).unwrap());
                let again = verify_witness(w.clone()).unwrap();
                prop_assert_eq!(again, w);
            }
        }
    }
}
