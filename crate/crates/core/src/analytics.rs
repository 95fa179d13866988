//! Prime-density statistics behind the conjectural gap.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conditions::{evaluate, Status};
use crate::modarith::prime_bitmap;

/// Artin's constant, the density of primes `p` with `p - 1` squarefree among all primes.
pub const ARTIN: f64 = 0.37395;
/// Twin-prime constant.
pub const TWIN_PRIME: f64 = 0.66016;
/// Largest bound the sieves accept.
pub const MAX_BOUND: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("bound must be at least {min}, got {got}")]
    BoundTooSmall { min: u64, got: u64 },
    #[error("bound {0} exceeds the sieve cap {MAX_BOUND}")]
    MemoryCap(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub bound: u64,
    pub pi: u64,
    /// Primes `p <= X` with `p - 1` squarefree.
    pub squarefree_shifted: u64,
    /// Sophie Germain primes `s <= X`.
    pub sophie_germain: u64,
    pub gap_candidates: Vec<u64>,
    pub sf_over_pi: f64,
    /// `sf / (X / ln X)`.
    pub sf_over_x_ln: f64,
    /// `2 C2 X / (ln X)^2`.
    pub sophie_germain_estimate: f64,
    pub artin: f64,
    pub twin_prime: f64,
}

impl DensityReport {
    pub fn sophie_germain_ratio(&self) -> f64 {
        self.sophie_germain as f64 / self.sophie_germain_estimate
    }

    pub fn csv_row(&self) -> [String; 6] {
        [
            self.bound.to_string(),
            self.pi.to_string(),
            self.squarefree_shifted.to_string(),
            self.sophie_germain.to_string(),
            self.gap_candidates.len().to_string(),
            format!("{:.5}", self.sf_over_pi),
        ]
    }
}

pub const CSV_HEADER: [&str; 6] = ["X", "pi", "sf", "sophie_germain", "gaps", "sf_over_pi"];

/// `flags[m]` is true when `m` is squarefree, for `m` in `[0, bound]`.
pub fn squarefree_bitmap(bound: u64) -> Vec<bool> {
    let size = bound as usize + 1;
    let mut sf = vec![true; size];
    sf[0] = false;
    let mut d = 2usize;
    while d * d < size {
        let sq = d * d;
        for m in (sq..size).step_by(sq) {
            sf[m] = false;
        }
        d += 1;
    }
    sf
}

fn check_bound(x: u64, min: u64) -> Result<(), AnalyticsError> {
    if x < min {
        return Err(AnalyticsError::BoundTooSmall { min, got: x });
    }
    if x > MAX_BOUND {
        return Err(AnalyticsError::MemoryCap(x));
    }
    Ok(())
}

fn count_squarefree_shifted(primes: &[bool], sf: &[bool], x: u64) -> u64 {
    (2..=x as usize).filter(|&p| primes[p] && sf[p - 1]).count() as u64
}

pub fn density_report(x: u64) -> Result<DensityReport, AnalyticsError> {
    check_bound(x, 100)?;
    let primes = prime_bitmap(2 * x + 1);
    let sf = squarefree_bitmap(x);
    let pi = (2..=x as usize).filter(|&p| primes[p]).count() as u64;
    let squarefree_shifted = count_squarefree_shifted(&primes, &sf, x);
    let sophie_germain = (2..=x as usize)
        .filter(|&s| primes[s] && primes[2 * s + 1])
        .count() as u64;
    let ln = (x as f64).ln();
    Ok(DensityReport {
        bound: x,
        pi,
        squarefree_shifted,
        sophie_germain,
        gap_candidates: gap_candidates(x),
        sf_over_pi: squarefree_shifted as f64 / pi as f64,
        sf_over_x_ln: squarefree_shifted as f64 * ln / x as f64,
        sophie_germain_estimate: 2.0 * TWIN_PRIME * x as f64 / (ln * ln),
        artin: ARTIN,
        twin_prime: TWIN_PRIME,
    })
}

/// Every `n <= X` whose classification is the conjectural gap, ascending.
pub fn gap_candidates(x: u64) -> Vec<u64> {
    (2..=x)
        .into_par_iter()
        .filter(|&n| evaluate(n).status == Status::ConjecturalGap)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub bound: u64,
    pub gaps: u64,
    /// `|{p <= X/2 : p prime, p - 1 squarefree}|`.
    pub squarefree_shifted_half: u64,
    pub holds: bool,
    /// `gaps * ln X / X`, to compare with the asymptotic coefficient 1/5.
    pub coefficient: f64,
}

pub fn bound_check(x: u64) -> Result<BoundCheck, AnalyticsError> {
    check_bound(x, 124)?;
    let gaps = gap_candidates(x).len() as u64;
    let half = x / 2;
    let half_sf = count_squarefree_shifted(&prime_bitmap(half), &squarefree_bitmap(half), half);
    Ok(BoundCheck {
        bound: x,
        gaps,
        squarefree_shifted_half: half_sf,
        holds: gaps <= half_sf,
        coefficient: gaps as f64 * (x as f64).ln() / x as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::satisfies_gap_invariants;
    use crate::modarith::{is_prime, is_sophie_germain, is_squarefree};

    #[test]
    fn small_bound() {
        let r = density_report(100).unwrap();
        assert_eq!(r.pi, 25);
        assert_eq!(r.sophie_germain, 10);
        assert_eq!(r.squarefree_shifted, 13);
        assert_eq!(r.gap_candidates, vec![62, 86]);
        let sg: Vec<u64> = (2..=100).filter(|&s| is_sophie_germain(s)).collect();
        assert_eq!(sg, [2, 3, 5, 11, 23, 29, 41, 53, 83, 89]);
        assert!(density_report(99).is_err());
    }

    #[test]
    fn gap_examples() {
        assert!(gap_candidates(61).is_empty());
        assert_eq!(gap_candidates(62), [62]);
        // 86 = 2 * 43 with 42 = 2 * 3 * 7 and 21 composite
        assert_eq!(gap_candidates(85), [62]);
        assert_eq!(gap_candidates(124), [62, 86]);
        assert_eq!(gap_candidates(134), [62, 86, 134]);
        for m in gap_candidates(200) {
            assert!(is_prime(m / 2) && !is_sophie_germain((m / 2 - 1) / 2));
        }
    }

    #[test]
    fn gap_members_satisfy_invariants() {
        let gaps = gap_candidates(5000);
        for &m in &gaps {
            assert!(satisfies_gap_invariants(m), "{m}");
        }
        let direct: Vec<u64> = (2..=5000)
            .filter(|&n| satisfies_gap_invariants(n))
            .collect();
        assert_eq!(gaps, direct);
    }

    #[test]
    fn containment() {
        for x in [124u64, 1000, 10_000] {
            for m in gap_candidates(x) {
                let p = m / 2;
                assert!(m % 2 == 0 && is_prime(p) && is_squarefree(p - 1) && p <= x / 2);
            }
            assert!(bound_check(x).unwrap().holds);
        }
        assert!(bound_check(123).is_err());
    }

    #[test]
    fn counts_are_monotone() {
        let reports: Vec<_> = [100u64, 500, 1000, 5000, 10_000]
            .iter()
            .map(|&x| density_report(x).unwrap())
            .collect();
        for w in reports.windows(2) {
            assert!(w[0].pi <= w[1].pi);
            assert!(w[0].squarefree_shifted <= w[1].squarefree_shifted);
            assert!(w[0].sophie_germain <= w[1].sophie_germain);
            assert!(w[0].gap_candidates.len() <= w[1].gap_candidates.len());
        }
    }

    #[test]
    fn squarefree_bitmap_matches_factorization() {
        let bm = squarefree_bitmap(5000);
        for m in 1..=5000 {
            assert_eq!(bm[m as usize], is_squarefree(m));
        }
    }

    #[test]
    fn csv_row_layout() {
        let r = density_report(100).unwrap();
        assert_eq!(
            CSV_HEADER.join(","),
            "X,pi,sf,sophie_germain,gaps,sf_over_pi"
        );
        assert_eq!(r.csv_row().join(","), "100,25,13,10,2,0.52000");
    }
}
