//! Sizes of the square, m-th power, and multiple sets modulo n.
//!
//! Closed forms and brute-force enumeration are both first class. The result
//! records which one produced the number so tests can pit them against each
//! other.

use num_integer::Integer;
use serde::Serialize;

use crate::modarith::{factorize, is_prime, pow_mod_u};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Formula,
    BruteForce,
}

/// `|P_{n,m}|`, the number of residues mod `n` that are m-th powers (0 included).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResidueCount {
    pub n: u64,
    pub m: u64,
    pub count: u64,
    pub method: CountMethod,
}

/// Enumerates `s^m mod n` for every `s` in `[0, n)` into a presence bitmap.
pub fn power_count_brute(n: u64, m: u64) -> ResidueCount {
    assert!(n >= 1 && m >= 1);
    let mut seen = vec![false; n as usize];
    for s in 0..n {
        seen[pow_mod_u(s, m, n) as usize] = true;
    }
    ResidueCount {
        n,
        m,
        count: seen.iter().filter(|&&x| x).count() as u64,
        method: CountMethod::BruteForce,
    }
}

/// `(p - 1) / gcd(p - 1, m) + 1` for prime `p`.
fn prime_power_residues(p: u64, m: u64) -> u64 {
    (p - 1) / (p - 1).gcd(&m) + 1
}

/// Number of m-th power residues modulo `n`.
///
/// Prime `n` uses the closed form, `n = 2p` uses the doubling identity, and
/// any other modulus falls back to enumeration.
pub fn power_count(n: u64, m: u64) -> ResidueCount {
    assert!(n >= 2 && m >= 1);
    let formula = |count| ResidueCount {
        n,
        m,
        count,
        method: CountMethod::Formula,
    };
    if is_prime(n) {
        formula(prime_power_residues(n, m))
    } else if n.is_multiple_of(2) && n > 4 && is_prime(n / 2) {
        formula(2 * prime_power_residues(n / 2, m))
    } else {
        power_count_brute(n, m)
    }
}

/// `|Q_n|`, combined multiplicatively over the prime-power factors of `n`.
///
/// A prime factor uses the closed form; higher prime powers are enumerated.
pub fn qr_count(n: u64) -> ResidueCount {
    assert!(n >= 1);
    let mut method = CountMethod::BruteForce;
    let mut count = 1;
    for (p, k) in factorize(n) {
        count *= if k == 1 {
            method = CountMethod::Formula;
            prime_power_residues(p, 2)
        } else {
            power_count_brute(p.pow(k), 2).count
        };
    }
    ResidueCount {
        n,
        m: 2,
        count,
        method,
    }
}

pub fn qr_count_brute(n: u64) -> ResidueCount {
    power_count_brute(n, 2)
}

/// `|M_{n,m}|`: multiples of `m` in `[1, n - 1]`.
pub fn multiples_count(n: u64, m: u64) -> u64 {
    assert!(n >= 1 && m >= 1);
    (n - 1) / m
}
