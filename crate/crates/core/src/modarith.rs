//! Exact integer and modular arithmetic.
//!
//! Everything here is a pure function over machine integers. Factorization is
//! trial division by a lazily built prime table, which is plenty for the
//! moduli this crate works with (classification up to ~10^7).

use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("argument must be nonzero")]
    Zero,
    #[error("(Z/{0}Z)* is not cyclic, no primitive root exists")]
    NoPrimitiveRoot(u64),
    #[error("modulus must be at least {min}, got {got}")]
    ModulusTooSmall { min: u64, got: u64 },
}

/// p-adic valuation of an integer. `Infinite` is reserved for the valuation of 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(k) => Some(k),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// All primes up to `bound`, increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSet {
    bound: u64,
    members: Vec<u64>,
}

impl PrimeSet {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }

    /// Number of members `<= x` (π(x) for x within the bound).
    pub fn count_up_to(&self, x: u64) -> usize {
        self.members.partition_point(|&p| p <= x)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.members.iter().copied()
    }
}

/// Sieve of Eratosthenes as a primality bitmap over `0..=bound`.
pub fn prime_bitmap(bound: u64) -> Vec<bool> {
    let len = bound as usize + 1;
    let mut is_p = vec![true; len];
    is_p[0] = false;
    if len > 1 {
        is_p[1] = false;
    }
    let mut i = 2usize;
    while i * i < len {
        if is_p[i] {
            let mut j = i * i;
            while j < len {
                is_p[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is_p
}

pub fn primes_up_to(bound: u64) -> PrimeSet {
    if bound < 2 {
        return PrimeSet {
            bound,
            members: Vec::new(),
        };
    }
    let members = prime_bitmap(bound)
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| p.then_some(i as u64))
        .collect();
    PrimeSet { bound, members }
}

// Covers trial division for every n < 2^32 without falling back to odd stepping.
const TRIAL_TABLE_BOUND: u64 = 1 << 16;

fn trial_primes() -> &'static [u64] {
    static TABLE: OnceLock<PrimeSet> = OnceLock::new();
    TABLE
        .get_or_init(|| primes_up_to(TRIAL_TABLE_BOUND))
        .members()
}

/// Prime factorization of `n >= 1` as (prime, exponent) pairs, primes increasing.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    let mut push = |n: &mut u64, p: u64| {
        let mut k = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            k += 1;
        }
        if k > 0 {
            out.push((p, k));
        }
    };
    for &p in trial_primes() {
        if p.saturating_mul(p) > n {
            break;
        }
        push(&mut n, p);
    }
    let mut d = TRIAL_TABLE_BOUND + 1;
    while d.saturating_mul(d) <= n {
        push(&mut n, d);
        d += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn valuation(p: u64, m: i64) -> Result<Valuation, ArithError> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    if m == 0 {
        return Ok(Valuation::Infinite);
    }
    let mut m = m.unsigned_abs();
    let mut k = 0;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    Ok(Valuation::Finite(k))
}

/// 2-adic valuation of a nonzero unsigned value.
pub(crate) fn v2(n: u64) -> u32 {
    debug_assert!(n != 0);
    n.trailing_zeros()
}

pub fn radical(n: i64) -> Result<u64, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    Ok(factorize(n.unsigned_abs())
        .iter()
        .map(|&(p, _)| p)
        .product())
}

pub fn omega(n: i64) -> Result<u32, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    Ok(factorize(n.unsigned_abs()).len() as u32)
}

pub fn mobius(n: u64) -> i8 {
    assert!(n >= 1, "mobius is defined on positive integers");
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn is_squarefree(n: u64) -> bool {
    mobius(n) != 0
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod m`, result in `[0, m)`.
pub fn pow_mod(base: i64, exp: u64, m: u64) -> u64 {
    assert!(m >= 1, "modulus must be positive");
    let mut b = base.rem_euclid(m as i64) as u64;
    let mut e = exp;
    let mut acc = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Unsigned convenience wrapper used on hot paths.
#[inline]
pub(crate) fn pow_mod_u(base: u64, exp: u64, m: u64) -> u64 {
    let mut b = base % m;
    let mut e = exp;
    let mut acc = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

// Witness set proven sufficient for all n < 2^64 (Jim Sinclair).
const MR_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

/// Deterministic primality for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod_u(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn totient(n: u64) -> u64 {
    assert!(n >= 1, "totient is defined on positive integers");
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Multiplicative order of `a` modulo `n`, or `None` when `gcd(a, n) != 1`.
pub fn multiplicative_order(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(1);
    }
    if a.gcd(&n) != 1 {
        return None;
    }
    let mut order = totient(n);
    for (p, _) in factorize(order) {
        while order.is_multiple_of(p) && pow_mod_u(a, order / p, n) == 1 {
            order /= p;
        }
    }
    Some(order)
}

fn has_cyclic_units(n: u64) -> bool {
    if n == 2 || n == 4 {
        return true;
    }
    let odd = if n.is_multiple_of(2) { n / 2 } else { n };
    if odd % 2 == 0 {
        return false;
    }
    factorize(odd).len() == 1
}

/// Smallest generator of `(Z/nZ)*`.
pub fn primitive_root(n: u64) -> Result<u64, ArithError> {
    if n < 2 {
        return Err(ArithError::ModulusTooSmall { min: 2, got: n });
    }
    if n == 2 {
        return Ok(1);
    }
    if !has_cyclic_units(n) {
        return Err(ArithError::NoPrimitiveRoot(n));
    }
    let phi = totient(n);
    let prime_factors: Vec<u64> = factorize(phi).into_iter().map(|(p, _)| p).collect();
    (2..n)
        .find(|&g| g.gcd(&n) == 1 && prime_factors.iter().all(|&q| pow_mod_u(g, phi / q, n) != 1))
        .ok_or(ArithError::NoPrimitiveRoot(n))
}

/// Legendre symbol by Euler's criterion.
pub fn legendre(z: i64, p: u64) -> Result<i8, ArithError> {
    if p == 2 || !is_prime(p) {
        return Err(ArithError::NotOddPrime(p));
    }
    Ok(match pow_mod(z, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    })
}

pub fn is_sophie_germain(s: u64) -> bool {
    is_prime(s)
        && s.checked_mul(2)
            .and_then(|d| d.checked_add(1))
            .is_some_and(is_prime)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(2, 12), Ok(Valuation::Finite(2)));
        assert_eq!(valuation(5, 0), Ok(Valuation::Infinite));
        assert_eq!(valuation(3, 1), Ok(Valuation::Finite(0)));
        assert_eq!(valuation(3, -18), Ok(Valuation::Finite(2)));
        assert_eq!(valuation(4, 12), Err(ArithError::NotPrime(4)));
    }

    #[test]
    fn valuation_divides_exactly() {
        for p in [2u64, 3, 5, 7] {
            for m in (-300i64..=300).filter(|&m| m != 0) {
                let k = valuation(p, m).unwrap().finite().unwrap();
                let pk = p.pow(k) as i64;
                assert_eq!(m % pk, 0);
                assert_ne!(m % (pk * p as i64), 0);
            }
        }
    }

    #[test]
    fn radical_omega_mobius_examples() {
        assert_eq!(radical(12), Ok(6));
        assert_eq!(radical(1), Ok(1));
        assert_eq!(radical(-1), Ok(1));
        assert_eq!(radical(30), Ok(30));
        assert_eq!(radical(0), Err(ArithError::Zero));
        assert_eq!(omega(12), Ok(2));
        assert_eq!(omega(1), Ok(0));
        assert_eq!(omega(30), Ok(3));
        assert_eq!(omega(0), Err(ArithError::Zero));
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(30), -1);
        assert!(is_squarefree(10));
        assert!(!is_squarefree(12));
        assert!(is_squarefree(1));
    }

    #[test]
    fn radical_mobius_relations() {
        for n in 1u64..=3000 {
            let r = radical(n as i64).unwrap();
            assert_eq!(n % r, 0);
            assert!(is_squarefree(r));
            assert_eq!(is_squarefree(n), r == n);
            let mu = mobius(n);
            assert_eq!(mu == 0, !is_squarefree(n));
            if mu != 0 {
                let w = omega(n as i64).unwrap();
                assert_eq!(mu, if w.is_multiple_of(2) { 1 } else { -1 });
            }
        }
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(1_000_003));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2, 3, 5, 7
    }

    #[test]
    fn is_prime_matches_trial_division_to_a_million() {
        let sieve = prime_bitmap(1_000_000);
        for n in 0..=1_000_000u64 {
            assert_eq!(is_prime(n), sieve[n as usize], "n = {n}");
        }
        for n in 0..=20_000u64 {
            assert_eq!(sieve[n as usize], trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn primes_up_to_examples() {
        assert_eq!(primes_up_to(10).members(), &[2, 3, 5, 7]);
        assert_eq!(primes_up_to(2).members(), &[2]);
        assert_eq!(primes_up_to(30).len(), 10);
        assert!(primes_up_to(1).is_empty());
        let ps = primes_up_to(1000);
        assert!(ps.members().windows(2).all(|w| w[0] < w[1]));
        assert!(ps.iter().all(is_prime));
        assert_eq!(ps.len(), (0..=1000).filter(|&n| trial_division(n)).count());
        assert_eq!(ps.count_up_to(100), 25);
    }

    #[test]
    fn pow_mod_examples() {
        assert_eq!(pow_mod(3, 3, 7), 6);
        assert_eq!(pow_mod(5, 0, 7), 1);
        assert_eq!(pow_mod(4, 4, 4), 0);
        assert_eq!(pow_mod(-2, 3, 7), 6);
        assert_eq!(pow_mod(9, 0, 1), 0);
    }

    #[test]
    fn pow_mod_matches_naive_product() {
        for m in 1u64..=64 {
            for b in 0i64..=64 {
                let mut naive = 1 % m;
                for e in 0u64..=64 {
                    assert_eq!(pow_mod(b, e, m), naive, "{b}^{e} mod {m}");
                    naive = naive * (b as u64 % m) % m;
                }
            }
        }
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient(1), 1);
        assert_eq!(totient(10), 4);
        assert_eq!(totient(11), 10);
        for n in 1u64..=500 {
            let direct = (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64;
            assert_eq!(totient(n), direct);
        }
    }

    #[test]
    fn primitive_root_examples() {
        assert_eq!(primitive_root(7), Ok(3));
        assert_eq!(primitive_root(2), Ok(1));
        assert_eq!(primitive_root(4), Ok(3));
        assert_eq!(primitive_root(12), Err(ArithError::NoPrimitiveRoot(12)));
        assert_eq!(primitive_root(8), Err(ArithError::NoPrimitiveRoot(8)));
        assert_eq!(
            primitive_root(1),
            Err(ArithError::ModulusTooSmall { min: 2, got: 1 })
        );
        // 2p^k
        assert_eq!(primitive_root(18), Ok(5));
    }

    #[test]
    fn primitive_roots_generate_every_unit() {
        for p in primes_up_to(500).iter() {
            let g = primitive_root(p).unwrap();
            let mut seen = vec![false; p as usize];
            let mut x = 1u64;
            for _ in 1..p {
                x = x * g % p;
                seen[x as usize] = true;
            }
            assert_eq!(seen.iter().filter(|&&s| s).count() as u64, p - 1, "p = {p}");
            // smallest
            assert!((2..g).all(|h| multiplicative_order(h, p) != Some(p - 1)));
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(1, 7), Ok(1));
        assert_eq!(legendre(2, 7), Ok(1));
        assert_eq!(legendre(3, 7), Ok(-1));
        assert_eq!(legendre(14, 7), Ok(0));
        assert_eq!(legendre(3, 2), Err(ArithError::NotOddPrime(2)));
        assert_eq!(legendre(3, 9), Err(ArithError::NotOddPrime(9)));
    }

    #[test]
    fn legendre_counts_half_the_units() {
        for p in primes_up_to(200).iter().skip(1) {
            let residues = (1..p as i64).filter(|&z| legendre(z, p) == Ok(1)).count() as u64;
            assert_eq!(residues, (p - 1) / 2);
            let squares: std::collections::BTreeSet<u64> = (1..p).map(|s| s * s % p).collect();
            for z in 1..p {
                assert_eq!(legendre(z as i64, p) == Ok(1), squares.contains(&z));
            }
        }
    }

    #[test]
    fn sophie_germain_examples() {
        assert!(is_sophie_germain(5));
        assert!(!is_sophie_germain(7));
        assert!(!is_sophie_germain(1));
        let small: Vec<u64> = (1..=100).filter(|&s| is_sophie_germain(s)).collect();
        assert_eq!(small, [2, 3, 5, 11, 23, 29, 41, 53, 83, 89]);
    }
}
