//! Prime ideals of Z[i]: rational sieving, the splitting law, and the
//! two-squares decomposition for split primes.

use std::fmt;

use crate::error::{Error, Result};
use crate::gaussint::CanonicalGenerator;

/// How a prime ideal sits over its rational prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SplittingKind {
    /// The unique prime above 2, generated by `1 + i`.
    Ramified,
    /// For p = a^2 + b^2 with a > b > 0: the ideal generated by `a + b*i`.
    SplitPrimary,
    /// Its conjugate, generated by `b + a*i`.
    SplitConjugate,
    /// A rational prime p = 3 mod 4, of norm p^2.
    Inert,
}

impl SplittingKind {
    pub const fn code(self) -> u8 {
        match self {
            SplittingKind::Ramified => 0,
            SplittingKind::SplitPrimary => 1,
            SplittingKind::SplitConjugate => 2,
            SplittingKind::Inert => 3,
        }
    }
}

impl fmt::Display for SplittingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SplittingKind::Ramified => "ramified",
            SplittingKind::SplitPrimary => "split_primary",
            SplittingKind::SplitConjugate => "split_conjugate",
            SplittingKind::Inert => "inert",
        };
        f.write_str(s)
    }
}

/// A prime ideal, carried around by value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeIdeal {
    pub generator: CanonicalGenerator,
    pub kind: SplittingKind,
    pub norm: u64,
    pub rational_prime: u64,
}

impl PrimeIdeal {
    pub fn ramified() -> PrimeIdeal {
        PrimeIdeal {
            generator: CanonicalGenerator::new(1, 1).unwrap(),
            kind: SplittingKind::Ramified,
            norm: 2,
            rational_prime: 2,
        }
    }

    /// Both prime ideals above a rational prime p = 1 mod 4, primary first.
    pub fn split_pair(p: u64) -> (PrimeIdeal, PrimeIdeal) {
        let (a, b) = sum_of_two_squares(p);
        let primary = PrimeIdeal {
            generator: CanonicalGenerator::new(a as i64, b as i64).unwrap(),
            kind: SplittingKind::SplitPrimary,
            norm: p,
            rational_prime: p,
        };
        let conjugate = PrimeIdeal {
            generator: CanonicalGenerator::new(b as i64, a as i64).unwrap(),
            kind: SplittingKind::SplitConjugate,
            norm: p,
            rational_prime: p,
        };
        (primary, conjugate)
    }

    pub fn inert(p: u64) -> PrimeIdeal {
        PrimeIdeal {
            generator: CanonicalGenerator::new(p as i64, 0).unwrap(),
            kind: SplittingKind::Inert,
            norm: p * p,
            rational_prime: p,
        }
    }

    pub fn log_norm(&self) -> f64 {
        (self.norm as f64).ln()
    }

    /// The conjugate prime ideal (self for ramified and inert).
    pub fn conjugate(&self) -> PrimeIdeal {
        match self.kind {
            SplittingKind::SplitPrimary => PrimeIdeal {
                generator: self.generator.conjugate_ideal(),
                kind: SplittingKind::SplitConjugate,
                ..*self
            },
            SplittingKind::SplitConjugate => PrimeIdeal {
                generator: self.generator.conjugate_ideal(),
                kind: SplittingKind::SplitPrimary,
                ..*self
            },
            _ => *self,
        }
    }

    /// Memoization key: (norm, kind) identifies a prime ideal uniquely.
    pub fn key(&self) -> (u64, u8) {
        (self.norm, self.kind.code())
    }
}

/// Rational primes up to `limit`, ascending.
pub fn rational_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
            // guard against p*p overflow on usize is unnecessary here:
            // p <= sqrt(n) is implied by q's first value check
        }
    }
    out
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A square root of -1 mod p for p = 1 mod 4, found deterministically by
/// raising the first quadratic non-residue to the power (p-1)/4.
fn sqrt_of_minus_one(p: u64) -> u64 {
    debug_assert!(p % 4 == 1);
    let mut n = 2u64;
    loop {
        if pow_mod(n, (p - 1) / 2, p) == p - 1 {
            return pow_mod(n, (p - 1) / 4, p);
        }
        n += 1;
    }
}

/// Writes a rational prime p = 1 mod 4 as a^2 + b^2 with a > b > 0.
///
/// Cornacchia: Euclid on (p, sqrt(-1) mod p) down to the first remainder
/// not exceeding sqrt(p). Deterministic, no floating point.
pub fn sum_of_two_squares(p: u64) -> (u64, u64) {
    debug_assert!(p % 4 == 1);
    let mut r0 = p;
    let mut r1 = sqrt_of_minus_one(p);
    let s = p.isqrt();
    while r1 > s {
        let r = r0 % r1;
        r0 = r1;
        r1 = r;
    }
    let a = r1;
    let b2 = p - a * a;
    let b = b2.isqrt();
    debug_assert_eq!(b * b, b2, "Cornacchia residual must be a perfect square");
    if a > b {
        (a, b)
    } else {
        (b, a)
    }
}

/// All prime ideals of norm at most `x`, sorted by norm (primary before
/// conjugate within a split pair).
pub fn prime_ideal_sieve(x: u64) -> Result<Vec<PrimeIdeal>> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!(
            "prime_ideal_sieve needs x >= 2, got {x}"
        )));
    }
    let mut out = vec![PrimeIdeal::ramified()];
    let inert_cap = x.isqrt();
    for p in rational_primes(x) {
        match p % 4 {
            1 => {
                let (primary, conjugate) = PrimeIdeal::split_pair(p);
                out.push(primary);
                out.push(conjugate);
            }
            3 if p <= inert_cap => out.push(PrimeIdeal::inert(p)),
            _ => {}
        }
    }
    out.sort_by_key(|q| (q.norm, q.kind.code()));
    Ok(out)
}

/// Counts of prime ideals by splitting kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplittingCensus {
    pub ramified: u64,
    pub split: u64,
    pub inert: u64,
}

impl SplittingCensus {
    pub fn of(primes: &[PrimeIdeal]) -> SplittingCensus {
        let mut census = SplittingCensus::default();
        for q in primes {
            match q.kind {
                SplittingKind::Ramified => census.ramified += 1,
                SplittingKind::SplitPrimary | SplittingKind::SplitConjugate => census.split += 1,
                SplittingKind::Inert => census.inert += 1,
            }
        }
        census
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sieve_small() {
        assert_eq!(rational_primes(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(rational_primes(1).len(), 0);
    }

    #[test]
    fn two_squares_small_primes() {
        assert_eq!(sum_of_two_squares(5), (2, 1));
        assert_eq!(sum_of_two_squares(13), (3, 2));
        assert_eq!(sum_of_two_squares(17), (4, 1));
        assert_eq!(sum_of_two_squares(29), (5, 2));
        // every p = 1 mod 4 up to 10^4 decomposes correctly
        for p in rational_primes(10_000) {
            if p % 4 == 1 {
                let (a, b) = sum_of_two_squares(p);
                assert!(a > b && b > 0);
                assert_eq!(a * a + b * b, p);
            }
        }
    }

    #[test]
    fn sieve_at_ten() {
        let ps = prime_ideal_sieve(10).unwrap();
        let got: Vec<(i64, i64, u64)> = ps
            .iter()
            .map(|q| (q.generator.re(), q.generator.im(), q.norm))
            .collect();
        assert_eq!(got, vec![(1, 1, 2), (2, 1, 5), (1, 2, 5), (3, 0, 9)]);
    }

    #[test]
    fn sieve_count_at_one_hundred() {
        // 11 split pairs, the ramified prime, and the inert primes (3), (7)
        // of norms 9 and 49; value pinned by a lattice brute force
        assert_eq!(prime_ideal_sieve(100).unwrap().len(), 25);
    }

    #[test]
    fn sieve_at_two() {
        let ps = prime_ideal_sieve(2).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].kind, SplittingKind::Ramified);
        assert!(prime_ideal_sieve(1).is_err());
    }

    #[test]
    fn sieve_is_sorted_and_matches_splitting_law() {
        let x = 5000;
        let ps = prime_ideal_sieve(x).unwrap();
        assert!(ps.windows(2).all(|w| w[0].norm <= w[1].norm));
        let rp = rational_primes(x);
        for &p in &rp {
            let over_p: Vec<&PrimeIdeal> =
                ps.iter().filter(|q| q.rational_prime == p).collect();
            if p == 2 {
                assert_eq!(over_p.len(), 1);
                assert_eq!(over_p[0].kind, SplittingKind::Ramified);
            } else if p % 4 == 1 {
                assert_eq!(over_p.len(), 2, "p = {p}");
                assert_eq!(over_p[0].norm, p);
                assert_eq!(over_p[1].norm, p);
                assert_eq!(
                    over_p[0].generator.conjugate_ideal(),
                    over_p[1].generator
                );
            } else if p * p <= x {
                assert_eq!(over_p.len(), 1);
                assert_eq!(over_p[0].norm, p * p);
            } else {
                assert!(over_p.is_empty());
            }
        }
    }

    #[test]
    fn conjugate_of_split_pair() {
        let (a, b) = PrimeIdeal::split_pair(13);
        assert_eq!(a.conjugate(), b);
        assert_eq!(b.conjugate(), a);
        assert_eq!(PrimeIdeal::ramified().conjugate(), PrimeIdeal::ramified());
    }
}
