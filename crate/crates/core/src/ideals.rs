//! Enumeration, counting, and factorization of ideals by norm.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gaussint::{dist_to_quarter_turn, CanonicalGenerator, GaussInt};
use crate::primes::{rational_primes, PrimeIdeal, SplittingKind};

/// Exact number of nonzero ideals of norm at most `x` (canonical lattice
/// points in the quarter disk), via row sums.
pub fn count_ideals(x: u64) -> u64 {
    let s = x.isqrt();
    let mut total = 0u64;
    for im in 0..=s {
        total += (x - im * im).isqrt();
    }
    total
}

const BLOCK_SPAN: u64 = 1 << 20;

/// Streams every canonical generator with `lo < norm <= hi` exactly once,
/// in nondecreasing norm order (ties broken by imaginary part).
///
/// Generators are materialized in norm blocks and sorted per block, so the
/// memory footprint stays proportional to the block span, not to `hi`.
pub struct IdealStream {
    next_lo: u64,
    hi: u64,
    buf: Vec<(u64, u32, u32)>,
    idx: usize,
}

impl IdealStream {
    fn fill_block(&mut self) {
        self.buf.clear();
        self.idx = 0;
        while self.buf.is_empty() && self.next_lo < self.hi {
            let blo = self.next_lo;
            let bhi = (blo + BLOCK_SPAN).min(self.hi);
            let im_max = bhi.isqrt();
            for im in 0..=im_max {
                let sq = im * im;
                if sq > bhi {
                    break;
                }
                let re_hi = (bhi - sq).isqrt();
                let re_lo = if blo >= sq { (blo - sq).isqrt() + 1 } else { 1 };
                for re in re_lo.max(1)..=re_hi {
                    self.buf.push((re * re + sq, re as u32, im as u32));
                }
            }
            self.buf.sort_unstable_by_key(|&(n, _, im)| (n, im));
            self.next_lo = bhi;
        }
    }
}

impl Iterator for IdealStream {
    type Item = CanonicalGenerator;

    fn next(&mut self) -> Option<CanonicalGenerator> {
        if self.idx >= self.buf.len() {
            self.fill_block();
            if self.buf.is_empty() {
                return None;
            }
        }
        let (_, re, im) = self.buf[self.idx];
        self.idx += 1;
        Some(CanonicalGenerator::new(re as i64, im as i64).expect("re >= 1 by construction"))
    }
}

/// All ideals of norm at most `x`, ascending by norm.
pub fn enumerate_ideals(x: u64) -> IdealStream {
    enumerate_ideals_range(0, x)
}

/// Ideals with `lo < norm <= hi`, ascending by norm.
pub fn enumerate_ideals_range(lo: u64, hi: u64) -> IdealStream {
    IdealStream {
        next_lo: lo,
        hi,
        buf: Vec::new(),
        idx: 0,
    }
}

/// Number of canonical generators with `x < norm <= y` whose argument is
/// within `delta` of `theta` in the quarter-turn metric.
pub fn wedge_count(theta: f64, delta: f64, x: f64, y: f64) -> Result<u64> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "wedge center {theta} outside [0, pi/2)"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "wedge width {delta} outside (0, 1]"
        )));
    }
    if !(x >= 0.0 && y > x) {
        return Err(Error::InvalidArgument(format!(
            "bad radial window ({x}, {y}]"
        )));
    }
    let hi = y.floor() as u64;
    let mut count = 0u64;
    for g in enumerate_ideals(hi) {
        let n = g.norm() as f64;
        if n <= x || n > y {
            continue;
        }
        if dist_to_quarter_turn(g.arg() - theta) <= delta {
            count += 1;
        }
    }
    Ok(count)
}

/// One prime-ideal power in a factorization.
pub type IdealFactor = (PrimeIdeal, u32);

/// The prime-ideal factorization of an ideal, sorted by norm then kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealFactorization {
    pub factors: Vec<IdealFactor>,
}

impl IdealFactorization {
    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn norm(&self) -> u64 {
        self.factors
            .iter()
            .map(|(q, e)| q.norm.pow(*e))
            .product()
    }

    /// Multiplies the factorization back out; must reproduce the source.
    pub fn reconstruct(&self) -> CanonicalGenerator {
        let mut acc = CanonicalGenerator::UNIT;
        for (q, e) in &self.factors {
            for _ in 0..*e {
                acc = acc.mul(q.generator);
            }
        }
        acc
    }

    /// Every ideal divisor, as canonical generators (unit included).
    pub fn divisors(&self) -> Vec<CanonicalGenerator> {
        let mut out = vec![CanonicalGenerator::UNIT];
        for (q, e) in &self.factors {
            let base = out.clone();
            let mut power = CanonicalGenerator::UNIT;
            let mut grown = Vec::with_capacity(base.len() * (*e as usize + 1));
            grown.extend_from_slice(&base);
            for _ in 0..*e {
                power = power.mul(q.generator);
                for d in &base {
                    grown.push(d.mul(power));
                }
            }
            out = grown;
        }
        out
    }
}

/// Factorization context: a smallest-prime-factor table for integers up to
/// the norm limit, plus the two-squares decomposition of every split prime.
/// Build once per session; immutable and shareable afterwards.
pub struct FactorTable {
    limit: u64,
    spf: Vec<u32>,
    split: HashMap<u64, (u32, u32)>,
}

impl FactorTable {
    /// Supports factoring ideals of norm at most `limit`.
    pub fn new(limit: u64) -> FactorTable {
        let n = limit.max(1) as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let mut split = HashMap::new();
        for p in rational_primes(limit) {
            if p % 4 == 1 {
                let (a, b) = crate::primes::sum_of_two_squares(p);
                split.insert(p, (a as u32, b as u32));
            }
        }
        FactorTable { limit, spf, split }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Rational factorization of `n <= limit` as (prime, exponent) pairs.
    pub fn factor_norm(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(
            n <= self.limit,
            "norm {n} exceeds the factor table limit {}",
            self.limit
        );
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    /// Prime-ideal factorization of the ideal generated by `g`.
    ///
    /// For split rational primes the exponent of the primary conjugate is
    /// determined by exact divisibility: `pi | z` iff `z * conj(pi) = 0`
    /// componentwise mod p.
    pub fn factor(&self, g: CanonicalGenerator) -> IdealFactorization {
        let n = g.norm();
        let mut factors: Vec<IdealFactor> = Vec::new();
        for (p, e) in self.factor_norm(n) {
            match p % 4 {
                2 => factors.push((PrimeIdeal::ramified(), e)),
                3 => {
                    debug_assert!(e % 2 == 0, "inert prime exponent in a norm is even");
                    factors.push((PrimeIdeal::inert(p), e / 2));
                }
                _ => {
                    let &(a, b) = self.split.get(&p).expect("split prime inside table limit");
                    let pi = GaussInt::new(a as i64, b as i64);
                    let j = split_valuation(g.to_gauss(), pi, p, e);
                    let (primary, conjugate) = split_pair_from(p, a, b);
                    if j > 0 {
                        factors.push((primary, j));
                    }
                    if j < e {
                        factors.push((conjugate, e - j));
                    }
                }
            }
        }
        factors.sort_by_key(|(q, _)| (q.norm, q.kind.code()));
        IdealFactorization { factors }
    }
}

fn split_pair_from(p: u64, a: u32, b: u32) -> (PrimeIdeal, PrimeIdeal) {
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

/// Largest j <= cap with pi^j | z, for pi a split prime of norm p.
fn split_valuation(z: GaussInt, pi: GaussInt, p: u64, cap: u32) -> u32 {
    let p = p as i64;
    let mut w = z;
    let mut j = 0;
    while j < cap {
        let t = w.mul(pi.conj());
        if t.re % p != 0 || t.im % p != 0 {
            break;
        }
        w = GaussInt::new(t.re / p, t.im / p);
        j += 1;
    }
    j
}
