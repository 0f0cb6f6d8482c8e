//! Multiplicative functions on ideals as runtime strategies.
//!
//! A [`MultFn`] is defined entirely by its values on prime-ideal powers,
//! supplied through the [`PrimePowerRule`] trait object. Everything else —
//! evaluation, Dirichlet convolution, the log-derivative coefficients, the
//! friable/rough and completely-multiplicative decompositions — is generic
//! over that rule.

use std::sync::Arc;

use dashmap::DashMap;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussint::CanonicalGenerator;
use crate::ideals::{FactorTable, IdealFactorization};
use crate::primes::PrimeIdeal;

/// The strategy interface: the value of a multiplicative function at a
/// prime-ideal power `p^k`, `k >= 1`. The value at the unit ideal is 1 by
/// convention and never requested.
pub trait PrimePowerRule: Send + Sync {
    fn prime_power(&self, p: &PrimeIdeal, k: u32) -> Complex64;
}

type MemoKey = (u64, u8, u32);

/// A multiplicative function on ideals, cheap to clone and safe to share.
///
/// Values at prime powers are memoized per (norm, kind, exponent). When the
/// completely-multiplicative flag is set, values at higher powers are forced
/// to `rule(p, 1)^k` regardless of what the rule would return, so the flag
/// is an enforced construction, not a promise.
#[derive(Clone)]
pub struct MultFn {
    rule: Arc<dyn PrimePowerRule>,
    label: String,
    completely_multiplicative: bool,
    cache: Arc<DashMap<MemoKey, Complex64>>,
}

impl std::fmt::Debug for MultFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultFn")
            .field("label", &self.label)
            .field("completely_multiplicative", &self.completely_multiplicative)
            .finish()
    }
}

impl MultFn {
    pub fn from_rule(
        label: impl Into<String>,
        completely_multiplicative: bool,
        rule: Arc<dyn PrimePowerRule>,
    ) -> MultFn {
        MultFn {
            rule,
            label: label.into(),
            completely_multiplicative,
            cache: Arc::new(DashMap::new()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_completely_multiplicative(&self) -> bool {
        self.completely_multiplicative
    }

    /// Memoized value at `p^k`, `k >= 1`.
    pub fn at_prime_power(&self, p: &PrimeIdeal, k: u32) -> Complex64 {
        debug_assert!(k >= 1);
        let key = (p.norm, p.kind.code(), k);
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let v = if self.completely_multiplicative && k > 1 {
            self.at_prime_power(p, 1).powu(k)
        } else {
            self.rule.prime_power(p, k)
        };
        self.cache.insert(key, v);
        v
    }

    /// Value at an ideal given its factorization (1 at the unit ideal).
    pub fn eval_factored(&self, fact: &IdealFactorization) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (q, e) in &fact.factors {
            let v = self.at_prime_power(q, *e);
            if v == Complex64::ZERO {
                return Complex64::ZERO;
            }
            acc *= v;
        }
        acc
    }

    /// Value at the ideal generated by `g`.
    pub fn eval(&self, g: CanonicalGenerator, table: &FactorTable) -> Complex64 {
        self.eval_factored(&table.factor(g))
    }

    /// Dirichlet convolution with `other`: on prime powers,
    /// `(f*g)(p^k) = sum_{j=0..k} f(p^j) g(p^{k-j})`.
    pub fn convolve(&self, other: &MultFn) -> MultFn {
        let rule = ConvolutionRule {
            lhs: self.clone(),
            rhs: other.clone(),
        };
        MultFn::from_rule(
            format!("({} * {})", self.label, other.label),
            false,
            Arc::new(rule),
        )
    }

    /// Pointwise product; multiplicative, and completely multiplicative
    /// when both operands are.
    pub fn pointwise(&self, other: &MultFn) -> MultFn {
        let cm = self.completely_multiplicative && other.completely_multiplicative;
        let rule = PointwiseRule {
            lhs: self.clone(),
            rhs: other.clone(),
        };
        MultFn::from_rule(
            format!("{}.{}", self.label, other.label),
            cm,
            Arc::new(rule),
        )
    }

    /// The log-derivative coefficients at powers of one prime ideal,
    /// `k = 1..=k_max`, obtained by solving
    /// `m f(p^m) = (1/log Np) * sum_{j=1..m} f(p^{m-j}) L(p^j)`
    /// forward for `L(p^m)`.
    pub fn von_mangoldt_coeffs(&self, p: &PrimeIdeal, k_max: u32) -> Vec<Complex64> {
        let log_np = p.log_norm();
        let mut coeffs: Vec<Complex64> = Vec::with_capacity(k_max as usize);
        let value = |k: u32| -> Complex64 {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                self.at_prime_power(p, k)
            }
        };
        for m in 1..=k_max {
            let mut rest = Complex64::ZERO;
            for j in 1..m {
                rest += value(m - j) * coeffs[(j - 1) as usize];
            }
            coeffs.push(value(m) * (m as f64) * log_np - rest);
        }
        coeffs
    }

    /// Checks `|L_f(p^k)| <= kappa * log(Np)` over every prime power of
    /// norm at most `x`, reporting the first violation.
    pub fn check_von_mangoldt_bound(
        &self,
        kappa: f64,
        x: u64,
        primes: &[PrimeIdeal],
    ) -> VonMangoldtBoundCheck {
        // tiny slack for the float recursion
        const SLACK: f64 = 1e-9;
        for p in primes {
            if p.norm > x {
                break;
            }
            let mut k_max = 0u32;
            let mut pw = 1u128;
            while pw * p.norm as u128 <= x as u128 {
                pw *= p.norm as u128;
                k_max += 1;
            }
            let coeffs = self.von_mangoldt_coeffs(p, k_max);
            let cap = kappa * p.log_norm();
            for (i, c) in coeffs.iter().enumerate() {
                if c.norm() > cap * (1.0 + SLACK) + SLACK {
                    return VonMangoldtBoundCheck {
                        ok: false,
                        violation: Some((*p, i as u32 + 1, c.norm())),
                    };
                }
            }
        }
        VonMangoldtBoundCheck {
            ok: true,
            violation: None,
        }
    }

    /// Splits into the part supported on `y`-friable ideals and the part
    /// supported on `y`-rough ideals; their convolution reproduces `self`.
    pub fn friable_rough_split(&self, y: f64) -> (MultFn, MultFn) {
        let friable = MultFn::from_rule(
            format!("{}|friable<={y}", self.label),
            self.completely_multiplicative,
            Arc::new(ThresholdRule {
                inner: self.clone(),
                y,
                keep_below: true,
            }),
        );
        let rough = MultFn::from_rule(
            format!("{}|rough>{y}", self.label),
            self.completely_multiplicative,
            Arc::new(ThresholdRule {
                inner: self.clone(),
                y,
                keep_below: false,
            }),
        );
        (friable, rough)
    }

    /// Writes `self = g * h` with `g` completely multiplicative agreeing on
    /// prime ideals and `h` supported away from squarefree parts:
    /// `h(p) = 0`, `h(p^k) = f(p^k) - f(p) f(p^{k-1})`.
    pub fn cm_decompose(&self) -> (MultFn, MultFn) {
        let g = MultFn::from_rule(
            format!("{}^cm", self.label),
            true,
            Arc::new(CmPartRule {
                inner: self.clone(),
            }),
        );
        let h = MultFn::from_rule(
            format!("{}^corr", self.label),
            false,
            Arc::new(CmCorrectionRule {
                inner: self.clone(),
            }),
        );
        (g, h)
    }

    /// Archimedean twist `f(a) * (Na)^{it}`.
    pub fn archimedean_twist(&self, t: f64) -> MultFn {
        self.pointwise(&archimedean_character(t))
    }

    /// Angular twist `f(a) * lambda_m(a)`.
    pub fn angular_twist(&self, m: i64) -> MultFn {
        self.pointwise(&angular_character(m))
    }
}

/// Outcome of the log-derivative bound check.
#[derive(Clone, Debug)]
pub struct VonMangoldtBoundCheck {
    pub ok: bool,
    /// (prime, exponent, |coefficient|) of the first violation, if any.
    pub violation: Option<(PrimeIdeal, u32, f64)>,
}

struct ConvolutionRule {
    lhs: MultFn,
    rhs: MultFn,
}

impl PrimePowerRule for ConvolutionRule {
    fn prime_power(&self, p: &PrimeIdeal, k: u32) -> Complex64 {
        let side = |f: &MultFn, j: u32| {
            if j == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                f.at_prime_power(p, j)
            }
        };
        (0..=k).map(|j| side(&self.lhs, j) * side(&self.rhs, k - j)).sum()
    }
}

struct PointwiseRule {
    lhs: MultFn,
    rhs: MultFn,
}

impl PrimePowerRule for PointwiseRule {
    fn prime_power(&self, p: &PrimeIdeal, k: u32) -> Complex64 {
        self.lhs.at_prime_power(p, k) * self.rhs.at_prime_power(p, k)
    }
}

struct ThresholdRule {
    inner: MultFn,
    y: f64,
    keep_below: bool,
}

impl PrimePowerRule for ThresholdRule {
    fn prime_power(&self, p: &PrimeIdeal, k: u32) -> Complex64 {
        let below = (p.norm as f64) <= self.y;
        if below == self.keep_below {
            self.inner.at_prime_power(p, k)
        } else {
            Complex64::ZERO
        }
    }
}

struct CmPartRule {
    inner: MultFn,
}

impl PrimePowerRule for CmPartRule {
    fn prime_power(&self, p: &PrimeIdeal, k: u32) -> Complex64 {
        self.inner.at_prime_power(p, 1).powu(k)
    }
}

struct CmCorrectionRule {
    inner: MultFn,
}

impl PrimePowerRule for CmCorrectionRule {
    fn prime_power(&self, p: &PrimeIdeal, k: u32) -> Complex64 {
        if k == 1 {
            Complex64::ZERO
        } else {
            let prev = self.inner.at_prime_power(p, k - 1);
            self.inner.at_prime_power(p, k) - self.inner.at_prime_power(p, 1) * prev
        }
    }
}

struct ClosureRule<F>(F);

impl<F> PrimePowerRule for ClosureRule<F>
where
    F: Fn(&PrimeIdeal, u32) -> Complex64 + Send + Sync,
{
    fn prime_power(&self, p: &PrimeIdeal, k: u32) -> Complex64 {
        (self.0)(p, k)
    }
}

/// Builds a function from a plain closure.
pub fn from_fn(
    label: impl Into<String>,
    completely_multiplicative: bool,
    f: impl Fn(&PrimeIdeal, u32) -> Complex64 + Send + Sync + 'static,
) -> MultFn {
    MultFn::from_rule(label, completely_multiplicative, Arc::new(ClosureRule(f)))
}

/// The constant function 1.
pub fn one() -> MultFn {
    from_fn("one", true, |_, _| Complex64::new(1.0, 0.0))
}

/// The convolution identity: 1 at the unit ideal, 0 elsewhere.
pub fn epsilon() -> MultFn {
    from_fn("eps", false, |_, _| Complex64::ZERO)
}

/// The ideal Moebius function: -1 on primes, 0 on higher powers.
pub fn moebius() -> MultFn {
    from_fn("mu", false, |_, k| {
        if k == 1 {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::ZERO
        }
    })
}

/// The generalized divisor function `d_kappa`, with
/// `d_kappa(p^m) = binom(kappa + m - 1, m)`; `d_1 = 1`, `d_2 = 1*1`.
pub fn divisor_kappa(kappa: f64) -> MultFn {
    from_fn(format!("d{kappa}"), false, move |_, k| {
        Complex64::new(d_kappa_prime_power(kappa, k), 0.0)
    })
}

/// `binom(kappa + m - 1, m)` for real `kappa >= 1`.
pub fn d_kappa_prime_power(kappa: f64, m: u32) -> f64 {
    let mut acc = 1.0;
    for j in 1..=m {
        acc *= (kappa + (j - 1) as f64) / j as f64;
    }
    acc
}

/// `d_kappa` at a factored ideal.
pub fn d_kappa_ideal(kappa: f64, fact: &IdealFactorization) -> f64 {
    fact.factors
        .iter()
        .map(|(_, e)| d_kappa_prime_power(kappa, *e))
        .product()
}

/// The angular character `lambda_m(a) = exp(4 i m arg(a))`.
pub fn angular_character(m: i64) -> MultFn {
    from_fn(format!("lambda{m}"), true, move |p, k| {
        Complex64::from_polar(1.0, 4.0 * m as f64 * k as f64 * p.generator.arg())
    })
}

/// Value of `lambda_m` directly from a generator's argument, bypassing
/// factorization (the character only depends on the angle).
pub fn angular_value(m: i64, g: CanonicalGenerator) -> Complex64 {
    Complex64::from_polar(1.0, 4.0 * m as f64 * g.arg())
}

/// The Archimedean character `(Na)^{it}`.
pub fn archimedean_character(t: f64) -> MultFn {
    from_fn(format!("N^({t}i)"), true, move |p, k| {
        Complex64::from_polar(1.0, t * k as f64 * p.log_norm())
    })
}

/// Random completely multiplicative function with values in {-1, +1} on
/// prime ideals, keyed by (seed, norm, kind).
pub fn random_pm_one(seed: u64) -> MultFn {
    from_fn(format!("random_pm[{seed}]"), true, move |p, k| {
        let word = crate::rng::mix_key(seed, p.norm, p.kind.code());
        let sign = if word >> 63 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign, 0.0).powu(k)
    })
}

/// Random completely multiplicative function with unimodular values on
/// prime ideals, keyed by (seed, norm, kind).
pub fn random_unit(seed: u64) -> MultFn {
    from_fn(format!("random_unit[{seed}]"), true, move |p, k| {
        let word = crate::rng::mix_key(seed, p.norm, p.kind.code());
        let angle = std::f64::consts::TAU * crate::rng::unit_f64(word);
        Complex64::from_polar(1.0, angle * k as f64)
    })
}

/// Random multiplicative (not completely multiplicative) function: each
/// prime power gets an independent unimodular value.
pub fn random_unit_general(seed: u64) -> MultFn {
    from_fn(format!("random_gen[{seed}]"), false, move |p, k| {
        let word =
            crate::rng::splitmix64(crate::rng::mix_key(seed, p.norm, p.kind.code()) ^ k as u64);
        let angle = std::f64::consts::TAU * crate::rng::unit_f64(word);
        Complex64::from_polar(1.0, angle)
    })
}

/// Parses a function specification: atoms joined by `*` (pointwise
/// product). Atoms: `one`, `eps`, `mu`, `d2`, `dk:<kappa>`, `random`,
/// `random-unit`, `random-gen`, `lambda:<m>`, `nit:<t>`.
pub fn resolve(spec: &str, seed: u64) -> Result<MultFn> {
    let mut parts = spec.split('*');
    let first = parts
        .next()
        .ok_or_else(|| Error::Parse("empty function spec".into()))?;
    let mut f = resolve_atom(first.trim(), seed)?;
    for part in parts {
        f = f.pointwise(&resolve_atom(part.trim(), seed)?);
    }
    Ok(f)
}

/// The atom names understood by [`resolve`], with one-line descriptions.
pub fn builtin_names() -> &'static [(&'static str, &'static str)] {
    &[
        ("one", "the constant function 1"),
        ("eps", "convolution identity (unit ideal only)"),
        ("mu", "ideal Moebius function"),
        ("d2", "divisor function 1*1"),
        ("dk:<kappa>", "generalized divisor function d_kappa"),
        ("random", "seeded random +-1, completely multiplicative"),
        ("random-unit", "seeded random unimodular, completely multiplicative"),
        ("random-gen", "seeded random unimodular on every prime power"),
        ("lambda:<m>", "angular character exp(4 i m arg)"),
        ("nit:<t>", "Archimedean character N^{it}"),
    ]
}

fn resolve_atom(atom: &str, seed: u64) -> Result<MultFn> {
    if let Some(rest) = atom.strip_prefix("lambda:") {
        let m: i64 = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad lambda order `{rest}`")))?;
        return Ok(angular_character(m));
    }
    if let Some(rest) = atom.strip_prefix("nit:") {
        let t: f64 = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad Archimedean twist `{rest}`")))?;
        return Ok(archimedean_character(t));
    }
    if let Some(rest) = atom.strip_prefix("dk:") {
        let kappa: f64 = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad divisor order `{rest}`")))?;
        if kappa < 1.0 {
            return Err(Error::InvalidArgument("dk needs kappa >= 1".into()));
        }
        return Ok(divisor_kappa(kappa));
    }
    match atom {
        "one" | "1" => Ok(one()),
        "eps" => Ok(epsilon()),
        "mu" => Ok(moebius()),
        "d2" => Ok(one().convolve(&one())),
        "random" => Ok(random_pm_one(seed)),
        "random-unit" => Ok(random_unit(seed)),
        "random-gen" => Ok(random_unit_general(seed)),
        other => Err(Error::Parse(format!("unknown function `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::enumerate_ideals;
    use crate::primes::prime_ideal_sieve;

    fn table() -> FactorTable {
        FactorTable::new(10_000)
    }

    #[test]
    fn eval_examples() {
        let t = table();
        let a = CanonicalGenerator::new(3, 4).unwrap();
        assert_eq!(one().eval(a, &t), Complex64::new(1.0, 0.0));
        // lambda_1 at the ramified prime: arg = pi/4, e^{i pi} = -1
        let ram = CanonicalGenerator::new(1, 1).unwrap();
        let v = angular_character(1).eval(ram, &t);
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        // mu vanishes on the square (2+i)^2 = 3+4i
        assert_eq!(moebius().eval(a, &t), Complex64::ZERO);
        assert_eq!(moebius().eval(CanonicalGenerator::UNIT, &t), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn moebius_inversion_on_a_square() {
        let t = table();
        let mu_one = moebius().convolve(&one());
        let sq = CanonicalGenerator::new(2, 0).unwrap(); // (1+i)^2
        assert_eq!(mu_one.eval(sq, &t), Complex64::ZERO);
        assert_eq!(mu_one.eval(CanonicalGenerator::UNIT, &t), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn divisor_function_at_a_prime_square() {
        let d2 = one().convolve(&one());
        let p = PrimeIdeal::split_pair(5).0;
        assert_eq!(d2.at_prime_power(&p, 2), Complex64::new(3.0, 0.0));
        assert_eq!(d_kappa_prime_power(2.0, 2), 3.0);
        assert_eq!(d_kappa_prime_power(1.0, 7), 1.0);
        assert!((d_kappa_prime_power(1.5, 1) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn convolution_matches_divisor_sum_oracle() {
        let t = table();
        let f = random_unit_general(12);
        let g = random_unit_general(34);
        let conv = f.convolve(&g);
        for a in enumerate_ideals(400) {
            let fact = t.factor(a);
            let direct: Complex64 = fact
                .divisors()
                .iter()
                .map(|d| f.eval(*d, &t) * g.eval(cofactor(a, *d), &t))
                .sum();
            let via_rule = conv.eval(a, &t);
            assert!(
                (direct - via_rule).norm() < 1e-10,
                "divisor-sum mismatch at {a}: {direct} vs {via_rule}"
            );
        }
    }

    /// The ideal a/d for d | a, found by exact Gaussian division.
    fn cofactor(a: CanonicalGenerator, d: CanonicalGenerator) -> CanonicalGenerator {
        let za = a.to_gauss();
        let zd = d.to_gauss();
        let nd = zd.norm() as i64;
        let t = za.mul(zd.conj());
        assert!(t.re % nd == 0 && t.im % nd == 0, "not a divisor");
        crate::gaussint::canonicalize(crate::gaussint::GaussInt::new(t.re / nd, t.im / nd))
            .unwrap()
    }

    #[test]
    fn convolution_is_commutative_and_associative() {
        let t = table();
        let f = random_unit_general(1);
        let g = random_unit_general(2);
        let h = random_unit_general(3);
        let fg_h = f.convolve(&g).convolve(&h);
        let f_gh = f.convolve(&g.convolve(&h));
        let gf = g.convolve(&f);
        let fg = f.convolve(&g);
        for a in enumerate_ideals(1000) {
            let fact = t.factor(a);
            assert!((fg.eval_factored(&fact) - gf.eval_factored(&fact)).norm() < 1e-10);
            assert!((fg_h.eval_factored(&fact) - f_gh.eval_factored(&fact)).norm() < 1e-10);
        }
    }

    #[test]
    fn von_mangoldt_coeffs_cm_and_general() {
        let p = PrimeIdeal::split_pair(13).0;
        let f = random_unit(99);
        let coeffs = f.von_mangoldt_coeffs(&p, 6);
        let fp = f.at_prime_power(&p, 1);
        for (i, c) in coeffs.iter().enumerate() {
            let expect = fp.powu(i as u32 + 1) * p.log_norm();
            assert!((c - expect).norm() < 1e-10, "k = {}", i + 1);
        }
        // general f at k = 2: (2 f(p^2) - f(p)^2) log Np
        let g = random_unit_general(5);
        let c = g.von_mangoldt_coeffs(&p, 2);
        let expect =
            (2.0 * g.at_prime_power(&p, 2) - g.at_prime_power(&p, 1).powu(2)) * p.log_norm();
        assert!((c[1] - expect).norm() < 1e-12);
        // f = 1 gives the plain von Mangoldt weights
        let c1 = one().von_mangoldt_coeffs(&p, 4);
        for c in c1 {
            assert!((c - Complex64::new(p.log_norm(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn von_mangoldt_coeffs_match_contour_log_differentiation() {
        // independent oracle: with log F_p(z) = sum c_k z^k, the
        // coefficients satisfy Lambda_f(p^k) = k log(Np) c_k; extract the
        // c_k by a discrete contour integral over |z| = r
        let p = PrimeIdeal::split_pair(13).0;
        let k_max = 6usize;
        let r = 0.2f64;
        let n = 1024usize;
        for f in [moebius(), random_unit_general(77), one().convolve(&one())] {
            let coeffs = f.von_mangoldt_coeffs(&p, k_max as u32);
            let mut c = vec![Complex64::ZERO; k_max + 1];
            for j in 0..n {
                let theta = std::f64::consts::TAU * j as f64 / n as f64;
                let z = Complex64::from_polar(r, theta);
                let mut fp = Complex64::new(1.0, 0.0);
                let mut zk = Complex64::new(1.0, 0.0);
                for k in 1..=40u32 {
                    zk *= z;
                    fp += f.at_prime_power(&p, k) * zk;
                }
                // |F_p - 1| < 1 at this radius, so the principal branch
                // is continuous around the circle
                let lg = fp.ln();
                for (k, slot) in c.iter_mut().enumerate() {
                    *slot += lg * Complex64::from_polar(1.0, -(k as f64) * theta);
                }
            }
            for k in 1..=k_max {
                let ck = c[k] / (n as f64 * r.powi(k as i32));
                let oracle = ck * k as f64 * p.log_norm();
                assert!(
                    (coeffs[k - 1] - oracle).norm() < 1e-8,
                    "{}: k = {k}: recursion {} vs contour {}",
                    f.label(),
                    coeffs[k - 1],
                    oracle
                );
            }
        }
    }

    #[test]
    fn von_mangoldt_bound_check_flags_bad_square() {
        let primes = prime_ideal_sieve(10_000).unwrap();
        let good = random_unit(4);
        assert!(good.check_von_mangoldt_bound(1.0, 10_000, &primes).ok);

        let bad = from_fn("bad", false, |p, k| {
            if p.kind == crate::primes::SplittingKind::Ramified && k == 2 {
                Complex64::new(10.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        let check = bad.check_von_mangoldt_bound(1.0, 10_000, &primes);
        assert!(!check.ok);
        let (p, k, mag) = check.violation.unwrap();
        assert_eq!((p.norm, k), (2, 2));
        assert!((mag - 19.0 * (2.0f64).ln()).abs() < 1e-9);

        let d2 = one().convolve(&one());
        assert!(d2.check_von_mangoldt_bound(2.0, 10_000, &primes).ok);
        assert!(!d2.check_von_mangoldt_bound(1.0, 10_000, &primes).ok);
    }

    #[test]
    fn friable_rough_split_reconvolves() {
        let t = table();
        for y in [2.0, 10.0, 100.0] {
            let f = random_unit_general(42);
            let (s, l) = f.friable_rough_split(y);
            let back = s.convolve(&l);
            for a in enumerate_ideals(2000) {
                let fact = t.factor(a);
                assert!(
                    (back.eval_factored(&fact) - f.eval_factored(&fact)).norm() < 1e-10,
                    "y = {y}, a = {a}"
                );
                // s vanishes as soon as a rough prime divides
                if fact.factors.iter().any(|(q, _)| q.norm as f64 > y) {
                    assert_eq!(s.eval_factored(&fact), Complex64::ZERO);
                }
            }
        }
    }

    #[test]
    fn cm_decomposition_reconvolves_and_h_vanishes_on_primes() {
        let t = table();
        let f = random_unit_general(7);
        let (g, h) = f.cm_decompose();
        assert!(g.is_completely_multiplicative());
        let back = g.convolve(&h);
        for a in enumerate_ideals(2000) {
            let fact = t.factor(a);
            assert!((back.eval_factored(&fact) - f.eval_factored(&fact)).norm() < 1e-10);
        }
        for p in prime_ideal_sieve(100).unwrap() {
            assert_eq!(h.at_prime_power(&p, 1), Complex64::ZERO);
            assert!(h.at_prime_power(&p, 3).norm() <= 2.0 + 1e-12);
        }
        // completely multiplicative f collapses to h = eps
        let (_, h1) = random_unit(3).cm_decompose();
        for p in prime_ideal_sieve(100).unwrap() {
            for k in 1..=4 {
                assert!(h1.at_prime_power(&p, k).norm() < 1e-12);
            }
        }
        // mu: h((1+i)^2) = mu(p^2) - mu(p)^2 = -1
        let (_, hmu) = moebius().cm_decompose();
        let ram = PrimeIdeal::ramified();
        assert_eq!(hmu.at_prime_power(&ram, 2), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn bound_check_implies_divisor_majorant() {
        let t = table();
        let primes = prime_ideal_sieve(10_000).unwrap();
        for (f, kappa) in [
            (random_unit(11), 1.0),
            (one().convolve(&one()), 2.0),
            (random_unit_general(8), 2.0),
        ] {
            let check = f.check_von_mangoldt_bound(kappa, 10_000, &primes);
            if !check.ok {
                continue;
            }
            for a in enumerate_ideals(10_000) {
                let fact = t.factor(a);
                let fa = f.eval_factored(&fact).norm();
                let cap = d_kappa_ideal(kappa, &fact);
                assert!(
                    fa <= cap * (1.0 + 1e-9) + 1e-9,
                    "majorant fails at {a}: |f| = {fa}, d_kappa = {cap}"
                );
            }
        }
    }

    #[test]
    fn angular_character_pairs_multiply_to_one() {
        let t = table();
        for m in [-3i64, 1, 2, 5] {
            let lam = angular_character(m);
            for a in enumerate_ideals(500) {
                let prod = lam.eval(a, &t) * lam.eval(a.conjugate_ideal(), &t);
                assert!((prod - Complex64::new(1.0, 0.0)).norm() < 1e-10, "m={m}, a={a}");
            }
        }
    }

    #[test]
    fn resolve_specs() {
        assert!(resolve("mu", 0).is_ok());
        assert!(resolve("lambda:-3*nit:2.5", 0).is_ok());
        assert!(resolve("dk:1.5", 0).is_ok());
        assert!(resolve("nope", 0).is_err());
        let f = resolve("lambda:-3*nit:2.5", 0).unwrap();
        assert!(f.is_completely_multiplicative());
    }

    #[test]
    fn random_functions_are_reproducible() {
        let t = table();
        let a = CanonicalGenerator::new(7, 2).unwrap();
        let v1 = random_pm_one(42).eval(a, &t);
        let v2 = random_pm_one(42).eval(a, &t);
        assert_eq!(v1, v2);
        assert!(v1 == Complex64::new(1.0, 0.0) || v1 == Complex64::new(-1.0, 0.0));
        let u = random_unit(42).eval(a, &t);
        assert!((u.norm() - 1.0).abs() < 1e-12);
    }
}
