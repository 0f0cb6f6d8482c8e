//! Direct numerical verification of the supporting prime-ideal estimates.
//!
//! Each check measures a quantity, evaluates the stated bound shape, and
//! reports the ratio. Implied constants are frozen by the calibration
//! pipeline (see [`crate::calibration`]) and treated as regression
//! thresholds afterwards.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussint::CanonicalGenerator;
use crate::ideals::{enumerate_ideals_range, FactorTable};
use crate::multfun::MultFn;
use crate::pretentious::EulerProduct;
use crate::primes::PrimeIdeal;
use crate::quad;
use crate::sums::{Kahan, KahanComplex};

/// One row of an experiment: a measured quantity against a bound shape.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub tag: String,
    pub params: String,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
}

impl BoundReport {
    pub fn new(tag: impl Into<String>, params: impl Into<String>, measured: f64, bound: f64) -> BoundReport {
        assert!(bound > 0.0, "bound shapes must be positive");
        let ratio = measured / bound;
        assert!(ratio.is_finite());
        BoundReport {
            tag: tag.into(),
            params: params.into(),
            measured,
            bound,
            ratio,
        }
    }
}

/// `sum of log(Np) over prime-power ideals of norm at most x` (each power
/// counted once with weight log Np).
pub fn psi_ideal(x: f64, primes: &[PrimeIdeal]) -> f64 {
    let mut acc = Kahan::default();
    for p in primes {
        if (p.norm as f64) > x {
            break;
        }
        let mut pw = p.norm as f64;
        let mut k = 0u32;
        while pw <= x {
            k += 1;
            pw *= p.norm as f64;
        }
        acc.add(k as f64 * p.log_norm());
    }
    acc.value()
}

/// `sum 1/Np over prime ideals of norm at most x`, minus `log log x`.
pub fn mertens_ideal(x: f64, primes: &[PrimeIdeal]) -> f64 {
    mertens_raw(x, primes) - x.ln().ln()
}

/// The raw reciprocal sum over prime ideals of norm at most `x`.
pub fn mertens_raw(x: f64, primes: &[PrimeIdeal]) -> f64 {
    let mut acc = Kahan::default();
    for p in primes {
        if (p.norm as f64) > x {
            break;
        }
        acc.add(1.0 / p.norm as f64);
    }
    acc.value()
}

/// Counts rational primes `p = 1 mod 4` in `(U, U+H]` against the sieve
/// bound `H / (2 log 2H)`.
pub fn brun_titchmarsh_mod4(u: f64, h: f64, rational_primes: &[u64]) -> Result<BoundReport> {
    if !(u >= 3.0 && (2.0..=u).contains(&h)) {
        return Err(Error::InvalidArgument(format!(
            "Brun-Titchmarsh window needs U >= 3 and 2 <= H <= U; got U={u}, H={h}"
        )));
    }
    let count = rational_primes
        .iter()
        .filter(|&&p| p % 4 == 1 && (p as f64) > u && (p as f64) <= u + h)
        .count() as f64;
    let bound = h / (2.0 * (2.0 * h).ln());
    Ok(BoundReport::new(
        "bt_mod4",
        format!("U={u} H={h}"),
        count,
        bound,
    ))
}

/// Sums the von Mangoldt weight over the multiplicative window
/// `M e^{-1/T} <= Na <= M e^{1/T}` and compares with `M/T`.
pub fn short_interval_vm(m: f64, t: f64, primes: &[PrimeIdeal]) -> Result<BoundReport> {
    // the boundary M = T^2 is admissible; tolerate rounding in T^2
    if !(t >= 1.0 && m >= t * t * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "short-interval window needs T >= 1 and M >= T^2; got M={m}, T={t}"
        )));
    }
    let lo = m * (-1.0 / t).exp();
    let hi = m * (1.0 / t).exp();
    let mut acc = Kahan::default();
    for p in primes {
        if (p.norm as f64) > hi {
            break;
        }
        let mut pw = p.norm as f64;
        while pw <= hi {
            if pw >= lo {
                acc.add(p.log_norm());
            }
            pw *= p.norm as f64;
        }
    }
    Ok(BoundReport::new(
        "short_interval_vm",
        format!("M={m} T={t}"),
        acc.value(),
        m / t,
    ))
}

/// Mean square of a von Mangoldt-weighted Dirichlet polynomial over
/// `|t| <= T`, against the diagonal `sum Na |c(a)|^2 Lambda(a)`.
///
/// Coefficients must be supported on norms in `[T^2, x]`; terms at
/// non-prime-power ideals carry zero weight and are ignored.
pub fn mean_square_dirichlet(
    coeffs: &[(CanonicalGenerator, Complex64)],
    t_cap: f64,
    x: f64,
    table: &FactorTable,
) -> Result<BoundReport> {
    if x < t_cap * t_cap {
        return Err(Error::InvalidArgument(format!(
            "support window needs x >= T^2; got x={x}, T={t_cap}"
        )));
    }
    let mut terms: Vec<(f64, f64, Complex64)> = Vec::new(); // (ln n, lambda, c)
    let mut diagonal = Kahan::default();
    for (g, c) in coeffs {
        let n = g.norm() as f64;
        if n < t_cap * t_cap || n > x {
            return Err(Error::InvalidArgument(format!(
                "coefficient at norm {n} outside the window [T^2, x] = [{}, {x}]",
                t_cap * t_cap
            )));
        }
        let fact = table.factor(*g);
        if fact.factors.len() != 1 {
            continue; // Lambda vanishes off prime powers
        }
        let lambda = fact.factors[0].0.log_norm();
        terms.push((n.ln(), lambda, *c));
        diagonal.add(n * c.norm_sqr() * lambda);
    }
    let diagonal = diagonal.value();
    if terms.is_empty() || diagonal == 0.0 {
        return Ok(BoundReport::new(
            "mean_square",
            format!("T={t_cap} x={x} terms=0"),
            0.0,
            1.0,
        ));
    }
    let poly_sq = |t: f64| -> f64 {
        let mut acc = KahanComplex::default();
        for (ln_n, lambda, c) in &terms {
            acc.add(c * lambda * Complex64::from_polar(1.0, -t * ln_n));
        }
        acc.value().norm_sqr()
    };
    let integral = quad::adaptive(&mut { poly_sq }, -t_cap, t_cap, 1e-6, 1e-12)?;
    Ok(BoundReport::new(
        "mean_square",
        format!("T={t_cap} x={x} terms={}", terms.len()),
        integral,
        diagonal,
    ))
}

/// Outcome of a truncated Perron evaluation.
#[derive(Clone, Copy, Debug)]
pub struct PerronOutcome {
    /// `(1/2 pi i) * integral of F(s) x^s / s over the segment`
    pub integral: Complex64,
    /// the error majorant `sum |f(a)| (x/Na)^sigma min(1, 1/(T |log(x/Na)|))`
    pub majorant: f64,
    pub x_cut: u64,
}

/// Truncated Perron formula for a 1-bounded multiplicative function:
/// quadrature of the vertical segment `sigma +- iT` against the classical
/// error majorant (the `min` factor is read as 1 when `x = Na`).
///
/// The Dirichlet series is evaluated as a truncated Euler product over
/// primes of norm at most `max(4x, 200)`; every ideal of norm at most `x`
/// is friable for that cut, so the truncation only perturbs coefficients
/// beyond `x`, which the majorant already dominates.
pub fn perron_truncated(
    f: &MultFn,
    x: f64,
    t_cap: f64,
    sigma: f64,
    table: &FactorTable,
    primes: &[PrimeIdeal],
) -> Result<PerronOutcome> {
    // the binding abscissa constraint is relative to the Euler cut; the
    // constructor rejects sigma below 1 + 1/log(x_cut)
    let x_cut = ((4.0 * x).ceil() as u64).max(200);
    let ep = EulerProduct::new(f, sigma, x_cut, 1.0, primes)?;
    let mut integrand = |t: f64| -> Complex64 {
        let s = Complex64::new(sigma, t);
        ep.eval(t) * (s * x.ln()).exp() / s
    };
    let coarse: Complex64 = quad::panels(&mut integrand, -t_cap, t_cap, 0.25);
    let fine: Complex64 = quad::panels(&mut integrand, -t_cap, t_cap, 0.125);
    let scale = fine.norm().max(x);
    if (coarse - fine).norm() > 1e-6 * scale {
        return Err(Error::Numeric(format!(
            "Perron quadrature drift {:.3e} between panel widths 0.25 and 0.125 (T={t_cap}, x={x})",
            (coarse - fine).norm()
        )));
    }
    let integral = fine / std::f64::consts::TAU;

    // majorant: enumerate to 8x, bound the rest analytically (1-bounded f)
    let enum_cap = (8.0 * x).ceil() as u64;
    if enum_cap > table.limit() {
        return Err(Error::Resource(format!(
            "factor table limit {} below the majorant range {enum_cap}",
            table.limit()
        )));
    }
    let mut majorant = Kahan::default();
    for g in enumerate_ideals_range(0, enum_cap) {
        let n = g.norm() as f64;
        let fa = f.eval(g, table).norm();
        if fa == 0.0 {
            continue;
        }
        if fa > 1.0 + 1e-9 {
            return Err(Error::ContractViolation(format!(
                "Perron majorant requires a 1-bounded function; |f| = {fa} at {g}"
            )));
        }
        let log_gap = (x / n).ln().abs();
        let min_factor = if log_gap == 0.0 {
            1.0
        } else {
            (1.0 / (t_cap * log_gap)).min(1.0)
        };
        majorant.add(fa * (x / n).powf(sigma) * min_factor);
    }
    // tail over Na > 8x: ideal counts are at most 2u in [1, u], so the sum
    // of Na^{-sigma} beyond B is at most 2 sigma B^{1-sigma}/(sigma-1)
    let b = enum_cap as f64;
    let tail = x.powf(sigma) / (t_cap * (b / x).ln())
        * (2.0 * sigma / (sigma - 1.0))
        * b.powf(1.0 - sigma);
    let majorant = majorant.value() + tail;
    Ok(PerronOutcome {
        integral,
        majorant,
        x_cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multfun::{moebius, one, random_pm_one};
    use crate::primes::{prime_ideal_sieve, rational_primes};
    use crate::sums::partial_sum;

    #[test]
    fn psi_at_ten_and_two() {
        let primes = prime_ideal_sieve(1000).unwrap();
        let expect = 3.0 * (2.0f64).ln() + 2.0 * (5.0f64).ln() + 2.0 * (3.0f64).ln();
        assert!((psi_ideal(10.0, &primes) - expect).abs() < 1e-12);
        assert!((psi_ideal(2.0, &primes) - (2.0f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn mertens_at_ten() {
        let primes = prime_ideal_sieve(1000).unwrap();
        let raw = 0.5 + 0.4 + 1.0 / 9.0;
        assert!((mertens_raw(10.0, &primes) - raw).abs() < 1e-14);
        let drift = mertens_ideal(10.0, &primes);
        assert!((drift - (raw - (10.0f64).ln().ln())).abs() < 1e-14);
        assert!((drift - 0.1771).abs() < 5e-4);
    }

    #[test]
    fn mertens_raw_is_nondecreasing() {
        let primes = prime_ideal_sieve(10_000).unwrap();
        let mut last = 0.0;
        for x in (10..100).map(|k| (k * 100) as f64) {
            let v = mertens_raw(x, &primes);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn brun_titchmarsh_example_window() {
        let rp = rational_primes(2000);
        let rep = brun_titchmarsh_mod4(1000.0, 100.0, &rp).unwrap();
        assert_eq!(rep.measured, 9.0);
        assert!((rep.bound - 100.0 / (2.0 * (200.0f64).ln())).abs() < 1e-12);
        assert!(brun_titchmarsh_mod4(1000.0, 1.0, &rp).is_err());
    }

    #[test]
    fn brun_titchmarsh_tiny_window() {
        let rp = rational_primes(2_000_000);
        let rep = brun_titchmarsh_mod4(1_000_000.0, 2.0, &rp).unwrap();
        assert!(rep.measured <= 1.0);
    }

    #[test]
    fn short_interval_vm_example() {
        let primes = prime_ideal_sieve(1000).unwrap();
        let rep = short_interval_vm(100.0, 10.0, &primes).unwrap();
        let expect = 2.0 * ((97.0f64).ln() + (101.0f64).ln() + (109.0f64).ln());
        assert!((rep.measured - expect).abs() < 1e-12, "got {}", rep.measured);
        assert!((rep.ratio - expect / 10.0).abs() < 1e-12);
        // boundary precondition M = T^2 is allowed
        assert!(short_interval_vm(100.0, 10.000001, &primes).is_err());
        assert!(short_interval_vm(100.0, 9.0, &primes).is_ok());
    }

    #[test]
    fn mean_square_single_term_closed_form() {
        let table = FactorTable::new(10_000);
        let primes = prime_ideal_sieve(10_000).unwrap();
        let t_cap = 5.0;
        let p = primes.iter().find(|p| p.norm >= 29).unwrap();
        let c = Complex64::new(0.7, -0.2);
        let rep = mean_square_dirichlet(&[(p.generator, c)], t_cap, 10_000.0, &table).unwrap();
        let expect_integral = 2.0 * t_cap * c.norm_sqr() * p.log_norm().powi(2);
        let expect_diag = p.norm as f64 * c.norm_sqr() * p.log_norm();
        assert!((rep.measured - expect_integral).abs() < 1e-6 * expect_integral);
        assert!((rep.bound - expect_diag).abs() < 1e-12);
    }

    #[test]
    fn mean_square_empty_coefficients() {
        let table = FactorTable::new(100);
        let rep = mean_square_dirichlet(&[], 5.0, 100.0, &table).unwrap();
        assert_eq!(rep.measured, 0.0);
    }

    #[test]
    fn mean_square_rejects_bad_support() {
        let table = FactorTable::new(100);
        let g = CanonicalGenerator::new(2, 1).unwrap(); // norm 5 < T^2
        assert!(mean_square_dirichlet(
            &[(g, Complex64::new(1.0, 0.0))],
            5.0,
            100.0,
            &table
        )
        .is_err());
    }

    #[test]
    fn perron_recovers_partial_sums() {
        let table = FactorTable::new(2000);
        let primes = prime_ideal_sieve(2000).unwrap();
        let x = 100.5;
        for f in [one(), moebius(), random_pm_one(7)] {
            let direct = partial_sum(&f, x, &table);
            let out = perron_truncated(&f, x, 50.0, 1.2, &table, &primes).unwrap();
            let defect = (out.integral - direct).norm();
            assert!(
                defect <= out.majorant,
                "{}: defect {defect} > majorant {}",
                f.label(),
                out.majorant
            );
        }
    }

    #[test]
    fn perron_defect_shrinks_with_t() {
        let table = FactorTable::new(2000);
        let primes = prime_ideal_sieve(2000).unwrap();
        let f = one();
        let x = 100.5;
        let direct = partial_sum(&f, x, &table);
        let d1 = (perron_truncated(&f, x, 10.0, 1.2, &table, &primes)
            .unwrap()
            .integral
            - direct)
            .norm();
        let d2 = (perron_truncated(&f, x, 160.0, 1.2, &table, &primes)
            .unwrap()
            .integral
            - direct)
            .norm();
        assert!(d2 < d1, "defect did not shrink: {d1} -> {d2}");
    }

    #[test]
    fn perron_below_first_nontrivial_norm() {
        let table = FactorTable::new(200);
        let primes = prime_ideal_sieve(200).unwrap();
        let x = 1.5;
        let out = perron_truncated(&moebius(), x, 50.0, 3.5, &table, &primes).unwrap();
        // only the unit ideal contributes to the sum
        assert!((out.integral - Complex64::new(1.0, 0.0)).norm() <= out.majorant);
    }

    #[test]
    fn perron_requires_admissible_sigma() {
        let table = FactorTable::new(2000);
        let primes = prime_ideal_sieve(2000).unwrap();
        assert!(matches!(
            perron_truncated(&one(), 100.5, 10.0, 1.001, &table, &primes),
            Err(Error::Precision(_))
        ));
    }
}
