//! Fourier analysis of sector indicators: truncated expansions, pointwise
//! remainders, and the decomposition of sector sums into angular modes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussint::dist_to_quarter_turn;
use crate::ideals::{enumerate_ideals_range, FactorTable};
use crate::multfun::MultFn;
use crate::sums::{Kahan, KahanComplex, Sector};

/// Truncated Fourier expansion of the indicator of a sector on the
/// quarter-circle: `1_J(theta) ~ delta + sum_{0<|m|<=T} b_m e^{4 i m theta}`.
///
/// With `u_j = theta_j / (pi/2)` and `e(t) = exp(2 pi i t)`, the interval
/// coefficients are `b_m = (e(-m u_1) - e(-m u_2)) / (2 pi i m)`, which
/// gives `|b_m| <= 1/(pi |m|)` and `b_{-m} = conj(b_m)`.
#[derive(Clone, Debug)]
pub struct FourierTruncation {
    sector: Sector,
    t: u32,
    /// positive-index coefficients `b_1 ..= b_T`
    coeffs: Vec<Complex64>,
}

/// Closed-form coefficients for the sector indicator, `m = 1..=T`.
pub fn fourier_coeffs(sector: Sector, t: u32) -> FourierTruncation {
    assert!(t >= 1, "truncation order must be positive");
    let u1 = sector.theta1() / std::f64::consts::FRAC_PI_2;
    let u2 = sector.theta2() / std::f64::consts::FRAC_PI_2;
    let e = |x: f64| Complex64::from_polar(1.0, std::f64::consts::TAU * x);
    let coeffs = (1..=t)
        .map(|m| {
            let mf = m as f64;
            (e(-mf * u1) - e(-mf * u2)) / Complex64::new(0.0, std::f64::consts::TAU * mf)
        })
        .collect();
    FourierTruncation {
        sector,
        t,
        coeffs,
    }
}

impl FourierTruncation {
    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn order(&self) -> u32 {
        self.t
    }

    /// `b_m` for `0 < |m| <= T`.
    pub fn coeff(&self, m: i64) -> Complex64 {
        assert!(m != 0 && m.unsigned_abs() <= self.t as u64, "mode {m} out of range");
        let b = self.coeffs[(m.unsigned_abs() - 1) as usize];
        if m > 0 {
            b
        } else {
            b.conj()
        }
    }

    /// `sum_{0<|m|<=T} |b_m|`; at most `(2/pi)(1 + log T)`.
    pub fn coeff_abs_sum(&self) -> f64 {
        2.0 * self.coeffs.iter().map(|b| b.norm()).sum::<f64>()
    }

    /// `sum_{0<|m|<=T} |b_m|^2`; at most `delta (1 - delta)` by Parseval.
    pub fn coeff_sq_sum(&self) -> f64 {
        2.0 * self.coeffs.iter().map(|b| b.norm_sqr()).sum::<f64>()
    }

    /// The truncated series `delta + sum b_m e^{4 i m theta}`, summed as a
    /// full complex pair sum; the imaginary part must cancel and is
    /// discarded after an assertion.
    pub fn series(&self, theta: f64) -> f64 {
        let w = Complex64::from_polar(1.0, 4.0 * theta);
        let mut acc = KahanComplex::default();
        let mut wp = Complex64::new(1.0, 0.0);
        for b in &self.coeffs {
            wp *= w;
            acc.add(b * wp);
            acc.add(b.conj() * wp.conj());
        }
        let s = acc.value();
        assert!(
            s.im.abs() < 1e-12 * (1.0 + self.t as f64),
            "imaginary residue {} out of tolerance",
            s.im
        );
        self.sector.density() + s.re
    }

    /// Pointwise remainder `R_T(theta) = 1_J(theta) - series(theta)`.
    /// Angles equal to a sector endpoint (mod pi/2) are a domain error.
    pub fn remainder(&self, theta: f64) -> Result<f64> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "angle {theta} outside [0, pi/2)"
            )));
        }
        if self.at_endpoint(theta) {
            return Err(Error::InvalidArgument(format!(
                "angle {theta} is a sector endpoint; the remainder is not defined there"
            )));
        }
        let indicator = if self.sector.contains(theta) { 1.0 } else { 0.0 };
        Ok(indicator - self.series(theta))
    }

    fn at_endpoint(&self, theta: f64) -> bool {
        dist_to_quarter_turn(theta - self.sector.theta1()) < 1e-14
            || dist_to_quarter_turn(theta - self.sector.theta2()) < 1e-14
    }

    /// The envelope `min(1, 1/(T d1) + 1/(T d2))` controlling `|R_T|`,
    /// where `d_i` is the quarter-turn distance to endpoint `i`.
    pub fn remainder_envelope(&self, theta: f64) -> f64 {
        let d1 = dist_to_quarter_turn(theta - self.sector.theta1());
        let d2 = dist_to_quarter_turn(theta - self.sector.theta2());
        let t = self.t as f64;
        let raw = if d1 == 0.0 || d2 == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (t * d1) + 1.0 / (t * d2)
        };
        raw.min(1.0)
    }
}

/// Sum of `|R_T(arg a)|` over `X < Na <= Y`, with endpoint ideals excluded
/// and counted separately. Measured against the window bound
/// `(Y - X) log(T+1) / T + sqrt(Y)`.
#[derive(Clone, Copy, Debug)]
pub struct RemainderWindowSum {
    pub sum_abs: f64,
    pub endpoint_ideals: u64,
    pub bound_shape: f64,
    pub ratio: f64,
}

pub fn sum_remainder_window(
    trunc: &FourierTruncation,
    x: f64,
    y: f64,
) -> Result<RemainderWindowSum> {
    if !(x >= 0.0 && y > x) {
        return Err(Error::InvalidArgument(format!("bad window ({x}, {y}]")));
    }
    let mut acc = Kahan::default();
    let mut endpoints = 0u64;
    for g in enumerate_ideals_range(x.floor() as u64, y.floor() as u64) {
        let n = g.norm() as f64;
        if n <= x || n > y {
            continue;
        }
        let theta = g.arg();
        if trunc.at_endpoint(theta) {
            endpoints += 1;
            continue;
        }
        acc.add(trunc.remainder(theta)?.abs());
    }
    let bound_shape =
        (y - x) * ((trunc.t + 1) as f64).ln() / trunc.t as f64 + y.sqrt();
    let sum_abs = acc.value();
    Ok(RemainderWindowSum {
        sum_abs,
        endpoint_ideals: endpoints,
        bound_shape,
        ratio: sum_abs / bound_shape,
    })
}

/// Both sides of the sector decomposition over a radial window, and the
/// residual measured against the window error shape.
#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    /// `S_{f,J}(window)`
    pub sector_sum: Complex64,
    /// `S_f(window)`
    pub full_sum: Complex64,
    /// `S_{f,J}(window) - delta_J S_f(window)`
    pub left: Complex64,
    /// `sum_{0<|m|<=T} b_m S_{f lambda_m}(window)`
    pub right: Complex64,
    pub residual: Complex64,
    pub bound_shape: f64,
    pub ratio: f64,
    /// the per-mode twisted window sums, `m = -T..=-1, 1..=T` in coeff order
    pub mode_sums: Vec<(i64, Complex64)>,
}

/// Evaluates the sector decomposition of `f` over `X < Na <= Y` with
/// truncation order `T`: the sector sum minus its density share on one
/// side, the Fourier modes on the other. One enumeration pass computes
/// `f(a)` once per ideal and steps the angular phases up to order `T`.
pub fn sector_decomposition(
    f: &MultFn,
    sector: Sector,
    t: u32,
    x: f64,
    y: f64,
    table: &FactorTable,
) -> Result<SectorDecomposition> {
    if !(x >= 0.0 && y > x) {
        return Err(Error::InvalidArgument(format!("bad window ({x}, {y}]")));
    }
    let trunc = fourier_coeffs(sector, t);
    let mut sector_sum = KahanComplex::default();
    let mut full_sum = KahanComplex::default();
    let mut plus = vec![KahanComplex::default(); t as usize];
    let mut minus = vec![KahanComplex::default(); t as usize];
    for g in enumerate_ideals_range(x.floor() as u64, y.floor() as u64) {
        let n = g.norm() as f64;
        if n <= x || n > y {
            continue;
        }
        let fa = f.eval(g, table);
        full_sum.add(fa);
        let theta = g.arg();
        if sector.contains(theta) {
            sector_sum.add(fa);
        }
        if fa != Complex64::ZERO {
            let w = Complex64::from_polar(1.0, 4.0 * theta);
            let mut zp = fa;
            let mut zm = fa;
            for k in 0..t as usize {
                zp *= w;
                zm *= w.conj();
                plus[k].add(zp);
                minus[k].add(zm);
            }
        }
    }
    let sector_total = sector_sum.value();
    let full_total = full_sum.value();
    let left = sector_total - full_total * sector.density();
    let mut right = KahanComplex::default();
    let mut mode_sums = Vec::with_capacity(2 * t as usize);
    for k in 0..t as usize {
        let m = (k + 1) as i64;
        let sp = plus[k].value();
        let sm = minus[k].value();
        right.add(trunc.coeff(m) * sp);
        right.add(trunc.coeff(-m) * sm);
        mode_sums.push((m, sp));
        mode_sums.push((-m, sm));
    }
    mode_sums.sort_by_key(|(m, _)| *m);
    let right = right.value();
    let residual = left - right;
    let bound_shape = (y - x) * ((t + 1) as f64).ln() / t as f64 + y.sqrt();
    Ok(SectorDecomposition {
        sector_sum: sector_total,
        full_sum: full_total,
        left,
        right,
        residual,
        bound_shape,
        ratio: residual.norm() / bound_shape,
        mode_sums,
    })
}
