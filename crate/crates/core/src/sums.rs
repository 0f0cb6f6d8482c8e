//! Summatory functions over ideals: partial sums, radial windows, sector
//! restrictions, and norm-compression to arrays indexed by integers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussint::CanonicalGenerator;
use crate::ideals::{enumerate_ideals_range, FactorTable};
use crate::multfun::{angular_value, MultFn};

/// Neumaier-compensated accumulator. Used for every sum that can run to
/// 1e5 terms or more; relative accuracy is far below the tolerances the
/// experiments assert.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// A half-open angular interval `[theta1, theta2)` inside `[0, pi/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    theta1: f64,
    theta2: f64,
}

impl Sector {
    pub fn new(theta1: f64, theta2: f64) -> Result<Sector> {
        let q = std::f64::consts::FRAC_PI_2;
        if !(0.0 <= theta1 && theta1 < theta2 && theta2 <= q) {
            return Err(Error::InvalidArgument(format!(
                "sector [{theta1}, {theta2}) must sit inside [0, pi/2)"
            )));
        }
        Ok(Sector { theta1, theta2 })
    }

    /// The whole quadrant.
    pub fn full() -> Sector {
        Sector {
            theta1: 0.0,
            theta2: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    /// Angular density `|J| / (pi/2)`, in (0, 1].
    pub fn density(&self) -> f64 {
        (self.theta2 - self.theta1) / std::f64::consts::FRAC_PI_2
    }

    pub fn is_full(&self) -> bool {
        self.theta1 == 0.0 && self.theta2 == std::f64::consts::FRAC_PI_2
    }

    /// Half-open membership test, no fuzz at the boundary.
    pub fn contains(&self, theta: f64) -> bool {
        self.theta1 <= theta && theta < self.theta2
    }
}

/// A function on ideals pushed down to the integers: `values[n]` is the sum
/// of the source over all ideals of norm exactly `n`.
#[derive(Clone, Debug)]
pub struct CompressedFn {
    /// Indexed 0..=limit; index 0 is unused and stays zero.
    pub values: Vec<Complex64>,
    pub source_label: String,
}

impl CompressedFn {
    pub fn limit(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn at(&self, n: u64) -> Complex64 {
        self.values[n as usize]
    }

    /// Compensated prefix sums: entry n is the sum of `values[1..=n]`.
    pub fn prefix_sums(&self) -> Vec<Complex64> {
        let mut acc = KahanComplex::default();
        let mut out = Vec::with_capacity(self.values.len());
        out.push(Complex64::ZERO);
        for v in &self.values[1..] {
            acc.add(*v);
            out.push(acc.value());
        }
        out
    }
}

// 16 bytes per norm class; cap the allocation at ~1.6 GB equivalent.
const COMPRESS_BUDGET: u64 = 100_000_000;

fn compress_with(
    label: String,
    x: u64,
    table: &FactorTable,
    mut term: impl FnMut(CanonicalGenerator, &FactorTable) -> Complex64,
) -> Result<CompressedFn> {
    if x > COMPRESS_BUDGET {
        return Err(Error::Resource(format!(
            "compressed array of {x} norm classes exceeds the memory budget"
        )));
    }
    if x > table.limit() {
        return Err(Error::Resource(format!(
            "factor table limit {} below requested norm {x}",
            table.limit()
        )));
    }
    let mut values = vec![Complex64::ZERO; x as usize + 1];
    for g in enumerate_ideals_range(0, x) {
        values[g.norm() as usize] += term(g, table);
    }
    Ok(CompressedFn {
        values,
        source_label: label,
    })
}

/// Norm-compression of `f` up to `x`, by one streaming pass over ideals.
pub fn norm_compress(f: &MultFn, x: u64, table: &FactorTable) -> Result<CompressedFn> {
    compress_with(f.label().to_string(), x, table, |g, t| f.eval(g, t))
}

/// Norm-compression of the angular twist `f * lambda_m`; the character is
/// read off the generator's angle, the factor table only serves `f`.
pub fn norm_compress_mode(
    f: &MultFn,
    m: i64,
    x: u64,
    table: &FactorTable,
) -> Result<CompressedFn> {
    compress_with(
        format!("{}.lambda{m}", f.label()),
        x,
        table,
        |g, t| f.eval(g, t) * angular_value(m, g),
    )
}

/// Norm-compression restricted to ideals passing a predicate (used for
/// sector-restricted arrays, which are rebuilt by a second enumeration
/// pass instead of storing per-ideal angles).
pub fn norm_compress_filtered(
    f: &MultFn,
    x: u64,
    table: &FactorTable,
    keep: impl Fn(CanonicalGenerator) -> bool,
) -> Result<CompressedFn> {
    compress_with(format!("{}|filtered", f.label()), x, table, |g, t| {
        if keep(g) {
            f.eval(g, t)
        } else {
            Complex64::ZERO
        }
    })
}

/// `S_f(x)`: sum of `f` over ideals of norm at most `x`.
pub fn partial_sum(f: &MultFn, x: f64, table: &FactorTable) -> Complex64 {
    sector_window_sum(f, None, 0.0, x, table)
}

/// `S_f(x; h)`: sum over the radial window `x < Na <= x + h`.
pub fn interval_sum(f: &MultFn, x: f64, h: f64, table: &FactorTable) -> Complex64 {
    sector_window_sum(f, None, x, x + h, table)
}

/// `S_{f,J}(x)`: sum over ideals of norm at most `x` with argument in `J`.
pub fn sector_sum(f: &MultFn, sector: Sector, x: f64, table: &FactorTable) -> Complex64 {
    sector_window_sum(f, Some(sector), 0.0, x, table)
}

/// `S_{f,J}(x; h)`.
pub fn sector_interval_sum(
    f: &MultFn,
    sector: Sector,
    x: f64,
    h: f64,
    table: &FactorTable,
) -> Complex64 {
    sector_window_sum(f, Some(sector), x, x + h, table)
}

/// Shared engine: sum of `f` over `lo < Na <= hi`, optionally restricted to
/// a sector by the half-open membership rule.
pub fn sector_window_sum(
    f: &MultFn,
    sector: Option<Sector>,
    lo: f64,
    hi: f64,
    table: &FactorTable,
) -> Complex64 {
    if hi <= lo || hi < 1.0 {
        return Complex64::ZERO;
    }
    // integer cutoffs equivalent to the real ones, since norms are integers
    let lo_int = if lo < 0.0 { 0 } else { lo.floor() as u64 };
    let hi_int = hi.floor() as u64;
    let mut acc = KahanComplex::default();
    for g in enumerate_ideals_range(lo_int, hi_int) {
        let n = g.norm() as f64;
        if n <= lo || n > hi {
            continue;
        }
        if let Some(s) = sector {
            if !s.contains(g.arg()) {
                continue;
            }
        }
        acc.add(f.eval(g, table));
    }
    acc.value()
}

/// Tail weight of a correction factor: `sum_{z < Nd <= x} |h(d)| / Nd`.
pub fn abs_over_norm_tail(h: &MultFn, z: f64, x: u64, table: &FactorTable) -> f64 {
    let lo = if z < 0.0 { 0 } else { z.floor() as u64 };
    let mut acc = Kahan::default();
    for g in enumerate_ideals_range(lo, x) {
        let n = g.norm() as f64;
        if n <= z {
            continue;
        }
        let v = h.eval(g, table).norm();
        if v != 0.0 {
            acc.add(v / n);
        }
    }
    acc.value()
}
