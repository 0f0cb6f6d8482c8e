//! Gaussian integers and canonical ideal generators.
//!
//! Every nonzero ideal of Z[i] is principal and has exactly one generator
//! in the half-open first quadrant (re >= 1, im >= 0). That generator is
//! the identity we use for ideals everywhere in this crate.

use std::fmt;

use crate::error::{Error, Result};

/// A Gaussian integer `re + im*i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const fn new(re: i64, im: i64) -> Self {
        GaussInt { re, im }
    }

    pub const fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    /// `re^2 + im^2`, computed without intermediate overflow.
    pub fn norm(self) -> u64 {
        let n = self.re as i128 * self.re as i128 + self.im as i128 * self.im as i128;
        n as u64
    }

    pub const fn conj(self) -> Self {
        GaussInt::new(self.re, -self.im)
    }

    pub fn mul(self, rhs: Self) -> Self {
        let re = self.re as i128 * rhs.re as i128 - self.im as i128 * rhs.im as i128;
        let im = self.re as i128 * rhs.im as i128 + self.im as i128 * rhs.re as i128;
        debug_assert!(re.unsigned_abs() <= i64::MAX as u128 && im.unsigned_abs() <= i64::MAX as u128);
        GaussInt::new(re as i64, im as i64)
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0 {
            write!(f, "{}", self.re)
        } else if self.im < 0 {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// The unique first-quadrant generator of a nonzero ideal: `re >= 1`,
/// `im >= 0`, equivalently `0 <= arg < pi/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalGenerator {
    re: i64,
    im: i64,
}

impl CanonicalGenerator {
    /// The unit ideal Z[i] itself.
    pub const UNIT: CanonicalGenerator = CanonicalGenerator { re: 1, im: 0 };

    /// Builds a generator that is already canonical.
    pub fn new(re: i64, im: i64) -> Result<Self> {
        if re >= 1 && im >= 0 {
            Ok(CanonicalGenerator { re, im })
        } else {
            Err(Error::InvalidArgument(format!(
                "({re}, {im}) is not in the canonical quadrant (re >= 1, im >= 0)"
            )))
        }
    }

    pub const fn re(self) -> i64 {
        self.re
    }

    pub const fn im(self) -> i64 {
        self.im
    }

    pub fn norm(self) -> u64 {
        self.to_gauss().norm()
    }

    pub const fn to_gauss(self) -> GaussInt {
        GaussInt::new(self.re, self.im)
    }

    pub const fn is_unit(self) -> bool {
        self.re == 1 && self.im == 0
    }

    /// Argument of the generator, guaranteed to lie in `[0, pi/2)`.
    pub fn arg(self) -> f64 {
        (self.im as f64).atan2(self.re as f64)
    }

    /// The conjugate ideal's canonical generator. An involution; fixes
    /// generators on the real axis and on the diagonal ray.
    pub fn conjugate_ideal(self) -> CanonicalGenerator {
        if self.im == 0 {
            self
        } else {
            // conj = re - im*i; multiplying by i lands back in the quadrant.
            CanonicalGenerator {
                re: self.im,
                im: self.re,
            }
        }
    }

    /// Ideal product, re-canonicalized.
    pub fn mul(self, rhs: CanonicalGenerator) -> CanonicalGenerator {
        canonicalize(self.to_gauss().mul(rhs.to_gauss()))
            .expect("product of nonzero elements is nonzero")
    }

    /// Ascending sort key: norm first, then a fixed tie order.
    pub fn order_key(self) -> (u64, i64, i64) {
        (self.norm(), self.im, self.re)
    }
}

impl fmt::Display for CanonicalGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_gauss().fmt(f)
    }
}

/// Rotates `z` by powers of `i` until it lands in the canonical quadrant.
/// Idempotent on canonical inputs; constant on associate classes.
pub fn canonicalize(z: GaussInt) -> Result<CanonicalGenerator> {
    if z.is_zero() {
        return Err(Error::ZeroIdeal);
    }
    let mut w = z;
    for _ in 0..4 {
        if w.re >= 1 && w.im >= 0 {
            return Ok(CanonicalGenerator { re: w.re, im: w.im });
        }
        w = GaussInt::new(-w.im, w.re);
    }
    unreachable!("every nonzero Gaussian integer has a first-quadrant associate")
}

/// Distance from `theta` to the nearest integer multiple of `pi/2`.
pub fn dist_to_quarter_turn(theta: f64) -> f64 {
    let q = std::f64::consts::FRAC_PI_2;
    let r = theta.rem_euclid(q);
    r.min(q - r)
}
