//! Prime-weighted distances to the Archimedean characters, their
//! minimization over the twist parameter, Euler-product evaluation of the
//! attached Dirichlet series, and the mean-value bound functionals.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multfun::{angular_value, MultFn};
use crate::primes::PrimeIdeal;
use crate::sums::Kahan;

/// Grid spacing used by every certified scan. The t-derivative of one
/// distance term is at most `log(Np)/Np`, so the summed Lipschitz constant
/// is O(log x) and a spacing of `0.05/log x` keeps the grid error O(0.05).
pub const GRID_FACTOR: f64 = 0.05;

/// Largest number of grid points a certified scan is allowed to cost.
/// Ranges that would exceed it fall back to a coarser multi-start pass and
/// are labelled `certified = false`.
pub const CERTIFIED_POINT_BUDGET: u64 = 12_000_000;

const REFINE_WIDTH: f64 = 1e-6;
const BLOCK: usize = 4096;

/// Precomputed prime data for one distance query: the twisted values
/// `f(p) * lambda_m(p)` weighted by `1/Np`, ready for fast evaluation at
/// many twist parameters `t`.
#[derive(Debug)]
pub struct DistanceProfile {
    /// weighted values `f(p) lambda_m(p) / Np`
    weights: Vec<Complex64>,
    ln_norms: Vec<f64>,
    /// `kappa * sum 1/Np`
    kappa_mass: f64,
    kappa: f64,
    x: f64,
}

impl DistanceProfile {
    /// Collects primes of norm at most `x`. Fails with a contract violation
    /// naming the first prime where `|f(p)| > kappa`.
    pub fn new(
        f: &MultFn,
        twist_m: i64,
        kappa: f64,
        x: f64,
        primes: &[PrimeIdeal],
    ) -> Result<DistanceProfile> {
        if kappa < 1.0 {
            return Err(Error::InvalidArgument(format!("kappa = {kappa} < 1")));
        }
        let mut weights = Vec::new();
        let mut ln_norms = Vec::new();
        let mut mass = Kahan::default();
        for p in primes {
            if (p.norm as f64) > x {
                break;
            }
            let fp = f.at_prime_power(p, 1);
            if fp.norm() > kappa * (1.0 + 1e-9) + 1e-9 {
                return Err(Error::ContractViolation(format!(
                    "|f(p)| = {} exceeds kappa = {kappa} at the prime {} of norm {}",
                    fp.norm(),
                    p.generator,
                    p.norm
                )));
            }
            let inv = 1.0 / p.norm as f64;
            weights.push(fp * angular_value(twist_m, p.generator) * inv);
            ln_norms.push(p.log_norm());
            mass.add(kappa * inv);
        }
        Ok(DistanceProfile {
            weights,
            ln_norms,
            kappa_mass: mass.value(),
            kappa,
            x,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// `sum (kappa - Re(f(p) lambda_m(p) Np^{-it})) / Np`; clamped at zero
    /// against accumulation noise.
    pub fn distance_sq(&self, t: f64) -> f64 {
        let mut aligned = Kahan::default();
        for (w, ln) in self.weights.iter().zip(&self.ln_norms) {
            let (s, c) = (-t * ln).sin_cos();
            aligned.add(w.re * c - w.im * s);
        }
        let v = self.kappa_mass - aligned.value();
        debug_assert!(v > -1e-8, "distance square went negative: {v}");
        v.max(0.0)
    }

    /// Grid values over `n` points starting at `t0` with spacing `dt`,
    /// computed by per-prime phase stepping (one complex multiply per
    /// point per prime; phases re-seeded every block).
    fn scan_block(&self, t0: f64, dt: f64, n: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(n, 0.0);
        let mut state: Vec<Complex64> = Vec::with_capacity(self.weights.len());
        for (w, ln) in self.weights.iter().zip(&self.ln_norms) {
            state.push(w * Complex64::from_polar(1.0, -t0 * ln));
        }
        let rot: Vec<Complex64> = self
            .ln_norms
            .iter()
            .map(|ln| Complex64::from_polar(1.0, -dt * ln))
            .collect();
        for (s, r) in state.iter_mut().zip(&rot) {
            let mut z = *s;
            for slot in out.iter_mut() {
                *slot += z.re;
                z *= *r;
            }
            *s = z;
        }
        for slot in out.iter_mut() {
            *slot = (self.kappa_mass - *slot).max(0.0);
        }
    }

    /// Scans `[t_lo, t_hi]` at `spacing`, returning the best grid point.
    /// Ties prefer the smaller |t|, then the smaller t; the reduction order
    /// is fixed by block index, independent of the worker count.
    fn grid_minimum(&self, t_lo: f64, t_hi: f64, spacing: f64) -> (f64, f64) {
        let n_points = ((t_hi - t_lo) / spacing).ceil() as u64 + 1;
        let blocks: Vec<(u64, u64)> = (0..n_points)
            .step_by(BLOCK)
            .map(|start| (start, (start + BLOCK as u64).min(n_points)))
            .collect();
        let best_per_block: Vec<(f64, f64)> = blocks
            .par_iter()
            .map(|&(start, end)| {
                let mut vals = Vec::new();
                let t0 = t_lo + start as f64 * spacing;
                self.scan_block(t0, spacing, (end - start) as usize, &mut vals);
                let mut best = (f64::INFINITY, f64::INFINITY);
                for (j, v) in vals.iter().enumerate() {
                    let t = (t_lo + (start + j as u64) as f64 * spacing).min(t_hi);
                    if better_min((*v, t), best) {
                        best = (*v, t);
                    }
                }
                best
            })
            .collect();
        let mut best = (f64::INFINITY, f64::INFINITY);
        for cand in best_per_block {
            if better_min(cand, best) {
                best = cand;
            }
        }
        best
    }

    /// Minimizes the squared distance over `t` in `[t_lo, t_hi]`.
    pub fn minimize(&self, t_lo: f64, t_hi: f64) -> MinimizerResult {
        assert!(t_hi >= t_lo, "empty twist range");
        if t_hi == t_lo {
            return MinimizerResult {
                t_star: t_lo,
                value: self.distance_sq(t_lo),
                certified: true,
                grid_spacing: 0.0,
            };
        }
        let fine = GRID_FACTOR / self.x.ln();
        let fine_points = ((t_hi - t_lo) / fine) as u64 + 2;
        let certified = fine_points <= CERTIFIED_POINT_BUDGET;

        let (mut value, mut t_star, spacing);
        if certified {
            spacing = fine;
            let (v, t) = self.grid_minimum(t_lo, t_hi, fine);
            value = v;
            t_star = t;
        } else {
            // multi-start fallback with a bounded budget: a coarse pass over
            // the whole range plus a fine pass on a central window, then
            // local refinement; the result can only overestimate the true
            // minimum and is labelled accordingly
            const COARSE_POINTS: f64 = 200_000.0;
            spacing = (t_hi - t_lo) / COARSE_POINTS;
            let (v1, t1) = self.grid_minimum(t_lo, t_hi, spacing);
            let max_halfwidth = fine * (CERTIFIED_POINT_BUDGET / 8) as f64;
            let w = self.x.ln().powi(2).min(max_halfwidth);
            let c_lo = t_lo.max(-w);
            let c_hi = t_hi.min(w);
            let (v2, t2) = if c_hi > c_lo {
                self.grid_minimum(c_lo, c_hi, fine)
            } else {
                (f64::INFINITY, f64::INFINITY)
            };
            if better_min((v2, t2), (v1, t1)) {
                value = v2;
                t_star = t2;
            } else {
                value = v1;
                t_star = t1;
            }
        }

        let lo = (t_star - spacing).max(t_lo);
        let hi = (t_star + spacing).min(t_hi);
        let (rv, rt) = golden_section(|t| self.distance_sq(t), lo, hi, REFINE_WIDTH);
        if rv < value {
            value = rv;
            t_star = rt;
        }
        MinimizerResult {
            t_star,
            value,
            certified,
            grid_spacing: spacing,
        }
    }
}

fn better_min(cand: (f64, f64), best: (f64, f64)) -> bool {
    let (cv, ct) = cand;
    let (bv, bt) = best;
    cv < bv || (cv == bv && (ct.abs() < bt.abs() || (ct.abs() == bt.abs() && ct < bt)))
}

/// Outcome of a twist minimization.
#[derive(Clone, Copy, Debug)]
pub struct MinimizerResult {
    pub t_star: f64,
    pub value: f64,
    /// True when the whole declared range was gridded at the Lipschitz-safe
    /// spacing; false for the coarse multi-start fallback, whose value can
    /// only overestimate the true minimum.
    pub certified: bool,
    pub grid_spacing: f64,
}

/// Golden-section search; returns (best value, best point). Assumes nothing
/// beyond continuity: the result is simply the best point evaluated.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { (fc, c) } else { (fd, d) };
    while (b - a) > width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
        let cand = if fc <= fd { (fc, c) } else { (fd, d) };
        if cand.0 < best.0 {
            best = cand;
        }
    }
    best
}

fn golden_section_max(f: impl Fn(f64) -> f64, a: f64, b: f64, width: f64) -> (f64, f64) {
    let (v, t) = golden_section(|t| -f(t), a, b, width);
    (-v, t)
}

/// General two-function distance square at `t = 0`:
/// `sum (kappa - Re(f(p) conj(g(p)))) / Np` over primes of norm <= x.
/// The comparator `g` is expected to be 1-bounded on primes, which keeps
/// the summands nonnegative when `|f(p)| <= kappa`.
pub fn distance_sq_general(
    f: &MultFn,
    g: &MultFn,
    kappa: f64,
    x: f64,
    primes: &[PrimeIdeal],
) -> f64 {
    let mut acc = Kahan::default();
    for p in primes {
        if (p.norm as f64) > x {
            break;
        }
        let term = kappa - (f.at_prime_power(p, 1) * g.at_prime_power(p, 1).conj()).re;
        acc.add(term / p.norm as f64);
    }
    acc.value().max(0.0)
}

/// Truncated Euler-product evaluator for `F(s) = sum f(a) / (Na)^s`,
/// fixed `Re(s)`, variable imaginary part.
///
/// Local factors are power series in `Np^{-s}` truncated once the tail is
/// below 1e-15 under the divisor-type growth `|f(p^k)| <= (k+1)^4`
/// (covering the log-derivative contract up to kappa = 4). The neglected
/// primes beyond the cut contribute at most `log_tail_bound` to `log F`.
#[derive(Debug)]
pub struct EulerProduct {
    sigma: f64,
    ln_norms: Vec<f64>,
    abs_powers: Vec<f64>,
    coeffs: Vec<Vec<Complex64>>,
    log_tail_bound: f64,
    x_cut: u64,
}

impl EulerProduct {
    pub fn new(
        f: &MultFn,
        sigma: f64,
        x_cut: u64,
        kappa_hint: f64,
        primes: &[PrimeIdeal],
    ) -> Result<EulerProduct> {
        if x_cut < 2 {
            return Err(Error::InvalidArgument("Euler cut below 2".into()));
        }
        let min_sigma = 1.0 + 1.0 / (x_cut as f64).ln();
        if sigma < min_sigma - 1e-12 {
            return Err(Error::Precision(format!(
                "Re(s) = {sigma} too close to 1 for the Euler cut {x_cut}; need >= {min_sigma}"
            )));
        }
        let mut ln_norms = Vec::new();
        let mut abs_powers = Vec::new();
        let mut coeffs = Vec::new();
        for p in primes {
            if p.norm > x_cut {
                break;
            }
            let ap = (p.norm as f64).powf(-sigma);
            let mut local = Vec::new();
            let mut bound = ap;
            let mut k = 1u32;
            while bound * ((k + 1) as f64).powi(4) > 1e-15 && k <= 200 {
                local.push(f.at_prime_power(p, k));
                bound *= ap;
                k += 1;
            }
            ln_norms.push(p.log_norm());
            abs_powers.push(ap);
            coeffs.push(local);
        }
        let xf = x_cut as f64;
        let log_tail_bound = 4.0 * kappa_hint * xf.powf(1.0 - sigma) / (sigma - 1.0);
        Ok(EulerProduct {
            sigma,
            ln_norms,
            abs_powers,
            coeffs,
            log_tail_bound,
            x_cut,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn x_cut(&self) -> u64 {
        self.x_cut
    }

    /// Rigorous bound on `|log F - log F_trunc|` from the omitted primes.
    pub fn log_tail_bound(&self) -> f64 {
        self.log_tail_bound
    }

    fn local_factor(coeffs: &[Complex64], z: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for c in coeffs.iter().rev() {
            acc = (acc + c) * z;
        }
        acc + 1.0
    }

    /// `F(sigma + i t)`.
    pub fn eval(&self, t: f64) -> Complex64 {
        let mut prod = Complex64::new(1.0, 0.0);
        for i in 0..self.ln_norms.len() {
            let z = Complex64::from_polar(self.abs_powers[i], -t * self.ln_norms[i]);
            prod *= Self::local_factor(&self.coeffs[i], z);
        }
        prod
    }

    /// `F(sigma + i t_j)` on the uniform grid `t_j = t0 + j dt`, by phase
    /// stepping per prime.
    pub fn eval_grid(&self, t0: f64, dt: f64, n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0); n];
        for i in 0..self.ln_norms.len() {
            let mut z = Complex64::from_polar(self.abs_powers[i], -t0 * self.ln_norms[i]);
            let rot = Complex64::from_polar(1.0, -dt * self.ln_norms[i]);
            for slot in out.iter_mut() {
                *slot *= Self::local_factor(&self.coeffs[i], z);
                z *= rot;
            }
        }
        out
    }
}

/// One-shot truncated Euler-product evaluation with its tail bound.
pub fn euler_f(
    f: &MultFn,
    s: Complex64,
    x_cut: u64,
    kappa_hint: f64,
    primes: &[PrimeIdeal],
) -> Result<(Complex64, f64)> {
    let ep = EulerProduct::new(f, s.re, x_cut, kappa_hint, primes)?;
    Ok((ep.eval(s.im), ep.log_tail_bound()))
}

/// The analytic mean-value parameters at scale `x`.
#[derive(Clone, Copy, Debug)]
pub struct HalaszParams {
    pub x: f64,
    pub kappa: f64,
    /// `1 + 1/log x`
    pub c0: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// `M` defined by `max |F(c0+it)/(c0+it)| = e^{-M} (log x)^kappa`
    pub m: f64,
    /// `max(M, 0)`
    pub m_plus: f64,
    pub t_at_max: f64,
    pub max_value: f64,
    pub log_tail_bound: f64,
}

/// Computes the analytic parameter `M` by maximizing `|F(c0+it)/(c0+it)|`
/// over `|t| <= (log x)^kappa`. The log-derivative contract is checked
/// first and a violation is an error.
pub fn halasz_m(
    f: &MultFn,
    kappa: f64,
    x: f64,
    primes: &[PrimeIdeal],
) -> Result<HalaszParams> {
    let cap = x.ln().powf(kappa);
    halasz_m_with_range(f, kappa, x, -cap, cap, primes)
}

/// Same with an explicit twist range (reports always label the range used).
pub fn halasz_m_with_range(
    f: &MultFn,
    kappa: f64,
    x: f64,
    t_lo: f64,
    t_hi: f64,
    primes: &[PrimeIdeal],
) -> Result<HalaszParams> {
    if x < 3.0 {
        return Err(Error::InvalidArgument("halasz parameters need x >= 3".into()));
    }
    let check = f.check_von_mangoldt_bound(kappa, x as u64, primes);
    if let Some((p, k, mag)) = check.violation {
        return Err(Error::ContractViolation(format!(
            "|Lambda_f| = {mag} exceeds kappa log Np at {}^{k}",
            p.generator
        )));
    }
    let c0 = 1.0 + 1.0 / x.ln();
    let ep = EulerProduct::new(f, c0, x as u64, kappa, primes)?;
    let spacing = GRID_FACTOR / x.ln();
    let n_points = (((t_hi - t_lo) / spacing).ceil() as usize + 1).max(2);

    let blocks: Vec<(usize, usize)> = (0..n_points)
        .step_by(BLOCK)
        .map(|s| (s, (s + BLOCK).min(n_points)))
        .collect();
    let score = |fv: Complex64, t: f64| fv.norm() / Complex64::new(c0, t).norm();
    let per_block: Vec<(f64, f64)> = blocks
        .par_iter()
        .map(|&(s, e)| {
            let t0 = t_lo + s as f64 * spacing;
            let vals = ep.eval_grid(t0, spacing, e - s);
            let mut best = (f64::NEG_INFINITY, f64::INFINITY);
            for (j, fv) in vals.iter().enumerate() {
                let t = (t_lo + (s + j) as f64 * spacing).min(t_hi);
                let v = score(*fv, t);
                if better_max((v, t), best) {
                    best = (v, t);
                }
            }
            best
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    for cand in per_block {
        if better_max(cand, best) {
            best = cand;
        }
    }
    let lo = (best.1 - spacing).max(t_lo);
    let hi = (best.1 + spacing).min(t_hi);
    let (rv, rt) = golden_section_max(|t| score(ep.eval(t), t), lo, hi, REFINE_WIDTH);
    let (max_value, t_at_max) = if rv > best.0 { (rv, rt) } else { best };

    let m = kappa * x.ln().ln() - max_value.ln();
    Ok(HalaszParams {
        x,
        kappa,
        c0,
        t_lo,
        t_hi,
        m,
        m_plus: m.max(0.0),
        t_at_max,
        max_value,
        log_tail_bound: ep.log_tail_bound(),
    })
}

fn better_max(cand: (f64, f64), best: (f64, f64)) -> bool {
    let (cv, ct) = cand;
    let (bv, bt) = best;
    cv > bv || (cv == bv && (ct.abs() < bt.abs() || (ct.abs() == bt.abs() && ct < bt)))
}

/// The right-hand sides of the mean-value bounds, with implied constant 1.
#[derive(Clone, Copy, Debug)]
pub enum BoundFunctional {
    /// `(1 + M) e^{-M} x + (x / log x) log log x`
    PretentiousOneBounded { m_pret: f64, x: f64 },
    /// `(1 + M_+) e^{-M_+} x (log x)^{kappa-1} + (x / log x)(log log x)^kappa`
    AnalyticKappa { m_plus: f64, x: f64, kappa: f64 },
    /// Same shape driven by the pretentious minimum instead of `M_+`.
    PretentiousKappa { m_pret: f64, x: f64, kappa: f64 },
    /// `x log(T+1) W + (x / log x) log log x log(T+1) + x log(T+1)/T + sqrt x`
    /// where `W = max over 1 <= |m| <= T of (1 + M_m) e^{-M_m}`.
    SectorialQuantitative { x: f64, t: u32, worst_mode: f64 },
}

/// Evaluates a bound functional. Callers report measured/bound ratios; the
/// functional itself never asserts.
pub fn bound_functional(kind: BoundFunctional) -> f64 {
    match kind {
        BoundFunctional::PretentiousOneBounded { m_pret, x } => {
            (1.0 + m_pret) * (-m_pret).exp() * x + x / x.ln() * x.ln().ln()
        }
        BoundFunctional::AnalyticKappa { m_plus, x, kappa } => {
            (1.0 + m_plus) * (-m_plus).exp() * x * x.ln().powf(kappa - 1.0)
                + x / x.ln() * x.ln().ln().powf(kappa)
        }
        BoundFunctional::PretentiousKappa { m_pret, x, kappa } => {
            (1.0 + m_pret) * (-m_pret).exp() * x * x.ln().powf(kappa - 1.0)
                + x / x.ln() * x.ln().ln().powf(kappa)
        }
        BoundFunctional::SectorialQuantitative { x, t, worst_mode } => {
            let log_t = ((t + 1) as f64).ln();
            x * log_t * worst_mode
                + x / x.ln() * x.ln().ln() * log_t
                + x * log_t / t as f64
                + x.sqrt()
        }
    }
}

/// Sampled comparison of `|F(c0+it)|` against
/// `(log x)^kappa exp(-D_kappa(f, N^{it}; x)^2)`.
#[derive(Clone, Debug)]
pub struct EulerPretentiousReport {
    pub x: f64,
    pub kappa: f64,
    pub samples: Vec<(f64, f64)>,
    pub max_ratio: f64,
}

pub fn check_euler_pretentious_bound(
    f: &MultFn,
    kappa: f64,
    x: f64,
    sample_ts: &[f64],
    primes: &[PrimeIdeal],
) -> Result<EulerPretentiousReport> {
    let c0 = 1.0 + 1.0 / x.ln();
    let ep = EulerProduct::new(f, c0, x as u64, kappa, primes)?;
    let profile = DistanceProfile::new(f, 0, kappa, x, primes)?;
    let mut samples = Vec::with_capacity(sample_ts.len());
    let mut max_ratio = 0.0f64;
    for &t in sample_ts {
        let fv = ep.eval(t).norm();
        let dist = profile.distance_sq(t);
        let ratio = fv / (x.ln().powf(kappa) * (-dist).exp());
        samples.push((t, ratio));
        max_ratio = max_ratio.max(ratio);
    }
    Ok(EulerPretentiousReport {
        x,
        kappa,
        samples,
        max_ratio,
    })
}
