//! The verification suite: every calibrated experiment family in one
//! place, so that `calibrate` and `verify` are guaranteed to measure the
//! same recipes.
//!
//! A recipe fixes how a lattice of parameters is derived from the running
//! scale `x_max`; its hash goes into the calibration file. Calibration
//! runs the suite at a small scale and freezes, per tag, the maximal
//! observed ratio times a 2x safety factor. Verification reruns the suite
//! at full scale and requires every ratio to stay below its frozen
//! constant.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::calibration::{param_hash, Calibration};
use crate::error::Result;
use crate::ideals::FactorTable;
use crate::lemmas::{
    brun_titchmarsh_mod4, mean_square_dirichlet, mertens_ideal, psi_ideal, short_interval_vm,
    BoundReport,
};
use crate::multfun::{moebius, one, random_pm_one, MultFn};
use crate::pretentious::{check_euler_pretentious_bound, DistanceProfile};
use crate::primes::{prime_ideal_sieve, rational_primes, PrimeIdeal};
use crate::sectorial::{fourier_coeffs, sector_decomposition, sum_remainder_window};
use crate::shortint::{compress_mode, h_factors, l2_statistic, l2_unrestricted,
    twisted_long_sum, ShortIntervalConfig};
use crate::sums::{norm_compress, Sector};
use crate::{ideals, pretentious};

/// Scale cap for calibration runs: constants are frozen from measurements
/// at or below this scale.
pub const CALIBRATION_SCALE_CAP: u64 = 100_000;

/// One measured lattice point of one experiment family.
#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub report: BoundReport,
    pub recipe_hash: u64,
}

/// A row compared against its frozen constant.
#[derive(Clone, Debug)]
pub struct VerifiedRow {
    pub report: BoundReport,
    pub limit: f64,
    pub pass: bool,
}

fn logspace_checkpoints(lo: u64, hi: u64) -> Vec<u64> {
    // 10^3, 10^3.5, ... up to hi, always including hi
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let x = (10f64.powf(lo.ilog10() as f64 + k as f64 * 0.5)).round() as u64;
        if x >= hi {
            break;
        }
        if x >= lo {
            out.push(x);
        }
        k += 1;
    }
    out.push(hi);
    out
}

struct SuiteContext {
    x_max: u64,
    seed: u64,
    table: FactorTable,
    primes: Vec<PrimeIdeal>,
    rationals: Vec<u64>,
    /// prefix sums of the Moebius compression up to x_max
    mu_prefix: Vec<Complex64>,
}

impl SuiteContext {
    fn new(x_max: u64, seed: u64) -> Result<SuiteContext> {
        let h = l2_window(x_max);
        let table = FactorTable::new(x_max + h);
        let primes = prime_ideal_sieve(x_max)?;
        let rationals = rational_primes(x_max);
        let mu_prefix = norm_compress(&moebius(), x_max, &table)?.prefix_sums();
        Ok(SuiteContext {
            x_max,
            seed,
            table,
            primes,
            rationals,
            mu_prefix,
        })
    }

    fn s_mu_abs(&self, x: u64) -> f64 {
        self.mu_prefix[x as usize].norm()
    }
}

fn l2_window(x: u64) -> u64 {
    ((x as f64).powf(2.0 / 3.0)).round() as u64
}

fn even(x: u64) -> u64 {
    x & !1
}


/// Canonical recipe descriptions, one per experiment family. The hash of
/// this string is what a calibration entry is keyed by: it pins the lattice
/// recipe while the running scale stays a free input.
const RECIPES: &[(&str, &str)] = &[
    ("psi_ideal", "psi_ideal: x in logspace(1e3, x_max, half-decades); psi(x) vs x"),
    ("mertens_drift", "mertens_drift: x in logspace(1e3, x_max); |sum 1/Np - loglog x| vs 1"),
    ("bt_mod4", "bt_mod4: U in logspace(1e3, x_max/2); H = U^{0.5, 0.7, 0.9} capped at U"),
    ("short_interval_vm", "short_interval_vm: M in logspace(1e3, x_max/2); T = M^{0.2, 0.35, 0.5}"),
    ("mean_square", "mean_square: T=10, x=min(x_max,1e4), random unit c on prime powers in [T^2,x], 3 seeds"),
    ("h_factor_log", "h_factor_log: f in {one, mu, random(seed)}, m in {0,1}; H(g_m; x_max) vs log x_max"),
    ("h_factor_flat", "h_factor_flat: f in {one, mu, random(seed)}, m in {0,1}; linear product vs 1"),
    ("wedge_count", "wedge_count: theta in {0, pi/8, pi/4}, delta in {0.01, 0.1}, windows (0,Y], (Y/2,Y]"),
    ("remainder_point", "remainder_point: J in {[0,pi/4),[pi/8,3pi/8)}, T in {16,64}; max |R_T|/envelope on a 4001-point offset grid"),
    ("remainder_sum", "remainder_sum: J in {[0,pi/4),[pi/8,3pi/8)}, T in {16,64}, windows (0,Y], (Y/2,Y]"),
    ("sector_residual", "sector_residual: f in {one, mu}, J=[0,pi/4), T in {8,32}, windows (0,Y], (Y/2,Y]"),
    ("euler_pret_ratio", "euler_pret_ratio: f in {one, mu, random(seed)}; |F(c0+it)| vs (log x)exp(-D^2) at t in {0,0.5,2,5}"),
    ("euler_pret_spread", "euler_pret_spread: f=one; max/min over x in {x/100, x/10, x} of the t=0 ratio"),
    ("h_tail_mu", "h_tail_mu: h from mu = g*h; sum |h|/Nd over (z, x_max] vs z^{-1/4}, z in {1e2, 1e3}"),
    ("s_mu_over_x", "s_mu_over_x: |S_mu(x)|/x at x in {x_max/10, x_max}"),
    ("thm_shape_mu", "thm_shape_mu: |S_mu(x)| vs (1+M)e^{-M}x + x loglog x/log x, M = min D^2 over |t| <= log x; x in {x/100, x/10, x}"),
    ("twisted_mu", "twisted_mu: |sum mu lambda_1 N^{-2i}| over Na <= Z, Z = x_max/10, vs Z"),
    ("l2_mu_sector", "l2_mu_sector: f=mu, J=[0,pi/4), X=x_max (even), h=round(X^{2/3})"),
    ("l2_mu_unrestricted", "l2_mu_unrestricted: f=mu, X=x_max (even), h=round(X^{2/3})"),
];

/// The frozen-constant key for one experiment family.
pub fn recipe_hash(tag: &str) -> Option<u64> {
    RECIPES
        .iter()
        .find(|(t, _)| *t == tag)
        .map(|(_, desc)| param_hash(desc))
}

fn own_hash(tag: &str) -> u64 {
    recipe_hash(tag).expect("every family registers its recipe")
}

type RowFn = fn(&SuiteContext) -> Result<Vec<SuiteRow>>;

const FAMILIES: &[(&str, RowFn)] = &[
    ("psi_ideal", rows_psi),
    ("mertens_drift", rows_mertens),
    ("bt_mod4", rows_bt),
    ("short_interval_vm", rows_short_vm),
    ("mean_square", rows_mean_square),
    ("h_factor_log", rows_h_factor_log),
    ("h_factor_flat", rows_h_factor_flat),
    ("wedge_count", rows_wedge),
    ("remainder_point", rows_remainder_point),
    ("remainder_sum", rows_remainder_sum),
    ("sector_residual", rows_sector_residual),
    ("euler_pret_ratio", rows_euler_pret),
    ("euler_pret_spread", rows_euler_pret_spread),
    ("h_tail_mu", rows_h_tail),
    ("s_mu_over_x", rows_s_mu),
    ("thm_shape_mu", rows_thm_shape),
    ("twisted_mu", rows_twisted_mu),
    ("l2_mu_sector", rows_l2_sector),
    ("l2_mu_unrestricted", rows_l2_unrestricted),
];

/// Runs a subset of the experiment families at scale `x_max`.
pub fn run_families(x_max: u64, seed: u64, tags: &[&str]) -> Result<Vec<SuiteRow>> {
    let ctx = SuiteContext::new(x_max, seed)?;
    let selected: Vec<&(&str, RowFn)> = FAMILIES
        .iter()
        .filter(|(tag, _)| tags.contains(tag))
        .collect();
    let results: Vec<Result<Vec<SuiteRow>>> =
        selected.par_iter().map(|(_, f)| f(&ctx)).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Runs every experiment family at scale `x_max`.
pub fn run_suite(x_max: u64, seed: u64) -> Result<Vec<SuiteRow>> {
    let ctx = SuiteContext::new(x_max, seed)?;
    // families are independent; evaluate them in parallel but assemble in
    // declaration order so output is identical for any worker count
    let results: Vec<Result<Vec<SuiteRow>>> =
        FAMILIES.par_iter().map(|(_, f)| f(&ctx)).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Runs the suite at `min(x_max, CALIBRATION_SCALE_CAP)` and freezes the
/// per-tag maximal ratio with the safety factor.
pub fn calibrate(x_max: u64, seed: u64) -> Result<Calibration> {
    let scale = x_max.min(CALIBRATION_SCALE_CAP);
    let rows = run_suite(scale, seed)?;
    let mut cal = Calibration::new();
    for row in &rows {
        let current = cal.get(&row.report.tag, row.recipe_hash).unwrap_or(0.0);
        let frozen = row.report.ratio * crate::calibration::SAFETY_FACTOR;
        if frozen > current {
            cal.set_raw(&row.report.tag, row.recipe_hash, frozen);
        }
    }
    Ok(cal)
}

/// Compares every row against its frozen constant.
pub fn verify(rows: &[SuiteRow], cal: &Calibration) -> Result<Vec<VerifiedRow>> {
    rows.iter()
        .map(|row| {
            let limit = cal.get(&row.report.tag, row.recipe_hash)?;
            Ok(VerifiedRow {
                report: row.report.clone(),
                limit,
                pass: row.report.ratio <= limit,
            })
        })
        .collect()
}

// --- experiment families ------------------------------------------------

fn rows_psi(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("psi_ideal");
    Ok(logspace_checkpoints(1000, ctx.x_max)
        .into_iter()
        .map(|x| SuiteRow {
            report: BoundReport::new(
                "psi_ideal",
                format!("x={x}"),
                psi_ideal(x as f64, &ctx.primes),
                x as f64,
            ),
            recipe_hash: hash,
        })
        .collect())
}

fn rows_mertens(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("mertens_drift");
    Ok(logspace_checkpoints(1000, ctx.x_max)
        .into_iter()
        .map(|x| SuiteRow {
            report: BoundReport::new(
                "mertens_drift",
                format!("x={x}"),
                mertens_ideal(x as f64, &ctx.primes).abs(),
                1.0,
            ),
            recipe_hash: hash,
        })
        .collect())
}

fn rows_bt(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("bt_mod4");
    let mut rows = Vec::new();
    for u in logspace_checkpoints(1000, ctx.x_max / 2) {
        for alpha in [0.5, 0.7, 0.9] {
            let h = (u as f64).powf(alpha).max(2.0);
            if u as f64 + h > ctx.x_max as f64 {
                continue;
            }
            rows.push(SuiteRow {
                report: brun_titchmarsh_mod4(u as f64, h, &ctx.rationals)?,
                recipe_hash: hash,
            });
        }
    }
    Ok(rows)
}

fn rows_short_vm(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("short_interval_vm");
    let mut rows = Vec::new();
    for m in logspace_checkpoints(1000, ctx.x_max / 2) {
        for beta in [0.2, 0.35, 0.5] {
            let t = (m as f64).powf(beta).max(1.0);
            // the window cap M e^{1/T} must stay within the sieve
            if m as f64 * (1.0 / t).exp() > ctx.x_max as f64 {
                continue;
            }
            rows.push(SuiteRow {
                report: short_interval_vm(m as f64, t, &ctx.primes)?,
                recipe_hash: hash,
            });
        }
    }
    Ok(rows)
}

fn rows_mean_square(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("mean_square");
    let t_cap = 10.0;
    let x = ctx.x_max.min(10_000) as f64;
    let mut rows = Vec::new();
    for salt in 0..3u64 {
        let mut coeffs = Vec::new();
        for p in &ctx.primes {
            if (p.norm as f64) > x {
                break;
            }
            let mut pw = p.norm as f64;
            let mut k = 1u32;
            while pw <= x {
                if pw >= t_cap * t_cap {
                    let word = crate::rng::mix_key(ctx.seed ^ (salt + 1), p.norm, p.kind.code())
                        ^ k as u64;
                    let angle = std::f64::consts::TAU * crate::rng::unit_f64(
                        crate::rng::splitmix64(word),
                    );
                    let g = power_generator(p, k);
                    coeffs.push((g, Complex64::from_polar(1.0, angle)));
                }
                pw *= p.norm as f64;
                k += 1;
            }
        }
        rows.push(SuiteRow {
            report: mean_square_dirichlet(&coeffs, t_cap, x, &ctx.table)?,
            recipe_hash: hash,
        });
    }
    Ok(rows)
}

fn power_generator(p: &PrimeIdeal, k: u32) -> crate::gaussint::CanonicalGenerator {
    let mut g = crate::gaussint::CanonicalGenerator::UNIT;
    for _ in 0..k {
        g = g.mul(p.generator);
    }
    g
}

fn suite_functions(seed: u64) -> Vec<MultFn> {
    vec![one(), moebius(), random_pm_one(seed)]
}

fn rows_h_factor_log(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("h_factor_log");
    let mut rows = Vec::new();
    for f in suite_functions(ctx.seed) {
        for m in [0i64, 1] {
            let g = compress_mode(&f, m, ctx.x_max, &ctx.table)?;
            let (sq, _) = h_factors(&g, ctx.x_max, &ctx.rationals);
            rows.push(SuiteRow {
                report: BoundReport::new(
                    "h_factor_log",
                    format!("f={} m={m} x={}", f.label(), ctx.x_max),
                    sq,
                    (ctx.x_max as f64).ln(),
                ),
                recipe_hash: hash,
            });
        }
    }
    Ok(rows)
}

fn rows_h_factor_flat(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("h_factor_flat");
    let mut rows = Vec::new();
    for f in suite_functions(ctx.seed) {
        for m in [0i64, 1] {
            let g = compress_mode(&f, m, ctx.x_max, &ctx.table)?;
            let (_, lin) = h_factors(&g, ctx.x_max, &ctx.rationals);
            rows.push(SuiteRow {
                report: BoundReport::new(
                    "h_factor_flat",
                    format!("f={} m={m} x={}", f.label(), ctx.x_max),
                    lin,
                    1.0,
                ),
                recipe_hash: hash,
            });
        }
    }
    Ok(rows)
}

fn rows_wedge(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("wedge_count");
    let y = ctx.x_max as f64;
    let q = std::f64::consts::FRAC_PI_2;
    let mut rows = Vec::new();
    for theta in [0.0, 0.25 * q, 0.5 * q] {
        for delta in [0.01, 0.1] {
            for x in [0.0, y / 2.0] {
                let count = ideals::wedge_count(theta, delta, x, y)?;
                rows.push(SuiteRow {
                    report: BoundReport::new(
                        "wedge_count",
                        format!("theta={theta:.4} delta={delta} X={x} Y={y}"),
                        count as f64,
                        delta * (y - x) + y.sqrt(),
                    ),
                    recipe_hash: hash,
                });
            }
        }
    }
    Ok(rows)
}

fn suite_sectors() -> Vec<Sector> {
    let q = std::f64::consts::FRAC_PI_2;
    vec![
        Sector::new(0.0, 0.5 * q).unwrap(),
        Sector::new(0.25 * q, 0.75 * q).unwrap(),
    ]
}

fn rows_remainder_point(_ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("remainder_point");
    let q = std::f64::consts::FRAC_PI_2;
    let mut rows = Vec::new();
    for sector in suite_sectors() {
        for t in [16u32, 64] {
            let trunc = fourier_coeffs(sector, t);
            let mut worst = 0.0f64;
            let n = 4001;
            for j in 0..n {
                let theta = (j as f64 + 0.37) * q / n as f64;
                let env = trunc.remainder_envelope(theta);
                let r = trunc.remainder(theta)?.abs();
                if env > 0.0 {
                    worst = worst.max(r / env);
                }
            }
            rows.push(SuiteRow {
                report: BoundReport::new(
                    "remainder_point",
                    format!(
                        "J=[{:.4};{:.4}) T={t}",
                        sector.theta1(),
                        sector.theta2()
                    ),
                    worst,
                    1.0,
                ),
                recipe_hash: hash,
            });
        }
    }
    Ok(rows)
}

fn rows_remainder_sum(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("remainder_sum");
    let y = ctx.x_max as f64;
    let mut rows = Vec::new();
    for sector in suite_sectors() {
        for t in [16u32, 64] {
            let trunc = fourier_coeffs(sector, t);
            for x in [0.0, y / 2.0] {
                let r = sum_remainder_window(&trunc, x, y)?;
                rows.push(SuiteRow {
                    report: BoundReport::new(
                        "remainder_sum",
                        format!(
                            "J=[{:.4};{:.4}) T={t} X={x} Y={y}",
                            sector.theta1(),
                            sector.theta2()
                        ),
                        r.sum_abs,
                        r.bound_shape,
                    ),
                    recipe_hash: hash,
                });
            }
        }
    }
    Ok(rows)
}

fn rows_sector_residual(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("sector_residual");
    let y = ctx.x_max as f64;
    let sector = suite_sectors()[0];
    let mut rows = Vec::new();
    for f in [one(), moebius()] {
        for t in [8u32, 32] {
            for x in [0.0, y / 2.0] {
                let d = sector_decomposition(&f, sector, t, x, y, &ctx.table)?;
                rows.push(SuiteRow {
                    report: BoundReport::new(
                        "sector_residual",
                        format!("f={} T={t} X={x} Y={y}", f.label()),
                        d.residual.norm(),
                        d.bound_shape,
                    ),
                    recipe_hash: hash,
                });
            }
        }
    }
    Ok(rows)
}

fn rows_euler_pret(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("euler_pret_ratio");
    let ts = [0.0, 0.5, 2.0, 5.0];
    let mut rows = Vec::new();
    for f in suite_functions(ctx.seed) {
        let rep = check_euler_pretentious_bound(&f, 1.0, ctx.x_max as f64, &ts, &ctx.primes)?;
        rows.push(SuiteRow {
            report: BoundReport::new(
                "euler_pret_ratio",
                format!("f={} x={}", f.label(), ctx.x_max),
                rep.max_ratio,
                1.0,
            ),
            recipe_hash: hash,
        });
    }
    Ok(rows)
}

fn rows_euler_pret_spread(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("euler_pret_spread");
    let f = one();
    let mut ratios = Vec::new();
    for x in [ctx.x_max / 100, ctx.x_max / 10, ctx.x_max] {
        let x = x.max(100);
        let rep = check_euler_pretentious_bound(&f, 1.0, x as f64, &[0.0], &ctx.primes)?;
        ratios.push(rep.max_ratio);
    }
    let spread = ratios.iter().cloned().fold(0.0f64, f64::max)
        / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![SuiteRow {
        report: BoundReport::new(
            "euler_pret_spread",
            format!("x={} decades=2", ctx.x_max),
            spread,
            1.0,
        ),
        recipe_hash: hash,
    }])
}

fn rows_h_tail(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("h_tail_mu");
    let (_, h) = moebius().cm_decompose();
    let mut rows = Vec::new();
    for z in [100.0f64, 1000.0] {
        let tail = crate::sums::abs_over_norm_tail(&h, z, ctx.x_max, &ctx.table);
        rows.push(SuiteRow {
            report: BoundReport::new(
                "h_tail_mu",
                format!("z={z} x={}", ctx.x_max),
                tail,
                z.powf(-0.25),
            ),
            recipe_hash: hash,
        });
    }
    Ok(rows)
}

fn rows_s_mu(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("s_mu_over_x");
    Ok([ctx.x_max / 10, ctx.x_max]
        .into_iter()
        .map(|x| SuiteRow {
            report: BoundReport::new(
                "s_mu_over_x",
                format!("x={x}"),
                ctx.s_mu_abs(x) / x as f64,
                1.0,
            ),
            recipe_hash: hash,
        })
        .collect())
}

fn rows_thm_shape(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("thm_shape_mu");
    let f = moebius();
    let mut rows = Vec::new();
    for x in [ctx.x_max / 100, ctx.x_max / 10, ctx.x_max] {
        let x = x.max(1000);
        let profile = DistanceProfile::new(&f, 0, 1.0, x as f64, &ctx.primes)?;
        let cap = (x as f64).ln();
        let min = profile.minimize(-cap, cap);
        let rhs = pretentious::bound_functional(pretentious::BoundFunctional::PretentiousOneBounded {
            m_pret: min.value,
            x: x as f64,
        });
        rows.push(SuiteRow {
            report: BoundReport::new("thm_shape_mu", format!("x={x}"), ctx.s_mu_abs(x), rhs),
            recipe_hash: hash,
        });
    }
    Ok(rows)
}

fn rows_twisted_mu(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("twisted_mu");
    let z = ctx.x_max / 10;
    let s = twisted_long_sum(&moebius(), 1, 2.0, z, &ctx.table);
    Ok(vec![SuiteRow {
        report: BoundReport::new("twisted_mu", format!("Z={z}"), s.norm(), z as f64),
        recipe_hash: hash,
    }])
}

fn l2_config(ctx: &SuiteContext) -> ShortIntervalConfig {
    ShortIntervalConfig {
        x: even(ctx.x_max),
        h: l2_window(ctx.x_max),
        sector: suite_sectors()[0],
        fourier_t: 8,
        f: moebius(),
        m_list: vec![],
    }
}

fn rows_l2_sector(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("l2_mu_sector");
    let cfg = l2_config(ctx);
    let rep = l2_statistic(&cfg, &ctx.table)?;
    Ok(vec![SuiteRow {
        report: BoundReport::new(
            "l2_mu_sector",
            format!("X={} h={}", cfg.x, cfg.h),
            rep.value,
            1.0,
        ),
        recipe_hash: hash,
    }])
}

fn rows_l2_unrestricted(ctx: &SuiteContext) -> Result<Vec<SuiteRow>> {
    let hash = own_hash("l2_mu_unrestricted");
    let cfg = l2_config(ctx);
    let rep = l2_unrestricted(&cfg, &ctx.table)?;
    Ok(vec![SuiteRow {
        report: BoundReport::new(
            "l2_mu_unrestricted",
            format!("X={} h={}", cfg.x, cfg.h),
            rep.value,
            1.0,
        ),
        recipe_hash: hash,
    }])
}
