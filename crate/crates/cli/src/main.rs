//! Command-line harness: sieves, experiments, lemma verification, and CSV
//! emission with reproducible configuration.

mod config;
mod csv;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use config::ConfigFile;
use csv::{sig, Csv};
use gauss_halasz::calibration::Calibration;
use gauss_halasz::multfun;
use gauss_halasz::pretentious::DistanceProfile;
use gauss_halasz::sectorial::sector_decomposition;
use gauss_halasz::shortint::{l2_statistic, l2_unrestricted, ShortIntervalConfig};
use gauss_halasz::suite;
use gauss_halasz::sums::{norm_compress, Sector};
use gauss_halasz::{enumerate_ideals, prime_ideal_sieve, Error, FactorTable, MultFn, Result};

/// An angle written as a rational multiple of pi, e.g. `1/4` for pi/4.
/// Avoids decimal drift in sector definitions.
#[derive(Clone, Copy, Debug)]
struct PiFraction {
    num: u64,
    den: u64,
}

impl PiFraction {
    fn radians(self) -> f64 {
        self.num as f64 / self.den as f64 * std::f64::consts::PI
    }
}

impl FromStr for PiFraction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<PiFraction, String> {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: u64 = n.parse().map_err(|_| format!("bad numerator `{n}`"))?;
        let den: u64 = d.parse().map_err(|_| format!("bad denominator `{d}`"))?;
        if den == 0 {
            return Err("zero denominator".into());
        }
        Ok(PiFraction { num, den })
    }
}

/// An inclusive integer range written `lo..hi`.
#[derive(Clone, Copy, Debug)]
struct ModeRange {
    lo: i64,
    hi: i64,
}

impl ModeRange {
    fn iter(self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl FromStr for ModeRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<ModeRange, String> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| format!("expected `lo..hi`, got `{s}`"))?;
        let lo: i64 = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
        let hi: i64 = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
        if lo > hi {
            return Err(format!("empty range {lo}..{hi}"));
        }
        Ok(ModeRange { lo, hi })
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "gauss-halasz",
    about = "Multiplicative-function experiments on the ideals of Z[i]",
    long_about = "Multiplicative-function experiments on the ideals of Z[i].\n\
        All output is CSV (UTF-8, header row, 12 significant digits, LF line\n\
        endings); identical configuration yields byte-identical output for\n\
        any worker count. Angles are rational multiples of pi (`1/4` means\n\
        pi/4). Functions are named strategies, e.g. `mu`, `one`, `d2`,\n\
        `random`, `lambda:-3*nit:2.5`; `random*` atoms use --seed."
)]
struct Cli {
    /// Worker threads (falls back to GAUSS_HALASZ_THREADS, then 1)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Plain `key = value` configuration file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path (stdout when omitted)
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prime ideals of norm <= x-max. CSV: norm,kind,re,im,rational_prime
    Sieve(ScaleArgs),
    /// Ideals of norm <= x-max in norm order. CSV: norm,re,im,arg
    Enumerate(ScaleArgs),
    /// Partial sums of f at decade checkpoints. CSV: x,sum_re,sum_im,sum_abs
    Sum(SumArgs),
    /// Twist minimization per angular mode. CSV: m,t_star,M_m,certified
    #[command(name = "pretentious-profile")]
    PretentiousProfile(ProfileArgs),
    /// Sector decomposition at decade checkpoints.
    /// CSV: x,S_fJ,delta_S_f,residual,bound
    Sectorial(SectorialArgs),
    /// Short-interval mean-square statistics. CSV: X,h,component,value
    #[command(name = "short-interval")]
    ShortInterval(ShortArgs),
    /// Runs the calibrated regression suite; exits 1 on any breach.
    /// CSV: tag,params,measured,bound,ratio,limit,pass
    #[command(name = "verify-lemmas")]
    VerifyLemmas(VerifyArgs),
    /// Measures implied constants at small scale and freezes them.
    /// CSV: tag,param_hash,constant
    Calibrate(VerifyArgs),
}

#[derive(Args, Debug)]
struct ScaleArgs {
    #[arg(long)]
    x_max: Option<u64>,
}

#[derive(Args, Debug)]
struct SumArgs {
    #[arg(long)]
    x_max: Option<u64>,
    /// Function spec, e.g. `mu` or `lambda:-3*nit:2.5`
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[arg(long)]
    x_max: Option<u64>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Angular modes `lo..hi` (inclusive)
    #[arg(long, allow_hyphen_values = true)]
    m: Option<ModeRange>,
    /// Twist range policy: `log` (|t| <= log x) or `2x` (|t| <= 2x)
    #[arg(long)]
    t_range: Option<String>,
}

#[derive(Args, Debug)]
struct SectorialArgs {
    #[arg(long)]
    x_max: Option<u64>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lower sector edge as a multiple of pi, e.g. `0` or `1/8`
    #[arg(long)]
    theta1: Option<PiFraction>,
    /// Upper sector edge as a multiple of pi, e.g. `1/4`
    #[arg(long)]
    theta2: Option<PiFraction>,
    /// Fourier truncation order
    #[arg(long = "T")]
    t: Option<u32>,
}

#[derive(Args, Debug)]
struct ShortArgs {
    /// Scale X (must be even)
    #[arg(long)]
    x: Option<u64>,
    /// Window length h (integer, 1 <= h < X)
    #[arg(long)]
    h: Option<u64>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    theta1: Option<PiFraction>,
    #[arg(long)]
    theta2: Option<PiFraction>,
    #[arg(long = "T")]
    t: Option<u32>,
    /// Angular modes reported individually, `lo..hi`
    #[arg(long, allow_hyphen_values = true)]
    m: Option<ModeRange>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    x_max: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Calibration file (read by verify-lemmas, written by calibrate)
    #[arg(long)]
    calibration: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let threads = match cli.threads {
        Some(n) => n,
        None => match std::env::var("GAUSS_HALASZ_THREADS") {
            Ok(v) => v
                .parse()
                .map_err(|_| Error::Parse(format!("GAUSS_HALASZ_THREADS: bad value `{v}`")))?,
            Err(_) => cfg.resolve("threads", None, 1usize)?,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build_global()
        .ok(); // a second invocation in-process keeps the first pool

    let output = cli.output.clone();
    let out = output.as_deref();
    match cli.command {
        Command::Sieve(args) => {
            let x_max = cfg.resolve("x-max", args.x_max, 1000)?;
            eprintln!("sieve: prime ideals of norm <= {x_max}");
            let mut csv = Csv::new(&["norm", "kind", "re", "im", "rational_prime"]);
            for p in prime_ideal_sieve(x_max)? {
                csv.row(vec![
                    p.norm.to_string(),
                    p.kind.to_string(),
                    p.generator.re().to_string(),
                    p.generator.im().to_string(),
                    p.rational_prime.to_string(),
                ]);
            }
            csv.emit(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate(args) => {
            let x_max = cfg.resolve("x-max", args.x_max, 100)?;
            eprintln!("enumerate: ideals of norm <= {x_max}");
            let mut csv = Csv::new(&["norm", "re", "im", "arg"]);
            for g in enumerate_ideals(x_max) {
                csv.row(vec![
                    g.norm().to_string(),
                    g.re().to_string(),
                    g.im().to_string(),
                    sig(g.arg()),
                ]);
            }
            csv.emit(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sum(args) => {
            let x_max = cfg.resolve("x-max", args.x_max, 10_000)?;
            let f = resolve_fn(&cfg, args.f, args.seed)?;
            eprintln!("sum: S_f for f = {} up to {x_max}", f.label());
            let table = FactorTable::new(x_max);
            let prefix = norm_compress(&f, x_max, &table)?.prefix_sums();
            let mut csv = Csv::new(&["x", "sum_re", "sum_im", "sum_abs"]);
            for x in decade_checkpoints(x_max) {
                let s = prefix[x as usize];
                csv.row(vec![x.to_string(), sig(s.re), sig(s.im), sig(s.norm())]);
            }
            csv.emit(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::PretentiousProfile(args) => {
            let x_max = cfg.resolve("x-max", args.x_max, 10_000)?;
            let f = resolve_fn(&cfg, args.f, args.seed)?;
            let modes = cfg.resolve("m", args.m, ModeRange { lo: -4, hi: 4 })?;
            let policy = cfg.resolve("t-range", args.t_range, "log".to_string())?;
            let x = x_max as f64;
            let cap = match policy.as_str() {
                "log" => x.ln(),
                "2x" => 2.0 * x,
                other => {
                    return Err(Error::Parse(format!(
                        "t-range must be `log` or `2x`, got `{other}`"
                    )))
                }
            };
            eprintln!(
                "pretentious-profile: f = {}, m in {}..{}, |t| <= {cap:.3}",
                f.label(),
                modes.lo,
                modes.hi
            );
            let primes = prime_ideal_sieve(x_max)?;
            let mut csv = Csv::new(&["m", "t_star", "M_m", "certified"]);
            for m in modes.iter() {
                let profile = DistanceProfile::new(&f, m, 1.0, x, &primes)?;
                let r = profile.minimize(-cap, cap);
                csv.row(vec![
                    m.to_string(),
                    sig(r.t_star),
                    sig(r.value),
                    r.certified.to_string(),
                ]);
            }
            csv.emit(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sectorial(args) => {
            let x_max = cfg.resolve("x-max", args.x_max, 100_000)?;
            let f = resolve_fn(&cfg, args.f, args.seed)?;
            let sector = resolve_sector(&cfg, args.theta1, args.theta2)?;
            let t = cfg.resolve("T", args.t, 32u32)?;
            eprintln!(
                "sectorial: f = {}, J = [{:.6}, {:.6}), T = {t}, x <= {x_max}",
                f.label(),
                sector.theta1(),
                sector.theta2()
            );
            let table = FactorTable::new(x_max);
            let mut csv = Csv::new(&["x", "S_fJ", "delta_S_f", "residual", "bound"]);
            for y in decade_checkpoints(x_max) {
                if y < 100 {
                    continue;
                }
                let d = sector_decomposition(&f, sector, t, 0.0, y as f64, &table)?;
                csv.row(vec![
                    y.to_string(),
                    sig(d.sector_sum.re),
                    sig(d.full_sum.re * sector.density()),
                    sig(d.residual.norm()),
                    sig(d.bound_shape),
                ]);
            }
            csv.emit(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ShortInterval(args) => {
            let x = cfg.resolve("x", args.x, 100_000)?;
            let h = cfg.resolve(
                "h",
                args.h,
                ((x as f64).powf(2.0 / 3.0)).round() as u64,
            )?;
            let f = resolve_fn(&cfg, args.f, args.seed)?;
            let sector = resolve_sector(&cfg, args.theta1, args.theta2)?;
            let t = cfg.resolve("T", args.t, 8u32)?;
            let modes = cfg.resolve("m", args.m, ModeRange { lo: 0, hi: 0 })?;
            let config = ShortIntervalConfig {
                x,
                h,
                sector,
                fourier_t: t,
                f: f.clone(),
                m_list: modes.iter().collect(),
            };
            config.validate()?;
            if !config.in_thick_regime() {
                eprintln!("note: h^2 <= X is outside the thick-window regime");
            }
            eprintln!(
                "short-interval: f = {}, X = {x}, h = {h}, J = [{:.6}, {:.6})",
                f.label(),
                sector.theta1(),
                sector.theta2()
            );
            let table = FactorTable::new(x + h);
            let sectorial = l2_statistic(&config, &table)?;
            let unrestricted = l2_unrestricted(&ShortIntervalConfig {
                m_list: vec![],
                ..config.clone()
            }, &table)?;
            let mut csv = Csv::new(&["X", "h", "component", "value"]);
            csv.row(vec![
                x.to_string(),
                h.to_string(),
                "sector".into(),
                sig(sectorial.value),
            ]);
            csv.row(vec![
                x.to_string(),
                h.to_string(),
                "unrestricted".into(),
                sig(unrestricted.value),
            ]);
            for (m, v) in &sectorial.mode_values {
                csv.row(vec![
                    x.to_string(),
                    h.to_string(),
                    format!("mode_{m}"),
                    sig(*v),
                ]);
            }
            csv.emit(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyLemmas(args) => {
            let x_max = cfg.resolve("x-max", args.x_max, 100_000)?;
            let seed = cfg.resolve("seed", args.seed, 42u64)?;
            let cal_path = resolve_calibration_path(&cfg, args.calibration)?;
            eprintln!("verify-lemmas: x_max = {x_max}, calibration = {}", cal_path.display());
            let cal = Calibration::load(&cal_path)?;
            let rows = suite::run_suite(x_max, seed)?;
            let checked = suite::verify(&rows, &cal)?;
            let mut csv = Csv::new(&[
                "tag", "params", "measured", "bound", "ratio", "limit", "pass",
            ]);
            let mut all_pass = true;
            for v in &checked {
                all_pass &= v.pass;
                csv.row(vec![
                    v.report.tag.clone(),
                    v.report.params.clone(),
                    sig(v.report.measured),
                    sig(v.report.bound),
                    sig(v.report.ratio),
                    sig(v.limit),
                    v.pass.to_string(),
                ]);
            }
            csv.emit(out)?;
            if all_pass {
                eprintln!("verify-lemmas: all {} rows pass", checked.len());
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("verify-lemmas: frozen-constant regression detected");
                Ok(ExitCode::from(1))
            }
        }
        Command::Calibrate(args) => {
            let x_max = cfg.resolve("x-max", args.x_max, suite::CALIBRATION_SCALE_CAP)?;
            let seed = cfg.resolve("seed", args.seed, 42u64)?;
            let cal_path = resolve_calibration_path(&cfg, args.calibration)?;
            eprintln!(
                "calibrate: measuring at x <= {} (cap {}), writing {}",
                x_max.min(suite::CALIBRATION_SCALE_CAP),
                suite::CALIBRATION_SCALE_CAP,
                cal_path.display()
            );
            let cal = suite::calibrate(x_max, seed)?;
            cal.save(&cal_path)?;
            let mut csv = Csv::new(&["tag", "param_hash", "constant"]);
            for (tag, entry) in cal.iter() {
                csv.row(vec![
                    tag.to_string(),
                    format!("{:#018x}", entry.param_hash),
                    sig(entry.constant),
                ]);
            }
            csv.emit(out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn resolve_fn(cfg: &ConfigFile, flag: Option<String>, seed_flag: Option<u64>) -> Result<MultFn> {
    let spec = cfg.resolve("f", flag, "one".to_string())?;
    let seed = cfg.resolve("seed", seed_flag, 42u64)?;
    multfun::resolve(&spec, seed)
}

fn resolve_sector(
    cfg: &ConfigFile,
    theta1: Option<PiFraction>,
    theta2: Option<PiFraction>,
) -> Result<Sector> {
    let t1 = cfg.resolve("theta1", theta1, PiFraction { num: 0, den: 1 })?;
    let t2 = cfg.resolve("theta2", theta2, PiFraction { num: 1, den: 2 })?;
    Sector::new(t1.radians(), t2.radians())
}

fn resolve_calibration_path(cfg: &ConfigFile, flag: Option<PathBuf>) -> Result<PathBuf> {
    Ok(cfg
        .resolve_opt("calibration", flag)?
        .unwrap_or_else(|| PathBuf::from("calibration.txt")))
}

/// Powers of ten up to `x_max`, then `x_max` itself.
fn decade_checkpoints(x_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = 10u64;
    while x < x_max {
        out.push(x);
        x = x.saturating_mul(10);
    }
    out.push(x_max);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_fractions() {
        let f: PiFraction = "1/4".parse().unwrap();
        assert!((f.radians() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let z: PiFraction = "0".parse().unwrap();
        assert_eq!(z.radians(), 0.0);
        assert!("1/0".parse::<PiFraction>().is_err());
    }

    #[test]
    fn mode_ranges() {
        let r: ModeRange = "-4..4".parse().unwrap();
        assert_eq!(r.iter().count(), 9);
        assert!("4..-4".parse::<ModeRange>().is_err());
        assert!("4".parse::<ModeRange>().is_err());
    }

    #[test]
    fn checkpoints() {
        assert_eq!(decade_checkpoints(1000), vec![10, 100, 1000]);
        assert_eq!(decade_checkpoints(2500), vec![10, 100, 1000, 2500]);
    }
}
