//! Multiplicative-function statistics on the ideals of Z[i].
//!
//! The crate is organized around a small set of layers:
//!
//! * [`gaussint`], [`primes`], [`ideals`] — lattice arithmetic: canonical
//!   generators, the prime-ideal sieve, enumeration by norm, factorization.
//! * [`multfun`], [`sums`] — multiplicative functions as named strategies
//!   behind the [`multfun::PrimePowerRule`] trait, their convolution
//!   algebra, and all partial / window / sector sums plus norm-compression.
//! * [`pretentious`] — prime-weighted distances to the Archimedean
//!   characters, their minimization in the twist parameter, Euler-product
//!   evaluation of Dirichlet series, and the mean-value bound functionals.
//! * [`sectorial`] — Fourier analysis of sector indicators.
//! * [`lemmas`] — direct numerical verification of the supporting
//!   estimates, with a calibrate-then-freeze regression protocol.
//! * [`shortint`] — compressed angular modes and the short-interval L2
//!   statistic.

pub mod calibration;
pub mod error;
pub mod gaussint;
pub mod ideals;
pub mod lemmas;
pub mod multfun;
pub mod pretentious;
pub mod primes;
pub mod quad;
pub mod rng;
pub mod sectorial;
pub mod shortint;
pub mod suite;
pub mod sums;

pub use error::{Error, Result};
pub use gaussint::{canonicalize, CanonicalGenerator, GaussInt};
pub use ideals::{count_ideals, enumerate_ideals, enumerate_ideals_range, wedge_count,
    FactorTable, IdealFactorization};
pub use multfun::MultFn;
pub use primes::{prime_ideal_sieve, PrimeIdeal, SplittingCensus, SplittingKind};
pub use sums::{CompressedFn, Sector};
