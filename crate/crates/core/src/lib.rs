//! Kloosterman sums over prime fields and the computational objects around
//! sums of `Kl_2(p;q)` over primes in arithmetic progressions.
//!
//! * [`ffarith`], [`fft`]: prime-field kernels and arbitrary-length DFTs.
//! * [`kloosterman`]: pointwise and all-`n` hyper-Kloosterman sums.
//! * [`transforms`]: normalized Fourier and Voronoi transforms over `F_q`,
//!   and the tempered Voronoi summation check.
//! * [`bump`], [`quad`], [`oscint`]: smooth weights, oscillatory quadrature,
//!   non-stationary decay and stationary-phase main terms.
//! * [`bilinear`]: bilinear forms with Kloosterman kernels and bound envelopes.
//! * [`primes`]: sieve tables, sums over primes in progressions,
//!   Heath-Brown's identity and dyadic partitions of unity.
//! * [`exponents`]: exact-rational exponent optimization and certification.

pub mod bilinear;
pub mod bump;
pub mod error;
pub mod exponents;
pub mod ffarith;
pub mod fft;
pub mod kloosterman;
pub mod oscint;
pub mod primes;
pub mod quad;
pub mod transforms;

pub use error::{Error, Result};
pub use exponents::Rat;
pub use ffarith::FieldCtx;
pub use kloosterman::{kl_point, kl_spectrum, Spectrum};
pub use oscint::{WeightParams, Which};
pub use transforms::PeriodicFn;
pub use num_complex::Complex64;
