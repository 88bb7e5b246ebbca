//! Wiener-chaos prediction of Gaussian stationary-increment processes,
//! specialised to fractional Brownian motion.
//!
//! The crate is organised bottom-up:
//!
//! * [`hermite`] : Hermite polynomials, multi-indices, chaos expansions and
//!   conditioning by truncation.
//! * [`special`] : Gamma and Bessel functions, Bessel zeros.
//! * [`quadrature`] : Gauss–Kronrod panels, power-law endpoints and
//!   extrapolated oscillatory tails on the half line.
//! * [`spectral`] : fBm spectral density, outer factor, the Laguerre
//!   frequency basis and the basis `ξ̂_n`, inner products in `L_Δ`.
//! * [`prediction`] : chaos coefficients `r_j(t)`, past/future split,
//!   prediction error and conditional expansions.
//! * [`simulate`] : exact fBm sampling, time-domain kernels, pathwise
//!   integrals and Monte Carlo checks.
//! * [`finite_horizon`] : the Bessel-kernel basis for a bounded observation
//!   window.
//! * [`figures`] and [`verify`] : CSV/SVG output and the verification suite
//!   driven by the command line tool.

pub mod error;
pub mod figures;
pub mod finite_horizon;
pub mod hermite;
pub mod prediction;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use hermite::{ChaosExpansion, MultiIndex, PastSet};
pub use prediction::{CoefficientTable, PredictionResult};
pub use quadrature::{Estimate, QuadratureSpec};
pub use simulate::{Grid, SamplePath, TimeKernel};
pub use spectral::{FrequencyFunction, SpectralModel};
