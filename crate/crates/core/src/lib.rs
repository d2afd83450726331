//! Bipolar surfaces to Otsuki tori and their low Laplace–Beltrami spectrum.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what every accuracy
//! target assumes.

// `!(x > y)` is deliberate: it also rejects NaN. Index loops over
// symmetric matrices read better than iterator chains.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod elliptic;
pub mod error;
pub mod geodesic;
pub mod immersion;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;
pub mod sturm;

pub use error::{Error, Result};
pub use geodesic::RotationNumber;
pub use scalar::Real;

pub type Solution = geodesic::OtsukiSolution<f64>;
pub type Profile = geodesic::GeodesicProfile<f64>;
pub type Problem = sturm::SLProblem<f64>;
pub type Spectrum = sturm::SLSpectrum<f64>;
pub type Table = spectrum::ModeTable<f64>;
pub type Report = spectrum::VerificationReport<f64>;
pub type Config = spectrum::SpectrumConfig<f64>;
pub type Mesh = immersion::SurfaceMesh<f64>;
pub type Grid = oracle::TorusGrid<f64>;
pub type OracleResult = oracle::OracleSpectrum<f64>;
