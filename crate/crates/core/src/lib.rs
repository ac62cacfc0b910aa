//! Numerical laboratory for low-rank deterministic perturbations of large
//! random matrices and matrix polynomials.
//!
//! The crate predicts where outlier eigenvalues of `X_N(z) + P C(z) Q` go as
//! `N` grows (zeros of `det K(z)`, `K(z) = C(z)^{-1} + m(z) Q P`), how fast
//! they get there (`N^{-1/(2p)}` with `p` the largest Jordan block of
//! `D = C Q P`), and checks those predictions by seeded Monte Carlo runs.

pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod hankel;
pub mod matops;
pub mod outliers;
pub mod perturbation;
pub mod polyeig;
pub mod stieltjes;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = ndarray::Array2<C64>;
/// Dense complex vector.
pub type CVector = ndarray::Array1<C64>;

pub use ensembles::{derive_seed, EnsembleKind, EnsembleSpec};
pub use experiments::{RateEstimate, Scenario};
pub use matops::NormKind;
pub use outliers::{JordanSpec, OutlierPrediction, PredictionSource};
pub use perturbation::{DeformedWindowParams, MatrixPoly, PerturbationModel};
pub use stieltjes::{LawKind, LimitLaw, RealAxis, WindowParams};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
