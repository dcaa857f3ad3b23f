//! Spectral laboratory for pseudo-hermitian random matrices `φ = A·B`.
//!
//! `A` is drawn from the Gaussian unitary ensemble with weight
//! `exp(-N m² tr A²/2)` and `B` is a fixed invertible real diagonal metric.
//! The crate samples spectra, solves the large-N gap equations for general
//! metrics, evaluates closed forms for the signature metric
//! `B = diag(1,…,1,-1,…,-1)`, and checks finite-N hermitization identities.

pub mod continuation;
pub mod ensemble;
pub mod error;
pub mod gapsolve;
pub mod hermcheck;
pub mod harness;
pub mod linalg;
pub mod metric;
pub mod poly;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod theory;
pub mod thresholds;

pub use num_complex::Complex64;

pub use ensemble::{EnsembleConfig, PhSample};
pub use error::{Error, Result};
pub use gapsolve::{GapSolution, Phase};
pub use harness::{ComparisonReport, Experiment, RunConfig};
pub use metric::{Metric, MetricSummary};
pub use spectral::{Histogram1D, Histogram2D, SpectrumSample};
pub use theory::SignatureTheory;

/// Dense complex matrix used throughout.
pub type CMat = faer::Mat<Complex64>;
