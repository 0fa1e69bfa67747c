//! Wavelet denoising in the Gaussian white-noise model with tree-structured
//! hard thresholding.
//!
//! The crate is organized bottom-up:
//!
//! - [`coefficients`]: storage for wavelet coefficient fields.
//! - [`wavelet`]: periodized Haar and Daubechies transforms.
//! - [`noise`]: the observation model, thresholds and cutoff scales.
//! - [`tree`]: dyadic index trees, scopes and tree maxima.
//! - [`estimators`]: hard thresholding, the hard tree rule and its oracles.
//! - [`spaces`]: finite-field sequence-space statistics and the `h` witnesses.
//! - [`risk`]: Monte Carlo risk curves, rate fits and rule comparisons.
//! - [`io`] and [`cli`]: file formats and the command-line front end.

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod estimators;
pub mod io;
pub mod noise;
pub mod risk;
pub mod spaces;
pub mod tree;
pub mod wavelet;

pub use coefficients::{CoefIndex, CoefficientField};
pub use error::{Error, Result};
pub use estimators::{EstimateResult, KeepMask, Rule};
pub use noise::{NoiseConfig, Thresholds};
pub use tree::{DyadicNode, TreeScope};
pub use wavelet::WaveletBasis;
