//! Compressed-sensing reconstruction over an orthonormal Daubechies wavelet
//! basis with Fourier-domain sampling.
//!
//! Two reconstruction pipelines are provided:
//!
//! * **BPD**: basis pursuit denoising in penalized form, solving for the
//!   wavelet coefficients of the image directly.
//! * **MSBPD**: first estimates a low-frequency image from a fully sampled
//!   central block of k-space (apodized with a Kaiser-Bessel window), then
//!   solves the same sparse problem for the wavelet coefficients of the
//!   residual `y - y_low`, which are far sparser for natural images.
//!
//! Supporting pieces: variable-density Laplacian sampling masks with a
//! Nyquist-sized fully sampled region, a FISTA solver with backtracking line
//! search, image-quality metrics and simple deterministic file formats.

pub mod corpus;
pub mod error;
pub mod fourier;
pub mod image;
pub mod io;
pub mod lowfreq;
pub mod metrics;
pub mod recon;
pub mod sampling;
pub mod solver;
pub mod wavelet;

pub use error::{Axis, Error, Result};
pub use fourier::{Dft2, ForwardModel};
pub use image::{ComplexImage, RealImage, C64};
pub use recon::{Method, ReconReport, ReconRequest};
pub use sampling::SamplingMask;
pub use solver::{SolverConfig, SolverTrace};
pub use wavelet::{FilterPair, WaveletPlan};
