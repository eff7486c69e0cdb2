//! Finite Markov chains and their α-lazy versions: structural and spectral
//! analysis, lazy simulation, ℓ1 projection onto the simplex, plug-in
//! estimators and testers, and a Monte Carlo harness that checks the
//! accompanying theory numerically.
//!
//! ```
//! use lazymc::{chain::examples, lazy, spectral};
//!
//! let m1 = examples::m1();
//! let lazy_m1 = lazy::lazy(&m1, 0.5).unwrap();
//! let gap = spectral::pseudo_spectral_gap(&lazy_m1, spectral::DEFAULT_K_CAP).unwrap();
//! assert!((gap.value - 0.75).abs() < 1e-9);
//! ```

pub mod chain;
pub mod config;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod io;
pub mod lazy;
pub mod matrix;
pub mod projection;
pub mod spectral;

pub use chain::{ChainProfile, Distribution, StochasticMatrix};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use spectral::SpectralReport;
