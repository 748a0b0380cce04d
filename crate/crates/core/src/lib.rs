//! False discovery proportion of the Benjamini–Hochberg procedure under
//! Gaussian equi-correlation.
//!
//! * [`gauss`]: upper-tail Gaussian special functions.
//! * [`model`]: the equi-correlated testing model and its O(m) sampler.
//! * [`procedures`]: BH and fixed thresholds, rejection counts, FDP.
//! * [`asymptotics`]: fixed point `t*`, derivative measures, `c(T)`,
//!   `σ²(T)`, regime-dependent limit laws and limit covariance kernels.
//! * [`oracle`]: the known-parameter transform for fixed correlation.
//! * [`experiment`]: reproducible Monte Carlo runs and diagnostics.
//!
//! ```
//! use fdp_equicorr::asymptotics::{asymptotic_law, MixtureCdf};
//! use fdp_equicorr::experiment::{run, ExperimentConfig, Mode};
//! use fdp_equicorr::model::RhoSequence;
//! use fdp_equicorr::procedures::ThresholdProcedure;
//!
//! # fn main() -> fdp_equicorr::Result<()> {
//! let cdf = MixtureCdf::new(0.5, 2.0)?;
//! let bh = ThresholdProcedure::Bh { alpha: 0.2 };
//! let law = asymptotic_law(&cdf, &bh, &RhoSequence::ThetaOverM { theta: 4.0 })?;
//! assert!((law.variance - 0.365_772_097_983_032_8).abs() < 1e-12);
//!
//! let summary = run(&ExperimentConfig {
//!     m: 5000,
//!     pi0: 0.5,
//!     mu: 2.0,
//!     rho_seq: RhoSequence::ThetaOverM { theta: 4.0 },
//!     mode: Mode::Plain,
//!     procedure: bh,
//!     replicates: 4000,
//!     seed: 1,
//!     m_grid: None,
//! })?;
//! assert!(summary.checks().iter().all(|c| c.passed));
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod experiment;
pub mod gauss;
pub mod model;
pub mod oracle;
pub mod procedures;
pub mod root;
pub mod stats;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
