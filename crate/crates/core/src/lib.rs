//! Sparse-mixture model for Student-t ratios.
//!
//! When a sparse signal is observed with replicated Gaussian noise and each
//! site is reduced to its t-ratio, the ratio follows a two-component mixture
//! of the Student-t null and a non-null component whose density ratio to the
//! null is the Student-t zeta function `ζ_k`. This crate evaluates those
//! densities, computes local false discovery rates under both the t-null and
//! the probability-integral-transformed z-null, fits the sparsity rate and
//! power index by maximum likelihood, and applies Benjamini–Hochberg control.

pub mod coeffs;
pub mod error;
pub mod fit;
pub mod oracle;
pub mod pipeline;
pub mod specfun;
pub mod twogroups;
pub mod zeta;

pub use coeffs::{CoefficientTable, PowerIndex};
pub use error::{Error, Result};
pub use fit::{fit_ml, loglik, profile_rho, DMode, FitOptions, FitResult};
pub use pipeline::{bh_reject, build_report, two_sided_pvalues, LfdrReport, ScorePanel};
pub use twogroups::{lfdr_t, lfdr_z, posterior_odds, simulate_panel, NullKind, SimulatedPanel};
pub use zeta::{DegreesOfFreedom, ModelParams};
