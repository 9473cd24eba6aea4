//! Benjamini–Hochberg style multiple testing, its asymptotic theory and a
//! seeded Monte Carlo harness that checks the theory at desk scale.
//!
//! The crate is organised by concern:
//!
//! - [`distributions`]: alternative p-value laws `G`, the null/alternative
//!   mixture `H = γ·x + (1−γ)·G`, and samplers for independent and weakly
//!   dependent uniform nulls.
//! - [`procedures`]: the step-up rule, its strict and shifted variants, the
//!   `γ̂(x)` null-proportion estimator, the adaptive (BHS) procedure and the
//!   false discovery / power / false nondiscovery proportions.
//! - [`gof`]: the goodness-of-fit view of the step-up rule (Rényi-type
//!   scaled empirical process), used as an independent oracle.
//! - [`theory`]: limiting rejection fractions `ρ(q, γ)`, `κ(x)`, BHS bounds
//!   and the data behind the power/FDR figures.
//! - [`montecarlo`]: replicated simulations and the theorem checks.
//! - [`cli`]: the `fdrlab` command-line front end.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod gof;
pub mod montecarlo;
pub mod procedures;
pub mod theory;

pub use distributions::{AlternativeModel, DependenceModel, MixtureSpec};
pub use error::{FdrError, Result};
pub use procedures::{PValueBatch, Proportions, RejectionOutcome};
pub use theory::{AsymptoticSummary, BhsBounds};
