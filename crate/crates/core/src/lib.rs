//! Dynamic borrowing of external control data for small randomized trials.
//!
//! The crate decides how much an external (historical or real-world) control
//! sample may contribute to the internal control arm, and produces posterior
//! inference for the combined control mean and the treatment effect:
//!
//! - [`data`]: samples, per-source summary statistics and the estimand.
//! - [`rules`]: the maxML (empirical Bayes), cminMSE and minMSE borrowing
//!   rules together with the contribution cap.
//! - [`posterior`]: the combined estimator, closed-form conditional
//!   posteriors and the analytic bias/variance/MSE profile.
//! - [`bboot`]: Bayesian-bootstrap posterior draws, with optional IPW
//!   pre-adjustment of the external sample.
//! - [`ipw`]: weighted logistic propensity model, odds weights and balance
//!   diagnostics.
//! - [`sim`]: data generators and the Monte-Carlo scenario runner.
//!
//! Replicate loops run on rayon when the `parallel` feature is enabled (the
//! default). Every replicate draws from its own ChaCha stream derived from
//! `(seed, replicate index)`, so results do not depend on the thread count or
//! on whether the feature is compiled in.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bboot;
pub mod data;
mod error;
pub mod exec;
pub mod ipw;
pub mod posterior;
pub mod rules;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
