//! Jump-size regime detection for Lévy-driven price series.
//!
//! - [`levy`]: inverse-Gaussian jump law, sampling and fitting.
//! - [`quadrature`]: adaptive Simpson on intervals and half-lines.
//! - [`bns`]: refined BN-S model paths, correlation and Laplace transform.
//! - [`seqtest`]: the sequential large-jump test and per-window detection.
//! - [`study`]: synthetic process classes scored by detector and baseline.
//! - [`features`]: price ingestion, summary statistics and window frames.
//! - [`classifiers`]: logistic, tree, forest and feedforward classifiers.
//! - [`pipeline`]: frames to classification reports in one call.
//!
//! Every stochastic routine takes a [`rng::Seed`]; equal inputs and seed give
//! bit-identical output regardless of thread count.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod bns;
pub mod classifiers;
pub mod features;
pub mod levy;
pub mod pipeline;
pub mod quadrature;
pub mod rng;
pub mod seqtest;
pub mod study;

pub use rng::Seed;
