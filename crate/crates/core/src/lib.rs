//! One-shot text classification toolkit.
//!
//! The pipeline: load labeled corpora ([`corpus`]), draw a support set with
//! one document per label, featurize text ([`featurize`], [`embedio`]),
//! train a classical classifier on the support set ([`classify`]), and score
//! the remaining documents ([`metrics`]). [`experiment`] runs the full
//! dataset x featurizer x classifier grid and writes tables and SVG charts.

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod embedio;
pub mod error;
pub mod experiment;
pub mod featurize;
pub mod metrics;
pub mod rng;
pub mod synth;
pub mod tokenize;

pub use error::{Error, Result};
