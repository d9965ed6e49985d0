//! Curriculum learning for node classification.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: CSR graphs, symmetric adjacency normalization, SBM generation.
//! - [`data`]: datasets, train/val/test splits, label-noise injection.
//! - [`backbone`]: hand-differentiated SGC and GCN models with Adam.
//! - [`curriculum`]: pseudo-labels, neighborhood difficulty scores, pacing.
//! - [`trainer`]: standard and curriculum training loops with early stopping.
//! - [`experiment`]: declarative experiment configs, aggregate reports, CSV curves.

pub mod backbone;
pub mod curriculum;
pub mod data;
mod error;
pub mod experiment;
pub mod graph;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
