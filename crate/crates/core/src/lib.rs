//! Quantum-inspired minority oversampling.
//!
//! Minority rows are compared to a single data centroid with a compact swap
//! test; the resulting angular distance drives a small X rotation of each
//! amplitude-encoded row, producing synthetic rows near their sources. Rows
//! whose angular distance falls outside the interquartile fences can then be
//! boosted with wider rotations.
//!
//! Modules, bottom up: [`statevec`] simulates the circuits, [`qdist`] runs the
//! swap test, [`synth`] rotates points, [`pipeline`] hits a target minority
//! share, [`aol`] finds and boosts angular outliers, [`data`] handles CSV and
//! plots, and [`eval`] scores a KNN classifier on the result.

pub mod aol;
pub mod data;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod qdist;
pub mod rng;
pub mod statevec;
pub mod synth;

pub use error::{Error, Result};
