//! Semirandom stochastic block models and spectral bisection.
//!
//! The library samples graphs from the nonhomogeneous SSBM, the
//! deterministic-clusters model and the nested-block instance, runs spectral
//! bisection with four graph matrices, evaluates the closed-form thresholds
//! and spectral bounds around these models, and drives the experiment
//! harness behind the `semispec` binary.
//!
//! Vertices are 0-based everywhere in the library; the file formats in
//! [`io`] and the CLI are 1-based.

pub mod bisection;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod models;
pub mod operator;
pub mod rng;
pub mod theory;

pub use bisection::{spectral_bisection, BisectionOutput, CutRule};
pub use eigen::{smallest_eigenpairs, EigenOptions, EigenResult};
pub use error::{Error, Result};
pub use graph::{Graph, MatrixKind, Partition};
pub use models::{BlockProbabilitySpec, DcmSpec};
pub use rng::Seed;
