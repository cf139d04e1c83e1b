//! Exact curvature invariants of two-step nilpotent Lie groups with
//! left-invariant metrics, given by a map `j: z → so(v)`.
//!
//! Values are computed twice: by contracting frame tensors built from the
//! Levi-Civita connection, and by closed formulas in trace invariants of `j`.
//! Heat-invariant integrands, Heisenberg-type structure checks and the
//! hypotheses of the Gordon–Wilson isospectrality construction are built on
//! top. All arithmetic is over the rationals.

pub mod catalog;
pub mod error;
pub mod heisenberg;
pub mod invariants;
pub mod isospec;
pub mod liealg;
pub mod linalg;
pub mod rational;
pub mod tensor;
pub mod traceinv;

pub use error::{Error, Result};
pub use invariants::{InvariantId, InvariantReport, OracleOptions};
pub use liealg::{build_algebra, JMap, MetricLieAlgebra};
pub use linalg::Mat;
pub use rational::Rational;
pub use tensor::FrameTensor;
