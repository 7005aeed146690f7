//! Convex feasibility via weighted averages of relaxed projections.
//!
//! The problem: find a point in the intersection of finitely many closed
//! convex sets `C_1, ..., C_N` in `R^d`. The method: iterate the operator
//!
//! ```text
//! Q_beta(x) = x - sum_j beta_j (x - P_{C_j}(x))
//! ```
//!
//! where `P_C` is the projection onto `C` and the weights `beta_j >= 0`
//! satisfy `sum beta_j <= 2`, possibly changing every iteration. The crate
//! provides:
//!
//! - [`geometry`]: sets with closed-form projections (half-space,
//!   hyperplane, ball, box, probability simplex);
//! - [`operator`]: the operator itself plus the descent coefficients
//!   `nu_i` and `mu_i` that quantify per-step progress;
//! - [`schedule`]: weight sequences with control subsets, block
//!   partitions, series diagnostics and the restriction/nullification
//!   transforms that repair schedules with tiny off-control weights;
//! - [`solver`]: the iteration driver with full trace capture;
//! - [`diagnostics`]: numerical verification of every descent inequality,
//!   an independent brute-force projection oracle, and random instance
//!   generation.
//!
//! # Example
//!
//! ```
//! use relaxproj::{BetaVector, Point, RunConfig, Schedule, SetSpec};
//!
//! let sets = vec![
//!     SetSpec::HalfSpace { a: Point::new(vec![1.0, 0.0]).unwrap(), b: 0.0 },
//!     SetSpec::HalfSpace { a: Point::new(vec![0.0, 1.0]).unwrap(), b: 0.0 },
//! ];
//! let mut cfg = RunConfig::new(
//!     sets,
//!     Schedule::constant(BetaVector::new(vec![0.5, 0.5]).unwrap()),
//!     Point::new(vec![2.0, 3.0]).unwrap(),
//! );
//! cfg.tol_feas = 1e-6;
//! let result = relaxproj::solver::run(&cfg).unwrap();
//! assert_eq!(result.status, relaxproj::RunStatus::Feasible);
//! ```

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod operator;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{Point, SetSpec};
pub use operator::{apply_q, coefficients, AlphaLambda, BetaVector, CoefficientRow};
pub use schedule::{
    greedy_blocks, natural_blocks, nullify_offcontrol, series_report, BlockPartition, Schedule,
    SeriesReport,
};
pub use solver::{run, RunConfig, RunResult, RunStatus, TraceRow};
