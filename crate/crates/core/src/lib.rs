//! Rewire weighted directed networks to prescribed assortativity values
//! while preserving every node's out-/in-strength and the edge count.
//!
//! The pipeline has three stages, each usable on its own:
//!
//! 1. **Measure** ([`assortativity`]): the four directed strength
//!    correlations `r11` … `r22` of a graph, with undefined cases carried
//!    explicitly.
//! 2. **Target** ([`target`]): build a matrix Λ with the same margins and
//!    edge count but prescribed coefficients, via a linear program solved by
//!    the in-repo bounded simplex ([`lp`]); free-support variants export as
//!    MPS mixed-integer models ([`mps`]) for external solvers.
//! 3. **Rewire** ([`rewire`]): transform the original graph into Λ by a
//!    finite sequence of four-cell weight transfers, each preserving all
//!    strengths, recorded so trajectories can be replayed and traced.
//!
//! [`generators`] supplies reproducible random networks for calibration and
//! [`pipeline`] wires the stages into replicated, seedable batch runs.
//! Everything numeric is generic over the scalar: floats for statistics and
//! optimization, exact integers where bit-for-bit rewiring arithmetic is
//! wanted.

pub mod assortativity;
pub mod generators;
pub mod graph;
pub mod lp;
pub mod mps;
pub mod num;
pub mod pipeline;
pub mod rewire;
pub mod target;

pub use assortativity::{AssortativityQuad, TrajectoryTracker, UndefinedCoefficient};
pub use graph::{RewiringStep, StrengthKind, StrengthProfile, WeightedDigraph};
pub use num::{Real, Weight};
pub use pipeline::{GeneratorSpec, ReplicateResult, RunPlan};
pub use rewire::RewiringRecord;
pub use target::{BoundsQuad, Objective, SupportMode, TargetMatrix, TargetProblem, Targets};

/// Magnitude at or below which a matrix entry counts as an absent edge once
/// floating-point arithmetic has touched it.
pub const EPS_EDGE: f64 = 1e-9;

/// Residual level to which a sweep must clear the difference matrix.
pub const SWEEP_ZERO_TOL: f64 = 1e-9;

/// Allowed drift in node strengths between a graph and its target matrix.
pub const MARGIN_TOL: f64 = 1e-7;

/// Allowed miss between a requested and an achieved coefficient.
pub const ASSORT_TOL: f64 = 1e-6;

/// Concrete `f64` aliases for the common case.
pub type Graph = WeightedDigraph<f64>;
pub type Profile = StrengthProfile<f64>;
pub type Quad = AssortativityQuad<f64>;
pub type Step = RewiringStep<f64>;
