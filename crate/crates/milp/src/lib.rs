//! Mixed-integer linear programming kernel.
//!
//! A deliberately small, dependency-free solver sized for unit-commitment-style
//! scheduling problems (a few thousand rows, a few hundred binaries):
//!
//! * bounded-variable primal simplex with a composite phase-1 (no artificials),
//! * dual simplex used both for warm starts after bound changes and as the
//!   default cold start when the objective permits a dual-feasible slack basis,
//! * depth-first branch-and-bound with plunging, best-bound restarts and
//!   branching priorities,
//! * helpers for piecewise-linear segments and binary product linearization,
//! * an LP-format writer for debugging.
//!
//! All variables are expected to carry finite, sensibly scaled bounds; callers
//! should express models in natural units of O(1)–O(10) magnitude (kA, MW, …)
//! rather than raw SI values so that no internal scaling pass is needed.

pub mod linearize;
pub mod lpfmt;
pub mod model;
pub mod simplex;
pub mod solver;

pub use linearize::{chord_segments, fit_segments, linearize_product_bin_bin, linearize_product_bin_cont, max_abs_error, Segment};
pub use model::{Model, RowId, RowSense, VarId, VarKind};
pub use simplex::{LpOutcome, LpStatus, SimplexParams};
pub use solver::{solve, solve_lp, MilpParams, SolveStats, Solution, SolveStatus};
