//! Exact optimization toolkit for energy-aware routing over a
//! router / line-card / port / link hierarchy.
//!
//! The crate models a network whose directed links come in oppositely
//! directed pairs (edges) and can run in one of several discrete energy
//! states. It builds three binary-program variants over that model:
//!
//! * **corrected** — flow conservation per router plus per-port state
//!   symmetry, so both links of an edge always run in the same state;
//! * **relaxed** — the corrected model without the symmetry rows, which
//!   reproduces the gap the symmetry rows exist to close;
//! * **original literal** — a literal reading of the flawed flow equations
//!   the corrected model replaces; building it yields machine-readable
//!   structural defect reports instead of a usable model.
//!
//! On top of the model builders sit an exact branch-and-bound solver with an
//! independent brute-force oracle, a constraint-by-constraint solution
//! checker, a symmetry-gap demonstrator, an LP-format exporter with a
//! round-trip parser, and a seeded instance generator. The `greenroute`
//! binary exposes all of it as `validate`, `solve`, `export`, `demo` and
//! `gen` subcommands.
//!
//! All arithmetic is exact rational arithmetic; there are no tolerances in
//! feasibility decisions.

pub mod formulation;
pub mod generate;
pub mod lpexport;
pub mod model;
pub mod rational;
pub mod solver;
pub mod validate;

#[cfg(test)]
pub(crate) mod testutil;

pub use formulation::{
    build_corrected, build_objective, build_original_literal, build_relaxed, LinearConstraint,
    LinearModel, OriginalModel, Relation, StructuralDefect, Var, Variant,
};
pub use model::{
    build_instance, instance_from_json, instance_to_json, Demand, EdgePair, Instance,
    LinkStateSpec, ModelError, RawInstance,
};
pub use rational::Rat;
pub use solver::{
    brute_force_oracle, derive_support, enumerate_paths, solve_exact, RouterPath, SolveError,
    SolveOptions, SolveOutcome, SolveStatus, Solution,
};
pub use validate::{
    check_solution, demonstrate_defects, symmetry_gap, CheckReport, DefectReport, GapError,
    SymmetryGap, ValidateError, Violation,
};
