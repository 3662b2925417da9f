//! Exact solver for kidney exchange clearing with bounded cycles and
//! altruist-initiated chains.
//!
//! The solver combines color coding with a subset dynamic program:
//! patients are colored, colorful cycles and chains are detected per color
//! set ([`detect`]), and a DP over color sets assembles disjoint
//! collections ([`solver`]). Colorings come either from a seeded random
//! source or from a deterministic perfect hash family ([`color`]).
//!
//! [`oracle`] is an exhaustive reference solver for small instances and
//! [`reductions`] generates labeled instances from classical hard problems.

pub mod color;
pub mod detect;
pub mod generate;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod reductions;
pub mod solver;

pub use color::{
    deterministic_family, random_coloring, trial_count, verify_family, ColorError, ColorMap,
    Coloring, HashFamily,
};
pub use detect::{colorful_chain, colorful_cycle, ColorSet, DetectError};
pub use generate::{planted_instance, random_instance, GenerateError};
pub use instance::{Chain, Cycle, Instance, InstanceError, Solution, SolutionError, Vertex};
pub use io::{parse_instance, parse_solution, Answer, IoError, RunReport, RunStats};
pub use oracle::{oracle_max_coverage, OracleError, OracleLimits};
pub use reductions::{Expected, ReductionError, ReductionOutput, Scaling};
pub use solver::{
    decide_at_least, decide_exact, maximize, solve_colorful_corrected, solve_colorful_paper, Mode,
    Solver, SolverConfig, SolverError, Variant,
};
