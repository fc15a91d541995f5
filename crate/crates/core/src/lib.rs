//! Production planning under demand and endogenous supply uncertainty.
//!
//! A product's yield distribution depends on the production level chosen at
//! each facility. The crate builds and solves the two-stage model with an
//! extensive form, a Benders decomposition (iterative and branch-and-cut,
//! with optional valid inequalities) and an enumeration oracle, and it
//! generates random instances and VSS statistics.

pub mod analysis;
pub mod benders;
pub mod error;
pub mod exec;
pub mod extensive;
pub mod generator;
pub mod io;
pub mod model;
pub mod secondstage;
pub mod solution;
pub mod solve;

pub use optkernel;

pub use analysis::{compute_vss, expected_value_instance, micro1, solve_oracle, EvVariant, VssReport};
pub use benders::{solve_branch_and_cut, solve_iterative, BendersOptions, BendersOutcome, ViFlags};
pub use error::{Error, Result};
pub use exec::Execution;
pub use generator::{generate, GeneratorConfig};
pub use model::{validate_instance, ProductionInstance};
pub use solution::MasterSolution;
pub use solve::{solve, Method, MethodOutcome, SolveOptions};
