//! Accelerated composite gradient methods with adaptive line search,
//! baseline solvers, a wall-clock cost model and two imaging benchmarks.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod linesearch;
pub mod metering;
pub mod operator;
pub mod problem;
pub mod solvers;
pub mod suite;
pub mod vector;

pub use error::{Error, Result};
pub use problem::{CompositeProblem, Regularizer};
pub use solvers::{run, Budget, SolverKind, SolverOptions, StepPolicy, Trace};
