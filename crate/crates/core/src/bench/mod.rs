//! Benchmark harness: instance and trace generation, file formats, replay
//! with timing, verification, and plot series.

pub mod format;
pub mod gen;
pub mod plot;
pub mod run;
pub mod solver;
pub mod trace;
pub mod verify;

pub use format::{Event, Instance, Mode, Trace};
pub use solver::{build_solver, Algo, DynamicSolver, SolverConfig};
