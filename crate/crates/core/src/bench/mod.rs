//! Manufactured benchmarks, sweeps, CSV output and the CLI.

pub mod cli;
pub mod config;
pub mod csv;
pub mod fields;
pub mod manufactured;
pub mod sweep;

pub use config::{Config, DlmConfig, KernelSpec, NewtonSection, SolverKind};
pub use csv::{emit_csv, to_csv_string};
pub use fields::ExactField;
pub use manufactured::{benchmark, manufacture, BenchmarkCase, ManufacturedCase};
pub use sweep::{
    compare_solvers, kernel_problem, run_config, run_convergence, Comparison, ConvergenceRecord, RecordStatus,
    SolverSpec, SweepSettings,
};
