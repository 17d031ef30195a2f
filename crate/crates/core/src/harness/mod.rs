//! Configuration-driven sweeps, invariant suites and report emission.

pub mod emit;
pub mod spec;
pub mod sweep;
pub mod verify;

pub use emit::{emit, plot_from_csv, read_csv, render_svg, write_csv};
pub use spec::{load_spec, Balls, Check, ExperimentSpec, Format, Process, TieRuleKind};
pub use sweep::{run_cell, run_sweep, SweepResult, SweepRow};
pub use verify::{verify, VerifyReport};
