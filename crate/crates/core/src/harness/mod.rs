//! Monte-Carlo experiment orchestration: configs, frames, sweeps and outputs.

pub mod config;
pub mod frame;
pub mod output;
pub mod sweep;

pub use config::{ExperimentConfig, OutputFormat, Prior, SweepVariable};
pub use frame::{
    run_frame, run_frame_observed, run_frame_with_rng, FrameModel, FrameOutcome, TraceStep,
};
pub use output::{emit_results, format_sig9, write_csv, ResultsDocument};
pub use sweep::{run_sweep, run_sweep_with_threads, SweepPointResult};
