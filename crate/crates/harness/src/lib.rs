//! Experiment orchestration for the capillary free-boundary solver:
//! paired runs, k-sweeps, rate fits, CSV/SVG output and acceptance checks.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod models;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, InitialFlow};
pub use error::{HarnessError, Result};
pub use fit::{fit_rate, Fit};
pub use models::{model, FlowModel, ModelOptions, Trajectory, MODEL_NAMES};
pub use runner::{run_pair, run_single, run_sweep, RunRecord, SweepResult, SweepRow};
