//! Configuration, persistence, and orchestration around `gmhd2d-core`:
//! flat key=value run configs, binary checkpoints, CSV series output,
//! single runs, parameter sweeps, and the kernel-lab driver.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod kernel_cmd;
pub mod runner;
pub mod sweep;

pub use config::{ConfigError, IcConfig, OutputConfig, RunConfig, SweepConfig};
