//! Execute one configured run: initial state (fresh or restarted from a
//! checkpoint), time integration with checkpointing at record boundaries,
//! CSV + report emission.

use crate::checkpoint::{self, CheckpointError};
use crate::config::{ConfigError, IcConfig, RunConfig};
use crate::csvio;
use gmhd2d_core::diagnostics::{
    bkm_report, regularity_quantities_bounded, BkmReport, DiagAccumulators, Verdict,
};
use gmhd2d_core::fields::{make_initial_condition, FlowState};
use gmhd2d_core::grid::Grid2D;
use gmhd2d_core::timestep::{run, RunError};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum RunnerError {
    Config(ConfigError),
    Checkpoint(CheckpointError),
    Io(std::io::Error),
    Core(String),
}

impl fmt::Display for RunnerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunnerError::Config(e) => write!(f, "{e}"),
            RunnerError::Checkpoint(e) => write!(f, "{e}"),
            RunnerError::Io(e) => write!(f, "io error: {e}"),
            RunnerError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunnerError {}

impl From<ConfigError> for RunnerError {
    fn from(e: ConfigError) -> Self {
        RunnerError::Config(e)
    }
}

impl From<CheckpointError> for RunnerError {
    fn from(e: CheckpointError) -> Self {
        RunnerError::Checkpoint(e)
    }
}

impl From<std::io::Error> for RunnerError {
    fn from(e: std::io::Error) -> Self {
        RunnerError::Io(e)
    }
}

/// What a finished (or blown-up) run left behind.
#[derive(Debug)]
pub struct RunOutcome {
    pub blew_up: bool,
    pub final_time: f64,
    pub report: BkmReport,
    pub regularity_bounded: Option<(bool, f64)>,
    pub series_path: PathBuf,
    pub report_path: PathBuf,
}

/// Build the initial state for a config (restart-aware). Returns the state
/// plus restored accumulators when resuming.
pub fn initial_state(
    cfg: &RunConfig,
) -> Result<(FlowState, Option<DiagAccumulators>), RunnerError> {
    match &cfg.ic {
        IcConfig::Synthetic(ic) => {
            let grid = Grid2D::with_box_length(cfg.grid_n, cfg.box_length)
                .map_err(|e| RunnerError::Core(e.to_string()))?;
            let state =
                make_initial_condition(ic, &grid).map_err(|e| RunnerError::Core(e.to_string()))?;
            Ok((state, None))
        }
        IcConfig::FromFile { path } => {
            let (state, header) = checkpoint::read_checkpoint(path)?;
            // The checkpoint must agree with the config it resumes under.
            if header.n as usize != cfg.grid_n {
                return Err(RunnerError::Config(ConfigError::Invalid {
                    what: format!(
                        "checkpoint field 'n' = {} does not match [grid] n = {}",
                        header.n, cfg.grid_n
                    ),
                }));
            }
            if header.box_length.to_bits() != cfg.box_length.to_bits() {
                return Err(RunnerError::Config(ConfigError::Invalid {
                    what: format!(
                        "checkpoint field 'box_length' = {} does not match [grid] box_length = {}",
                        header.box_length, cfg.box_length
                    ),
                }));
            }
            if header.params != cfg.physics {
                return Err(RunnerError::Config(ConfigError::Invalid {
                    what: format!(
                        "checkpoint physics {:?} do not match the [physics] section {:?}",
                        header.params, cfg.physics
                    ),
                }));
            }
            if header.time > cfg.stepper.t_end {
                return Err(RunnerError::Config(ConfigError::Invalid {
                    what: format!(
                        "checkpoint field 'time' = {} is past [stepper] t_end = {}",
                        header.time, cfg.stepper.t_end
                    ),
                }));
            }
            Ok((state, Some(header.accumulators)))
        }
    }
}

/// Run to completion (or blow-up), writing `series.csv`, `report.txt`, and
/// checkpoints under the output directory.
pub fn execute_run(cfg: &RunConfig) -> Result<RunOutcome, RunnerError> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    let (state0, acc) = initial_state(cfg)?;
    let params = cfg.physics;
    let interval = cfg.output.checkpoint_interval;
    let dir = cfg.output.dir.clone();
    let mut hook_error: Option<std::io::Error> = None;
    let mut on_record = |state: &FlowState, series: &gmhd2d_core::diagnostics::NormSeries| {
        if interval <= 0.0 || hook_error.is_some() {
            return;
        }
        let t = state.time();
        let m = (t / interval + 0.5).floor();
        if (t - m * interval).abs() <= 1e-9 * interval.max(1.0) && m >= 0.0 && t > 0.0 {
            let path = dir.join(format!("chk_{:08}.bin", m as u64));
            if let Err(e) =
                checkpoint::write_checkpoint(&path, state, &params, &series.accumulators())
            {
                hook_error = Some(std::io::Error::other(e.to_string()));
            }
        }
    };

    let result = run(
        state0,
        &params,
        &cfg.stepper,
        &cfg.diagnostics,
        acc,
        Some(&mut on_record),
    );
    if let Some(e) = hook_error {
        return Err(RunnerError::Io(e));
    }

    let (series, final_state, blew_up, final_time) = match result {
        Ok(out) => {
            let t = out.final_state.time();
            (out.series, Some(out.final_state), false, t)
        }
        Err(RunError::Blowup { time, series }) => (series, None, true, time),
        Err(RunError::Timestep(e)) => return Err(RunnerError::Core(e.to_string())),
    };

    let series_path = cfg.output.dir.join("series.csv");
    csvio::write_series(&series_path, &series)?;

    if let Some(state) = &final_state {
        let path = cfg.output.dir.join("chk_final.bin");
        checkpoint::write_checkpoint(&path, state, &params, &series.accumulators())?;
    }

    let report = bkm_report(&series, &cfg.diagnostics);
    let bounds = if params.beta > 1.0 {
        Some(regularity_quantities_bounded(
            &series,
            &cfg.diagnostics,
            10.0,
        ))
    } else {
        None
    };
    let report_path = cfg.output.dir.join("report.txt");
    let mut text = String::new();
    text.push_str(&format!("final_time {}\n", csvio::format_value(final_time)));
    text.push_str(&format!("verdict {}\n", report.verdict));
    text.push_str(&format!(
        "bkm_integral {}\n",
        csvio::format_value(report.bkm_integral)
    ));
    text.push_str(&format!(
        "int_linf_grad_j_sq {}\n",
        csvio::format_value(report.grad_j_sq_integral)
    ));
    text.push_str(&format!(
        "rel_slope_bkm {}\n",
        csvio::format_value(report.profile.rel_slope_bkm)
    ));
    text.push_str(&format!(
        "rel_slope_grad_j {}\n",
        csvio::format_value(report.profile.rel_slope_grad_j)
    ));
    text.push_str(&format!(
        "late_early_ratio {}\n",
        csvio::format_value(report.profile.late_early_ratio)
    ));
    text.push_str(&format!(
        "tail_rate_grad_j {}\n",
        csvio::format_value(report.profile.tail_rate_grad_j)
    ));
    if let Some((ok, worst)) = bounds {
        text.push_str(&format!("regularity_quantities_bounded {ok}\n"));
        text.push_str(&format!(
            "regularity_worst_ratio {}\n",
            csvio::format_value(worst)
        ));
    }
    std::fs::write(&report_path, &text)?;

    Ok(RunOutcome {
        blew_up,
        final_time,
        report,
        regularity_bounded: bounds,
        series_path,
        report_path,
    })
}

/// Exit code for a completed run outcome: 0 on completion, 2 on blow-up.
pub fn exit_code(outcome: &RunOutcome) -> i32 {
    if outcome.blew_up {
        2
    } else {
        0
    }
}

/// Verdict string as used in summary CSVs.
pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Bounded => "bounded",
        Verdict::Growing => "growing",
        Verdict::BlownUp => "blown_up",
    }
}
