//! Command-line interface: `run`, `sweep`, `kernel`, `inspect`.

use crate::checkpoint;
use crate::config::{self, IcConfig, RunConfig};
use crate::kernel_cmd::{execute_kernel, KernelCmdOptions};
use crate::runner::{execute_run, exit_code, RunnerError};
use crate::sweep::{execute_sweep, resolve_workers};
use gmhd2d_core::fields::InitialCondition;
use std::path::PathBuf;

pub const USAGE: &str = "\
gmhd2d — pseudo-spectral 2D generalized MHD solver

Usage:
  gmhd2d run --config PATH [--out DIR] [--seed N]
  gmhd2d sweep --config PATH [--out DIR] [--workers N] [--seed N]
  gmhd2d kernel --beta LIST [--l-max N] [--eta LIST] [--r-max X] [--samples N] [--out DIR]
  gmhd2d inspect CHECKPOINT

Flags:
  --config PATH   flat key=value run configuration
  --out DIR       override the [output] dir
  --workers N     sweep worker count (falls back to GMHD2D_WORKERS, then
                  machine parallelism)
  --seed N        override the random initial-condition seed
  --beta LIST     comma-separated kernel exponents
  --eta LIST      comma-separated fractional orders for the L1 report
  --l-max N       highest gradient order (default 2, max 4)
  --r-max X       kernel table extent (default: tail-resolving estimate)
  --samples N     kernel table sample count (default 400)
";

/// Exit status conventions: 0 success, 1 usage/config error, 2 blow-up or
/// quadrature failure.
pub fn main_with_args(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{USAGE}");
            1
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

enum CliError {
    Usage(String),
    Config(String),
    Failure(String),
}

impl From<RunnerError> for CliError {
    fn from(e: RunnerError) -> Self {
        match e {
            RunnerError::Config(c) => CliError::Config(c.to_string()),
            RunnerError::Checkpoint(c) => CliError::Config(c.to_string()),
            RunnerError::Io(c) => CliError::Failure(c.to_string()),
            RunnerError::Core(c) => CliError::Failure(c),
        }
    }
}

struct Flags {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    seed: Option<u64>,
    betas: Option<Vec<f64>>,
    etas: Option<Vec<f64>>,
    l_max: Option<u32>,
    r_max: Option<f64>,
    samples: Option<usize>,
    positional: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags, CliError> {
    let mut flags = Flags {
        config: None,
        out: None,
        workers: None,
        seed: None,
        betas: None,
        etas: None,
        l_max: None,
        r_max: None,
        samples: None,
        positional: Vec::new(),
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value_for = |name: &str| -> Result<String, CliError> {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("{name} needs a value")))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(PathBuf::from(value_for("--config")?)),
            "--out" => flags.out = Some(PathBuf::from(value_for("--out")?)),
            "--workers" => {
                flags.workers =
                    Some(value_for("--workers")?.parse().map_err(|_| {
                        CliError::Usage("--workers expects a positive integer".into())
                    })?)
            }
            "--seed" => {
                flags.seed =
                    Some(value_for("--seed")?.parse().map_err(|_| {
                        CliError::Usage("--seed expects an unsigned integer".into())
                    })?)
            }
            "--beta" => {
                flags.betas = Some(parse_f64_list(&value_for("--beta")?).map_err(CliError::Usage)?)
            }
            "--eta" => {
                flags.etas = Some(parse_f64_list(&value_for("--eta")?).map_err(CliError::Usage)?)
            }
            "--l-max" => {
                flags.l_max = Some(value_for("--l-max")?.parse().map_err(|_| {
                    CliError::Usage("--l-max expects a small nonnegative integer".into())
                })?)
            }
            "--r-max" => {
                flags.r_max = Some(
                    value_for("--r-max")?
                        .parse()
                        .map_err(|_| CliError::Usage("--r-max expects a number".into()))?,
                )
            }
            "--samples" => {
                flags.samples =
                    Some(value_for("--samples")?.parse().map_err(|_| {
                        CliError::Usage("--samples expects a positive integer".into())
                    })?)
            }
            other if other.starts_with("--") => {
                return Err(CliError::Usage(format!("unknown flag {other}")));
            }
            other => flags.positional.push(other.to_string()),
        }
    }
    Ok(flags)
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{p}' is not a number"))
        })
        .collect()
}

fn load_config(flags: &Flags) -> Result<RunConfig, CliError> {
    let Some(path) = &flags.config else {
        return Err(CliError::Usage("--config PATH is required".into()));
    };
    let mut cfg = config::parse_file(path).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(out) = &flags.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = flags.seed {
        if let IcConfig::Synthetic(InitialCondition::RandomBandlimited { seed: s, .. }) =
            &mut cfg.ic
        {
            *s = seed;
        }
    }
    Ok(cfg)
}

fn dispatch(args: &[String]) -> Result<i32, CliError> {
    let Some(verb) = args.first() else {
        return Err(CliError::Usage("missing verb".into()));
    };
    let flags = parse_flags(&args[1..])?;
    match verb.as_str() {
        "run" => {
            let cfg = load_config(&flags)?;
            let outcome = execute_run(&cfg)?;
            println!(
                "run finished: t = {}, verdict = {}, series = {}",
                outcome.final_time,
                outcome.report.verdict,
                outcome.series_path.display()
            );
            Ok(exit_code(&outcome))
        }
        "sweep" => {
            let cfg = load_config(&flags)?;
            let workers = resolve_workers(&cfg, flags.workers);
            let outcome = execute_sweep(&cfg, workers)?;
            println!(
                "sweep finished: {} cells, summary = {}",
                outcome.results.len(),
                outcome.summary_path.display()
            );
            Ok(0)
        }
        "kernel" => {
            let betas = flags.betas.clone().unwrap_or_default();
            if betas.is_empty() {
                return Err(CliError::Usage(
                    "kernel requires --beta with at least one value".into(),
                ));
            }
            let mut opts = KernelCmdOptions {
                betas,
                ..Default::default()
            };
            if let Some(etas) = flags.etas.clone() {
                opts.etas = etas;
            }
            if let Some(l) = flags.l_max {
                opts.l_max = l;
            }
            opts.r_max = flags.r_max;
            if let Some(s) = flags.samples {
                opts.samples = s;
            }
            if let Some(out) = &flags.out {
                opts.out = out.clone();
            }
            let outcome = execute_kernel(&opts)?;
            println!("kernel report: {}", outcome.report_path.display());
            Ok(0)
        }
        "inspect" => {
            let Some(path) = flags.positional.first() else {
                return Err(CliError::Usage("inspect requires a checkpoint path".into()));
            };
            let header = checkpoint::inspect(std::path::Path::new(path))
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!("{header}");
            Ok(0)
        }
        other => Err(CliError::Usage(format!("unknown verb '{other}'"))),
    }
}
