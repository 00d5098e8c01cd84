//! Flat, sectioned key=value run configuration.
//!
//! The format is deliberately primitive — diffable, greppable, no parser
//! dependency: `[section]` headers, one `key = value` per line, `#` comment
//! lines. Unknown sections or keys are errors, as are malformed values;
//! every error names the offending key and line.

use gmhd2d_core::diagnostics::DiagnosticsConfig;
use gmhd2d_core::dynamics::PhysicsParams;
use gmhd2d_core::fields::{InitialCondition, ModeTarget};
use gmhd2d_core::timestep::{Scheme, StepperConfig};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Syntax {
        line: usize,
        what: String,
    },
    UnknownSection {
        line: usize,
        section: String,
    },
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    BadValue {
        section: String,
        key: String,
        value: String,
        expected: &'static str,
    },
    Invalid {
        what: String,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "config io error: {e}"),
            ConfigError::Syntax { line, what } => write!(f, "config line {line}: {what}"),
            ConfigError::UnknownSection { line, section } => {
                write!(f, "config line {line}: unknown section [{section}]")
            }
            ConfigError::UnknownKey { line, section, key } => {
                write!(
                    f,
                    "config line {line}: unknown key '{key}' in section [{section}]"
                )
            }
            ConfigError::BadValue {
                section,
                key,
                value,
                expected,
            } => {
                write!(
                    f,
                    "config [{section}] {key} = '{value}': expected {expected}"
                )
            }
            ConfigError::Invalid { what } => write!(f, "invalid config: {what}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        ConfigError::Io(e)
    }
}

/// Initial-condition choice, including checkpoint restart.
#[derive(Debug, Clone)]
pub enum IcConfig {
    Synthetic(InitialCondition),
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Checkpoint every multiple of this simulation time; 0 disables all but
    /// the final checkpoint. Must be a multiple of the record cadence so
    /// checkpoints land exactly on record boundaries.
    pub checkpoint_interval: f64,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub ns: Vec<usize>,
    pub workers: Option<usize>,
}

/// Complete configuration of one run (or the base of a sweep).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid_n: usize,
    pub box_length: f64,
    pub physics: PhysicsParams,
    pub ic: IcConfig,
    pub stepper: StepperConfig,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_n: 128,
            box_length: 2.0 * std::f64::consts::PI,
            physics: PhysicsParams::magnetic_diffusion_only(1.25).expect("valid preset"),
            ic: IcConfig::Synthetic(InitialCondition::OrszagTang { b_scale: 1.0 }),
            stepper: StepperConfig::new(Scheme::IfRk4, 0.5, 0.01, 1.0).expect("valid preset"),
            diagnostics: DiagnosticsConfig {
                cadence: Some(0.01),
                ..Default::default()
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                checkpoint_interval: 0.0,
            },
            sweep: None,
        }
    }
}

/// Raw IC fields gathered during parsing; assembled at the end.
#[derive(Debug, Default)]
struct IcDraft {
    kind: Option<String>,
    b_scale: Option<f64>,
    amplitude: Option<f64>,
    seed: Option<u64>,
    k_min: Option<u32>,
    k_max: Option<u32>,
    mode_k1: Option<i32>,
    mode_k2: Option<i32>,
    target: Option<String>,
    path: Option<PathBuf>,
}

pub fn parse_file(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    let mut ic = IcDraft::default();
    let mut delta_spec: Option<String> = None;
    let mut scheme = Scheme::IfRk4;
    let mut cfl = 0.5f64;
    let mut dt_max = 0.01f64;
    let mut t_end = 1.0f64;
    let mut nu = 0.0f64;
    let mut alpha = 0.0f64;
    let mut kappa = 1.0f64;
    let mut beta = 1.25f64;
    let mut sweep: Option<SweepConfig> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(ConfigError::Syntax {
                    line: lineno,
                    what: format!("malformed section header '{line}'"),
                });
            };
            section = name.trim().to_string();
            match section.as_str() {
                "grid" | "physics" | "ic" | "stepper" | "diagnostics" | "output" | "sweep" => {}
                _ => {
                    return Err(ConfigError::UnknownSection {
                        line: lineno,
                        section,
                    })
                }
            }
            if section == "sweep" && sweep.is_none() {
                sweep = Some(SweepConfig {
                    alphas: vec![],
                    betas: vec![],
                    ns: vec![],
                    workers: None,
                });
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: lineno,
                what: format!("expected 'key = value', got '{line}'"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let bad = |expected: &'static str| ConfigError::BadValue {
            section: section.clone(),
            key: key.to_string(),
            value: value.to_string(),
            expected,
        };
        let parse_f64 = |v: &str| v.parse::<f64>().map_err(|_| bad("a number"));
        let parse_f64_list = |v: &str| -> Result<Vec<f64>, ConfigError> {
            v.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| bad("a comma-separated number list"))
                })
                .collect()
        };
        match (section.as_str(), key) {
            ("grid", "n") => cfg.grid_n = value.parse().map_err(|_| bad("a positive integer"))?,
            ("grid", "box_length") => cfg.box_length = parse_f64(value)?,
            ("physics", "nu") => nu = parse_f64(value)?,
            ("physics", "alpha") => alpha = parse_f64(value)?,
            ("physics", "kappa") => kappa = parse_f64(value)?,
            ("physics", "beta") => beta = parse_f64(value)?,
            ("ic", "kind") => ic.kind = Some(value.to_string()),
            ("ic", "b_scale") => ic.b_scale = Some(parse_f64(value)?),
            ("ic", "amplitude") => ic.amplitude = Some(parse_f64(value)?),
            ("ic", "seed") => {
                ic.seed = Some(value.parse().map_err(|_| bad("an unsigned integer"))?)
            }
            ("ic", "k_min") => {
                ic.k_min = Some(value.parse().map_err(|_| bad("an unsigned integer"))?)
            }
            ("ic", "k_max") => {
                ic.k_max = Some(value.parse().map_err(|_| bad("an unsigned integer"))?)
            }
            ("ic", "mode_k1") => ic.mode_k1 = Some(value.parse().map_err(|_| bad("an integer"))?),
            ("ic", "mode_k2") => ic.mode_k2 = Some(value.parse().map_err(|_| bad("an integer"))?),
            ("ic", "target") => ic.target = Some(value.to_string()),
            ("ic", "path") => ic.path = Some(PathBuf::from(value)),
            ("stepper", "scheme") => {
                scheme = match value {
                    "if_rk4" => Scheme::IfRk4,
                    "imex_euler" => Scheme::ImexEuler,
                    _ => return Err(bad("'if_rk4' or 'imex_euler'")),
                }
            }
            ("stepper", "cfl") => cfl = parse_f64(value)?,
            ("stepper", "dt_max") => dt_max = parse_f64(value)?,
            ("stepper", "t_end") => t_end = parse_f64(value)?,
            ("diagnostics", "cadence") => {
                let c = parse_f64(value)?;
                cfg.diagnostics.cadence = if c > 0.0 { Some(c) } else { None };
            }
            ("diagnostics", "lp_exponents") => {
                cfg.diagnostics.lp_exponents = parse_f64_list(value)?
            }
            ("diagnostics", "delta") => delta_spec = Some(value.to_string()),
            ("diagnostics", "bkm_slope_threshold") => {
                cfg.diagnostics.bkm_slope_threshold = parse_f64(value)?
            }
            ("diagnostics", "bkm_tail_threshold") => {
                cfg.diagnostics.bkm_tail_threshold = parse_f64(value)?
            }
            ("diagnostics", "transient_fraction") => {
                cfg.diagnostics.transient_fraction = parse_f64(value)?
            }
            ("output", "dir") => cfg.output.dir = PathBuf::from(value),
            ("output", "checkpoint_interval") => cfg.output.checkpoint_interval = parse_f64(value)?,
            ("sweep", "alpha") => sweep.as_mut().unwrap().alphas = parse_f64_list(value)?,
            ("sweep", "beta") => sweep.as_mut().unwrap().betas = parse_f64_list(value)?,
            ("sweep", "n") => {
                sweep.as_mut().unwrap().ns = value
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| bad("a comma-separated integer list"))
                    })
                    .collect::<Result<_, _>>()?;
            }
            ("sweep", "workers") => {
                sweep.as_mut().unwrap().workers =
                    Some(value.parse().map_err(|_| bad("a positive integer"))?)
            }
            ("", k) => {
                return Err(ConfigError::Syntax {
                    line: lineno,
                    what: format!("key '{k}' outside any [section]"),
                })
            }
            (s, _) => {
                return Err(ConfigError::UnknownKey {
                    line: lineno,
                    section: s.to_string(),
                    key: key.to_string(),
                })
            }
        }
    }

    cfg.physics = PhysicsParams::new(nu, alpha, kappa, beta).map_err(|e| ConfigError::Invalid {
        what: e.to_string(),
    })?;
    cfg.stepper =
        StepperConfig::new(scheme, cfl, dt_max, t_end).map_err(|e| ConfigError::Invalid {
            what: e.to_string(),
        })?;
    cfg.diagnostics.delta = match delta_spec.as_deref() {
        None | Some("off") => None,
        Some("auto") => DiagnosticsConfig::default_delta(beta),
        Some(v) => Some(v.parse::<f64>().map_err(|_| ConfigError::BadValue {
            section: "diagnostics".into(),
            key: "delta".into(),
            value: v.to_string(),
            expected: "'off', 'auto', or a number",
        })?),
    };
    cfg.ic = build_ic(&ic)?;
    cfg.sweep = sweep;
    validate(&cfg)?;
    Ok(cfg)
}

fn build_ic(draft: &IcDraft) -> Result<IcConfig, ConfigError> {
    let kind = draft.kind.as_deref().unwrap_or("orszag_tang");
    let ic = match kind {
        "orszag_tang" => IcConfig::Synthetic(InitialCondition::OrszagTang {
            b_scale: draft.b_scale.unwrap_or(1.0),
        }),
        "random_bandlimited" => IcConfig::Synthetic(InitialCondition::RandomBandlimited {
            amplitude: draft.amplitude.unwrap_or(1.0),
            seed: draft.seed.unwrap_or(0),
            k_min: draft.k_min.unwrap_or(1),
            k_max: draft.k_max.unwrap_or(4),
        }),
        "single_mode" => {
            let target = match draft.target.as_deref().unwrap_or("both") {
                "velocity" => ModeTarget::Velocity,
                "magnetic" => ModeTarget::Magnetic,
                "both" => ModeTarget::Both,
                other => {
                    return Err(ConfigError::BadValue {
                        section: "ic".into(),
                        key: "target".into(),
                        value: other.to_string(),
                        expected: "'velocity', 'magnetic', or 'both'",
                    })
                }
            };
            IcConfig::Synthetic(InitialCondition::SingleMode {
                k: (draft.mode_k1.unwrap_or(0), draft.mode_k2.unwrap_or(1)),
                amplitude: draft.amplitude.unwrap_or(1.0),
                target,
            })
        }
        "from_file" => {
            let Some(path) = draft.path.clone() else {
                return Err(ConfigError::Invalid {
                    what: "[ic] kind = from_file requires 'path'".into(),
                });
            };
            IcConfig::FromFile { path }
        }
        other => {
            return Err(ConfigError::BadValue {
                section: "ic".into(),
                key: "kind".into(),
                value: other.to_string(),
                expected: "'orszag_tang', 'random_bandlimited', 'single_mode', or 'from_file'",
            })
        }
    };
    Ok(ic)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if cfg.grid_n < 8 || !cfg.grid_n.is_power_of_two() {
        return Err(ConfigError::Invalid {
            what: format!("[grid] n = {} must be a power of two >= 8", cfg.grid_n),
        });
    }
    if !(cfg.box_length > 0.0 && cfg.box_length.is_finite()) {
        return Err(ConfigError::Invalid {
            what: format!("[grid] box_length = {} must be positive", cfg.box_length),
        });
    }
    let ci = cfg.output.checkpoint_interval;
    if ci < 0.0 || !ci.is_finite() {
        return Err(ConfigError::Invalid {
            what: format!("[output] checkpoint_interval = {ci} must be nonnegative"),
        });
    }
    if ci > 0.0 {
        match cfg.diagnostics.cadence {
            Some(c) => {
                let ratio = ci / c;
                if (ratio - ratio.round()).abs() > 1e-9 {
                    return Err(ConfigError::Invalid {
                        what: format!(
                            "[output] checkpoint_interval = {ci} must be a multiple of [diagnostics] cadence = {c}"
                        ),
                    });
                }
            }
            None => {
                return Err(ConfigError::Invalid {
                    what:
                        "[output] checkpoint_interval > 0 requires a positive [diagnostics] cadence"
                            .into(),
                })
            }
        }
    }
    if let Some(sweep) = &cfg.sweep {
        let cells = sweep.alphas.len().max(1) * sweep.betas.len().max(1) * sweep.ns.len().max(1);
        if cells > 200 {
            return Err(ConfigError::Invalid {
                what: format!("sweep grid has {cells} cells, limit is 200"),
            });
        }
        for n in &sweep.ns {
            if *n < 8 || !n.is_power_of_two() {
                return Err(ConfigError::Invalid {
                    what: format!("[sweep] n entry {n} must be a power of two >= 8"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample run
[grid]
n = 64
box_length = 6.283185307179586

[physics]
nu = 0.0
alpha = 0.0
kappa = 1.0
beta = 1.25

[ic]
kind = orszag_tang
b_scale = 0.5

[stepper]
scheme = if_rk4
cfl = 0.4
dt_max = 0.005
t_end = 2.0

[diagnostics]
cadence = 0.05
lp_exponents = 4,8
delta = auto

[output]
dir = /tmp/gmhd-test-out
checkpoint_interval = 0.5
";

    #[test]
    fn parses_sample() {
        let cfg = parse_str(SAMPLE).unwrap();
        assert_eq!(cfg.grid_n, 64);
        assert_eq!(cfg.physics.beta, 1.25);
        assert_eq!(cfg.stepper.t_end, 2.0);
        assert_eq!(cfg.diagnostics.cadence, Some(0.05));
        assert_eq!(cfg.diagnostics.delta, Some(0.25));
        match &cfg.ic {
            IcConfig::Synthetic(InitialCondition::OrszagTang { b_scale }) => {
                assert_eq!(*b_scale, 0.5)
            }
            other => panic!("wrong ic {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = "[grid]\nn = 64\nresolution = 4\n";
        match parse_str(text) {
            Err(ConfigError::UnknownKey { key, section, .. }) => {
                assert_eq!(key, "resolution");
                assert_eq!(section, "grid");
            }
            other => panic!("expected unknown-key error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_section_is_an_error() {
        assert!(matches!(
            parse_str("[grud]\nn = 64\n"),
            Err(ConfigError::UnknownSection { .. })
        ));
    }

    #[test]
    fn bad_values_name_the_key() {
        match parse_str("[stepper]\ncfl = huge\n") {
            Err(ConfigError::BadValue { key, .. }) => assert_eq!(key, "cfl"),
            other => panic!("expected bad-value error, got {other:?}"),
        }
        assert!(parse_str("[stepper]\ncfl = 2.0\n").is_err()); // out of range
    }

    #[test]
    fn checkpoint_interval_must_align_with_cadence() {
        let text = "[diagnostics]\ncadence = 0.3\n[output]\ncheckpoint_interval = 0.5\n";
        assert!(matches!(parse_str(text), Err(ConfigError::Invalid { .. })));
        let ok = "[diagnostics]\ncadence = 0.25\n[output]\ncheckpoint_interval = 0.5\n";
        assert!(parse_str(ok).is_ok());
    }

    #[test]
    fn sweep_cell_limit() {
        let mut text = String::from("[sweep]\nalpha = ");
        let alphas: Vec<String> = (0..30).map(|i| format!("0.{i:02}")).collect();
        text.push_str(&alphas.join(","));
        text.push_str("\nbeta = 0.5,1.0,1.5,2.0,2.5,3.0,3.5\nn = 8\n");
        assert!(matches!(parse_str(&text), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn from_file_requires_path() {
        assert!(parse_str("[ic]\nkind = from_file\n").is_err());
        let cfg = parse_str("[ic]\nkind = from_file\npath = chk.bin\n").unwrap();
        assert!(matches!(cfg.ic, IcConfig::FromFile { .. }));
    }
}
