//! Time integration with exact treatment of the fractional dissipation.
//!
//! The stiff terms −νΛ^{2α}ω and −κΛ^{2β}j are conjugated away by the
//! integrating factor e^{−c|ξ|^s t}, applied as a diagonal multiplier; the
//! remaining nonlinear terms advance with classical RK4 stages (Kassam &
//! Trefethen arrangement). With zero nonlinearity a step is exactly the
//! semigroup, so dissipation never limits the step size — the CFL bound
//! comes from advection alone.

use crate::diagnostics::{self, DiagAccumulators, DiagnosticsConfig, NormSeries};
use crate::dynamics::{vorticity_current_nonlinear, DynamicsError, PhysicsParams};
use crate::fields::{b_from_current, biot_savart, FieldsError, FlowState};
use crate::grid::Grid2D;
use crate::spectral::{inverse_pair, SpectralField};
use alloc::vec::Vec;
use core::fmt;
#[cfg_attr(test, allow(unused_imports))] // shadowed by std inherent methods under cfg(test)
use num_traits::Float;

/// ‖ω‖_∞ beyond which a run is declared blown up (distinguishes trackable
/// growth from numerical overflow).
pub const BLOWUP_LINF_OMEGA: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Integrating-factor RK4 (production scheme).
    IfRk4,
    /// Implicit-explicit Euler, first order — kept for bisecting
    /// integrator bugs.
    ImexEuler,
}

#[derive(Debug, Clone)]
pub struct StepperConfig {
    pub scheme: Scheme,
    /// CFL safety factor in (0, 1].
    pub cfl: f64,
    /// Hard cap on the step size.
    pub dt_max: f64,
    /// Final time (absolute).
    pub t_end: f64,
}

impl StepperConfig {
    pub fn new(scheme: Scheme, cfl: f64, dt_max: f64, t_end: f64) -> Result<Self, TimestepError> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(TimestepError::InvalidConfig {
                what: "cfl must lie in (0, 1]",
            });
        }
        if !(dt_max > 0.0 && dt_max.is_finite()) {
            return Err(TimestepError::InvalidConfig {
                what: "dt_max must be positive and finite",
            });
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(TimestepError::InvalidConfig {
                what: "t_end must be nonnegative and finite",
            });
        }
        Ok(Self {
            scheme,
            cfl,
            dt_max,
            t_end,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimestepError {
    NegativeDt {
        dt: f64,
    },
    NegativeCoefficient {
        c: f64,
    },
    InvalidConfig {
        what: &'static str,
    },
    /// Non-finite state or ‖ω‖_∞ past [`BLOWUP_LINF_OMEGA`]. The run layer
    /// attaches the partial diagnostics series.
    Blowup {
        time: f64,
    },
    Dynamics(DynamicsError),
}

impl fmt::Display for TimestepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimestepError::NegativeDt { dt } => {
                write!(f, "step size must be nonnegative, got {dt}")
            }
            TimestepError::NegativeCoefficient { c } => {
                write!(f, "propagator coefficient must be nonnegative, got {c}")
            }
            TimestepError::InvalidConfig { what } => write!(f, "invalid stepper config: {what}"),
            TimestepError::Blowup { time } => write!(f, "blow-up detected at t = {time}"),
            TimestepError::Dynamics(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TimestepError {}

impl From<DynamicsError> for TimestepError {
    fn from(e: DynamicsError) -> Self {
        TimestepError::Dynamics(e)
    }
}

impl From<FieldsError> for TimestepError {
    fn from(e: FieldsError) -> Self {
        TimestepError::Dynamics(DynamicsError::Fields(e))
    }
}

/// e^{−c Λ^s dt} as a diagonal multiplier table.
fn propagator_table(grid: &Grid2D, s: f64, c: f64, dt: f64) -> Vec<f64> {
    let n = grid.n();
    let mut table = Vec::with_capacity(n * n);
    for i1 in 0..n {
        for i2 in 0..n {
            let q = grid.xi_norm_sq(i1, i2);
            let lam = if q == 0.0 { 0.0 } else { libm::pow(q, 0.5 * s) };
            table.push(libm::exp(-c * lam * dt));
        }
    }
    table
}

fn apply_table(field: &mut SpectralField, table: &[f64]) {
    for (c, &m) in field.coeffs_mut().iter_mut().zip(table.iter()) {
        *c *= m;
    }
}

/// The dissipative semigroup e^{−cΛ^s dt} applied to a field. dt = 0 is the
/// identity; negative dt is rejected.
pub fn linear_propagator(
    field: &SpectralField,
    s: f64,
    c: f64,
    dt: f64,
) -> Result<SpectralField, TimestepError> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(TimestepError::NegativeDt { dt });
    }
    if c < 0.0 || !c.is_finite() {
        return Err(TimestepError::NegativeCoefficient { c });
    }
    let mut out = field.clone();
    apply_table(&mut out, &propagator_table(field.grid(), s, c, dt));
    Ok(out)
}

/// Advective CFL bound: dt = min(dt_max, cfl·h/max(‖u‖_∞, ‖b‖_∞, ε)).
/// Dissipation is integrated exactly, so it imposes no restriction.
pub fn choose_dt(
    state: &FlowState,
    _params: &PhysicsParams,
    config: &StepperConfig,
) -> Result<f64, TimestepError> {
    let (umax, bmax) = velocity_maxima(state)?;
    let h = state.grid().spacing();
    let v = umax.max(bmax).max(1e-12);
    Ok(config.dt_max.min(config.cfl * h / v))
}

/// (‖u‖_∞, ‖b‖_∞) of a state via Biot–Savart reconstruction.
pub fn velocity_maxima(state: &FlowState) -> Result<(f64, f64), TimestepError> {
    let (u1, u2) = biot_savart(state.omega_hat())?;
    let (b1, b2) = b_from_current(state.j_hat())?;
    let (u1p, u2p) = inverse_pair(&u1, &u2).expect("one grid");
    let (b1p, b2p) = inverse_pair(&b1, &b2).expect("one grid");
    let mut umax = 0.0f64;
    let mut bmax = 0.0f64;
    for i in 0..u1p.values().len() {
        umax = umax.max(u1p.values()[i].hypot(u2p.values()[i]));
        bmax = bmax.max(b1p.values()[i].hypot(b2p.values()[i]));
    }
    Ok((umax, bmax))
}

struct Propagators {
    omega_half: Option<Vec<f64>>,
    omega_full: Option<Vec<f64>>,
    j_half: Option<Vec<f64>>,
    j_full: Option<Vec<f64>>,
}

impl Propagators {
    fn build(grid: &Grid2D, params: &PhysicsParams, dt: f64) -> Self {
        let make = |c: f64, s: f64| -> (Option<Vec<f64>>, Option<Vec<f64>>) {
            if c > 0.0 {
                let half = propagator_table(grid, s, c, 0.5 * dt);
                let full = half.iter().map(|e| e * e).collect();
                (Some(half), Some(full))
            } else {
                (None, None)
            }
        };
        let (omega_half, omega_full) = make(params.nu, 2.0 * params.alpha);
        let (j_half, j_full) = make(params.kappa, 2.0 * params.beta);
        Self {
            omega_half,
            omega_full,
            j_half,
            j_full,
        }
    }
}

fn apply_opt(field: &mut SpectralField, table: &Option<Vec<f64>>) {
    if let Some(t) = table {
        apply_table(field, t);
    }
}

/// One integrating-factor RK4 step of the (ω, j) system.
fn step_if_rk4(
    state: &FlowState,
    params: &PhysicsParams,
    dt: f64,
) -> Result<FlowState, TimestepError> {
    let grid = state.grid().clone();
    let prop = Propagators::build(&grid, params, dt);
    let t = state.time();

    let (n1w, n1j) = vorticity_current_nonlinear(state)?;

    // Stage a: E_h (y + dt/2 N1).
    let mut wa = state.omega_hat().clone();
    wa.axpy(0.5 * dt, &n1w);
    apply_opt(&mut wa, &prop.omega_half);
    let mut ja = state.j_hat().clone();
    ja.axpy(0.5 * dt, &n1j);
    apply_opt(&mut ja, &prop.j_half);
    let (n2w, n2j) =
        vorticity_current_nonlinear(&FlowState::from_parts_unchecked(wa, ja, t + 0.5 * dt))?;

    // Stage b: E_h y + dt/2 N2.
    let mut wb = state.omega_hat().clone();
    apply_opt(&mut wb, &prop.omega_half);
    wb.axpy(0.5 * dt, &n2w);
    let mut jb = state.j_hat().clone();
    apply_opt(&mut jb, &prop.j_half);
    jb.axpy(0.5 * dt, &n2j);
    let (n3w, n3j) =
        vorticity_current_nonlinear(&FlowState::from_parts_unchecked(wb, jb, t + 0.5 * dt))?;

    // Stage c: E_full y + dt·E_h N3.
    let mut wc = state.omega_hat().clone();
    apply_opt(&mut wc, &prop.omega_full);
    let mut n3w_h = n3w.clone();
    apply_opt(&mut n3w_h, &prop.omega_half);
    wc.axpy(dt, &n3w_h);
    let mut jc = state.j_hat().clone();
    apply_opt(&mut jc, &prop.j_full);
    let mut n3j_h = n3j.clone();
    apply_opt(&mut n3j_h, &prop.j_half);
    jc.axpy(dt, &n3j_h);
    let (n4w, n4j) = vorticity_current_nonlinear(&FlowState::from_parts_unchecked(wc, jc, t + dt))?;

    // Combination: E_full y + dt/6 (E_full N1 + 2 E_h (N2 + N3) + N4).
    let sixth = dt / 6.0;
    let combine = |y0: &SpectralField,
                   n1: SpectralField,
                   n2: &SpectralField,
                   n3: &SpectralField,
                   n4: &SpectralField,
                   half: &Option<Vec<f64>>,
                   full: &Option<Vec<f64>>|
     -> SpectralField {
        let mut out = y0.clone();
        apply_opt(&mut out, full);
        let mut k1 = n1;
        apply_opt(&mut k1, full);
        out.axpy(sixth, &k1);
        let mut k23 = n2.clone();
        k23.axpy(1.0, n3);
        apply_opt(&mut k23, half);
        out.axpy(2.0 * sixth, &k23);
        out.axpy(sixth, n4);
        out
    };
    let w_new = combine(
        state.omega_hat(),
        n1w,
        &n2w,
        &n3w,
        &n4w,
        &prop.omega_half,
        &prop.omega_full,
    );
    let j_new = combine(
        state.j_hat(),
        n1j,
        &n2j,
        &n3j,
        &n4j,
        &prop.j_half,
        &prop.j_full,
    );
    Ok(FlowState::from_parts_unchecked(w_new, j_new, t + dt))
}

/// One implicit-explicit Euler step: explicit nonlinearity, implicit
/// dissipation via 1/(1 + dt·c|ξ|^s).
fn step_imex_euler(
    state: &FlowState,
    params: &PhysicsParams,
    dt: f64,
) -> Result<FlowState, TimestepError> {
    let grid = state.grid().clone();
    let n = grid.n();
    let (nw, nj) = vorticity_current_nonlinear(state)?;
    let mut w = state.omega_hat().clone();
    w.axpy(dt, &nw);
    let mut j = state.j_hat().clone();
    j.axpy(dt, &nj);
    for i1 in 0..n {
        for i2 in 0..n {
            let q = grid.xi_norm_sq(i1, i2);
            if q == 0.0 {
                continue;
            }
            let idx = grid.idx(i1, i2);
            if params.nu > 0.0 {
                w.coeffs_mut()[idx] /= 1.0 + dt * params.nu * libm::pow(q, params.alpha);
            }
            if params.kappa > 0.0 {
                j.coeffs_mut()[idx] /= 1.0 + dt * params.kappa * libm::pow(q, params.beta);
            }
        }
    }
    Ok(FlowState::from_parts_unchecked(w, j, state.time() + dt))
}

fn step_raw(
    state: &FlowState,
    params: &PhysicsParams,
    dt: f64,
    scheme: Scheme,
) -> Result<FlowState, TimestepError> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(TimestepError::NegativeDt { dt });
    }
    match scheme {
        Scheme::IfRk4 => step_if_rk4(state, params, dt),
        Scheme::ImexEuler => step_imex_euler(state, params, dt),
    }
}

/// Advance one step. The caller is responsible for dt respecting
/// [`choose_dt`]; a non-finite result is surfaced as [`TimestepError::Blowup`].
pub fn step(
    state: &FlowState,
    params: &PhysicsParams,
    dt: f64,
    scheme: Scheme,
) -> Result<FlowState, TimestepError> {
    let next = step_raw(state, params, dt, scheme)?;
    if next.has_non_finite() {
        return Err(TimestepError::Blowup { time: next.time() });
    }
    Ok(next)
}

/// Output of [`run`]: the diagnostic series and the final state.
#[derive(Debug)]
pub struct RunOutput {
    pub series: NormSeries,
    pub final_state: FlowState,
}

/// A failed run still carries its partial series (with the terminal blow-up
/// marker) — that partial record is the experiment's payload in the
/// fast-dissipation-starved regimes; the variant is deliberately heavy.
#[derive(Debug)]
#[allow(clippy::large_enum_variant)]
pub enum RunError {
    Blowup { time: f64, series: NormSeries },
    Timestep(TimestepError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Blowup { time, .. } => write!(f, "blow-up detected at t = {time}"),
            RunError::Timestep(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for RunError {}

/// Per-record callback (the CLI writes checkpoints from it).
pub type RecordHook<'a> = &'a mut dyn FnMut(&FlowState, &NormSeries);

/// Integrate from `initial` until `config.t_end`, recording diagnostics on
/// the cadence grid anchored at t = 0 (plus the initial time and t_end).
///
/// Steps land exactly on record boundaries: the step size is clipped and
/// the time is then assigned (not accumulated), so a run restarted from a
/// boundary checkpoint reproduces the remaining records bit-for-bit.
#[allow(clippy::result_large_err)]
pub fn run(
    initial: FlowState,
    params: &PhysicsParams,
    config: &StepperConfig,
    diag: &DiagnosticsConfig,
    accumulators: Option<DiagAccumulators>,
    mut on_record: Option<RecordHook<'_>>,
) -> Result<RunOutput, RunError> {
    let mut series = match accumulators {
        Some(acc) => NormSeries::with_accumulators(params, diag, acc),
        None => NormSeries::new(params, diag),
    };
    let mut state = initial;
    let t_end = config.t_end;
    let time_eps = 1e-12 * t_end.abs().max(1.0);

    let do_record = |state: &FlowState,
                     series: &mut NormSeries,
                     hook: &mut Option<RecordHook<'_>>|
     -> Result<(), RunError> {
        let res = diagnostics::record(state, params, series);
        if let Some(h) = hook.as_mut() {
            h(state, series);
        }
        match res {
            Ok(()) => Ok(()),
            Err(_) => Err(RunError::Blowup {
                time: state.time(),
                series: series.clone(),
            }),
        }
    };

    do_record(&state, &mut series, &mut on_record)?;

    while state.time() < t_end - time_eps {
        let target = match diag.cadence {
            Some(c) if c > 0.0 => next_boundary(state.time(), c).min(t_end),
            _ => t_end,
        };
        let dt_stab = choose_dt(&state, params, config).map_err(RunError::Timestep)?;
        let remaining = target - state.time();
        let (dt, landing) = if dt_stab >= remaining - time_eps {
            (remaining, Some(target))
        } else {
            (dt_stab, None)
        };
        state = step_raw(&state, params, dt, config.scheme).map_err(RunError::Timestep)?;
        if let Some(exact) = landing {
            state = state.with_time(exact);
        }

        // Blow-up checks: non-finite coefficients or a runaway sup norm.
        if state.has_non_finite() {
            let _ = do_record(&state, &mut series, &mut on_record);
            return Err(RunError::Blowup {
                time: state.time(),
                series,
            });
        }
        let record_now = landing.is_some() || diag.cadence.is_none();
        if record_now {
            do_record(&state, &mut series, &mut on_record)?;
            let idx = series.len() - 1;
            if series.get(idx, "linf_omega").unwrap_or(0.0) > BLOWUP_LINF_OMEGA {
                diagnostics::mark_blowup(&mut series);
                return Err(RunError::Blowup {
                    time: state.time(),
                    series,
                });
            }
        }
    }
    Ok(RunOutput {
        series,
        final_state: state,
    })
}

/// Smallest cadence boundary m·c strictly greater than t.
fn next_boundary(t: f64, cadence: f64) -> f64 {
    let mut m = libm::floor(t / cadence + 1e-9) + 1.0;
    let mut boundary = m * cadence;
    while boundary <= t {
        m += 1.0;
        boundary = m * cadence;
    }
    boundary
}
