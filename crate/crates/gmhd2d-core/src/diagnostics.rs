//! Norm diagnostics: every quantity the regularity analysis tracks,
//! recorded as a time series over a run.
//!
//! Per record: energies ‖u‖², ‖b‖², the L² norms of ω and j, configurable
//! L^p norms of ω, sup norms of ω, j and ∇j, and the homogeneous Sobolev
//! norms ‖Λ^s j‖ on the set s ∈ {β−1, β, 2β−1} (for β > 1; just {β}
//! otherwise), optionally extended by s = 1+δ. Time integrals — the
//! dissipation budget, ∫‖Λ^s j‖², ∫‖∇j‖²_∞ and the BKM integral
//! ∫(‖ω‖_∞+‖j‖_∞) — accumulate by the trapezoid rule at record times.

use crate::dynamics::PhysicsParams;
use crate::fields::FlowState;
use crate::spectral::{inverse_pair, Axis, PhysicalField};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
#[cfg_attr(test, allow(unused_imports))] // shadowed by std inherent methods under cfg(test)
use num_traits::Float;

pub use crate::spectral::{l2_norm, sobolev_norm};

/// Grid L^p norm ((L/n)² Σ|f|^p)^{1/p} for p ∈ [1, ∞).
pub fn lp_norm(f: &PhysicalField, p: f64) -> f64 {
    assert!(
        p >= 1.0 && p.is_finite(),
        "lp_norm requires p in [1, inf), got {p}"
    );
    let h = f.grid().spacing();
    if p == 2.0 {
        let sum: f64 = f.values().iter().map(|v| v * v).sum();
        return (h * h * sum).sqrt();
    }
    let sum: f64 = f.values().iter().map(|v| libm::pow(v.abs(), p)).sum();
    libm::pow(h * h * sum, 1.0 / p)
}

/// Grid sup norm max |f|.
pub fn linf_norm(f: &PhysicalField) -> f64 {
    f.linf()
}

/// Recording configuration. `cadence = None` records after every step.
#[derive(Debug, Clone)]
pub struct DiagnosticsConfig {
    pub cadence: Option<f64>,
    /// L^p exponents recorded for ω.
    pub lp_exponents: Vec<f64>,
    /// Extra Sobolev exponent s = 1+δ for j when set.
    pub delta: Option<f64>,
    /// Relative slope over the last third of the run above which the
    /// verdict is `Growing`.
    pub bkm_slope_threshold: f64,
    /// `Growing` when the last-third accumulation rate of ∫‖∇j‖²_∞ exceeds
    /// this fraction of the run-average rate (the integral shows no sign of
    /// converging by the horizon).
    pub bkm_tail_threshold: f64,
    /// Fraction of the run treated as the initial transient by
    /// [`regularity_quantities_bounded`].
    pub transient_fraction: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            cadence: None,
            lp_exponents: alloc::vec![4.0, 8.0],
            delta: None,
            bkm_slope_threshold: 0.05,
            bkm_tail_threshold: 0.15,
            transient_fraction: 1.0 / 3.0,
        }
    }
}

impl DiagnosticsConfig {
    /// Default Step-2 exponent δ = min{2β−2, 0.5}/2, defined for β > 1.
    pub fn default_delta(beta: f64) -> Option<f64> {
        let cap = (2.0 * beta - 2.0).min(0.5);
        if cap > 0.0 {
            Some(0.5 * cap)
        } else {
            None
        }
    }
}

/// Trapezoid accumulator state; lives in checkpoints so a restarted run
/// reproduces the uninterrupted series bit-for-bit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiagAccumulators {
    pub int_sobolev_j_sq_beta: f64,
    pub int_sobolev_j_sq_beta_r: f64,
    pub int_linf_grad_j_sq: f64,
    pub bkm_integral: f64,
    pub int_diss_u: f64,
    pub int_diss_b: f64,
    pub prev_sobolev_j_sq_beta: f64,
    pub prev_sobolev_j_sq_beta_r: f64,
    pub prev_linf_grad_j_sq: f64,
    pub prev_bkm_integrand: f64,
    pub prev_diss_u: f64,
    pub prev_diss_b: f64,
}

impl DiagAccumulators {
    pub const COUNT: usize = 12;

    pub fn to_array(self) -> [f64; Self::COUNT] {
        [
            self.int_sobolev_j_sq_beta,
            self.int_sobolev_j_sq_beta_r,
            self.int_linf_grad_j_sq,
            self.bkm_integral,
            self.int_diss_u,
            self.int_diss_b,
            self.prev_sobolev_j_sq_beta,
            self.prev_sobolev_j_sq_beta_r,
            self.prev_linf_grad_j_sq,
            self.prev_bkm_integrand,
            self.prev_diss_u,
            self.prev_diss_b,
        ]
    }

    pub fn from_array(a: [f64; Self::COUNT]) -> Self {
        Self {
            int_sobolev_j_sq_beta: a[0],
            int_sobolev_j_sq_beta_r: a[1],
            int_linf_grad_j_sq: a[2],
            bkm_integral: a[3],
            int_diss_u: a[4],
            int_diss_b: a[5],
            prev_sobolev_j_sq_beta: a[6],
            prev_sobolev_j_sq_beta_r: a[7],
            prev_linf_grad_j_sq: a[8],
            prev_bkm_integrand: a[9],
            prev_diss_u: a[10],
            prev_diss_b: a[11],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticsError {
    /// Record times must strictly increase.
    NonMonotoneTime { last: f64, new: f64 },
    /// A non-finite value was measured; the marker row has been written.
    NonFinite { time: f64 },
}

impl fmt::Display for DiagnosticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosticsError::NonMonotoneTime { last, new } => {
                write!(
                    f,
                    "record time {new} does not exceed the last recorded time {last}"
                )
            }
            DiagnosticsError::NonFinite { time } => {
                write!(
                    f,
                    "non-finite diagnostics at t = {time} (blow-up marker written)"
                )
            }
        }
    }
}

impl core::error::Error for DiagnosticsError {}

/// Column-name rendering of an exponent: 12 significant decimals, trailing
/// zeros trimmed, so float arithmetic like β−1 yields tidy names.
pub fn format_exponent(x: f64) -> String {
    let mut s = format!("{x:.12}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Time-stamped diagnostic records with a fixed column schema.
#[derive(Debug, Clone)]
pub struct NormSeries {
    columns: Vec<String>,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
    /// Row index of the terminal blow-up marker, if any.
    blowup_row: Option<usize>,
    /// Sobolev exponents recorded for j, in column order.
    sobolev_exponents: Vec<f64>,
    lp_exponents: Vec<f64>,
    acc: DiagAccumulators,
    beta: f64,
    has_beta_r: bool,
}

impl NormSeries {
    pub fn new(params: &PhysicsParams, config: &DiagnosticsConfig) -> Self {
        Self::with_accumulators(params, config, DiagAccumulators::default())
    }

    /// Resume a series with accumulator state restored from a checkpoint.
    pub fn with_accumulators(
        params: &PhysicsParams,
        config: &DiagnosticsConfig,
        acc: DiagAccumulators,
    ) -> Self {
        let beta = params.beta;
        let has_beta_r = beta > 1.0;
        let mut sobolev_exponents = Vec::new();
        let mut sobolev_names: Vec<String> = Vec::new();
        let push_exponent = |s: f64, exps: &mut Vec<f64>, names: &mut Vec<String>| {
            let name = format_exponent(s);
            if !names.contains(&name) {
                exps.push(s);
                names.push(name);
            }
        };
        if has_beta_r {
            push_exponent(beta - 1.0, &mut sobolev_exponents, &mut sobolev_names);
            push_exponent(beta, &mut sobolev_exponents, &mut sobolev_names);
            push_exponent(2.0 * beta - 1.0, &mut sobolev_exponents, &mut sobolev_names);
        } else {
            push_exponent(beta, &mut sobolev_exponents, &mut sobolev_names);
        }
        if let Some(delta) = config.delta {
            push_exponent(1.0 + delta, &mut sobolev_exponents, &mut sobolev_names);
        }
        let mut columns = alloc::vec![
            String::from("time"),
            String::from("energy_u"),
            String::from("energy_b"),
            String::from("l2_omega"),
            String::from("l2_j"),
        ];
        for p in &config.lp_exponents {
            columns.push(format!("lp_omega_{}", format_exponent(*p)));
        }
        columns.push(String::from("linf_omega"));
        columns.push(String::from("linf_j"));
        for name in &sobolev_names {
            columns.push(format!("sobolev_j_{name}"));
        }
        columns.push(String::from("linf_grad_j"));
        columns.push(format!("int_sobolev_j_sq_{}", format_exponent(beta)));
        if has_beta_r {
            columns.push(format!(
                "int_sobolev_j_sq_{}",
                format_exponent(2.0 * beta - 1.0)
            ));
        }
        columns.push(String::from("int_linf_grad_j_sq"));
        columns.push(String::from("bkm_integral"));
        columns.push(String::from("int_diss_u"));
        columns.push(String::from("int_diss_b"));
        columns.push(String::from("blowup"));
        Self {
            columns,
            times: Vec::new(),
            rows: Vec::new(),
            blowup_row: None,
            sobolev_exponents,
            lp_exponents: config.lp_exponents.clone(),
            acc,
            beta,
            has_beta_r,
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn blowup_row(&self) -> Option<usize> {
        self.blowup_row
    }

    pub fn accumulators(&self) -> DiagAccumulators {
        self.acc
    }

    /// Value of a named column in a given row.
    pub fn get(&self, row: usize, name: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c == name)?;
        self.rows.get(row).map(|r| r[col])
    }

    pub fn column_values(&self, name: &str) -> Option<Vec<f64>> {
        let col = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[col]).collect())
    }
}

/// Append one record for `state`. Accumulated integrals advance by the
/// trapezoid rule from the previous record. Non-finite measurements are
/// written with the blow-up marker and surfaced as an error.
pub fn record(
    state: &FlowState,
    params: &PhysicsParams,
    series: &mut NormSeries,
) -> Result<(), DiagnosticsError> {
    let t = state.time();
    if let Some(&last) = series.times.last() {
        if t <= last {
            return Err(DiagnosticsError::NonMonotoneTime { last, new: t });
        }
    }
    let grid = state.grid();
    let n = grid.n();
    let l = grid.box_length();
    let inv_l2 = 1.0 / (l * l);

    // Spectral sums: energies, L² norms, Sobolev norms, dissipation integrands.
    // |û|² = |ω̂|²/|ξ|² and |b̂|² = |ĵ|²/|ξ|² under Biot–Savart.
    let mut energy_u = 0.0;
    let mut energy_b = 0.0;
    let mut l2w_sq = 0.0;
    let mut l2j_sq = 0.0;
    let mut diss_u = 0.0;
    let mut diss_b = 0.0;
    let mut sob_sums = alloc::vec![0.0f64; series.sobolev_exponents.len()];
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = grid.idx(i1, i2);
            let q = grid.xi_norm_sq(i1, i2);
            let w2 = state.omega_hat().coeffs()[idx].norm_sqr();
            let j2 = state.j_hat().coeffs()[idx].norm_sqr();
            l2w_sq += w2;
            l2j_sq += j2;
            if q > 0.0 {
                energy_u += w2 / q;
                energy_b += j2 / q;
                if params.nu > 0.0 {
                    diss_u += libm::pow(q, params.alpha - 1.0) * w2;
                }
                if params.kappa > 0.0 {
                    diss_b += libm::pow(q, params.beta - 1.0) * j2;
                }
                for (sum, &s) in sob_sums.iter_mut().zip(&series.sobolev_exponents) {
                    *sum += libm::pow(q, s) * j2;
                }
            }
        }
    }
    energy_u *= inv_l2;
    energy_b *= inv_l2;
    let l2_omega = (l2w_sq * inv_l2).sqrt();
    let l2_j = (l2j_sq * inv_l2).sqrt();
    let diss_u = params.nu * diss_u * inv_l2;
    let diss_b = params.kappa * diss_b * inv_l2;
    let sobolev: Vec<f64> = sob_sums.iter().map(|s| (s * inv_l2).sqrt()).collect();

    // Physical-space maxima.
    let (omega_p, j_p) =
        inverse_pair(state.omega_hat(), state.j_hat()).expect("state fields share one grid");
    let (jx, jy) = inverse_pair(
        &state.j_hat().derivative(Axis::X1),
        &state.j_hat().derivative(Axis::X2),
    )
    .expect("state fields share one grid");
    let linf_omega = omega_p.linf();
    let linf_j = j_p.linf();
    let mut linf_grad_j = 0.0f64;
    for (a, b) in jx.values().iter().zip(jy.values()) {
        linf_grad_j = linf_grad_j.max(a.hypot(*b));
    }
    let lp_vals: Vec<f64> = series
        .lp_exponents
        .iter()
        .map(|&p| lp_norm(&omega_p, p))
        .collect();

    // Trapezoid advances (first record only seeds the integrand memory).
    let sob_beta_sq = if series.has_beta_r {
        sobolev[1] * sobolev[1]
    } else {
        sobolev[0] * sobolev[0]
    };
    let sob_beta_r_sq = if series.has_beta_r {
        sobolev[2] * sobolev[2]
    } else {
        0.0
    };
    let grad_j_sq = linf_grad_j * linf_grad_j;
    let bkm_integrand = linf_omega + linf_j;
    let acc = &mut series.acc;
    if let Some(&last) = series.times.last() {
        let half_dt = 0.5 * (t - last);
        acc.int_sobolev_j_sq_beta += half_dt * (acc.prev_sobolev_j_sq_beta + sob_beta_sq);
        acc.int_sobolev_j_sq_beta_r += half_dt * (acc.prev_sobolev_j_sq_beta_r + sob_beta_r_sq);
        acc.int_linf_grad_j_sq += half_dt * (acc.prev_linf_grad_j_sq + grad_j_sq);
        acc.bkm_integral += half_dt * (acc.prev_bkm_integrand + bkm_integrand);
        acc.int_diss_u += half_dt * (acc.prev_diss_u + diss_u);
        acc.int_diss_b += half_dt * (acc.prev_diss_b + diss_b);
    }
    acc.prev_sobolev_j_sq_beta = sob_beta_sq;
    acc.prev_sobolev_j_sq_beta_r = sob_beta_r_sq;
    acc.prev_linf_grad_j_sq = grad_j_sq;
    acc.prev_bkm_integrand = bkm_integrand;
    acc.prev_diss_u = diss_u;
    acc.prev_diss_b = diss_b;

    let mut row = Vec::with_capacity(series.columns.len());
    row.push(t);
    row.push(energy_u);
    row.push(energy_b);
    row.push(l2_omega);
    row.push(l2_j);
    row.extend_from_slice(&lp_vals);
    row.push(linf_omega);
    row.push(linf_j);
    row.extend_from_slice(&sobolev);
    row.push(linf_grad_j);
    row.push(acc.int_sobolev_j_sq_beta);
    if series.has_beta_r {
        row.push(acc.int_sobolev_j_sq_beta_r);
    }
    row.push(acc.int_linf_grad_j_sq);
    row.push(acc.bkm_integral);
    row.push(acc.int_diss_u);
    row.push(acc.int_diss_b);
    let finite = row.iter().all(|v| v.is_finite());
    row.push(if finite { 0.0 } else { 1.0 });
    series.times.push(t);
    series.rows.push(row);
    if !finite {
        series.blowup_row = Some(series.rows.len() - 1);
        return Err(DiagnosticsError::NonFinite { time: t });
    }
    Ok(())
}

/// Mark the latest row as terminal blow-up (used when the stepper detects
/// divergence between records).
pub fn mark_blowup(series: &mut NormSeries) {
    if let Some(last) = series.rows.last_mut() {
        *last.last_mut().unwrap() = 1.0;
        series.blowup_row = Some(series.rows.len() - 1);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Growing,
    BlownUp,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Bounded => write!(f, "bounded"),
            Verdict::Growing => write!(f, "growing"),
            Verdict::BlownUp => write!(f, "blown_up"),
        }
    }
}

/// Growth statistics over the trailing window of a run.
#[derive(Debug, Clone, Copy)]
pub struct GrowthProfile {
    /// Trailing-window start and end times.
    pub window: (f64, f64),
    /// Least-squares slope of ‖ω‖_∞+‖j‖_∞ over the window, relative:
    /// slope · window length / window mean.
    pub rel_slope_bkm: f64,
    /// Same statistic for ‖∇j‖²_∞.
    pub rel_slope_grad_j: f64,
    /// Mean of ‖∇j‖²_∞ over the last third divided by its mean over the
    /// first third.
    pub late_early_ratio: f64,
    /// Last-third accumulation rate of ∫‖∇j‖²_∞ over the run-average rate.
    /// Near 0 when the integral has converged by the horizon, O(1) when it
    /// is still accumulating linearly.
    pub tail_rate_grad_j: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BkmReport {
    /// ∫₀^T (‖ω‖_∞ + ‖j‖_∞) dt.
    pub bkm_integral: f64,
    /// ∫₀^T ‖∇j‖²_∞ dt.
    pub grad_j_sq_integral: f64,
    pub profile: GrowthProfile,
    pub verdict: Verdict,
}

fn rel_slope(ts: &[f64], vs: &[f64]) -> f64 {
    let n = ts.len();
    if n < 2 {
        return 0.0;
    }
    let tm: f64 = ts.iter().sum::<f64>() / n as f64;
    let vm: f64 = vs.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, v) in ts.iter().zip(vs) {
        num += (t - tm) * (v - vm);
        den += (t - tm) * (t - tm);
    }
    if den == 0.0 || vm.abs() == 0.0 {
        return 0.0;
    }
    let slope = num / den;
    slope * (ts[n - 1] - ts[0]) / vm.abs()
}

fn window_mean(vals: &[f64]) -> f64 {
    if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

/// BKM-style summary of a series: the two integrals, the growth profile over
/// the last third, and a verdict driven by the configured thresholds.
///
/// `Growing` means the trailing window shows either an upward trend in the
/// sup-norm integrands or an ∫‖∇j‖²_∞ still accumulating at a rate
/// commensurate with the run average — the integral gives no sign of
/// converging by the horizon. `Bounded` is the dissipation-controlled
/// alternative; `BlownUp` reflects a terminal non-finite (or runaway) state.
pub fn bkm_report(series: &NormSeries, config: &DiagnosticsConfig) -> BkmReport {
    let times = series.times();
    let bkm_integral = series.acc.bkm_integral;
    let grad_j_sq_integral = series.acc.int_linf_grad_j_sq;
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 0.0),
    };
    let w_start = t1 - (t1 - t0) / 3.0;
    let bkm_vals = series.column_values("linf_omega").unwrap_or_default();
    let linf_j = series.column_values("linf_j").unwrap_or_default();
    let grad_vals = series.column_values("linf_grad_j").unwrap_or_default();
    let int_grad = series
        .column_values("int_linf_grad_j_sq")
        .unwrap_or_default();
    let mut wt = Vec::new();
    let mut wq = Vec::new();
    let mut wg = Vec::new();
    let mut early_g = Vec::new();
    let mut int_at_window_start = 0.0;
    let mut seen_window = false;
    let e_end = t0 + (t1 - t0) / 3.0;
    for (i, &t) in times.iter().enumerate() {
        let q = bkm_vals[i] + linf_j[i];
        let g = grad_vals[i] * grad_vals[i];
        if !(q.is_finite() && g.is_finite()) {
            continue;
        }
        if t >= w_start {
            if !seen_window {
                int_at_window_start = int_grad[i];
                seen_window = true;
            }
            wt.push(t);
            wq.push(q);
            wg.push(g);
        }
        if t <= e_end {
            early_g.push(g);
        }
    }
    let rel_slope_bkm = rel_slope(&wt, &wq);
    let rel_slope_grad_j = rel_slope(&wt, &wg);
    let early = window_mean(&early_g);
    let late = window_mean(&wg);
    let late_early_ratio = if early > 0.0 {
        late / early
    } else if late > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    let tail_rate_grad_j = if seen_window && t1 > w_start && grad_j_sq_integral > 0.0 && t1 > t0 {
        let tail = (grad_j_sq_integral - int_at_window_start) / (t1 - w_start);
        let avg = grad_j_sq_integral / (t1 - t0);
        tail / avg
    } else {
        0.0
    };
    let profile = GrowthProfile {
        window: (w_start, t1),
        rel_slope_bkm,
        rel_slope_grad_j,
        late_early_ratio,
        tail_rate_grad_j,
    };
    let verdict = if series.blowup_row.is_some() {
        Verdict::BlownUp
    } else if rel_slope_bkm > config.bkm_slope_threshold
        || rel_slope_grad_j > config.bkm_slope_threshold
        || tail_rate_grad_j > config.bkm_tail_threshold
    {
        Verdict::Growing
    } else {
        Verdict::Bounded
    };
    BkmReport {
        bkm_integral,
        grad_j_sq_integral,
        profile,
        verdict,
    }
}

/// Empirical boundedness check on the tracked energy/Sobolev quantities
/// (the L² norms of ω and j, ‖Λ^{β−1}j‖, and the accumulated ∫‖Λ^s j‖²
/// integrals): every recorded
/// value stays below `factor` times its maximum over the initial transient
/// (the first `transient_fraction` of the run). Returns the worst ratio.
pub fn regularity_quantities_bounded(
    series: &NormSeries,
    config: &DiagnosticsConfig,
    factor: f64,
) -> (bool, f64) {
    let times = series.times();
    if times.len() < 3 {
        return (true, 0.0);
    }
    let t0 = times[0];
    let t1 = times[times.len() - 1];
    let t_cut = t0 + config.transient_fraction * (t1 - t0);
    let mut names: Vec<String> = alloc::vec![
        String::from("l2_omega"),
        String::from("l2_j"),
        format!("int_sobolev_j_sq_{}", format_exponent(series.beta)),
    ];
    if series.has_beta_r {
        names.push(format!("sobolev_j_{}", format_exponent(series.beta - 1.0)));
        names.push(format!(
            "int_sobolev_j_sq_{}",
            format_exponent(2.0 * series.beta - 1.0)
        ));
    }
    let mut worst = 0.0f64;
    for name in &names {
        let vals = series.column_values(name).expect("schema column");
        let mut transient_max = 0.0f64;
        for (i, &t) in times.iter().enumerate() {
            if t <= t_cut {
                transient_max = transient_max.max(vals[i].abs());
            }
        }
        if transient_max == 0.0 {
            transient_max = f64::MIN_POSITIVE;
        }
        for &v in &vals {
            worst = worst.max(v.abs() / transient_max);
        }
    }
    (worst <= factor, worst)
}
