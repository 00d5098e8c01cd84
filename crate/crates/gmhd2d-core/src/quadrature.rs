//! Quadrature for the fractional-heat-kernel integrals.
//!
//! The workhorse is the radial (Hankel-type) integral
//!
//!   R(r) = ∫₀^∞ s^p e^{−s^{2β}} J_m(rs) ds,
//!
//! whose integrand oscillates on the scale π/r. Naive quadrature dies on
//! that oscillation, so the domain is split at (approximate) Bessel zeros
//! and each lobe is integrated adaptively.

use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureError {
    /// Adaptive refinement hit its depth cap before reaching the tolerance.
    NonConvergent { detail: &'static str },
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureError::NonConvergent { detail } => {
                write!(f, "quadrature failed to converge: {detail}")
            }
        }
    }
}

impl core::error::Error for QuadratureError {}

/// Bessel function of the first kind, integer order m ≥ 0.
pub fn bessel_jn(m: u32, x: f64) -> f64 {
    match m {
        0 => libm::j0(x),
        1 => libm::j1(x),
        _ => libm::jn(m as i32, x),
    }
}

/// McMahon estimate of the k-th positive zero of J_m (k ≥ 1). Used only to
/// place segment boundaries, so first-order accuracy is plenty.
fn bessel_zero_estimate(m: u32, k: u32) -> f64 {
    let b = (k as f64 + 0.5 * m as f64 - 0.25) * core::f64::consts::PI;
    let mu = 4.0 * (m as f64) * (m as f64);
    b - (mu - 1.0) / (8.0 * b)
}

/// Adaptive Simpson on [a, b] with absolute tolerance.
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64, QuadratureError> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, QuadratureError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(QuadratureError::NonConvergent {
                detail: "adaptive Simpson depth cap",
            });
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

/// ∫₀^∞ s^p e^{−s^{2β}} ds = Γ((p+1)/(2β)) / (2β) — the envelope mass, used
/// both as the tolerance anchor and as the r = 0 closed form (m = 0).
pub fn envelope_mass(beta: f64, p: f64) -> f64 {
    libm::tgamma((p + 1.0) / (2.0 * beta)) / (2.0 * beta)
}

/// Upper integration limit: beyond it the envelope s^p e^{−s^{2β}} is below
/// 1e−18 of its peak.
fn envelope_cutoff(beta: f64, p: f64) -> f64 {
    let envelope = |s: f64| libm::pow(s, p) * libm::exp(-libm::pow(s, 2.0 * beta));
    // Peak of the envelope at s* = (p/(2β))^{1/(2β)} (s* = tiny for p = 0).
    let s_star = if p > 0.0 {
        libm::pow(p / (2.0 * beta), 1.0 / (2.0 * beta))
    } else {
        0.0
    };
    let peak = if p > 0.0 { envelope(s_star) } else { 1.0 };
    let mut s = s_star.max(1.0) + libm::pow(41.5, 1.0 / (2.0 * beta));
    while envelope(s) > 1e-18 * peak {
        s *= 1.25;
    }
    s
}

/// R(r) = ∫₀^∞ s^p e^{−s^{2β}} J_m(rs) ds, split at Bessel-zero estimates so
/// every adaptive panel sees at most one oscillation lobe.
///
/// The absolute tolerance is `rel_tol` × the envelope mass, so values near
/// zero (deep kernel tails, heavy cancellation) are resolved relative to the
/// natural scale of the integrand rather than of the result.
pub fn hankel_fractional_integral(
    beta: f64,
    p: f64,
    m: u32,
    r: f64,
    rel_tol: f64,
) -> Result<f64, QuadratureError> {
    debug_assert!(beta > 0.0 && p >= 0.0 && r >= 0.0);
    let s_max = envelope_cutoff(beta, p);
    let f = |s: f64| libm::pow(s, p) * libm::exp(-libm::pow(s, 2.0 * beta)) * bessel_jn(m, r * s);
    let scale = envelope_mass(beta, p).abs().max(1e-300);
    let tol_total = rel_tol * scale;

    if r * s_max <= core::f64::consts::PI {
        return adaptive_simpson(&f, 0.0, s_max, tol_total, 40);
    }
    // Segment boundaries at J_m zero estimates.
    let mut cuts: Vec<f64> = Vec::new();
    cuts.push(0.0);
    let mut k = 1u32;
    loop {
        let z = bessel_zero_estimate(m, k) / r;
        if z >= s_max {
            break;
        }
        cuts.push(z);
        k += 1;
        if k > 20_000_000 {
            return Err(QuadratureError::NonConvergent {
                detail: "segment count overflow",
            });
        }
    }
    cuts.push(s_max);
    let n_seg = cuts.len() - 1;
    let tol_seg = tol_total / n_seg as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive_simpson(&f, w[0], w[1], tol_seg, 24)?;
    }
    Ok(total)
}

/// Composite Simpson weights on [a, b] with `panels` panels (2·panels+1
/// nodes). Returns (node, weight) pairs.
pub fn simpson_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (a + h * i as f64, w * h / 3.0)
        })
        .collect()
}

/// Trapezoid weights on [a, b] with `panels` panels.
pub fn trapezoid_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..=panels)
        .map(|i| {
            let w = if i == 0 || i == panels { 0.5 } else { 1.0 };
            (a + h * i as f64, w * h)
        })
        .collect()
}
