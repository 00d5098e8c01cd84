//! Right-hand sides of the generalized MHD system, in both formulations.
//!
//! Primitive variables:
//!
//!   ∂_t u = P[−u·∇u + b·∇b] − ν Λ^{2α} u
//!   ∂_t b = −u·∇b + b·∇u − κ Λ^{2β} b
//!
//! with P the Leray projection (the pressure gradient never appears).
//! Vorticity–current variables:
//!
//!   ∂_t ω = −u·∇ω + b·∇j − ν Λ^{2α} ω
//!   ∂_t j = −u·∇j + b·∇ω + T(∇u, ∇b) − κ Λ^{2β} j
//!
//! where T(∇u,∇b) = 2 ∂₁b₁ (∂₁u₂ + ∂₂u₁) + 2 ∂₂u₂ (∂₁b₂ + ∂₂b₁) is the
//! stretching term produced by curling the induction equation. Nonlinear
//! products are evaluated pseudo-spectrally (physical-space products, then
//! the two-thirds dealias), so both formulations agree to round-off on
//! band-limited inputs — `formulation_consistency` measures exactly that.

use crate::fields::{b_from_current, biot_savart, scalar_curl, FieldsError, FlowState};
use crate::spectral::{
    forward_pair, forward_transform, inverse_pair, leray_project, Axis, PhysicalField,
    SpectralField,
};

use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
#[cfg_attr(test, allow(unused_imports))] // shadowed by std inherent methods under cfg(test)
use num_traits::Float;

/// Dissipation coefficients and exponents: ν Λ^{2α} on u, κ Λ^{2β} on b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub nu: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub beta: f64,
}

impl PhysicsParams {
    pub fn new(nu: f64, alpha: f64, kappa: f64, beta: f64) -> Result<Self, DynamicsError> {
        for (name, v) in [
            ("nu", nu),
            ("alpha", alpha),
            ("kappa", kappa),
            ("beta", beta),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DynamicsError::InvalidParam { name, value: v });
            }
        }
        Ok(Self {
            nu,
            alpha,
            kappa,
            beta,
        })
    }

    /// Magnetic diffusion only: ν = 0, κ = 1, β free.
    pub fn magnetic_diffusion_only(beta: f64) -> Result<Self, DynamicsError> {
        Self::new(0.0, 0.0, 1.0, beta)
    }

    /// Ideal (non-dissipative) preset ν = κ = 0.
    pub fn ideal() -> Self {
        Self {
            nu: 0.0,
            alpha: 0.0,
            kappa: 0.0,
            beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    InvalidParam {
        name: &'static str,
        value: f64,
    },
    /// Input velocity/magnetic pair is not divergence-free.
    NotDivergenceFree {
        rel: f64,
    },
    Fields(FieldsError),
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::InvalidParam { name, value } => {
                write!(
                    f,
                    "physics parameter {name} must be finite and nonnegative, got {value}"
                )
            }
            DynamicsError::NotDivergenceFree { rel } => {
                write!(
                    f,
                    "input field is not divergence-free (relative residual {rel:.3e})"
                )
            }
            DynamicsError::Fields(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<FieldsError> for DynamicsError {
    fn from(e: FieldsError) -> Self {
        DynamicsError::Fields(e)
    }
}

/// Relative spectral-divergence threshold for rejecting primitive inputs.
const DIV_FREE_TOL: f64 = 1e-8;

fn check_divergence_free(v1: &SpectralField, v2: &SpectralField) -> Result<(), DynamicsError> {
    let grid = v1.grid();
    let n = grid.n();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i1 in 0..n {
        let xi1 = grid.xi(i1);
        for i2 in 0..n {
            let idx = grid.idx(i1, i2);
            let xi2 = grid.xi(i2);
            let a = v1.coeffs()[idx];
            let b = v2.coeffs()[idx];
            let div = xi1 * a + xi2 * b;
            num = num.max(div.norm_sqr());
            den = den.max(grid.xi_norm_sq(i1, i2) * (a.norm_sqr() + b.norm_sqr()));
        }
    }
    if den == 0.0 {
        return Ok(());
    }
    let rel = (num / den).sqrt();
    if rel > DIV_FREE_TOL {
        return Err(DynamicsError::NotDivergenceFree { rel });
    }
    Ok(())
}

/// u·∇f sampled on the grid, from physical u and ∇f.
fn advect(
    u1: &PhysicalField,
    u2: &PhysicalField,
    f1: &PhysicalField,
    f2: &PhysicalField,
) -> Vec<f64> {
    u1.values()
        .iter()
        .zip(u2.values())
        .zip(f1.values().iter().zip(f2.values()))
        .map(|((a, b), (c, d))| a * c + b * d)
        .collect()
}

/// RHS of the primitive-variable system. Inputs must be divergence-free
/// (within 1e−8 relative) and dealiased; outputs are divergence-free and
/// mean-free by construction.
#[allow(clippy::type_complexity)]
pub fn primitive_rhs(
    u: (&SpectralField, &SpectralField),
    b: (&SpectralField, &SpectralField),
    params: &PhysicsParams,
) -> Result<
    (
        (SpectralField, SpectralField),
        (SpectralField, SpectralField),
    ),
    DynamicsError,
> {
    check_divergence_free(u.0, u.1)?;
    check_divergence_free(b.0, b.1)?;
    let grid = u.0.grid().clone();

    let (u1, u2) = inverse_pair(u.0, u.1).expect("grid mismatch");
    let (b1, b2) = inverse_pair(b.0, b.1).expect("grid mismatch");
    let (du11, du21) = inverse_pair(&u.0.derivative(Axis::X1), &u.1.derivative(Axis::X1)).unwrap();
    let (du12, du22) = inverse_pair(&u.0.derivative(Axis::X2), &u.1.derivative(Axis::X2)).unwrap();
    let (db11, db21) = inverse_pair(&b.0.derivative(Axis::X1), &b.1.derivative(Axis::X1)).unwrap();
    let (db12, db22) = inverse_pair(&b.0.derivative(Axis::X2), &b.1.derivative(Axis::X2)).unwrap();

    // Momentum nonlinearity −u·∇u + b·∇b, per component.
    let mut f1 = advect(&b1, &b2, &db11, &db12);
    let mut f2 = advect(&b1, &b2, &db21, &db22);
    let a1 = advect(&u1, &u2, &du11, &du12);
    let a2 = advect(&u1, &u2, &du21, &du22);
    for i in 0..f1.len() {
        f1[i] -= a1[i];
        f2[i] -= a2[i];
    }
    // Induction nonlinearity −u·∇b + b·∇u, per component.
    let mut g1 = advect(&b1, &b2, &du11, &du12);
    let mut g2 = advect(&b1, &b2, &du21, &du22);
    let c1 = advect(&u1, &u2, &db11, &db12);
    let c2 = advect(&u1, &u2, &db21, &db22);
    for i in 0..g1.len() {
        g1[i] -= c1[i];
        g2[i] -= c2[i];
    }

    let (mut fu1, mut fu2) = forward_pair(
        &PhysicalField::from_values(&grid, f1),
        &PhysicalField::from_values(&grid, f2),
    )
    .unwrap();
    let (mut gb1, mut gb2) = forward_pair(
        &PhysicalField::from_values(&grid, g1),
        &PhysicalField::from_values(&grid, g2),
    )
    .unwrap();
    fu1.dealias_in_place();
    fu2.dealias_in_place();
    gb1.dealias_in_place();
    gb2.dealias_in_place();

    let (mut du1, mut du2) = leray_project(&fu1, &fu2);

    // Dissipation.
    if params.nu > 0.0 {
        du1.axpy(
            -params.nu,
            &u.0.fractional_laplacian(2.0 * params.alpha)
                .expect("alpha >= 0"),
        );
        du2.axpy(
            -params.nu,
            &u.1.fractional_laplacian(2.0 * params.alpha)
                .expect("alpha >= 0"),
        );
    }
    if params.kappa > 0.0 {
        gb1.axpy(
            -params.kappa,
            &b.0.fractional_laplacian(2.0 * params.beta)
                .expect("beta >= 0"),
        );
        gb2.axpy(
            -params.kappa,
            &b.1.fractional_laplacian(2.0 * params.beta)
                .expect("beta >= 0"),
        );
    }

    for f in [&mut du1, &mut du2, &mut gb1, &mut gb2] {
        f.set_zero_mode(Complex64::default());
    }
    Ok(((du1, du2), (gb1, gb2)))
}

/// Magnetic RHS in divergence form: ∂_t b + κΛ^{2β} b = Σ_i ∂_i (b_i u − u_i b).
///
/// In 2D the nonlinearity collapses to ∇⊥w with w = b₁u₂ − u₁b₂; it must agree
/// with the advective form of [`primitive_rhs`] to round-off for
/// divergence-free inputs.
pub fn div_form_magnetic_rhs(
    u: (&SpectralField, &SpectralField),
    b: (&SpectralField, &SpectralField),
    params: &PhysicsParams,
) -> Result<(SpectralField, SpectralField), DynamicsError> {
    check_divergence_free(u.0, u.1)?;
    check_divergence_free(b.0, b.1)?;
    let grid = u.0.grid().clone();
    let (u1, u2) = inverse_pair(u.0, u.1).expect("grid mismatch");
    let (b1, b2) = inverse_pair(b.0, b.1).expect("grid mismatch");
    let w: Vec<f64> = b1
        .values()
        .iter()
        .zip(u2.values())
        .zip(u1.values().iter().zip(b2.values()))
        .map(|((bb1, uu2), (uu1, bb2))| bb1 * uu2 - uu1 * bb2)
        .collect();
    let mut w_hat = forward_transform(&PhysicalField::from_values(&grid, w))
        .expect("finite product of finite fields");
    w_hat.dealias_in_place();
    let (mut db1, mut db2) = w_hat.perp_gradient();
    if params.kappa > 0.0 {
        db1.axpy(
            -params.kappa,
            &b.0.fractional_laplacian(2.0 * params.beta)
                .expect("beta >= 0"),
        );
        db2.axpy(
            -params.kappa,
            &b.1.fractional_laplacian(2.0 * params.beta)
                .expect("beta >= 0"),
        );
    }
    db1.set_zero_mode(Complex64::default());
    db2.set_zero_mode(Complex64::default());
    Ok((db1, db2))
}

/// The stretching term T(∇u,∇b) = 2∂₁b₁(∂₁u₂ + ∂₂u₁) + 2∂₂u₂(∂₁b₂ + ∂₂b₁),
/// products in physical space, result dealiased.
pub fn stress_term(
    u: (&SpectralField, &SpectralField),
    b: (&SpectralField, &SpectralField),
) -> SpectralField {
    let grid = u.0.grid().clone();
    // Sums of derivatives are formed spectrally; four inverse transforms
    // pack into two.
    let d1b1 = b.0.derivative(Axis::X1);
    let mut sym_u = u.1.derivative(Axis::X1);
    sym_u.axpy(1.0, &u.0.derivative(Axis::X2));
    let d2u2 = u.1.derivative(Axis::X2);
    let mut sym_b = b.1.derivative(Axis::X1);
    sym_b.axpy(1.0, &b.0.derivative(Axis::X2));
    let (p1, q1) = inverse_pair(&d1b1, &sym_u).expect("grid mismatch");
    let (p2, q2) = inverse_pair(&d2u2, &sym_b).expect("grid mismatch");
    let t: Vec<f64> = p1
        .values()
        .iter()
        .zip(q1.values())
        .zip(p2.values().iter().zip(q2.values()))
        .map(|((a, c), (d, e))| 2.0 * (a * c + d * e))
        .collect();
    let mut t_hat = forward_transform(&PhysicalField::from_values(&grid, t))
        .expect("finite product of finite fields");
    t_hat.dealias_in_place();
    t_hat
}

/// Nonlinear (non-dissipative) part of the (ω, j) right-hand side:
/// dω = −u·∇ω + b·∇j and dj = −u·∇j + b·∇ω + T(∇u,∇b), with u, b
/// reconstructed internally. Outputs are dealiased and mean-free.
///
/// This is the integrand handed to the time stepper; dissipation is applied
/// exactly there via the integrating factor.
pub fn vorticity_current_nonlinear(
    state: &FlowState,
) -> Result<(SpectralField, SpectralField), DynamicsError> {
    let grid = state.grid().clone();
    let omega_hat = state.omega_hat();
    let j_hat = state.j_hat();

    let (u1h, u2h) = biot_savart(omega_hat)?;
    let (b1h, b2h) = b_from_current(j_hat)?;

    // T(∇u,∇b) with u,b eliminated via Biot–Savart: with M₁ = ξ₁ξ₂/|ξ|² and
    // M₂ = (ξ₁²−ξ₂²)/|ξ|²,
    //   ∂₁b₁ = M₁ ĵ,  ∂₁u₂+∂₂u₁ = −M₂ ω̂,  ∂₂u₂ = −M₁ ω̂,  ∂₁b₂+∂₂b₁ = −M₂ ĵ,
    // so T = 2·phys(M₁ω̂)·phys(M₂ĵ) − 2·phys(M₁ĵ)·phys(M₂ω̂).
    let n = grid.n();
    let mut m1_j = SpectralField::zeros(&grid);
    let mut m2_w = SpectralField::zeros(&grid);
    let mut m1_w = SpectralField::zeros(&grid);
    let mut m2_j = SpectralField::zeros(&grid);
    for i1 in 0..n {
        let xi1 = grid.xi(i1);
        for i2 in 0..n {
            let q = grid.xi_norm_sq(i1, i2);
            if q == 0.0 {
                continue;
            }
            let xi2 = grid.xi(i2);
            let m1 = xi1 * xi2 / q;
            let m2 = (xi1 * xi1 - xi2 * xi2) / q;
            let idx = grid.idx(i1, i2);
            let w = omega_hat.coeffs()[idx];
            let j = j_hat.coeffs()[idx];
            m1_j.coeffs_mut()[idx] = m1 * j;
            m2_w.coeffs_mut()[idx] = m2 * w;
            m1_w.coeffs_mut()[idx] = m1 * w;
            m2_j.coeffs_mut()[idx] = m2 * j;
        }
    }

    let (u1, u2) = inverse_pair(&u1h, &u2h).expect("grid mismatch");
    let (b1, b2) = inverse_pair(&b1h, &b2h).expect("grid mismatch");
    let (wx, wy) = inverse_pair(
        &omega_hat.derivative(Axis::X1),
        &omega_hat.derivative(Axis::X2),
    )
    .unwrap();
    let (jx, jy) = inverse_pair(&j_hat.derivative(Axis::X1), &j_hat.derivative(Axis::X2)).unwrap();
    let (pj, qw) = inverse_pair(&m1_j, &m2_w).unwrap();
    let (pw, qj) = inverse_pair(&m1_w, &m2_j).unwrap();

    let len = u1.values().len();
    let mut domega = Vec::with_capacity(len);
    let mut dj = Vec::with_capacity(len);
    for i in 0..len {
        let ua = u1.values()[i];
        let ub = u2.values()[i];
        let ba = b1.values()[i];
        let bb = b2.values()[i];
        domega.push(
            -(ua * wx.values()[i] + ub * wy.values()[i])
                + (ba * jx.values()[i] + bb * jy.values()[i]),
        );
        let t = 2.0 * (pw.values()[i] * qj.values()[i] - pj.values()[i] * qw.values()[i]);
        dj.push(
            -(ua * jx.values()[i] + ub * jy.values()[i])
                + (ba * wx.values()[i] + bb * wy.values()[i])
                + t,
        );
    }
    let (mut dw_hat, mut dj_hat) = forward_pair(
        &PhysicalField::from_values(&grid, domega),
        &PhysicalField::from_values(&grid, dj),
    )
    .expect("grid mismatch");
    dw_hat.dealias_in_place();
    dj_hat.dealias_in_place();
    dw_hat.set_zero_mode(Complex64::default());
    dj_hat.set_zero_mode(Complex64::default());
    Ok((dw_hat, dj_hat))
}

/// Full (ω, j) right-hand side including dissipation:
/// dω gains −νΛ^{2α}ω (the curl of −νΛ^{2α}u) and dj gains −κΛ^{2β}j.
pub fn vorticity_current_rhs(
    state: &FlowState,
    params: &PhysicsParams,
) -> Result<(SpectralField, SpectralField), DynamicsError> {
    let (mut dw, mut dj) = vorticity_current_nonlinear(state)?;
    if params.nu > 0.0 {
        dw.axpy(
            -params.nu,
            &state
                .omega_hat()
                .fractional_laplacian(2.0 * params.alpha)
                .expect("alpha >= 0"),
        );
    }
    if params.kappa > 0.0 {
        dj.axpy(
            -params.kappa,
            &state
                .j_hat()
                .fractional_laplacian(2.0 * params.beta)
                .expect("beta >= 0"),
        );
    }
    Ok((dw, dj))
}

/// Cross-check of the two formulations: the max-norm mismatch between
/// ∇⊥·(primitive RHS) and the (ω, j) RHS, normalized by the RHS scale.
/// Contract: ≤ 1e−9 on band-limited inputs at n ≥ 64.
pub fn formulation_consistency(
    u: (&SpectralField, &SpectralField),
    b: (&SpectralField, &SpectralField),
    params: &PhysicsParams,
) -> Result<f64, DynamicsError> {
    let ((du1, du2), (db1, db2)) = primitive_rhs(u, b, params)?;
    let omega = scalar_curl(u.0, u.1).dealias();
    let j = scalar_curl(b.0, b.1).dealias();
    let state = FlowState::new(omega, j, 0.0)?;
    let (dw, dj) = vorticity_current_rhs(&state, params)?;

    let curl_du = scalar_curl(&du1, &du2);
    let curl_db = scalar_curl(&db1, &db2);
    let (cw, cj) = inverse_pair(&curl_du, &curl_db).expect("grid mismatch");
    let (pw, pj) = inverse_pair(&dw, &dj).expect("grid mismatch");
    let mut worst = 0.0f64;
    for i in 0..cw.values().len() {
        worst = worst.max((cw.values()[i] - pw.values()[i]).abs());
        worst = worst.max((cj.values()[i] - pj.values()[i]).abs());
    }
    let scale = pw.linf().max(pj.linf());
    if scale == 0.0 {
        return Ok(worst);
    }
    Ok(worst / scale)
}

/// Reconstruct the (u, b) spectra of a state; shared by diagnostics and tests.
#[allow(clippy::type_complexity)]
pub fn reconstruct_velocity_magnetic(
    state: &FlowState,
) -> Result<
    (
        (SpectralField, SpectralField),
        (SpectralField, SpectralField),
    ),
    DynamicsError,
> {
    let u = biot_savart(state.omega_hat())?;
    let b = b_from_current(state.j_hat())?;
    Ok((u, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_initial_condition, InitialCondition};
    use crate::grid::Grid2D;
    use crate::rng::SplitMix64;
    use crate::spectral::{inner_product, inverse_transform, l2_norm, sobolev_norm};
    use alloc::sync::Arc;

    fn grid(n: usize) -> Arc<Grid2D> {
        Grid2D::new(n).unwrap()
    }

    /// Divergence-free random pair via a random stream function.
    pub(crate) fn random_divfree(
        g: &Arc<Grid2D>,
        seed: u64,
        k_max: i32,
    ) -> (SpectralField, SpectralField) {
        let mut rng = SplitMix64::new(seed);
        let mut psi = SpectralField::zeros(g);
        for k1 in -k_max..=k_max {
            for k2 in -k_max..=k_max {
                if (k1, k2) <= (-k1, -k2) {
                    continue;
                }
                let (Some(i1), Some(i2)) = (g.index_of_k(k1), g.index_of_k(k2)) else {
                    continue;
                };
                if !g.dealias_mask(i1, i2) {
                    continue;
                }
                let c = Complex64::new(rng.next_gaussian(), rng.next_gaussian());
                let j1 = g.index_of_k(-k1).unwrap();
                let j2 = g.index_of_k(-k2).unwrap();
                psi.coeffs_mut()[g.idx(i1, i2)] = c;
                psi.coeffs_mut()[g.idx(j1, j2)] = c.conj();
            }
        }
        psi.perp_gradient()
    }

    #[test]
    fn params_validation() {
        assert!(PhysicsParams::new(0.0, 0.0, 1.0, 1.25).is_ok());
        assert!(PhysicsParams::new(-1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhysicsParams::new(0.0, 0.0, f64::NAN, 1.0).is_err());
        let p = PhysicsParams::magnetic_diffusion_only(1.5).unwrap();
        assert_eq!((p.nu, p.kappa), (0.0, 1.0));
    }

    #[test]
    fn zero_fields_zero_rhs() {
        let g = grid(16);
        let z = SpectralField::zeros(&g);
        let params = PhysicsParams::magnetic_diffusion_only(1.0).unwrap();
        let ((du1, du2), (db1, db2)) = primitive_rhs((&z, &z), (&z, &z), &params).unwrap();
        for f in [&du1, &du2, &db1, &db2] {
            assert!(f.max_coeff() == 0.0);
        }
        let state = FlowState::zeros(&g);
        let (dw, dj) = vorticity_current_rhs(&state, &params).unwrap();
        assert!(dw.max_coeff() == 0.0 && dj.max_coeff() == 0.0);
    }

    #[test]
    fn taylor_green_is_euler_steady_state() {
        // ψ = sin x₁ sin x₂, b = 0, ν = 0: u·∇ω ≡ 0, projected RHS ≡ 0.
        let g = grid(64);
        let psi = forward_transform(&PhysicalField::from_fn(&g, |x1, x2| {
            libm::sin(x1) * libm::sin(x2)
        }))
        .unwrap();
        let (u1, u2) = psi.perp_gradient();
        let z = SpectralField::zeros(&g);
        let params = PhysicsParams::ideal();
        let ((du1, du2), _) = primitive_rhs((&u1, &u2), (&z, &z), &params).unwrap();
        let scale = u1.max_coeff();
        let r1 = inverse_transform(&du1).unwrap().linf();
        let r2 = inverse_transform(&du2).unwrap().linf();
        assert!(
            r1 < 1e-11 * scale && r2 < 1e-11 * scale,
            "residual {r1:.2e}, {r2:.2e}"
        );
    }

    #[test]
    fn pure_fractional_decay_when_velocity_vanishes() {
        let g = grid(32);
        let z = SpectralField::zeros(&g);
        let (b1, b2) = random_divfree(&g, 5, 6);
        let params = PhysicsParams::magnetic_diffusion_only(1.3).unwrap();
        let (_, (db1, db2)) = primitive_rhs((&z, &z), (&b1, &b2), &params).unwrap();
        let expect1 = b1.fractional_laplacian(2.6).unwrap();
        let expect2 = b2.fractional_laplacian(2.6).unwrap();
        let scale = expect1.max_coeff().max(expect2.max_coeff());
        for (a, e) in db1.coeffs().iter().zip(expect1.coeffs().iter()) {
            assert!((a + e).norm() <= 1e-12 * scale);
        }
        for (a, e) in db2.coeffs().iter().zip(expect2.coeffs().iter()) {
            assert!((a + e).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn rejects_divergent_input() {
        let g = grid(16);
        // v = ∇φ is maximally divergent.
        let phi = SpectralField::cosine_mode(&g, (1, 1), 1.0, 0.0);
        let v1 = phi.derivative(Axis::X1);
        let v2 = phi.derivative(Axis::X2);
        let params = PhysicsParams::ideal();
        assert!(matches!(
            primitive_rhs((&v1, &v2), (&v1, &v2), &params),
            Err(DynamicsError::NotDivergenceFree { .. })
        ));
    }

    #[test]
    fn div_form_matches_advective_form() {
        let g = grid(64);
        let (u1, u2) = random_divfree(&g, 11, 10);
        let (b1, b2) = random_divfree(&g, 12, 10);
        let params = PhysicsParams::magnetic_diffusion_only(1.2).unwrap();
        let (_, (a1, a2)) = primitive_rhs((&u1, &u2), (&b1, &b2), &params).unwrap();
        let (d1, d2) = div_form_magnetic_rhs((&u1, &u2), (&b1, &b2), &params).unwrap();
        let (pa1, pa2) = inverse_pair(&a1, &a2).unwrap();
        let (pd1, pd2) = inverse_pair(&d1, &d2).unwrap();
        let scale = pa1.linf().max(pa2.linf());
        let mut worst = 0.0f64;
        for i in 0..pa1.values().len() {
            worst = worst.max((pa1.values()[i] - pd1.values()[i]).abs());
            worst = worst.max((pa2.values()[i] - pd2.values()[i]).abs());
        }
        assert!(
            worst <= 1e-10 * scale,
            "mismatch {worst:.3e} vs scale {scale:.3e}"
        );
    }

    #[test]
    fn div_form_degenerate_cases() {
        let g = grid(32);
        let z = SpectralField::zeros(&g);
        let (b1, b2) = random_divfree(&g, 13, 6);
        let params = PhysicsParams::magnetic_diffusion_only(0.9).unwrap();
        // u = 0 → pure decay.
        let (d1, d2) = div_form_magnetic_rhs((&z, &z), (&b1, &b2), &params).unwrap();
        let e1 = b1.fractional_laplacian(1.8).unwrap();
        let scale = e1.max_coeff();
        for (a, e) in d1.coeffs().iter().zip(e1.coeffs().iter()) {
            assert!((a + e).norm() <= 1e-12 * scale);
        }
        let e2 = b2.fractional_laplacian(1.8).unwrap();
        for (a, e) in d2.coeffs().iter().zip(e2.coeffs().iter()) {
            assert!((a + e).norm() <= 1e-12 * scale);
        }
        // b = 0 → zero RHS.
        let (z1, z2) =
            div_form_magnetic_rhs((&b1, &b2), (&z, &z), &PhysicsParams::ideal()).unwrap();
        assert!(z1.max_coeff() == 0.0 && z2.max_coeff() == 0.0);
        // b = u (aligned): ∂ᵢ(bᵢu − uᵢb) = 0 identically.
        let (w1, w2) =
            div_form_magnetic_rhs((&b1, &b2), (&b1, &b2), &PhysicsParams::ideal()).unwrap();
        let wscale = b1.max_coeff() * g.xi_max();
        assert!(w1.max_coeff() <= 1e-13 * wscale && w2.max_coeff() <= 1e-13 * wscale);
    }

    #[test]
    fn stress_term_zero_cases() {
        let g = grid(32);
        // Constant u (mean mode only) → all gradients vanish.
        let mut u_const = SpectralField::zeros(&g);
        u_const.set_zero_mode(Complex64::new(3.0, 0.0));
        let (b1, b2) = random_divfree(&g, 21, 6);
        let t = stress_term((&u_const, &u_const), (&b1, &b2));
        // Packed transforms leave round-off in the exactly-zero factor.
        assert!(t.max_coeff() <= 1e-13 * b1.max_coeff() * g.xi_max());
        // u₂ ≡ 0 and b₁ ≡ 0: every product pair contains a vanishing factor
        // (∂₁b₁ = 0 kills the first term; ∂₂u₂ = 0 kills the second).
        let u1 = forward_transform(&PhysicalField::from_fn(&g, |_, x2| libm::cos(x2))).unwrap();
        let z = SpectralField::zeros(&g);
        let b2only = forward_transform(&PhysicalField::from_fn(&g, |x1, _| libm::sin(x1))).unwrap();
        let t2 = stress_term((&u1, &z), (&z, &b2only));
        assert!(t2.max_coeff() <= 1e-14 * u1.max_coeff());
    }

    #[test]
    fn stress_term_matches_finite_differences() {
        // Spectral T equals a 2nd-order finite-difference evaluation of the
        // same formula to O(h²).
        let n = 32;
        let g = grid(n);
        let (u1, u2) = random_divfree(&g, 31, 4);
        let (b1, b2) = random_divfree(&g, 32, 4);
        let t_hat = stress_term((&u1, &u2), (&b1, &b2));
        let t = inverse_transform(&t_hat).unwrap();

        let (u1p, u2p) = inverse_pair(&u1, &u2).unwrap();
        let (b1p, b2p) = inverse_pair(&b1, &b2).unwrap();
        let h = g.spacing();
        let at = |f: &PhysicalField, i1: isize, i2: isize| {
            let ni = n as isize;
            f.values()[g.idx(
                ((i1 % ni + ni) % ni) as usize,
                ((i2 % ni + ni) % ni) as usize,
            )]
        };
        let d1 = |f: &PhysicalField, i1: isize, i2: isize| {
            (at(f, i1 + 1, i2) - at(f, i1 - 1, i2)) / (2.0 * h)
        };
        let d2 = |f: &PhysicalField, i1: isize, i2: isize| {
            (at(f, i1, i2 + 1) - at(f, i1, i2 - 1)) / (2.0 * h)
        };
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i1 in 0..n as isize {
            for i2 in 0..n as isize {
                let fd = 2.0 * d1(&b1p, i1, i2) * (d1(&u2p, i1, i2) + d2(&u1p, i1, i2))
                    + 2.0 * d2(&u2p, i1, i2) * (d1(&b2p, i1, i2) + d2(&b1p, i1, i2));
                let sp = t.values()[g.idx(i1 as usize, i2 as usize)];
                worst = worst.max((fd - sp).abs());
                scale = scale.max(sp.abs());
            }
        }
        // Centered differences at n=32, k ≤ 4: truncation ~ (kh)²/6.
        assert!(
            worst <= 0.2 * scale,
            "fd mismatch {worst:.3e} vs scale {scale:.3e}"
        );
        assert!(scale > 0.0);
    }

    #[test]
    fn primitive_rhs_outputs_divergence_free() {
        let g = grid(64);
        let (u1, u2) = random_divfree(&g, 71, 12);
        let (b1, b2) = random_divfree(&g, 72, 12);
        let params = PhysicsParams::magnetic_diffusion_only(1.2).unwrap();
        let ((du1, du2), (db1, db2)) = primitive_rhs((&u1, &u2), (&b1, &b2), &params).unwrap();
        let scale = g.xi_max()
            * [&du1, &du2, &db1, &db2]
                .iter()
                .map(|f| f.max_coeff())
                .fold(0.0, f64::max);
        let div_u = crate::fields::divergence(&du1, &du2);
        let div_b = crate::fields::divergence(&db1, &db2);
        assert!(
            div_u.max_coeff() <= 1e-12 * scale,
            "momentum divergence {:e}",
            div_u.max_coeff()
        );
        assert!(
            div_b.max_coeff() <= 1e-12 * scale,
            "induction divergence {:e}",
            div_b.max_coeff()
        );
    }

    #[test]
    fn euler_vorticity_transport_preserves_mean() {
        let g = grid(64);
        let (u1, u2) = random_divfree(&g, 41, 12);
        let omega = scalar_curl(&u1, &u2).dealias();
        let state = FlowState::new(omega, SpectralField::zeros(&g), 0.0).unwrap();
        let (dw, dj) = vorticity_current_rhs(&state, &PhysicsParams::ideal()).unwrap();
        assert_eq!(dw.zero_mode(), Complex64::default());
        assert_eq!(dj.zero_mode(), Complex64::default());
    }

    #[test]
    fn formulation_consistency_zero_and_single_mode() {
        let g = grid(64);
        let z = SpectralField::zeros(&g);
        let params = PhysicsParams::magnetic_diffusion_only(1.2).unwrap();
        let r0 = formulation_consistency((&z, &z), (&z, &z), &params).unwrap();
        assert_eq!(r0, 0.0);

        let psi_u = SpectralField::cosine_mode(&g, (1, 0), 1.0, 0.0);
        let psi_b = SpectralField::cosine_mode(&g, (0, 1), 1.0, 0.5);
        let u = psi_u.perp_gradient();
        let b = psi_b.perp_gradient();
        let r = formulation_consistency((&u.0, &u.1), (&b.0, &b.1), &params).unwrap();
        assert!(r <= 1e-11, "single-mode residual {r:.3e}");
    }

    #[test]
    fn formulation_consistency_random_fields() {
        let g = grid(128);
        let params = PhysicsParams::magnetic_diffusion_only(1.2).unwrap();
        for seed in [1u64, 2, 3] {
            let (u1, u2) = random_divfree(&g, 100 + seed, 20);
            let (b1, b2) = random_divfree(&g, 200 + seed, 20);
            let r = formulation_consistency((&u1, &u2), (&b1, &b2), &params).unwrap();
            assert!(r <= 1e-9, "seed {seed}: residual {r:.3e}");
        }
    }

    #[test]
    fn nonlinear_terms_are_energy_neutral() {
        // Ideal energy identity: ⟨u, du⟩ + ⟨b, db⟩ = 0.
        let g = grid(64);
        let (u1, u2) = random_divfree(&g, 51, 12);
        let (b1, b2) = random_divfree(&g, 52, 12);
        let params = PhysicsParams::ideal();
        let ((du1, du2), (db1, db2)) = primitive_rhs((&u1, &u2), (&b1, &b2), &params).unwrap();
        let flux = inner_product(&u1, &du1)
            + inner_product(&u2, &du2)
            + inner_product(&b1, &db1)
            + inner_product(&b2, &db2);
        let scale: f64 = [&u1, &u2, &b1, &b2]
            .iter()
            .map(|f| l2_norm(f) * l2_norm(f))
            .sum::<f64>()
            * g.xi_max();
        assert!(
            flux.abs() <= 1e-10 * scale,
            "energy flux {flux:.3e} vs {scale:.3e}"
        );
    }

    #[test]
    fn dissipative_energy_identity() {
        // ⟨u,du⟩ + ⟨b,db⟩ = −ν‖Λ^α u‖² − κ‖Λ^β b‖².
        let g = grid(64);
        let (u1, u2) = random_divfree(&g, 61, 10);
        let (b1, b2) = random_divfree(&g, 62, 10);
        let params = PhysicsParams::new(0.3, 0.7, 1.1, 1.2).unwrap();
        let ((du1, du2), (db1, db2)) = primitive_rhs((&u1, &u2), (&b1, &b2), &params).unwrap();
        let flux = inner_product(&u1, &du1)
            + inner_product(&u2, &du2)
            + inner_product(&b1, &db1)
            + inner_product(&b2, &db2);
        let diss_u =
            sobolev_norm(&u1, params.alpha).powi(2) + sobolev_norm(&u2, params.alpha).powi(2);
        let diss_b =
            sobolev_norm(&b1, params.beta).powi(2) + sobolev_norm(&b2, params.beta).powi(2);
        let expect = -params.nu * diss_u - params.kappa * diss_b;
        assert!(
            (flux - expect).abs() <= 1e-9 * expect.abs(),
            "flux {flux:.12e} vs expected {expect:.12e}"
        );
    }

    #[test]
    fn orszag_tang_rhs_matches_between_formulations() {
        let g = grid(64);
        let state =
            make_initial_condition(&InitialCondition::OrszagTang { b_scale: 1.0 }, &g).unwrap();
        let ((u1, u2), (b1, b2)) = reconstruct_velocity_magnetic(&state).unwrap();
        let params = PhysicsParams::magnetic_diffusion_only(1.25).unwrap();
        let r = formulation_consistency((&u1, &u2), (&b1, &b2), &params).unwrap();
        assert!(r <= 1e-11, "OT residual {r:.3e}");
    }
}
