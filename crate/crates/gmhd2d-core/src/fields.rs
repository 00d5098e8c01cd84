//! Flow-state construction and (u, b) ↔ (ω, j) interconversion.
//!
//! The solver's canonical variables are the scalar vorticity ω = ∇⊥·u and
//! current j = ∇⊥·b; velocity and magnetic field are recovered on demand by
//! Biot–Savart inversion u = ∇⊥Δ^{−1}ω (and the same operator for b from j).

use crate::grid::Grid2D;
use crate::rng::SplitMix64;
use crate::spectral::{inverse_pair, Axis, SpectralField};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
#[cfg_attr(test, allow(unused_imports))] // shadowed by std inherent methods under cfg(test)
use num_traits::Float;

/// Relative zero-mode tolerance treated as "mean-free" by Biot–Savart.
const MEAN_TOL: f64 = 1e-12;

/// The (ω̂, ĵ) pair at a simulation time — the canonical solver state.
///
/// Invariants enforced at construction: both fields Hermitian within
/// tolerance, dealiased, and exactly mean-free.
#[derive(Debug, Clone)]
pub struct FlowState {
    omega_hat: SpectralField,
    j_hat: SpectralField,
    time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldsError {
    /// Δ^{−1} is undefined on constants; the field must be mean-free.
    NonzeroMean { rel: f64 },
    /// Hermitian symmetry violated on input.
    NotHermitian { residual: f64 },
    /// Fields live on different grids.
    GridMismatch,
    /// Requested mode is outside the grid's frequency range.
    ModeOutOfRange { k1: i32, k2: i32 },
}

impl fmt::Display for FieldsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldsError::NonzeroMean { rel } => {
                write!(f, "field has nonzero mean (relative magnitude {rel:.3e})")
            }
            FieldsError::NotHermitian { residual } => {
                write!(
                    f,
                    "field is not Hermitian-symmetric (residual {residual:.3e})"
                )
            }
            FieldsError::GridMismatch => write!(f, "fields live on different grids"),
            FieldsError::ModeOutOfRange { k1, k2 } => {
                write!(f, "mode ({k1}, {k2}) is outside the grid frequency range")
            }
        }
    }
}

impl core::error::Error for FieldsError {}

impl FlowState {
    /// Build a state, enforcing the invariants (dealias, exact zero mean).
    pub fn new(
        omega_hat: SpectralField,
        j_hat: SpectralField,
        time: f64,
    ) -> Result<Self, FieldsError> {
        if !Arc::ptr_eq(omega_hat.grid(), j_hat.grid()) {
            return Err(FieldsError::GridMismatch);
        }
        let rw = omega_hat.hermitian_residual();
        let rj = j_hat.hermitian_residual();
        let residual = rw.max(rj);
        if residual > crate::spectral::HERMITIAN_TOL {
            return Err(FieldsError::NotHermitian { residual });
        }
        let mut omega_hat = omega_hat.dealias();
        let mut j_hat = j_hat.dealias();
        omega_hat.set_zero_mode(Complex64::default());
        j_hat.set_zero_mode(Complex64::default());
        Ok(Self {
            omega_hat,
            j_hat,
            time,
        })
    }

    /// Internal fast path: fields already satisfy the invariants.
    pub(crate) fn from_parts_unchecked(
        omega_hat: SpectralField,
        j_hat: SpectralField,
        time: f64,
    ) -> Self {
        Self {
            omega_hat,
            j_hat,
            time,
        }
    }

    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        Self {
            omega_hat: SpectralField::zeros(grid),
            j_hat: SpectralField::zeros(grid),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        self.omega_hat.grid()
    }

    pub fn omega_hat(&self) -> &SpectralField {
        &self.omega_hat
    }

    pub fn j_hat(&self) -> &SpectralField {
        &self.j_hat
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// True if any coefficient of either field is NaN/Inf.
    pub fn has_non_finite(&self) -> bool {
        self.omega_hat
            .coeffs()
            .iter()
            .chain(self.j_hat.coeffs().iter())
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    }
}

/// Initial-condition library. All presets produce divergence-free,
/// mean-free (u₀, b₀); `amplitude = 0` yields the zero state.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// u = (−sin κx₂, sin κx₁), b = b_scale·(−sin κx₂, sin 2κx₁) with
    /// κ = 2π/L — the standard MHD benchmark vortex.
    OrszagTang { b_scale: f64 },
    /// Random Hermitian modes on the shell k_min ≤ |k| ≤ k_max, rescaled so
    /// max(‖u‖_∞, ‖b‖_∞) = amplitude. Identical for identical seeds.
    RandomBandlimited {
        amplitude: f64,
        seed: u64,
        k_min: u32,
        k_max: u32,
    },
    /// A single cosine mode placed in ω, j, or both.
    SingleMode {
        k: (i32, i32),
        amplitude: f64,
        target: ModeTarget,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeTarget {
    Velocity,
    Magnetic,
    Both,
}

/// u = ∇⊥Δ^{−1}ω: û(k) = i(ξ₂, −ξ₁) ω̂(k)/|ξ|², so that ∇⊥·u = ω exactly
/// (ψ̂ = −ω̂/|ξ|² because Δ carries the multiplier −|ξ|², then u = ∇⊥ψ).
///
/// Rejects fields whose zero mode exceeds [`MEAN_TOL`] relative to the
/// coefficient scale; the inversion is undefined on constants.
pub fn biot_savart(
    omega_hat: &SpectralField,
) -> Result<(SpectralField, SpectralField), FieldsError> {
    let scale = omega_hat.max_coeff();
    let mean = omega_hat.zero_mode().norm();
    if mean > MEAN_TOL * scale && mean > 0.0 {
        return Err(FieldsError::NonzeroMean {
            rel: if scale > 0.0 {
                mean / scale
            } else {
                f64::INFINITY
            },
        });
    }
    let grid = omega_hat.grid();
    let n = grid.n();
    let mut u1 = SpectralField::zeros(grid);
    let mut u2 = SpectralField::zeros(grid);
    for i1 in 0..n {
        let xi1 = grid.xi(i1);
        for i2 in 0..n {
            let q = grid.xi_norm_sq(i1, i2);
            if q == 0.0 {
                continue;
            }
            let idx = grid.idx(i1, i2);
            let w = omega_hat.coeffs()[idx];
            let xi2 = grid.xi(i2);
            // i·ŵ/|ξ|²
            let f = Complex64::new(-w.im, w.re) / q;
            u1.coeffs_mut()[idx] = xi2 * f;
            u2.coeffs_mut()[idx] = -xi1 * f;
        }
    }
    Ok((u1, u2))
}

/// b from the current j = ∇⊥·b — the same inversion as [`biot_savart`].
pub fn b_from_current(
    j_hat: &SpectralField,
) -> Result<(SpectralField, SpectralField), FieldsError> {
    biot_savart(j_hat)
}

/// ∇·v as a spectral field: iξ₁v̂₁ + iξ₂v̂₂.
pub fn divergence(v1: &SpectralField, v2: &SpectralField) -> SpectralField {
    let mut out = v1.derivative(Axis::X1);
    out.axpy(1.0, &v2.derivative(Axis::X2));
    out
}

/// Scalar curl ∇⊥·v = −∂₂v₁ + ∂₁v₂ (recovers ω from u, j from b).
pub fn scalar_curl(v1: &SpectralField, v2: &SpectralField) -> SpectralField {
    let mut out = v2.derivative(Axis::X1);
    out.axpy(-1.0, &v1.derivative(Axis::X2));
    out
}

/// Realize an initial condition as a [`FlowState`] at t = 0.
pub fn make_initial_condition(
    ic: &InitialCondition,
    grid: &Arc<Grid2D>,
) -> Result<FlowState, FieldsError> {
    match *ic {
        InitialCondition::OrszagTang { b_scale } => {
            // ω = ∇⊥·u = cos κx₁ + cos κx₂;  j = 2c·cos 2κx₁ + c·cos κx₂.
            let mut omega = SpectralField::cosine_mode(grid, (1, 0), 1.0, 0.0);
            omega.axpy(1.0, &SpectralField::cosine_mode(grid, (0, 1), 1.0, 0.0));
            let mut j = SpectralField::cosine_mode(grid, (2, 0), 2.0 * b_scale, 0.0);
            j.axpy(1.0, &SpectralField::cosine_mode(grid, (0, 1), b_scale, 0.0));
            FlowState::new(omega, j, 0.0)
        }
        InitialCondition::RandomBandlimited {
            amplitude,
            seed,
            k_min,
            k_max,
        } => {
            let mut rng = SplitMix64::new(seed);
            let omega = random_shell(grid, &mut rng, k_min, k_max);
            let j = random_shell(grid, &mut rng, k_min, k_max);
            if amplitude == 0.0 {
                return Ok(FlowState::zeros(grid));
            }
            // Normalize so max(‖u‖_∞, ‖b‖_∞) = amplitude.
            let (u1, u2) = biot_savart(&omega)?;
            let (b1, b2) = b_from_current(&j)?;
            let (u1p, u2p) = inverse_pair(&u1, &u2).map_err(|_| FieldsError::GridMismatch)?;
            let (b1p, b2p) = inverse_pair(&b1, &b2).map_err(|_| FieldsError::GridMismatch)?;
            let mut vmax = 0.0f64;
            for i in 0..u1p.values().len() {
                let u = u1p.values()[i].hypot(u2p.values()[i]);
                let b = b1p.values()[i].hypot(b2p.values()[i]);
                vmax = vmax.max(u).max(b);
            }
            let mut omega = omega;
            let mut j = j;
            if vmax > 0.0 {
                omega.scale_in_place(amplitude / vmax);
                j.scale_in_place(amplitude / vmax);
            }
            FlowState::new(omega, j, 0.0)
        }
        InitialCondition::SingleMode {
            k,
            amplitude,
            target,
        } => {
            if grid.index_of_k(k.0).is_none() || grid.index_of_k(k.1).is_none() {
                return Err(FieldsError::ModeOutOfRange { k1: k.0, k2: k.1 });
            }
            if (k.0, k.1) == (0, 0) {
                return Err(FieldsError::ModeOutOfRange { k1: 0, k2: 0 });
            }
            let mode = SpectralField::cosine_mode(grid, k, amplitude, 0.0);
            let zero = SpectralField::zeros(grid);
            let (omega, j) = match target {
                ModeTarget::Velocity => (mode, zero),
                ModeTarget::Magnetic => (zero, mode),
                ModeTarget::Both => (mode.clone(), mode),
            };
            FlowState::new(omega, j, 0.0)
        }
    }
}

/// Random Hermitian spectrum supported on k_min ≤ |k| ≤ k_max (and inside the
/// dealias band), unit-variance Gaussian coefficients.
fn random_shell(grid: &Arc<Grid2D>, rng: &mut SplitMix64, k_min: u32, k_max: u32) -> SpectralField {
    let mut field = SpectralField::zeros(grid);
    let km = k_max as i32;
    let lo = (k_min as f64) * (k_min as f64);
    let hi = (k_max as f64) * (k_max as f64);
    let mut pairs: Vec<((i32, i32), Complex64)> = Vec::new();
    for k1 in -km..=km {
        for k2 in -km..=km {
            if (k1, k2) <= (-k1, -k2) {
                continue; // fill each Hermitian pair once, skip (0,0)
            }
            let ksq = (k1 * k1 + k2 * k2) as f64;
            if ksq < lo || ksq > hi {
                continue;
            }
            let (Some(i1), Some(i2)) = (grid.index_of_k(k1), grid.index_of_k(k2)) else {
                continue;
            };
            if !grid.dealias_mask(i1, i2) {
                continue;
            }
            let c = Complex64::new(rng.next_gaussian(), rng.next_gaussian());
            pairs.push(((k1, k2), c));
        }
    }
    for ((k1, k2), c) in pairs {
        let i = grid.idx(grid.index_of_k(k1).unwrap(), grid.index_of_k(k2).unwrap());
        let j = grid.idx(grid.index_of_k(-k1).unwrap(), grid.index_of_k(-k2).unwrap());
        field.coeffs_mut()[i] = c;
        field.coeffs_mut()[j] = c.conj();
    }
    field
}
