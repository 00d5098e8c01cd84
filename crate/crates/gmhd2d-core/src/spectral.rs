//! Scalar fields on the periodic box, in physical and spectral form.
//!
//! Conventions (fixed once, used by every module):
//!
//!   f̂(ξ) = ∫ f(x) e^{−ix·ξ} dx  ≈ h² Σ_j f(x_j) e^{−ix_j·ξ},   h = L/n,
//!   f(x) = (2π)^{−2} ∫ f̂(ξ) e^{ix·ξ} dξ  ≈ L^{−2} Σ_k f̂(ξ_k) e^{ix·ξ_k},
//!
//! so f̂(0) = ∫ f dx and Parseval reads ‖f‖²_{L²} = L^{−2} Σ_k |f̂(k)|².
//! Λ^s acts diagonally as the multiplier |ξ|^s.

use crate::grid::Grid2D;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
#[cfg_attr(test, allow(unused_imports))] // shadowed by std inherent methods under cfg(test)
use num_traits::Float;

/// Relative Hermitian-symmetry tolerance accepted by the inverse transform.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative imaginary residue tolerated when realizing a spectral field.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Real scalar field sampled on the grid, row-major `values[i1 * n + i2]`.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    grid: Arc<Grid2D>,
    values: Vec<f64>,
}

/// Complex Fourier coefficients of a real scalar field (Hermitian-symmetric),
/// row-major `coeffs[i1 * n + i2]` over the centered frequencies of [`Grid2D`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid2D>,
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    /// Physical input contains a NaN/Inf sample.
    NonFiniteInput { i1: usize, i2: usize },
    /// Spectral input contains a NaN/Inf coefficient.
    NonFiniteCoeff { i1: usize, i2: usize },
    /// coeff(−k) deviates from conj(coeff(k)) beyond [`HERMITIAN_TOL`].
    HermitianViolation { residual: f64 },
    /// Imaginary part after inversion exceeds [`IMAG_RESIDUE_TOL`].
    ImaginaryResidue { residual: f64 },
    /// Λ^s requires s ≥ 0 (inverse powers live in Biot–Savart only).
    NegativeExponent { s: f64 },
    /// Operands live on different grids.
    GridMismatch,
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::NonFiniteInput { i1, i2 } => {
                write!(f, "non-finite sample at grid point ({i1}, {i2})")
            }
            SpectralError::NonFiniteCoeff { i1, i2 } => {
                write!(f, "non-finite coefficient at mode ({i1}, {i2})")
            }
            SpectralError::HermitianViolation { residual } => {
                write!(
                    f,
                    "Hermitian symmetry violated (relative residual {residual:.3e})"
                )
            }
            SpectralError::ImaginaryResidue { residual } => {
                write!(
                    f,
                    "imaginary residue {residual:.3e} above tolerance after inversion"
                )
            }
            SpectralError::NegativeExponent { s } => {
                write!(
                    f,
                    "fractional Laplacian exponent must be nonnegative, got {s}"
                )
            }
            SpectralError::GridMismatch => write!(f, "fields live on different grids"),
        }
    }
}

impl core::error::Error for SpectralError {}

impl PhysicalField {
    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.n() * grid.n()],
        }
    }

    pub fn from_values(grid: &Arc<Grid2D>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n() * grid.n());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Sample `f(x1, x2)` at the grid points.
    pub fn from_fn(grid: &Arc<Grid2D>, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for i1 in 0..n {
            let x1 = grid.coord(i1);
            for i2 in 0..n {
                values.push(f(x1, grid.coord(i2)));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.n() * grid.n()],
        }
    }

    pub fn from_coeffs(grid: &Arc<Grid2D>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.n() * grid.n());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Field c·cos(k·(2π/L)·x + φ), built directly in spectral space.
    pub fn cosine_mode(grid: &Arc<Grid2D>, k: (i32, i32), amplitude: f64, phase: f64) -> Self {
        let mut field = Self::zeros(grid);
        let l2 = grid.box_length() * grid.box_length();
        let i1 = grid.index_of_k(k.0).expect("mode outside grid");
        let i2 = grid.index_of_k(k.1).expect("mode outside grid");
        let j1 = grid.index_of_k(-k.0).expect("mode outside grid");
        let j2 = grid.index_of_k(-k.1).expect("mode outside grid");
        let half = 0.5 * amplitude * l2;
        let c = Complex64::new(half * libm::cos(phase), half * libm::sin(phase));
        let idx = grid.idx(i1, i2);
        let jdx = grid.idx(j1, j2);
        field.coeffs[idx] += c;
        field.coeffs[jdx] += c.conj();
        field
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn set_zero_mode(&mut self, value: Complex64) {
        self.coeffs[0] = value;
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .fold(0.0, |m, c| m.max(c.norm_sqr()))
            .sqrt()
    }

    /// max_k |c(k) − conj(c(−k))| / max|c| (zero for the zero field).
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i1 in 0..n {
            let j1 = self.grid.conj_index(i1);
            for i2 in 0..n {
                let c = self.coeffs[self.grid.idx(i1, i2)];
                let d = self.coeffs[self.grid.idx(j1, self.grid.conj_index(i2))];
                let diff = c - d.conj();
                worst = worst.max(diff.norm_sqr());
                scale = scale.max(c.norm_sqr());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            (worst / scale).sqrt()
        }
    }

    fn check_finite(&self) -> Result<(), SpectralError> {
        let n = self.grid.n();
        for (idx, c) in self.coeffs.iter().enumerate() {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(SpectralError::NonFiniteCoeff {
                    i1: idx / n,
                    i2: idx % n,
                });
            }
        }
        Ok(())
    }

    /// Λ^s: multiply every coefficient by |ξ|^s. The zero mode is annihilated
    /// for s > 0 and passed through for s = 0.
    pub fn fractional_laplacian(&self, s: f64) -> Result<Self, SpectralError> {
        if s < 0.0 || s.is_nan() {
            return Err(SpectralError::NegativeExponent { s });
        }
        if s == 0.0 {
            return Ok(self.clone());
        }
        let n = self.grid.n();
        let mut out = self.clone();
        for i1 in 0..n {
            for i2 in 0..n {
                let idx = self.grid.idx(i1, i2);
                let q = self.grid.xi_norm_sq(i1, i2);
                out.coeffs[idx] *= if q == 0.0 { 0.0 } else { libm::pow(q, 0.5 * s) };
            }
        }
        Ok(out)
    }

    /// ∂/∂x_axis as the multiplier iξ_axis. The Nyquist line is zeroed: it has
    /// no Hermitian partner, so an odd multiplier there would break realness.
    pub fn derivative(&self, axis: Axis) -> Self {
        let n = self.grid.n();
        let mut out = Self::zeros(&self.grid);
        for i1 in 0..n {
            for i2 in 0..n {
                let i = match axis {
                    Axis::X1 => i1,
                    Axis::X2 => i2,
                };
                if i == n / 2 {
                    continue;
                }
                let idx = self.grid.idx(i1, i2);
                let xi = self.grid.xi(i);
                let c = self.coeffs[idx];
                out.coeffs[idx] = Complex64::new(-xi * c.im, xi * c.re);
            }
        }
        out
    }

    /// ∇⊥F = (−∂₂F, ∂₁F).
    pub fn perp_gradient(&self) -> (Self, Self) {
        let mut neg = self.derivative(Axis::X2);
        for c in neg.coeffs.iter_mut() {
            *c = -*c;
        }
        (neg, self.derivative(Axis::X1))
    }

    /// Zero every mode dropped by the two-thirds rule. Idempotent.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let n = self.grid.n();
        for i1 in 0..n {
            let keep1 = self.grid.axis_keep(i1);
            let row = &mut self.coeffs[i1 * n..(i1 + 1) * n];
            for (i2, c) in row.iter_mut().enumerate() {
                if !(keep1 && self.grid.axis_keep(i2)) {
                    *c = Complex64::default();
                }
            }
        }
    }

    /// In-place self += a·other.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert!(Arc::ptr_eq(&self.grid, &other.grid));
        for (c, o) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += a * o;
        }
    }

    pub fn scale_in_place(&mut self, a: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= a;
        }
    }
}

/// Derivative axis, 1-based in formulas: x1 is the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

/// Discrete Fourier transform under the convention f̂(0) = ∫ f dx.
pub fn forward_transform(f: &PhysicalField) -> Result<SpectralField, SpectralError> {
    let grid = f.grid.clone();
    let n = grid.n();
    for (idx, v) in f.values.iter().enumerate() {
        if !v.is_finite() {
            return Err(SpectralError::NonFiniteInput {
                i1: idx / n,
                i2: idx % n,
            });
        }
    }
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft().fft2(&mut data);
    let h = grid.spacing();
    let scale = h * h;
    for c in data.iter_mut() {
        *c *= scale;
    }
    Ok(SpectralField { grid, coeffs: data })
}

/// Inverse transform back to a real field.
///
/// Requires Hermitian symmetry within [`HERMITIAN_TOL`]; the imaginary part of
/// the result is discarded only if it stays below [`IMAG_RESIDUE_TOL`]
/// relative to the field scale. Violations signal an upstream bug.
pub fn inverse_transform(field: &SpectralField) -> Result<PhysicalField, SpectralError> {
    field.check_finite()?;
    let residual = field.hermitian_residual();
    if residual > HERMITIAN_TOL {
        return Err(SpectralError::HermitianViolation { residual });
    }
    let grid = field.grid.clone();
    let mut data = field.coeffs.clone();
    grid.fft().ifft2(&mut data);
    let l = grid.box_length();
    let scale = 1.0 / (l * l);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for c in data.iter() {
        max_re = max_re.max(c.re.abs());
        max_im = max_im.max(c.im.abs());
    }
    if max_im > IMAG_RESIDUE_TOL * max_re && max_im > 0.0 && max_re > 0.0 {
        return Err(SpectralError::ImaginaryResidue {
            residual: max_im / max_re,
        });
    }
    let values = data.iter().map(|c| c.re * scale).collect();
    Ok(PhysicalField { grid, values })
}

/// Inverse-transform two Hermitian fields with a single complex FFT.
///
/// The pair is packed as F + iG; realness of both outputs is exact when the
/// inputs are Hermitian (callers on hot paths guarantee that by invariant,
/// so no symmetry scan is performed here).
pub fn inverse_pair(
    f: &SpectralField,
    g: &SpectralField,
) -> Result<(PhysicalField, PhysicalField), SpectralError> {
    if !Arc::ptr_eq(&f.grid, &g.grid) {
        return Err(SpectralError::GridMismatch);
    }
    let grid = f.grid.clone();
    let mut data: Vec<Complex64> = f
        .coeffs
        .iter()
        .zip(g.coeffs.iter())
        .map(|(a, b)| Complex64::new(a.re - b.im, a.im + b.re))
        .collect();
    grid.fft().ifft2(&mut data);
    let l = grid.box_length();
    let scale = 1.0 / (l * l);
    let mut fv = Vec::with_capacity(data.len());
    let mut gv = Vec::with_capacity(data.len());
    for c in data.iter() {
        fv.push(c.re * scale);
        gv.push(c.im * scale);
    }
    Ok((
        PhysicalField {
            grid: grid.clone(),
            values: fv,
        },
        PhysicalField { grid, values: gv },
    ))
}

/// Forward-transform two real fields with a single complex FFT.
///
/// Outputs are Hermitian-symmetrized exactly by the unpacking algebra.
pub fn forward_pair(
    f: &PhysicalField,
    g: &PhysicalField,
) -> Result<(SpectralField, SpectralField), SpectralError> {
    if !Arc::ptr_eq(&f.grid, &g.grid) {
        return Err(SpectralError::GridMismatch);
    }
    let grid = f.grid.clone();
    let n = grid.n();
    let mut data: Vec<Complex64> = f
        .values
        .iter()
        .zip(g.values.iter())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    grid.fft().fft2(&mut data);
    let h = grid.spacing();
    let s = 0.5 * h * h;
    let mut fc = vec![Complex64::default(); n * n];
    let mut gc = vec![Complex64::default(); n * n];
    for i1 in 0..n {
        let j1 = grid.conj_index(i1);
        for i2 in 0..n {
            let z = data[grid.idx(i1, i2)];
            let w = data[grid.idx(j1, grid.conj_index(i2))].conj();
            let idx = grid.idx(i1, i2);
            fc[idx] = Complex64::new(s * (z.re + w.re), s * (z.im + w.im));
            gc[idx] = Complex64::new(s * (z.im - w.im), s * (w.re - z.re));
        }
    }
    Ok((
        SpectralField {
            grid: grid.clone(),
            coeffs: fc,
        },
        SpectralField { grid, coeffs: gc },
    ))
}

/// Leray projection onto divergence-free fields:
/// v̂(k) ← v̂(k) − ξ (ξ·v̂)/|ξ|², zero mode passed through.
pub fn leray_project(v1: &SpectralField, v2: &SpectralField) -> (SpectralField, SpectralField) {
    assert!(
        Arc::ptr_eq(&v1.grid, &v2.grid),
        "fields live on different grids"
    );
    let grid = &v1.grid;
    let n = grid.n();
    let mut out1 = v1.clone();
    let mut out2 = v2.clone();
    for i1 in 0..n {
        let xi1 = grid.xi(i1);
        for i2 in 0..n {
            let q = grid.xi_norm_sq(i1, i2);
            if q == 0.0 {
                continue;
            }
            let xi2 = grid.xi(i2);
            let idx = grid.idx(i1, i2);
            let dot = (xi1 * out1.coeffs[idx] + xi2 * out2.coeffs[idx]) / q;
            out1.coeffs[idx] -= xi1 * dot;
            out2.coeffs[idx] -= xi2 * dot;
        }
    }
    (out1, out2)
}

/// ‖f‖_{L²} from the spectral side (Parseval).
pub fn l2_norm(field: &SpectralField) -> f64 {
    let sum: f64 = field.coeffs.iter().map(|c| c.norm_sqr()).sum();
    sum.sqrt() / field.grid.box_length()
}

/// Homogeneous Sobolev seminorm ‖Λ^s f‖_{L²} evaluated spectrally.
/// For s = 0 this is exactly [`l2_norm`].
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    assert!(s >= 0.0, "sobolev_norm requires s >= 0, got {s}");
    if s == 0.0 {
        return l2_norm(field);
    }
    let grid = &field.grid;
    let n = grid.n();
    let mut sum = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            let q = grid.xi_norm_sq(i1, i2);
            if q == 0.0 {
                continue;
            }
            sum += libm::pow(q, s) * field.coeffs[grid.idx(i1, i2)].norm_sqr();
        }
    }
    sum.sqrt() / grid.box_length()
}

/// Real L² inner product ⟨f, g⟩ = ∫ fg dx from the spectral side.
pub fn inner_product(f: &SpectralField, g: &SpectralField) -> f64 {
    debug_assert!(Arc::ptr_eq(&f.grid, &g.grid));
    let sum: f64 = f
        .coeffs
        .iter()
        .zip(g.coeffs.iter())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum();
    sum / (f.grid.box_length() * f.grid.box_length())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn grid(n: usize) -> Arc<Grid2D> {
        Grid2D::new(n).unwrap()
    }

    pub(crate) fn random_bandlimited(g: &Arc<Grid2D>, seed: u64, k_max: i32) -> SpectralField {
        let mut rng = SplitMix64::new(seed);
        let mut f = SpectralField::zeros(g);
        for k1 in -k_max..=k_max {
            for k2 in -k_max..=k_max {
                // Fill each Hermitian pair once, skip (0,0).
                if (k1, k2) <= (-k1, -k2) {
                    continue;
                }
                let (Some(i1), Some(i2)) = (g.index_of_k(k1), g.index_of_k(k2)) else {
                    continue;
                };
                let (Some(j1), Some(j2)) = (g.index_of_k(-k1), g.index_of_k(-k2)) else {
                    continue;
                };
                let c = Complex64::new(rng.next_gaussian(), rng.next_gaussian());
                f.coeffs_mut()[g.idx(i1, i2)] = c;
                f.coeffs_mut()[g.idx(j1, j2)] = c.conj();
            }
        }
        f
    }

    #[test]
    fn constant_field_transforms_to_zero_mode() {
        let g = grid(16);
        let c = 2.5;
        let f = PhysicalField::from_fn(&g, |_, _| c);
        let hat = forward_transform(&f).unwrap();
        let l2 = g.box_length() * g.box_length();
        assert!((hat.zero_mode().re - c * l2).abs() < 1e-10 * l2);
        assert!(hat.zero_mode().im.abs() < 1e-12);
        for (idx, co) in hat.coeffs().iter().enumerate() {
            if idx != 0 {
                assert!(co.norm() < 1e-10, "mode {idx} not zero");
            }
        }
    }

    #[test]
    fn cosine_mode_coefficients() {
        // f = cos(x1) on the 2π box: coefficients (2π)²/2 at k = (±1, 0).
        let g = grid(16);
        let f = PhysicalField::from_fn(&g, |x1, _| libm::cos(x1));
        let hat = forward_transform(&f).unwrap();
        let expect = 0.5 * (2.0 * core::f64::consts::PI).powi(2);
        let at = |k1: i32, k2: i32| {
            hat.coeffs()[g.idx(g.index_of_k(k1).unwrap(), g.index_of_k(k2).unwrap())]
        };
        assert!((at(1, 0).re - expect).abs() < 1e-9);
        assert!((at(-1, 0).re - expect).abs() < 1e-9);
        assert!(at(1, 0).im.abs() < 1e-9);
        let back = inverse_transform(&hat).unwrap();
        for (v, w) in back.values().iter().zip(f.values().iter()) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_band_limited() {
        let g = grid(32);
        let hat = random_bandlimited(&g, 3, 10);
        let phys = inverse_transform(&hat).unwrap();
        let back = forward_transform(&phys).unwrap();
        let scale = hat.max_coeff();
        for (a, b) in back.coeffs().iter().zip(hat.coeffs().iter()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn all_zero_inverts_to_zero() {
        let g = grid(8);
        let z = SpectralField::zeros(&g);
        let phys = inverse_transform(&z).unwrap();
        assert!(phys.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_finite_input_is_named() {
        let g = grid(8);
        let mut f = PhysicalField::zeros(&g);
        f.values_mut()[g.idx(3, 5)] = f64::NAN;
        match forward_transform(&f) {
            Err(SpectralError::NonFiniteInput { i1: 3, i2: 5 }) => {}
            other => panic!("expected named non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn hermitian_violation_detected() {
        let g = grid(8);
        let mut f = SpectralField::zeros(&g);
        f.coeffs_mut()[g.idx(1, 0)] = Complex64::new(1.0, 0.5);
        // No conjugate partner: violation.
        assert!(matches!(
            inverse_transform(&f),
            Err(SpectralError::HermitianViolation { .. })
        ));
    }

    #[test]
    fn fractional_laplacian_eigenfunctions() {
        let g = grid(16);
        // Λ² sin(x1) = sin(x1) since |ξ| = 1.
        let f = forward_transform(&PhysicalField::from_fn(&g, |x1, _| libm::sin(x1))).unwrap();
        let lap = f.fractional_laplacian(2.0).unwrap();
        let scale = f.max_coeff();
        for (a, b) in lap.coeffs().iter().zip(f.coeffs().iter()) {
            assert!((a - b).norm() <= 1e-13 * scale);
        }
        // Λ^{2β} e^{i2x1}: factor 2^{2β} = 8 for β = 1.5.
        let h = SpectralField::cosine_mode(&g, (2, 0), 1.0, 0.3);
        let out = h.fractional_laplacian(3.0).unwrap();
        for (a, b) in out.coeffs().iter().zip(h.coeffs().iter()) {
            assert!((a - 8.0 * b).norm() <= 1e-13 * h.max_coeff());
        }
        // s = 0 is the identity.
        let id = h.fractional_laplacian(0.0).unwrap();
        for (a, b) in id.coeffs().iter().zip(h.coeffs().iter()) {
            assert_eq!(a, b);
        }
        assert!(matches!(
            h.fractional_laplacian(-0.5),
            Err(SpectralError::NegativeExponent { .. })
        ));
    }

    #[test]
    fn fractional_laplacian_zero_mode() {
        let g = grid(8);
        let mut f = SpectralField::zeros(&g);
        f.set_zero_mode(Complex64::new(3.0, 0.0));
        let s0 = f.fractional_laplacian(0.0).unwrap();
        assert_eq!(s0.zero_mode(), Complex64::new(3.0, 0.0));
        let s1 = f.fractional_laplacian(1.3).unwrap();
        assert_eq!(s1.zero_mode(), Complex64::default());
    }

    #[test]
    fn multiplier_composition() {
        let g = grid(16);
        let f = random_bandlimited(&g, 17, 5);
        let once = f.fractional_laplacian(2.1).unwrap();
        let twice = f
            .fractional_laplacian(0.7)
            .unwrap()
            .fractional_laplacian(1.4)
            .unwrap();
        let scale = once.max_coeff();
        for (a, b) in once.coeffs().iter().zip(twice.coeffs().iter()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid(16);
        let f = forward_transform(&PhysicalField::from_fn(&g, |x1, _| libm::sin(x1))).unwrap();
        let d = f.derivative(Axis::X1);
        let cos = forward_transform(&PhysicalField::from_fn(&g, |x1, _| libm::cos(x1))).unwrap();
        let scale = cos.max_coeff();
        for (a, b) in d.coeffs().iter().zip(cos.coeffs().iter()) {
            assert!((a - b).norm() < 1e-10 * scale);
        }
        // ∂₂ of an x₂-independent field vanishes.
        let d2 = f.derivative(Axis::X2);
        assert!(d2.max_coeff() < 1e-14);
    }

    #[test]
    fn perp_gradient_is_divergence_free() {
        let g = grid(32);
        let psi = forward_transform(&PhysicalField::from_fn(&g, |x1, x2| {
            libm::sin(x1) * libm::sin(x2)
        }))
        .unwrap();
        let (u1, u2) = psi.perp_gradient();
        // div u = ∂₁u₁ + ∂₂u₂ = −∂₁∂₂ψ + ∂₂∂₁ψ = 0 exactly.
        let mut div = u1.derivative(Axis::X1);
        div.axpy(1.0, &u2.derivative(Axis::X2));
        assert!(div.max_coeff() < 1e-12 * psi.max_coeff());
    }

    #[test]
    fn dealias_idempotent_and_band_preserving() {
        let g = grid(16);
        let inside = random_bandlimited(&g, 5, 5); // n/3 = 5.33, all kept
        let once = inside.dealias();
        for (a, b) in once.coeffs().iter().zip(inside.coeffs().iter()) {
            assert_eq!(a, b);
        }
        let wide = random_bandlimited(&g, 6, 8);
        let d1 = wide.dealias();
        let d2 = d1.dealias();
        for (a, b) in d1.coeffs().iter().zip(d2.coeffs().iter()) {
            assert_eq!(a, b);
        }
        assert!(d1.coeffs()[g.idx(g.index_of_k(6).unwrap(), 0)].norm() == 0.0);
    }

    #[test]
    fn dealiased_product_matches_direct_convolution() {
        // Two n/3-band-limited fields multiplied on the grid, transformed and
        // dealiased, must equal the exact spectral convolution
        // ĥ(k) = L^{−2} Σ_{k'} f̂(k') ĝ(k−k') on every kept mode.
        let n = 16;
        let g = grid(n);
        let f_hat = random_bandlimited(&g, 61, 5);
        let g_hat = random_bandlimited(&g, 62, 5);
        let fp = inverse_transform(&f_hat).unwrap();
        let gp = inverse_transform(&g_hat).unwrap();
        let product = PhysicalField::from_values(
            &g,
            fp.values()
                .iter()
                .zip(gp.values())
                .map(|(a, b)| a * b)
                .collect(),
        );
        let spectral = forward_transform(&product).unwrap().dealias();

        let l2 = g.box_length() * g.box_length();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for k1 in -(n as i32) / 2 + 1..=(n as i32) / 2 - 1 {
            for k2 in -(n as i32) / 2 + 1..=(n as i32) / 2 - 1 {
                let i1 = g.index_of_k(k1).unwrap();
                let i2 = g.index_of_k(k2).unwrap();
                if !g.dealias_mask(i1, i2) {
                    continue;
                }
                // Direct O(n⁴) convolution over the support of f̂.
                let mut acc = Complex64::default();
                for q1 in -5i32..=5 {
                    for q2 in -5i32..=5 {
                        let (Some(a1), Some(a2)) = (g.index_of_k(q1), g.index_of_k(q2)) else {
                            continue;
                        };
                        let (Some(b1), Some(b2)) = (g.index_of_k(k1 - q1), g.index_of_k(k2 - q2))
                        else {
                            continue;
                        };
                        acc += f_hat.coeffs()[g.idx(a1, a2)] * g_hat.coeffs()[g.idx(b1, b2)];
                    }
                }
                acc /= l2;
                let got = spectral.coeffs()[g.idx(i1, i2)];
                worst = worst.max((got - acc).norm());
                scale = scale.max(acc.norm());
            }
        }
        assert!(scale > 0.0);
        assert!(
            worst <= 1e-12 * scale,
            "convolution mismatch {worst:.3e} vs scale {scale:.3e}"
        );
    }

    #[test]
    fn leray_fixed_point_kernel_idempotent() {
        let g = grid(32);
        // Divergence-free input (perp gradient) is unchanged.
        let psi = random_bandlimited(&g, 21, 8);
        let (u1, u2) = psi.perp_gradient();
        let (p1, p2) = leray_project(&u1, &u2);
        let scale = u1.max_coeff().max(u2.max_coeff());
        for (a, b) in p1.coeffs().iter().zip(u1.coeffs().iter()) {
            assert!((a - b).norm() <= 1e-14 * scale);
        }
        for (a, b) in p2.coeffs().iter().zip(u2.coeffs().iter()) {
            assert!((a - b).norm() <= 1e-14 * scale);
        }
        // Pure gradient input maps to zero (mean modes excepted).
        let phi = random_bandlimited(&g, 22, 8);
        let g1 = phi.derivative(Axis::X1);
        let g2 = phi.derivative(Axis::X2);
        let (z1, z2) = leray_project(&g1, &g2);
        let gscale = g1.max_coeff().max(g2.max_coeff());
        assert!(z1.max_coeff() <= 1e-14 * gscale);
        assert!(z2.max_coeff() <= 1e-14 * gscale);
        // Idempotence on a generic field.
        let v1 = random_bandlimited(&g, 23, 8);
        let v2 = random_bandlimited(&g, 24, 8);
        let (w1, w2) = leray_project(&v1, &v2);
        let (x1, x2) = leray_project(&w1, &w2);
        let wscale = w1.max_coeff().max(w2.max_coeff());
        for (a, b) in x1.coeffs().iter().zip(w1.coeffs().iter()) {
            assert!((a - b).norm() <= 1e-14 * wscale);
        }
        for (a, b) in x2.coeffs().iter().zip(w2.coeffs().iter()) {
            assert!((a - b).norm() <= 1e-14 * wscale);
        }
        // Pointwise spectral divergence of the projection is ~0.
        let n = g.n();
        let mut worst = 0.0f64;
        for i1 in 0..n {
            for i2 in 0..n {
                let idx = g.idx(i1, i2);
                let d = g.xi(i1) * w1.coeffs()[idx] + g.xi(i2) * w2.coeffs()[idx];
                worst = worst.max(d.norm());
            }
        }
        assert!(worst <= 1e-13 * wscale * g.xi_max());
    }

    #[test]
    fn parseval_matches_grid_quadrature() {
        let g = grid(32);
        let hat = random_bandlimited(&g, 31, 9);
        let phys = inverse_transform(&hat).unwrap();
        let h = g.spacing();
        let quad: f64 = phys.values().iter().map(|v| v * v).sum::<f64>() * h * h;
        let spectral_norm = l2_norm(&hat);
        assert!((quad.sqrt() - spectral_norm).abs() <= 1e-10 * spectral_norm);
    }

    #[test]
    fn packed_pair_matches_single_transforms() {
        let g = grid(32);
        let f = random_bandlimited(&g, 41, 9);
        let h = random_bandlimited(&g, 42, 9);
        let (pf, ph) = inverse_pair(&f, &h).unwrap();
        let sf = inverse_transform(&f).unwrap();
        let sh = inverse_transform(&h).unwrap();
        for (a, b) in pf.values().iter().zip(sf.values().iter()) {
            assert!((a - b).abs() < 1e-13 * sf.linf().max(1e-300));
        }
        for (a, b) in ph.values().iter().zip(sh.values().iter()) {
            assert!((a - b).abs() < 1e-13 * sh.linf().max(1e-300));
        }
        let (bf, bh) = forward_pair(&pf, &ph).unwrap();
        let scale = f.max_coeff().max(h.max_coeff());
        for (a, b) in bf.coeffs().iter().zip(f.coeffs().iter()) {
            assert!((a - b).norm() < 1e-12 * scale);
        }
        for (a, b) in bh.coeffs().iter().zip(h.coeffs().iter()) {
            assert!((a - b).norm() < 1e-12 * scale);
        }
        // Unpack algebra yields exactly Hermitian coefficients.
        assert_eq!(bf.hermitian_residual(), 0.0);
        assert_eq!(bh.hermitian_residual(), 0.0);
    }

    #[test]
    fn sobolev_norm_single_mode() {
        let g = grid(16);
        let f = SpectralField::cosine_mode(&g, (2, 0), 1.0, 0.0);
        // ‖Λ^s cos(2x)‖ = 2^s ‖cos(2x)‖.
        let base = sobolev_norm(&f, 0.0);
        let s = 1.5;
        let val = sobolev_norm(&f, s);
        assert!((val - libm::pow(2.0, s) * base).abs() < 1e-12 * val);
        assert!((base - l2_norm(&f)).abs() <= 1e-12 * base);
        // Monotone in s for |ξ| ≥ 1 supported fields.
        assert!(sobolev_norm(&f, 0.5) <= sobolev_norm(&f, 1.7));
    }
}
