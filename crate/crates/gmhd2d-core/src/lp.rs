//! Nonhomogeneous Littlewood–Paley decomposition and Bernstein checks.
//!
//! Id = Σ_{k≥−1} Δ_k with a smooth dyadic partition of unity built from the
//! C^∞ transition T(x) = σ(x)/(σ(x)+σ(1−x)), σ(x) = e^{−1/x}: block k ≥ 0
//! carries T(f−k+1) − T(f−k) at f = log₂|ξ| (support 2^{k−1} < |ξ| < 2^{k+1},
//! adjacent-shell overlap only), and Δ_{−1} = 1 − T(f+1) covers |ξ| ≲ 1.
//! The telescoping sum is exactly 1 on every mode the grid resolves.

use crate::diagnostics::lp_norm;
use crate::spectral::{inverse_transform, Axis, SpectralField};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[cfg_attr(test, allow(unused_imports))] // shadowed by std inherent methods under cfg(test)
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    /// 2^{k_max} must exceed the grid's Nyquist frequency for Σ_k Δ_k = Id.
    KMaxTooSmall { k_max: i32, xi_max: f64 },
    /// Bernstein ratios are defined for k ≥ 0 (not the low block).
    LowBlock,
    /// The ratio is undefined on a zero block.
    ZeroBlock,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::KMaxTooSmall { k_max, xi_max } => {
                write!(
                    f,
                    "2^{k_max} does not exceed the Nyquist frequency {xi_max}"
                )
            }
            LpError::LowBlock => write!(f, "Bernstein check requires a block with k >= 0"),
            LpError::ZeroBlock => write!(f, "Bernstein ratio undefined on a zero block"),
        }
    }
}

impl core::error::Error for LpError {}

/// One dyadic block Δ_k F (k = −1 is the low-frequency block).
#[derive(Debug, Clone)]
pub struct LPBlock {
    pub k: i32,
    pub field: SpectralField,
}

/// C^∞ cutoff: 0 for x ≤ 0, 1 for x ≥ 1, strictly increasing between.
fn transition(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let sigma = |y: f64| libm::exp(-1.0 / y);
    let a = sigma(x);
    let b = sigma(1.0 - x);
    a / (a + b)
}

/// Block-k multiplier at |ξ|.
fn block_weight(k: i32, xi: f64) -> f64 {
    if k == -1 {
        if xi == 0.0 {
            return 1.0;
        }
        return 1.0 - transition(libm::log2(xi) + 1.0);
    }
    if xi == 0.0 {
        return 0.0;
    }
    let f = libm::log2(xi);
    transition(f - k as f64 + 1.0) - transition(f - k as f64)
}

/// Split a field into blocks Δ_{−1}, Δ_0, …, Δ_{k_max}.
pub fn lp_decompose(field: &SpectralField, k_max: i32) -> Result<Vec<LPBlock>, LpError> {
    let grid = field.grid();
    let xi_max = grid.xi_max();
    if k_max < 0 || libm::exp2(k_max as f64) <= xi_max {
        return Err(LpError::KMaxTooSmall { k_max, xi_max });
    }
    let n = grid.n();
    let mut blocks: Vec<LPBlock> = (-1..=k_max)
        .map(|k| LPBlock {
            k,
            field: SpectralField::zeros(grid),
        })
        .collect();
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = grid.idx(i1, i2);
            let c = field.coeffs()[idx];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let xi = grid.xi_norm_sq(i1, i2).sqrt();
            for block in blocks.iter_mut() {
                let w = block_weight(block.k, xi);
                if w != 0.0 {
                    block.field.coeffs_mut()[idx] = w * c;
                }
            }
        }
    }
    Ok(blocks)
}

/// Sum the blocks back (reconstruction residual should be round-off).
pub fn lp_reconstruct(blocks: &[LPBlock]) -> SpectralField {
    let mut out = SpectralField::zeros(blocks[0].field.grid());
    for b in blocks {
        out.axpy(1.0, &b.field);
    }
    out
}

/// Grid-L¹ Bernstein ratio ‖∇^l Δ_k f‖_{L¹} / (2^{kl} ‖Δ_k f‖_{L¹}) where
/// |∇^l g| is the pointwise Frobenius magnitude over all l-fold derivative
/// combinations. Bernstein's inequality says this is bounded uniformly in k.
pub fn bernstein_check(block: &LPBlock, l: u32) -> Result<f64, LpError> {
    if block.k < 0 {
        return Err(LpError::LowBlock);
    }
    let phys = inverse_transform(&block.field).expect("block of a Hermitian field");
    let base = lp_norm(&phys, 1.0);
    if base == 0.0 {
        return Err(LpError::ZeroBlock);
    }
    if l == 0 {
        return Ok(1.0);
    }
    // Accumulate Σ over {1,2}^l of (∂^combo f)² pointwise.
    let npts = phys.values().len();
    let mut sq = vec![0.0f64; npts];
    for combo in 0..(1u32 << l) {
        let mut d = block.field.clone();
        for bit in 0..l {
            let axis = if combo >> bit & 1 == 0 {
                Axis::X1
            } else {
                Axis::X2
            };
            d = d.derivative(axis);
        }
        let dp = inverse_transform(&d).expect("derivative of a Hermitian field");
        for (s, v) in sq.iter_mut().zip(dp.values()) {
            *s += v * v;
        }
    }
    let grid = block.field.grid();
    let h = grid.spacing();
    let grad_l1: f64 = sq.iter().map(|s| s.sqrt()).sum::<f64>() * h * h;
    Ok(grad_l1 / (libm::exp2((block.k * l as i32) as f64) * base))
}
