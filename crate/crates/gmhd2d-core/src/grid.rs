//! Periodic box discretization: wavenumber tables and the dealias mask.

use crate::fft::Fft2;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// Uniform n×n grid on the periodic box [0, L)².
///
/// Mode (i1, i2) carries the integer frequency pair (k(i1), k(i2)) with
/// k(i) = i for i ≤ n/2 and i − n otherwise, i.e. the centered range
/// (−n/2, n/2]. The physical wavenumber is ξ_i = (2π/L)·k(i). The dealias
/// mask (two-thirds rule) drops every mode with max(|k1|, |k2|) > n/3.
pub struct Grid2D {
    n: usize,
    box_length: f64,
    /// ξ value per index along one axis (both axes share the table).
    wavenumbers: Vec<f64>,
    /// Centered integer frequency per index.
    k_index: Vec<i32>,
    /// Per-axis two-thirds-rule keep flag; a 2D mode is kept iff both axes are.
    axis_keep: Vec<bool>,
    fft: Fft2,
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("n", &self.n)
            .field("box_length", &self.box_length)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// n must be a power of two (the transform plan is radix-2) and at least 8.
    InvalidSize { n: usize },
    /// Box length must be positive and finite.
    InvalidLength { box_length: f64 },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::InvalidSize { n } => {
                write!(f, "grid size must be a power of two >= 8, got n={n}")
            }
            GridError::InvalidLength { box_length } => {
                write!(
                    f,
                    "box length must be positive and finite, got {box_length}"
                )
            }
        }
    }
}

impl core::error::Error for GridError {}

impl Grid2D {
    /// Standard 2π box.
    pub fn new(n: usize) -> Result<Arc<Self>, GridError> {
        Self::with_box_length(n, 2.0 * core::f64::consts::PI)
    }

    pub fn with_box_length(n: usize, box_length: f64) -> Result<Arc<Self>, GridError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(GridError::InvalidSize { n });
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(GridError::InvalidLength { box_length });
        }
        let scale = 2.0 * core::f64::consts::PI / box_length;
        let mut wavenumbers = Vec::with_capacity(n);
        let mut k_index = Vec::with_capacity(n);
        let mut axis_keep = Vec::with_capacity(n);
        let cut = n as f64 / 3.0;
        for i in 0..n {
            let k = if i <= n / 2 {
                i as i64
            } else {
                i as i64 - n as i64
            };
            k_index.push(k as i32);
            wavenumbers.push(scale * k as f64);
            axis_keep.push((k.unsigned_abs() as f64) <= cut);
        }
        Ok(Arc::new(Self {
            n,
            box_length,
            wavenumbers,
            k_index,
            axis_keep,
            fft: Fft2::new(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Grid spacing h = L/n.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Physical coordinate of sample index along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// Wavenumber ξ for one axis index.
    pub fn xi(&self, i: usize) -> f64 {
        self.wavenumbers[i]
    }

    /// Centered integer frequency for one axis index.
    pub fn k(&self, i: usize) -> i32 {
        self.k_index[i]
    }

    /// |ξ|² of mode (i1, i2).
    pub fn xi_norm_sq(&self, i1: usize, i2: usize) -> f64 {
        let a = self.wavenumbers[i1];
        let b = self.wavenumbers[i2];
        a * a + b * b
    }

    /// Two-thirds-rule mask: true on the modes kept after dealiasing.
    pub fn dealias_mask(&self, i1: usize, i2: usize) -> bool {
        self.axis_keep[i1] && self.axis_keep[i2]
    }

    pub(crate) fn axis_keep(&self, i: usize) -> bool {
        self.axis_keep[i]
    }

    /// Index of the Hermitian partner −k along one axis.
    pub fn conj_index(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.n - i
        }
    }

    /// Flat row-major index of mode / sample (i1, i2).
    #[inline]
    pub fn idx(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n + i2
    }

    /// Axis index of an integer frequency in the centered range (−n/2, n/2].
    pub fn index_of_k(&self, k: i32) -> Option<usize> {
        let half = (self.n / 2) as i32;
        if k > half || k <= -half {
            return None;
        }
        Some(if k >= 0 {
            k as usize
        } else {
            (k + self.n as i32) as usize
        })
    }

    pub(crate) fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// Largest |ξ| representable on the grid (Nyquist).
    pub fn xi_max(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.box_length * (self.n / 2) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::new(0).is_err());
        assert!(Grid2D::new(4).is_err());
        assert!(Grid2D::new(24).is_err());
        assert!(Grid2D::new(8).is_ok());
        assert!(Grid2D::with_box_length(16, -1.0).is_err());
        assert!(Grid2D::with_box_length(16, f64::NAN).is_err());
    }

    #[test]
    fn wavenumbers_centered() {
        let g = Grid2D::new(8).unwrap();
        let ks: alloc::vec::Vec<i32> = (0..8).map(|i| g.k(i)).collect();
        assert_eq!(ks, alloc::vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert!((g.xi(1) - 1.0).abs() < 1e-15);
        assert!((g.xi(7) + 1.0).abs() < 1e-15);
        assert!((g.xi_max() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn dealias_cut_is_two_thirds() {
        // n = 16: keep |k| <= 5 (16/3 = 5.33).
        let g = Grid2D::new(16).unwrap();
        for i in 0..16 {
            let keep = g.k(i).unsigned_abs() as f64 <= 16.0 / 3.0;
            assert_eq!(g.dealias_mask(i, 0), keep, "i={i}");
        }
        assert!(g.dealias_mask(5, 5));
        assert!(!g.dealias_mask(6, 0));
    }

    #[test]
    fn conjugate_index_pairs() {
        let g = Grid2D::new(16).unwrap();
        assert_eq!(g.conj_index(0), 0);
        assert_eq!(g.conj_index(3), 13);
        assert_eq!(g.conj_index(8), 8); // Nyquist is self-paired
    }

    #[test]
    fn index_of_k_roundtrip() {
        let g = Grid2D::new(16).unwrap();
        for i in 0..16 {
            assert_eq!(g.index_of_k(g.k(i)), Some(i));
        }
        assert_eq!(g.index_of_k(8), Some(8));
        assert_eq!(g.index_of_k(-8), None);
        assert_eq!(g.index_of_k(9), None);
    }
}
