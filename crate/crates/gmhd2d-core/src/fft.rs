//! Power-of-two complex FFT with precomputed plans.
//!
//! Hand-rolled radix-2 so that transforms are dependency-free, `no_std`, and
//! bitwise deterministic for a fixed plan — the sweep/restart reproducibility
//! contracts lean on that. Unnormalized in both directions; callers apply the
//! physical scaling.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Precomputed tables for length-`n` transforms (`n` a power of two).
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    bitrev: Vec<u32>,
    /// Forward twiddles e^{−2πi j/len}, stages concatenated (len = 2, 4, …, n).
    twiddle_fwd: Vec<Complex64>,
    /// Conjugates of the above for the inverse transform.
    twiddle_inv: Vec<Complex64>,
}

impl FftPlan {
    /// Panics if `n` is not a power of two or is < 2.
    pub fn new(n: usize) -> Self {
        assert!(
            n >= 2 && n.is_power_of_two(),
            "FFT length must be a power of two, got {n}"
        );
        let log2n = n.trailing_zeros();
        let mut bitrev = vec![0u32; n];
        for (i, slot) in bitrev.iter_mut().enumerate() {
            *slot = (i as u32).reverse_bits() >> (32 - log2n);
        }
        // Total twiddle storage: 1 + 2 + ... + n/2 = n - 1.
        let mut twiddle_fwd = Vec::with_capacity(n - 1);
        let mut len = 2usize;
        while len <= n {
            let half = len / 2;
            for j in 0..half {
                let angle = -2.0 * core::f64::consts::PI * j as f64 / len as f64;
                twiddle_fwd.push(Complex64::new(libm::cos(angle), libm::sin(angle)));
            }
            len *= 2;
        }
        let twiddle_inv = twiddle_fwd.iter().map(|w| w.conj()).collect();
        Self {
            n,
            bitrev,
            twiddle_fwd,
            twiddle_inv,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn transform(&self, data: &mut [Complex64], twiddles: &[Complex64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2usize;
        let mut tw_off = 0usize;
        while len <= n {
            let half = len / 2;
            let tw = &twiddles[tw_off..tw_off + half];
            let mut base = 0;
            while base < n {
                for j in 0..half {
                    let t = tw[j] * data[base + half + j];
                    let u = data[base + j];
                    data[base + j] = u + t;
                    data[base + half + j] = u - t;
                }
                base += len;
            }
            tw_off += half;
            len *= 2;
        }
    }

    /// Unnormalized forward DFT: X_k = Σ_j x_j e^{−2πi jk/n}.
    pub fn fft(&self, data: &mut [Complex64]) {
        self.transform(data, &self.twiddle_fwd);
    }

    /// Unnormalized inverse DFT: x_j = Σ_k X_k e^{+2πi jk/n} (no 1/n).
    pub fn ifft(&self, data: &mut [Complex64]) {
        self.transform(data, &self.twiddle_inv);
    }
}

/// Two-dimensional n×n transform built from row FFTs and transposes.
#[derive(Debug, Clone)]
pub struct Fft2 {
    plan: FftPlan,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        Self {
            plan: FftPlan::new(n),
        }
    }

    pub fn n(&self) -> usize {
        self.plan.len()
    }

    fn pass(&self, data: &mut [Complex64], scratch: &mut [Complex64], inverse: bool) {
        let n = self.plan.len();
        debug_assert_eq!(data.len(), n * n);
        debug_assert_eq!(scratch.len(), n * n);
        for row in data.chunks_exact_mut(n) {
            if inverse {
                self.plan.ifft(row);
            } else {
                self.plan.fft(row);
            }
        }
        transpose(data, scratch, n);
        for row in scratch.chunks_exact_mut(n) {
            if inverse {
                self.plan.ifft(row);
            } else {
                self.plan.fft(row);
            }
        }
        transpose(scratch, data, n);
    }

    /// Unnormalized forward 2D DFT, row-major `data[i1 * n + i2]`.
    pub fn fft2(&self, data: &mut [Complex64]) {
        let mut scratch = vec![Complex64::default(); data.len()];
        self.pass(data, &mut scratch, false);
    }

    /// Unnormalized inverse 2D DFT (no 1/n² factor).
    pub fn ifft2(&self, data: &mut [Complex64]) {
        let mut scratch = vec![Complex64::default(); data.len()];
        self.pass(data, &mut scratch, true);
    }
}

/// Blocked out-of-place transpose: dst[j * n + i] = src[i * n + j].
fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    let mut bi = 0;
    while bi < n {
        let i_end = (bi + BLOCK).min(n);
        let mut bj = 0;
        while bj < n {
            let j_end = (bj + BLOCK).min(n);
            for i in bi..i_end {
                for j in bj..j_end {
                    dst[j * n + i] = src[i * n + j];
                }
            }
            bj += BLOCK;
        }
        bi += BLOCK;
    }
}
