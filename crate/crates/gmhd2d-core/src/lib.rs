//! Pseudo-spectral solver core for the 2D generalized MHD equations
//!
//!   u_t + u·∇u = −∇p + b·∇b − ν Λ^{2α} u
//!   b_t + u·∇b = b·∇u − κ Λ^{2β} b
//!   ∇·u = ∇·b = 0
//!
//! on the periodic box [0, L)², where Λ^s is the Fourier multiplier |ξ|^s.
//! The canonical state is the vorticity–current pair (ω, j) with
//! ω = ∇⊥·u and j = ∇⊥·b; velocity and magnetic field are recovered by
//! Biot–Savart inversion. Alongside the solver lives a fractional-heat-kernel
//! laboratory: radial profiles of h = (e^{−|·|^{2β}})∨, their L¹ norms,
//! Duhamel (mild) solutions, and a Littlewood–Paley / Bernstein toolbox.
//!
//! The crate is `no_std` (alloc required); all floating-point math goes
//! through `libm`, so results are bitwise reproducible across builds.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod dynamics;
pub mod fft;
pub mod fields;
pub mod grid;
pub mod kernel;
pub mod lp;
pub mod quadrature;
pub mod rng;
pub mod spectral;
pub mod timestep;

pub use grid::Grid2D;
pub use num_complex::Complex64;
pub use spectral::{PhysicalField, SpectralField};
