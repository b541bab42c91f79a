//! Qubit pointers as a time-of-flight momentum meter for a free particle.
//!
//! Two qubits are kicked by a particle at times `t1 < t2` through the
//! bilinear coupling `X ⊗ σᶻ`. After free flight to the read-out time the
//! two-qubit correlations `⟨σˣσˣ⟩` and `⟨σʸσʸ⟩` carry the characteristic
//! function `C_P(λ) = ⟨e^{iλP}⟩` at `λ = 2κ(t2 − t1)`, from which the
//! momentum density follows by Fourier inversion.
//!
//! Everything here runs in dimensionless units (`ħ = M = 1`, lengths in
//! units of the scaling length). The crate is `no_std` and needs only
//! `alloc`; IO, configuration and the command-line front end live in the
//! `tofq` crate.
//!
//! Modules:
//! - [`states`]: grids, particle and pointer states, coupling schedules.
//! - [`analytic`]: closed-form characteristic function and correlations.
//! - [`oracle`]: brute-force propagation of the particle ⊗ two-qubit state.
//! - [`reconstruct`]: sampling `C_P(λ)` and inverting it to a density.
//! - [`shots`]: finite-ensemble sampling of the ±1 correlation outcomes.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
mod error;
pub mod fft;
pub mod oracle;
pub mod reconstruct;
pub mod shots;
pub mod states;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
