//! Numerical laboratory for drift-diffusion equations
//! `u_t + b·∇u + (-Δ)^s u = f` with `s ∈ (0, 1/2]`, built on the weighted
//! extension `div(y^a ∇u) = 0`, `a = 1 - 2s`.
//!
//! The crate is organised bottom-up:
//! grids, fields and Hölder utilities ([`grid`], [`field`], [`holder`]);
//! exact Fourier multipliers ([`spectral`]); the extension solver
//! ([`extension`]); time stepping ([`evolution`]); closed-form barriers
//! ([`barriers`]); and the regularity measurements ([`regularity`]).

// `!(x <= y)` is used on purpose so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod barriers;
pub mod error;
pub mod evolution;
pub mod extension;
pub mod fft;
pub mod field;
pub mod grid;
pub mod holder;
pub mod params;
pub mod regularity;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{ExtendedField, ScalarField};
pub use grid::{make_graded_grid, GradedYGrid, TorusGrid};
pub use holder::{fit_exponent, holder_seminorm, synth_holder, ExponentFit, HolderSynthConfig};
pub use params::FractionalParams;
