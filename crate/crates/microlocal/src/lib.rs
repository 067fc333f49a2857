//! Numerical microlocal analysis on periodic grids.
//!
//! This crate builds the pieces needed to probe first-order quasilinear
//! systems `d_t u + F(t, x, u, d_x u) = 0` for Hadamard instability:
//! spectral fields and dyadic decompositions, pseudodifferential and
//! paradifferential quantizations with dyadic scaling, symbolic calculus
//! probes, spectral classification of principal symbols, construction of
//! destabilizing initial data, and localized flow experiments measuring
//! growth rates against lower-bound envelopes.

pub mod error;
pub mod field_core;
pub mod op_calculus;
pub mod quantize;
pub mod symbol_core;

pub use error::{Error, Result};
