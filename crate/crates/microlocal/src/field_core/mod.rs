//! Periodic grids, spectral fields, dyadic frequency decompositions, and the
//! box relabellings used to move between unit-scale and dyadic-scale frames.

pub mod dyadic;
pub mod fft;
pub mod field;
pub mod grid;
pub mod serial;

pub use dyadic::{smoothstep, DyadicFamily};
pub use field::{bracket, SampledField};
pub use grid::Grid;
pub use serial::{load_field, save_field};
