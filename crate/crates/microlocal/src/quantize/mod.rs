//! Quantization of symbols into operators on periodic fields.
//!
//! Two quantizations are provided: the plain pseudo-differential one, where
//! the symbol is evaluated pointwise at `(x, 2^{-j} xi)`, and the
//! para-differential one, where each symbol column first has its x-spectrum
//! truncated below the acting frequency by an admissible dyadic weight.
//! The difference between the two splits into resonant, high-x-frequency,
//! and low-frequency pieces whose sizes are controlled by the regularity of
//! the symbol's coefficients; `lannes` measures those pieces.  `dense`
//! builds the same operators as explicit matrices by literal summation for
//! cross-validation, and `cutoff` provides smooth phase-space bump
//! operators.

pub mod apply;
pub mod cutoff;
pub mod dense;
pub mod lannes;

pub use apply::{apply_para, apply_pdo, Quantization, QuantizedOperator};
pub use cutoff::{localized_cutoff_op, nested_cutoff_pair, CutoffPair, RadialBump};
pub use dense::{dense_para_matrix, dense_pdo_matrix, matvec};
pub use lannes::{para_pdo_difference, DifferenceParts};
