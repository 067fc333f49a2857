//! Difference between the two quantizations, split into named pieces.
//!
//! The pseudo-differential and para-differential quantizations of a symbol
//! differ only through the symbol's x-spectrum above the acting frequency.
//! That difference splits into three pieces, classified per acting mode by
//! where the symbol's x-frequency `eta` sits relative to the mode's dyadic
//! band: a resonant piece (bands within the admissibility margin of each
//! other), a piece where the x-frequency dominates, and a low-frequency
//! correction from the telescoping of the band sums.  Each piece carries a
//! factor that vanishes on the low-`eta` plateau, where the whole
//! difference is identically zero.
//!
//! For a coefficient symbol built from a function with Sobolev regularity
//! `s`, the pieces are small: the difference applied to a field of acting
//! frequency `2^j` decays like `2^{-j(s - d/2)}` against the scaled
//! `H^{d/2}`-norm of the input, and like `2^{-j(s - d)}` against its plain
//! norm when `s > d`.

use crate::error::Result;
use crate::field_core::{DyadicFamily, SampledField};
use crate::quantize::apply::{apply_columns, ColumnFilter};
use crate::symbol_core::SymbolSpec;

/// The applied difference `(pdo - para) f` and its three pieces.  The
/// pieces sum to the residual up to floating-point roundoff.
pub struct DifferenceParts {
    /// `(pdo_j(a) - op_j(a)) f`.
    pub residual: SampledField,
    /// Contribution of symbol x-frequencies in bands near the acting band.
    pub resonant: SampledField,
    /// Contribution of symbol x-frequencies above the acting band.
    pub high_x: SampledField,
    /// Correction collecting the finite low-band sums.
    pub low_freq: SampledField,
}

/// Apply the quantization difference and its decomposition at scale j.
pub fn para_pdo_difference(
    a: &SymbolSpec,
    j: u32,
    f: &SampledField,
    family: &DyadicFamily,
) -> Result<DifferenceParts> {
    let pdo = apply_columns(a, j, f, family, ColumnFilter::Identity, false)?;
    let para = apply_columns(a, j, f, family, ColumnFilter::Admissible, false)?;
    let residual = pdo.sub(&para)?;
    let resonant = apply_columns(a, j, f, family, ColumnFilter::DiffResonant, true)?;
    let high_x = apply_columns(a, j, f, family, ColumnFilter::DiffHighX, true)?;
    let low_freq = apply_columns(a, j, f, family, ColumnFilter::DiffLowFreq, true)?;
    Ok(DifferenceParts {
        residual,
        resonant,
        high_x,
        low_freq,
    })
}
