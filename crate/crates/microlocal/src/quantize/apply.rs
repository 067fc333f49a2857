//! Column-sum application of pseudo- and para-differential operators.
//!
//! Both quantizations share one engine: the output is assembled as
//! `out(x) = sum_k e^{i x . xi_k} a_k(x) fhat_k`, where `a_k` is the symbol
//! column at scaled frequency `2^{-j} xi_k`.  For the pseudo-differential
//! kind the column is the raw symbol; for the para-differential kind (and
//! for the pieces of the pdo/para difference decomposition) the column's
//! x-spectrum is reweighted before use.  Phases are exact roots of unity, so
//! the engine is a reordering of the defining formula, not an approximation.

use crate::error::Result;
use crate::field_core::{bracket, fft, DyadicFamily, Grid, SampledField};
use crate::symbol_core::{MatC, SymbolSpec};
use ndarray::Array2;
use num_complex::Complex64;

/// Which operator a symbol is quantized into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantization {
    /// The symbol as given, evaluated at `(x, 2^{-j} xi)`.
    Pdo,
    /// The para-differential version: the symbol's x-spectrum is truncated
    /// below the acting frequency by the admissible weight.
    Para,
}

/// Spectral reweighting applied to each symbol column before quantization.
///
/// Weights are functions of the scaled x-frequency magnitude `|2^{-j} eta|`
/// and the scaled bracket `<2^{-j} xi>` of the column.  They reproduce, in
/// order: the plain symbol, the para-differential cutoff, its complement,
/// and the three pieces of the pdo-minus-para decomposition (the resonant
/// band-diagonal part, the part where the x-frequency dominates, and the
/// low-frequency correction).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ColumnFilter {
    Identity,
    Admissible,
    // Diagnostic weight; production code takes the difference of the two
    // applications instead.
    #[allow(dead_code)]
    AdmissibleComplement,
    DiffResonant,
    DiffHighX,
    DiffLowFreq,
}

impl ColumnFilter {
    /// Weight at scaled x-frequency magnitude `eta` and scaled bracket
    /// `xib`.  With `strip_plateau` the weight is multiplied by
    /// `1 - phi0(2^{n0} eps2 eta)`, which removes the x-frequency plateau
    /// where the complement of the admissible weight vanishes identically.
    pub(crate) fn weight(self, fam: &DyadicFamily, eta: f64, xib: f64, strip_plateau: bool) -> f64 {
        let n0 = fam.n0 as i64;
        let phi_at = |idx: i64, r: f64| -> f64 {
            if idx == 0 {
                fam.phi0(r)
            } else {
                fam.phi_level(idx as u32, r)
            }
        };
        let base = match self {
            ColumnFilter::Identity => 1.0,
            ColumnFilter::Admissible => fam.phi_adm(eta, xib),
            ColumnFilter::AdmissibleComplement => 1.0 - fam.phi_adm(eta, xib),
            ColumnFilter::DiffResonant => {
                // sum over p, q >= 0 with |p - q| < n0 of phi_p(eta) phi_q(xib)
                let mut sum = 0.0;
                let mut ps = vec![0i64];
                ps.extend(fam.active_bands(eta).map(|b| b as i64));
                for p in ps {
                    let vp = phi_at(p, eta);
                    if vp == 0.0 {
                        continue;
                    }
                    let mut w = 0.0;
                    for q in (p - n0 + 1).max(0)..=(p + n0 - 1) {
                        w += phi_at(q, xib);
                    }
                    sum += vp * w;
                }
                sum
            }
            ColumnFilter::DiffHighX => {
                // sum over p >= 0 of phi_p(eta) phi0(2^{n0 - p} xib)
                let mut sum = 0.0;
                let mut ps = vec![0i64];
                ps.extend(fam.active_bands(eta).map(|b| b as i64));
                for p in ps {
                    let margin = (2.0f64).powi((n0 - p) as i32);
                    sum += phi_at(p, eta) * fam.phi0(margin * xib);
                }
                sum
            }
            ColumnFilter::DiffLowFreq => {
                // minus the finite low-index sums left over by telescoping
                let mut sum = 0.0;
                for q in 0..n0 {
                    let margin = (2.0f64).powi((n0 - q) as i32);
                    sum -= fam.phi0(margin * eta) * phi_at(q, xib);
                }
                for p in 0..n0 {
                    let margin = (2.0f64).powi((n0 - p) as i32);
                    sum -= phi_at(p, eta) * fam.phi0(margin * xib);
                }
                sum
            }
        };
        if strip_plateau && self != ColumnFilter::Identity {
            let tilde0 = fam.phi0((2.0f64).powi(fam.n0 as i32) * fam.eps2 * eta);
            base * (1.0 - tilde0)
        } else {
            base
        }
    }
}

/// Exact table of the n-th roots of unity, `roots[t] = e^{2 pi i t / n}`.
fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / n as f64))
        .collect()
}

/// Shared engine: apply the (possibly column-reweighted) symbol at scale j.
pub(crate) fn apply_columns(
    a: &SymbolSpec,
    j: u32,
    f: &SampledField,
    family: &DyadicFamily,
    filter: ColumnFilter,
    strip_plateau: bool,
) -> Result<SampledField> {
    let grid = *f.grid();
    if a.size != f.ncomp() {
        return Err(crate::bad_param!(
            "symbol size {} does not match field components {}",
            a.size,
            f.ncomp()
        ));
    }
    let nn = a.size;
    let pts = grid.points();
    let dim = grid.dim;
    let scale = (2.0f64).powi(-(j as i32));
    let x0 = vec![0.0; dim];

    // Pure multiplier fast path: for x-independent symbols the unfiltered
    // and admissibly filtered quantizations both act diagonally on the
    // spectrum, and coincide exactly.
    if a.x_independent && matches!(filter, ColumnFilter::Identity | ColumnFilter::Admissible) {
        let mut xis = vec![0.0; dim];
        let mut mat = MatC::zeros(nn, nn);
        return Ok(f.multiplier_matrix(|xi, out| {
            for (d, v) in xi.iter().enumerate() {
                xis[d] = scale * v;
            }
            a.eval(&x0, &xis, &mut mat);
            for r in 0..nn {
                for c in 0..nn {
                    out[(r, c)] = mat[(r, c)];
                }
            }
        }));
    }

    let roots = unit_roots(grid.n);
    // Per-axis index of every grid point, for phase lookups.
    let mut pos = vec![vec![0usize; pts]; dim];
    {
        let mut multi = vec![0usize; dim];
        for i in 0..pts {
            grid.flat_to_multi(i, &mut multi);
            for d in 0..dim {
                pos[d][i] = multi[d];
            }
        }
    }
    let needs_weights = filter != ColumnFilter::Identity;
    // Scaled x-frequency magnitude per spectral index, for filter weights.
    let eta_scaled: Vec<f64> = if needs_weights {
        (0..pts).map(|l| scale * grid.xi_norm_at(l)).collect()
    } else {
        Vec::new()
    };
    // Symbols without xi dependence have one column shared by every mode.
    let shares_columns = a.xi_independent;

    let mut out_vals = Array2::<Complex64>::zeros((nn, pts));
    let mut col = Array2::<Complex64>::zeros((nn * nn, pts));
    let mut col_hat = Array2::<Complex64>::zeros((nn * nn, pts));
    let mut shared_hat = Array2::<Complex64>::zeros((0, 0));
    let mut col_ready = false;

    let mut kmulti = vec![0usize; dim];
    let mut ksig = vec![0i64; dim];
    let mut xi = vec![0.0; dim];
    let mut xi_scaled = vec![0.0; dim];
    let mut m = MatC::zeros(nn, nn);
    let mut fk = vec![Complex64::default(); nn];
    let n_axis = grid.n as i64;

    for &kflat in f.active_set() {
        grid.flat_to_multi(kflat, &mut kmulti);
        for d in 0..dim {
            ksig[d] = grid.signed_index(kmulti[d]);
        }
        grid.xi_at(kflat, &mut xi);
        for d in 0..dim {
            xi_scaled[d] = scale * xi[d];
        }
        let xib = bracket(xi_scaled.iter().map(|v| v * v).sum::<f64>().sqrt());
        for (c, slot) in fk.iter_mut().enumerate() {
            *slot = f.hat()[(c, kflat)];
        }

        // Assemble the column values a(x_i, 2^{-j} xi_k), reusing the
        // shared column (or its spectrum) when the symbol has none of its
        // own xi dependence.
        if !(shares_columns && col_ready) {
            for i in 0..pts {
                a.eval_grid_point(&grid, i, &xi_scaled, &mut m);
                for r in 0..nn {
                    for c in 0..nn {
                        col[(r * nn + c, i)] = m[(r, c)];
                    }
                }
            }
            if needs_weights {
                for rc in 0..nn * nn {
                    let row = col.row(rc);
                    let row = row.to_slice().expect("row-major layout");
                    let mut hrow = col_hat.row_mut(rc);
                    let hrow = hrow.as_slice_mut().expect("row-major layout");
                    fft::values_to_coeffs(&grid, row, hrow);
                }
                if shares_columns {
                    shared_hat = col_hat.clone();
                }
            }
            col_ready = true;
        }

        if needs_weights {
            if shares_columns {
                for l in 0..pts {
                    let w = filter.weight(family, eta_scaled[l], xib, strip_plateau);
                    for rc in 0..nn * nn {
                        col_hat[(rc, l)] = shared_hat[(rc, l)] * w;
                    }
                }
            } else {
                for l in 0..pts {
                    let w = filter.weight(family, eta_scaled[l], xib, strip_plateau);
                    if w != 1.0 {
                        for rc in 0..nn * nn {
                            col_hat[(rc, l)] *= w;
                        }
                    }
                }
            }
            for rc in 0..nn * nn {
                let hrow = col_hat.row(rc);
                let hrow = hrow.to_slice().expect("row-major layout");
                let mut row = col.row_mut(rc);
                let row = row.as_slice_mut().expect("row-major layout");
                fft::coeffs_to_values(&grid, hrow, row);
            }
        }

        // out(x_i) += e^{i x_i . xi_k} col(x_i) fhat_k
        for i in 0..pts {
            let mut phase = Complex64::new(1.0, 0.0);
            for d in 0..dim {
                let t = (pos[d][i] as i64 * ksig[d]).rem_euclid(n_axis) as usize;
                phase *= roots[t];
            }
            for r in 0..nn {
                let mut acc = Complex64::default();
                for c in 0..nn {
                    acc += col[(r * nn + c, i)] * fk[c];
                }
                out_vals[(r, i)] += phase * acc;
            }
        }
    }

    SampledField::from_values(grid, out_vals)
}

/// A symbol bound to a grid, scale, and quantization kind.
#[derive(Clone)]
pub struct QuantizedOperator {
    pub symbol: SymbolSpec,
    pub kind: Quantization,
    pub j: u32,
    pub family: DyadicFamily,
    pub grid: Grid,
}

impl QuantizedOperator {
    pub fn pdo(symbol: SymbolSpec, j: u32, grid: Grid) -> QuantizedOperator {
        QuantizedOperator {
            symbol,
            kind: Quantization::Pdo,
            j,
            family: DyadicFamily::default(),
            grid,
        }
    }

    pub fn para(
        symbol: SymbolSpec,
        j: u32,
        grid: Grid,
        family: DyadicFamily,
    ) -> Result<QuantizedOperator> {
        check_family(&family)?;
        Ok(QuantizedOperator {
            symbol,
            kind: Quantization::Para,
            j,
            grid,
            family,
        })
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        if *f.grid() != self.grid {
            return Err(crate::bad_param!("operator bound to a different grid"));
        }
        let filter = match self.kind {
            Quantization::Pdo => ColumnFilter::Identity,
            Quantization::Para => ColumnFilter::Admissible,
        };
        apply_columns(&self.symbol, self.j, f, &self.family, filter, false)
    }
}

fn check_family(family: &DyadicFamily) -> Result<()> {
    if family.n0 < 3 {
        return Err(crate::bad_param!(
            "admissible cutoff requires margin exponent n0 >= 3, got {}",
            family.n0
        ));
    }
    Ok(())
}

/// Pseudo-differential application: the symbol evaluated at `(x, 2^{-j} xi)`
/// against the field's spectrum.
pub fn apply_pdo(a: &SymbolSpec, j: u32, f: &SampledField) -> Result<SampledField> {
    apply_columns(
        a,
        j,
        f,
        &DyadicFamily::default(),
        ColumnFilter::Identity,
        false,
    )
}

/// Para-differential application: as `apply_pdo`, with the symbol's
/// x-spectrum truncated below the acting frequency per column.
pub fn apply_para(
    a: &SymbolSpec,
    j: u32,
    f: &SampledField,
    family: &DyadicFamily,
) -> Result<SampledField> {
    check_family(family)?;
    apply_columns(a, j, f, family, ColumnFilter::Admissible, false)
}
