//! Dense-matrix oracle for both quantizations.
//!
//! The operators here are assembled entry by entry from the defining sums,
//! with phases computed as `e^{i theta}` from literal dot products and
//! Fourier coefficients taken by direct summation — no FFTs, no shared
//! engine code.  The cost is O(points^3), so this is a cross-validation
//! tool for small grids, not a production path.

use crate::error::Result;
use crate::field_core::{bracket, DyadicFamily, Grid, SampledField};
use crate::symbol_core::{MatC, SymbolSpec};
use ndarray::Array2;
use num_complex::Complex64;

fn dot(x: &[f64], xi: &[f64]) -> f64 {
    x.iter().zip(xi).map(|(a, b)| a * b).sum()
}

/// Collect grid point coordinates and frequency vectors once.
fn grid_tables(grid: &Grid) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let pts = grid.points();
    let mut xs = Vec::with_capacity(pts);
    let mut xis = Vec::with_capacity(pts);
    let mut buf = vec![0.0; grid.dim];
    for i in 0..pts {
        grid.x_at(i, &mut buf);
        xs.push(buf.clone());
        grid.xi_at(i, &mut buf);
        xis.push(buf.clone());
    }
    (xs, xis)
}

/// Dense matrix of the pseudo-differential operator in value space: the
/// action on the stacked vector `v[c * points + m] = f(x_m)_c` reproduces
/// `sum_k e^{i x . xi_k} a(x, 2^{-j} xi_k) fhat_k` with
/// `fhat_k = points^{-1} sum_m e^{-i x_m . xi_k} f(x_m)`.
pub fn dense_pdo_matrix(a: &SymbolSpec, j: u32, grid: &Grid) -> Result<Array2<Complex64>> {
    let nn = a.size;
    let pts = grid.points();
    let (xs, xis) = grid_tables(grid);
    let scale = (2.0f64).powi(-(j as i32));
    let mut m = MatC::zeros(nn, nn);
    let mut out = Array2::zeros((nn * pts, nn * pts));
    for i in 0..pts {
        for k in 0..pts {
            let xi_scaled: Vec<f64> = xis[k].iter().map(|v| scale * v).collect();
            a.eval(&xs[i], &xi_scaled, &mut m);
            for mm in 0..pts {
                let phase =
                    Complex64::from_polar(1.0, dot(&xs[i], &xis[k]) - dot(&xs[mm], &xis[k]));
                let w = phase / pts as f64;
                for r in 0..nn {
                    for c in 0..nn {
                        out[(r * pts + i, c * pts + mm)] += w * m[(r, c)];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Dense matrix of the para-differential operator.  The admissibly filtered
/// column is built by direct double summation: the symbol's x-spectrum at
/// each acting frequency is computed mode by mode, reweighted, and summed
/// back to grid points.
pub fn dense_para_matrix(
    a: &SymbolSpec,
    j: u32,
    grid: &Grid,
    family: &DyadicFamily,
) -> Result<Array2<Complex64>> {
    let nn = a.size;
    let pts = grid.points();
    let (xs, xis) = grid_tables(grid);
    let scale = (2.0f64).powi(-(j as i32));
    let mut m = MatC::zeros(nn, nn);
    let mut out = Array2::zeros((nn * pts, nn * pts));
    let mut sym = vec![Complex64::default(); nn * nn * pts];
    let mut sym_hat = vec![Complex64::default(); nn * nn * pts];
    let mut filt = vec![Complex64::default(); nn * nn * pts];
    for k in 0..pts {
        let xi_scaled: Vec<f64> = xis[k].iter().map(|v| scale * v).collect();
        let xib = bracket(xi_scaled.iter().map(|v| v * v).sum::<f64>().sqrt());
        for (i, x) in xs.iter().enumerate() {
            a.eval(x, &xi_scaled, &mut m);
            for r in 0..nn {
                for c in 0..nn {
                    sym[(r * nn + c) * pts + i] = m[(r, c)];
                }
            }
        }
        // x-spectrum of each entry by direct summation over grid points
        for l in 0..pts {
            for rc in 0..nn * nn {
                let mut acc = Complex64::default();
                for (i, x) in xs.iter().enumerate() {
                    acc += Complex64::from_polar(1.0, -dot(x, &xis[l])) * sym[rc * pts + i];
                }
                sym_hat[rc * pts + l] = acc / pts as f64;
            }
        }
        // reweight and sum back
        for (i, x) in xs.iter().enumerate() {
            for rc in 0..nn * nn {
                let mut acc = Complex64::default();
                for l in 0..pts {
                    let eta = scale * xis[l].iter().map(|v| v * v).sum::<f64>().sqrt();
                    let w = family.phi_adm(eta, xib);
                    acc += Complex64::from_polar(1.0, dot(x, &xis[l])) * sym_hat[rc * pts + l] * w;
                }
                filt[rc * pts + i] = acc;
            }
        }
        for i in 0..pts {
            for mm in 0..pts {
                let phase =
                    Complex64::from_polar(1.0, dot(&xs[i], &xis[k]) - dot(&xs[mm], &xis[k]));
                let w = phase / pts as f64;
                for r in 0..nn {
                    for c in 0..nn {
                        out[(r * pts + i, c * pts + mm)] += w * filt[(r * nn + c) * pts + i];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Apply a dense operator matrix to a field (stacked component-major).
pub fn matvec(mat: &Array2<Complex64>, f: &SampledField) -> Result<SampledField> {
    let pts = f.grid().points();
    let nn = f.ncomp();
    if mat.nrows() != nn * pts || mat.ncols() != nn * pts {
        return Err(crate::bad_param!(
            "matrix is {}x{}, field needs {}",
            mat.nrows(),
            mat.ncols(),
            nn * pts
        ));
    }
    let mut vals = Array2::zeros((nn, pts));
    for r in 0..nn {
        for i in 0..pts {
            let mut acc = Complex64::default();
            for c in 0..nn {
                for mm in 0..pts {
                    acc += mat[(r * pts + i, c * pts + mm)] * f.vals()[(c, mm)];
                }
            }
            vals[(r, i)] = acc;
        }
    }
    SampledField::from_values(*f.grid(), vals)
}
