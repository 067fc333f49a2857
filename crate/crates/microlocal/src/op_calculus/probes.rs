//! Probe corpora and dense cross-checks for estimating operator norms.
//!
//! Operator norms in this crate are reported as maxima of `|Lf|/|f|` over a
//! fixed probe corpus (random band-limited fields plus structured modes and a
//! wave packet).  On small grids the same operator can be assembled as an
//! explicit matrix in the spectral basis, whose singular values and Hermitian
//! eigenvalues give exact references for the probe estimates.

use crate::error::{Error, Result};
use crate::field_core::{Grid, SampledField};
use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use num_complex::Complex64;

/// L2 inner product `(f, g) = len^d sum_k hat(f)_k conj(hat(g)_k)`.
///
/// Consistent with [`SampledField::l2_norm`]: `inner_product(f, f)` is the
/// squared norm, up to roundoff, with zero imaginary part.
pub fn inner_product(f: &SampledField, g: &SampledField) -> Result<Complex64> {
    if f.grid() != g.grid() || f.ncomp() != g.ncomp() {
        return Err(Error::GridMismatch(
            "inner product needs matching grids and component counts".into(),
        ));
    }
    let mut sum = Complex64::default();
    for (a, b) in f.hat().iter().zip(g.hat().iter()) {
        sum += a * b.conj();
    }
    Ok(sum * f.grid().len.powf(f.grid().dim as f64))
}

/// Pointwise multiplication of every component of `f` by a one-component
/// factor `w`.
pub fn pointwise_mul(w: &SampledField, f: &SampledField) -> Result<SampledField> {
    if w.grid() != f.grid() {
        return Err(Error::GridMismatch(
            "pointwise product needs matching grids".into(),
        ));
    }
    if w.ncomp() != 1 {
        return Err(crate::bad_param!(
            "pointwise factor must have one component, got {}",
            w.ncomp()
        ));
    }
    let pts = f.grid().points();
    let mut vals = Array2::default((f.ncomp(), pts));
    for m in 0..pts {
        let wm = w.vals()[(0, m)];
        for c in 0..f.ncomp() {
            vals[(c, m)] = wm * f.vals()[(c, m)];
        }
    }
    SampledField::from_values(*f.grid(), vals)
}

/// Probe corpus for operator-norm estimation: 64 random band-limited unit
/// fields, pure oscillations at the bottom, middle, and top of the band, and
/// a modulated wave packet.  All probes have unit L2 norm.
pub fn probe_corpus(grid: &Grid, ncomp: usize, kmax: i64, seed: u64) -> Result<Vec<SampledField>> {
    if kmax < 1 || kmax >= grid.max_index() {
        return Err(crate::bad_param!(
            "probe band limit {kmax} must lie in [1, {})",
            grid.max_index()
        ));
    }
    let mut probes = Vec::with_capacity(68);
    for i in 0..64u64 {
        let f = SampledField::random_band_limited(*grid, ncomp, kmax, seed.wrapping_add(i))?;
        probes.push(f.normalized_l2()?);
    }
    let comp_scale = Complex64::new(1.0 / (ncomp as f64).sqrt(), 0.0);
    for k in [1, (kmax / 2).max(1), kmax] {
        let mode = SampledField::from_fn_coeffs(*grid, ncomp, |xi, _| {
            let on = xi[0].round() as i64 == k && xi[1..].iter().all(|v| v.abs() < 0.5);
            if on {
                comp_scale
            } else {
                Complex64::default()
            }
        })?;
        probes.push(mode.normalized_l2()?);
    }
    let mut carrier = vec![0i64; grid.dim];
    carrier[0] = 3 * kmax / 4;
    let envelope =
        SampledField::random_band_limited(*grid, ncomp, (kmax / 8).max(1), seed ^ 0x9e37)?;
    probes.push(envelope.modulate(&carrier)?.normalized_l2()?);
    Ok(probes)
}

/// Largest ratio `|op(f)| / |f|` over the probe set.
pub fn probe_operator_norm(
    mut op: impl FnMut(&SampledField) -> Result<SampledField>,
    probes: &[SampledField],
) -> Result<f64> {
    let mut best = 0.0f64;
    for f in probes {
        let n = f.l2_norm();
        if n == 0.0 {
            continue;
        }
        best = best.max(op(f)?.l2_norm() / n);
    }
    Ok(best)
}

/// Matrix of a linear operator in the spectral basis: column `c * pts + k`
/// holds the coefficients of the operator applied to the unit coefficient
/// field `e_{c,k}`.  Rayleigh quotients and singular values in this basis
/// agree with the L2 ones because the basis is orthogonal with equal norms.
pub fn dense_operator_matrix(
    mut op: impl FnMut(&SampledField) -> Result<SampledField>,
    grid: &Grid,
    ncomp: usize,
) -> Result<DMatrix<Complex64>> {
    let pts = grid.points();
    let n = ncomp * pts;
    let mut mat = DMatrix::zeros(n, n);
    for c in 0..ncomp {
        for k in 0..pts {
            let mut hat = Array2::default((ncomp, pts));
            hat[(c, k)] = Complex64::new(1.0, 0.0);
            let basis = SampledField::from_coeffs(*grid, hat)?;
            let out = op(&basis)?;
            for cc in 0..ncomp {
                for kk in 0..pts {
                    mat[(cc * pts + kk, c * pts + k)] = out.hat()[(cc, kk)];
                }
            }
        }
    }
    Ok(mat)
}

/// Operator norm as the largest singular value of a dense spectral matrix.
pub fn dense_operator_norm(mat: &DMatrix<Complex64>) -> f64 {
    mat.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of the Hermitian part `(M + M^H)/2`, computed through
/// the real symmetric embedding `[[Re, -Im], [Im, Re]]` (each eigenvalue of
/// the Hermitian part appears twice in the embedding).
pub fn hermitian_part_min_eig(mat: &DMatrix<Complex64>) -> f64 {
    let m = mat.nrows();
    let mut herm = DMatrix::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            herm[(r, c)] = 0.5 * (mat[(r, c)] + mat[(c, r)].conj());
        }
    }
    let mut real = DMatrix::zeros(2 * m, 2 * m);
    for r in 0..m {
        for c in 0..m {
            let v = herm[(r, c)];
            real[(r, c)] = v.re;
            real[(r, c + m)] = -v.im;
            real[(r + m, c)] = v.im;
            real[(r + m, c + m)] = v.re;
        }
    }
    let eig = real.symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Euclidean norm of a complex vector (used by dense eigen cross-checks).
#[allow(dead_code)]
pub(crate) fn vec_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
