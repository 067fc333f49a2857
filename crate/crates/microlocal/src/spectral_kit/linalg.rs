//! Small dense eigenstructure helpers shared by the spectral classifiers.
//!
//! Everything here targets matrices of size at most eight: characteristic
//! polynomials come from the Faddeev-LeVerrier recursion, adjugates from
//! cofactor expansion, and eigenvectors from back-substitution on the
//! complex Schur form.  The Schur route is deterministic and keeps working
//! at (near-)defective points, where the back-substitution divisors are
//! protected so that a genuinely defective matrix shows up as a huge
//! eigenvector-basis condition number instead of a crash.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative protection floor for back-substitution divisors between equal
/// Schur diagonal entries.
const DIVISOR_FLOOR: f64 = 1e-13;

/// Eigenvalues of a complex matrix through its Schur form.
pub fn complex_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(crate::bad_param!("eigenvalues need a square matrix, got {}x{}", m.nrows(), m.ncols()));
    }
    let ev = m
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    Ok(ev.iter().copied().collect())
}

/// Complexify a real matrix.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Eigenvalues of a real matrix (as complex numbers).
pub fn real_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    complex_eigenvalues(&complexify(m))
}

/// Full eigendecomposition: eigenvalues paired with an eigenvector basis,
/// columns normalized to unit length.  Derived from the complex Schur form
/// `M = Q T Q^*` by back-substitution in `T`, so defective matrices yield a
/// (nearly) rank-deficient basis rather than an error.
pub fn eig_full(m: &DMatrix<Complex64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    if !m.is_square() {
        return Err(crate::bad_param!("eigendecomposition needs a square matrix"));
    }
    let n = m.nrows();
    let (q, t) = m.clone().schur().unpack();
    let scale = t.diagonal().iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let floor = DIVISOR_FLOOR * scale;
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let lam = t[(k, k)];
        values.push(lam);
        let mut w = DVector::<Complex64>::zeros(n);
        w[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::default();
            for mcol in (i + 1)..=k {
                s += t[(i, mcol)] * w[mcol];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < floor {
                d = Complex64::new(floor, 0.0);
            }
            w[i] = -s / d;
        }
        let v = &q * w;
        let nv = v.norm();
        vecs.set_column(k, &(v / Complex64::new(nv, 0.0)));
    }
    Ok((values, vecs))
}

/// Condition number (2-norm) of a matrix via its singular values.
pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(0.0f64, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Condition number of the eigenvector basis: the quantitative form of
/// "smoothly diagonalizable" used by the classifiers.
pub fn eigenbasis_condition(m: &DMatrix<Complex64>) -> Result<f64> {
    let (_, v) = eig_full(m)?;
    Ok(condition_number(&v))
}

/// Adjugate of a real matrix by cofactor expansion; satisfies
/// `M adj(M) = det(M) Id` including at singular `M`.
pub fn adjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let mut adj = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let minor = m.clone().remove_row(i).remove_column(k);
            let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
            // Cofactor C_{ik} lands transposed in the adjugate.
            adj[(k, i)] = sign * minor.determinant();
        }
    }
    adj
}

/// Coefficients `c` of `det(lambda Id - M) = lambda^n + c[0] lambda^{n-1}
/// + ... + c[n-1]`, from the Faddeev-LeVerrier recursion.
pub fn char_poly_coeffs(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut coeffs = Vec::with_capacity(n);
    let mut mk = m.clone();
    for k in 1..=n {
        let c = -mk.trace() / k as f64;
        coeffs.push(c);
        if k < n {
            let shifted = &mk + DMatrix::<f64>::identity(n, n) * c;
            mk = m * shifted;
        }
    }
    coeffs
}

/// Evaluate the monic polynomial with the given trailing coefficients and
/// its first two derivatives at `lambda`.
pub fn monic_eval_jet(coeffs: &[f64], lambda: f64) -> (f64, f64, f64) {
    // Horner on p, p', p'' simultaneously.
    let (mut p, mut dp, mut d2p) = (1.0f64, 0.0f64, 0.0f64);
    for &c in coeffs {
        d2p = d2p * lambda + 2.0 * dp;
        dp = dp * lambda + p;
        p = p * lambda + c;
    }
    (p, dp, d2p)
}

/// `det(M - lambda Id)` together with its first two lambda-derivatives,
/// assembled from the characteristic polynomial.
pub fn det_shift_jet(m: &DMatrix<f64>, lambda: f64) -> (f64, f64, f64) {
    let n = m.nrows();
    let coeffs = char_poly_coeffs(m);
    let (p, dp, d2p) = monic_eval_jet(&coeffs, lambda);
    // det(M - lambda Id) = (-1)^n det(lambda Id - M).
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    (sign * p, -sign * dp, sign * d2p)
}

/// Greedy matching of a fresh eigenvalue list onto a reference ordering:
/// returns `perm` with `fresh[perm[i]]` the best match for `reference[i]`.
pub fn match_eigenvalues(reference: &[Complex64], fresh: &[Complex64]) -> Vec<usize> {
    let n = reference.len();
    debug_assert_eq!(n, fresh.len());
    let mut taken = vec![false; n];
    let mut perm = vec![0usize; n];
    for (i, r) in reference.iter().enumerate() {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (k, f) in fresh.iter().enumerate() {
            if !taken[k] && (f - r).norm() < best_d {
                best_d = (f - r).norm();
                best = k;
            }
        }
        taken[best] = true;
        perm[i] = best;
    }
    perm
}
