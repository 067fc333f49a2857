//! First-order quasilinear systems `d_t u = F(t, x, u, d_x u)` described by
//! callbacks, their principal symbols, and the ellipticity classifier.
//!
//! The principal symbol is the xi-contraction of the gradient-slot Jacobian,
//! `A(t,x,u,v,xi) = sum_l xi_l d_{v_l} F(t,x,u,v)`: a real `N x N` matrix,
//! linear in `xi`.  A point is called elliptic when the spectrum of `A`
//! leaves the real axis, hyperbolic when it stays on it.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;

use super::linalg::real_eigenvalues;

/// `F(t, x, u, v) -> R^N`; `v` is the gradient in axis-major layout,
/// `v[l * N + c] = d_l u_c`.
pub type SmoothMap = Arc<dyn Fn(f64, &[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Jacobian callback returning a row-major matrix (`N x N` for the state
/// slot, `N x (N d)` with axis-`l` block at columns `l N..(l+1) N` for the
/// gradient slot).
pub type JacobianMap = Arc<dyn Fn(f64, &[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Distinguished point where the classifiers are anchored.
#[derive(Clone, Debug)]
pub struct BasePoint {
    pub x0: Vec<f64>,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    /// Unit covector.
    pub xi0: Vec<f64>,
}

/// A quasilinear first-order system with its partial-derivative callbacks.
#[derive(Clone)]
pub struct SystemSpec {
    pub dim: usize,
    pub ncomp: usize,
    /// `F(t, x, u, v)`.
    pub f: SmoothMap,
    /// `d_t F`.
    pub d1f: SmoothMap,
    /// `d_u F`, row-major `N x N`.
    pub d3f: JacobianMap,
    /// `d_v F`, row-major `N x (N d)` with axis-major column blocks.
    pub d4f: JacobianMap,
    pub base: BasePoint,
}

/// Arguments at which symbols and spectra are evaluated.
#[derive(Clone, Debug)]
pub struct EvalPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub xi: Vec<f64>,
}

/// Tolerance below which an imaginary part counts as zero when splitting
/// hyperbolic from elliptic spectra.
pub const REAL_SPECTRUM_TOL: f64 = 1e-8;

impl SystemSpec {
    pub fn new(
        dim: usize,
        ncomp: usize,
        f: SmoothMap,
        d1f: SmoothMap,
        d3f: JacobianMap,
        d4f: JacobianMap,
        base: BasePoint,
    ) -> Result<SystemSpec> {
        if dim == 0 || ncomp == 0 {
            return Err(crate::bad_param!("system needs dim >= 1 and ncomp >= 1"));
        }
        if ncomp > 8 {
            return Err(crate::bad_param!("systems larger than 8 components are not supported"));
        }
        if base.x0.len() != dim || base.xi0.len() != dim {
            return Err(crate::bad_param!("base point x0/xi0 must have length dim = {dim}"));
        }
        if base.u0.len() != ncomp || base.v0.len() != ncomp * dim {
            return Err(crate::bad_param!("base point u0 must have length {ncomp}, v0 length {}", ncomp * dim));
        }
        let norm = base.xi0.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(crate::bad_param!("base covector must be unit length, got |xi0| = {norm}"));
        }
        Ok(SystemSpec { dim, ncomp, f, d1f, d3f, d4f, base })
    }

    /// Evaluation point assembled from the base point at `t = 0`.
    pub fn base_eval_point(&self) -> EvalPoint {
        EvalPoint {
            t: 0.0,
            x: self.base.x0.clone(),
            u: self.base.u0.clone(),
            v: self.base.v0.clone(),
            xi: self.base.xi0.clone(),
        }
    }

    /// `F` with the callback's output length checked.
    pub(super) fn eval_f(&self, t: f64, x: &[f64], u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let out = (self.f)(t, x, u, v);
        if out.len() != self.ncomp {
            return Err(crate::bad_param!("F callback returned {} values, expected {}", out.len(), self.ncomp));
        }
        Ok(out)
    }

    /// `d_v F` with the callback's output length checked.
    pub(super) fn eval_d4f(&self, t: f64, x: &[f64], u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let out = (self.d4f)(t, x, u, v);
        let want = self.ncomp * self.ncomp * self.dim;
        if out.len() != want {
            return Err(crate::bad_param!("d_v F callback returned {} values, expected {want}", out.len()));
        }
        Ok(out)
    }
}

/// Principal symbol `A = sum_l xi_l d_{v_l} F` at the given arguments.
pub fn principal_symbol(
    sys: &SystemSpec,
    t: f64,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    xi: &[f64],
) -> Result<DMatrix<f64>> {
    if x.len() != sys.dim || xi.len() != sys.dim {
        return Err(crate::bad_param!("x and xi must have length dim = {}", sys.dim));
    }
    if u.len() != sys.ncomp || v.len() != sys.ncomp * sys.dim {
        return Err(crate::bad_param!("u must have length {}, v length {}", sys.ncomp, sys.ncomp * sys.dim));
    }
    let n = sys.ncomp;
    let jac = sys.eval_d4f(t, x, u, v)?;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for l in 0..sys.dim {
            for c in 0..n {
                a[(r, c)] += xi[l] * jac[r * n * sys.dim + l * n + c];
            }
        }
    }
    Ok(a)
}

/// Principal symbol evaluated at an [`EvalPoint`].
pub fn principal_symbol_at(sys: &SystemSpec, pt: &EvalPoint) -> Result<DMatrix<f64>> {
    principal_symbol(sys, pt.t, &pt.x, &pt.u, &pt.v, &pt.xi)
}

/// Verdict of the ellipticity classifier: how far the spectrum of the
/// principal symbol leaves the real axis.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EllipticityVerdict {
    /// Spectrum real up to tolerance.
    Hyperbolic { max_imag: f64 },
    /// Spectrum leaves the real axis by `gap`.
    Elliptic { gap: f64 },
}

impl EllipticityVerdict {
    pub fn is_elliptic(&self) -> bool {
        matches!(self, EllipticityVerdict::Elliptic { .. })
    }

    /// Largest imaginary part in either case.
    pub fn spread(&self) -> f64 {
        match *self {
            EllipticityVerdict::Hyperbolic { max_imag } => max_imag,
            EllipticityVerdict::Elliptic { gap } => gap,
        }
    }
}

/// Classify the principal symbol at a point: elliptic when some eigenvalue
/// has `|Im| > REAL_SPECTRUM_TOL`, hyperbolic otherwise.
pub fn ellipticity_classify(sys: &SystemSpec, pt: &EvalPoint) -> Result<EllipticityVerdict> {
    let a = principal_symbol_at(sys, pt)?;
    let ev = real_eigenvalues(&a)?;
    let gap = ev.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    if gap > REAL_SPECTRUM_TOL {
        Ok(EllipticityVerdict::Elliptic { gap })
    } else {
        Ok(EllipticityVerdict::Hyperbolic { max_imag: gap })
    }
}

/// Names accepted by [`preset`].
pub fn preset_names() -> &'static [&'static str] {
    &["rotation-elliptic", "burgers-transition", "symmetric-hyperbolic"]
}

/// Built-in example systems.
///
/// * `rotation-elliptic`: three components in two space dimensions, with a
///   rotation block of strength `u_3` in the first covector direction and a
///   transport term of speed `u_1` in the second; elliptic at
///   `u0 = (0,0,1)`, `xi0 = (1,0)`, where the elliptic pair sits in the
///   first two coordinates and the base state is purely hyperbolic.
/// * `burgers-transition`: two coupled Burgers-type components whose
///   principal symbol is `xi (u_1 Id + u_2 J)` with `J` the rotation
///   generator, plus a zeroth-order source `u_1` feeding the second
///   component.  Along data with `u_2 = 0` the symbol is initially real
///   with a double eigenvalue `xi u_1`, and `u_2(t) ~ t u_1` drives the
///   discriminant negative like `-4 xi^2 u_1^2 t^2`: a transversal
///   hyperbolic-to-elliptic transition.
/// * `symmetric-hyperbolic`: constant-coefficient symmetric system; strictly
///   hyperbolic with eigenvalues `+- xi sqrt(1.09)`.
pub fn preset(name: &str) -> Result<SystemSpec> {
    match name {
        "rotation-elliptic" => {
            let f: SmoothMap = Arc::new(|_t, _x, u: &[f64], v: &[f64]| {
                // v[l*3 + c] = d_l u_c; F = (u3 d1u2, -u3 d1u1, u1 d2u3).
                vec![u[2] * v[1], -u[2] * v[0], u[0] * v[5]]
            });
            let d1f: SmoothMap = Arc::new(|_, _, _, _| vec![0.0; 3]);
            let d3f: JacobianMap = Arc::new(|_t, _x, _u, v: &[f64]| {
                vec![
                    0.0, 0.0, v[1], //
                    0.0, 0.0, -v[0], //
                    v[5], 0.0, 0.0,
                ]
            });
            let d4f: JacobianMap = Arc::new(|_t, _x, u: &[f64], _v| {
                // Row-major 3 x 6, axis blocks [l*3 .. l*3+3).
                vec![
                    0.0, u[2], 0.0, 0.0, 0.0, 0.0, //
                    -u[2], 0.0, 0.0, 0.0, 0.0, 0.0, //
                    0.0, 0.0, 0.0, 0.0, 0.0, u[0],
                ]
            });
            SystemSpec::new(
                2,
                3,
                f,
                d1f,
                d3f,
                d4f,
                BasePoint {
                    x0: vec![0.0, 0.0],
                    u0: vec![0.0, 0.0, 1.0],
                    v0: vec![0.0; 6],
                    xi0: vec![1.0, 0.0],
                },
            )
        }
        "burgers-transition" => {
            let f: SmoothMap = Arc::new(|_t, _x, u: &[f64], v: &[f64]| {
                vec![u[0] * v[0] - u[1] * v[1], u[1] * v[0] + u[0] * v[1] + u[0]]
            });
            let d1f: SmoothMap = Arc::new(|_, _, _, _| vec![0.0; 2]);
            let d3f: JacobianMap = Arc::new(|_t, _x, _u, v: &[f64]| {
                vec![
                    v[0], -v[1], //
                    v[1] + 1.0, v[0],
                ]
            });
            let d4f: JacobianMap = Arc::new(|_t, _x, u: &[f64], _v| {
                vec![
                    u[0], -u[1], //
                    u[1], u[0],
                ]
            });
            SystemSpec::new(
                1,
                2,
                f,
                d1f,
                d3f,
                d4f,
                BasePoint {
                    x0: vec![std::f64::consts::FRAC_PI_2],
                    u0: vec![1.0, 0.0],
                    v0: vec![-0.25, 0.0],
                    xi0: vec![1.0],
                },
            )
        }
        "symmetric-hyperbolic" => {
            let f: SmoothMap = Arc::new(|_t, _x, _u, v: &[f64]| {
                vec![v[0] + 0.3 * v[1], 0.3 * v[0] - v[1]]
            });
            let d1f: SmoothMap = Arc::new(|_, _, _, _| vec![0.0; 2]);
            let d3f: JacobianMap = Arc::new(|_, _, _, _| vec![0.0; 4]);
            let d4f: JacobianMap = Arc::new(|_, _, _, _| vec![1.0, 0.3, 0.3, -1.0]);
            SystemSpec::new(
                1,
                2,
                f,
                d1f,
                d3f,
                d4f,
                BasePoint { x0: vec![0.0], u0: vec![0.0, 0.0], v0: vec![0.0, 0.0], xi0: vec![1.0] },
            )
        }
        other => crate::bad_param!("unknown system preset '{other}'"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn scalar_transport() -> SystemSpec {
        let f: SmoothMap = Arc::new(|_, _, _, v: &[f64]| vec![v[0]]);
        let d1f: SmoothMap = Arc::new(|_, _, _, _| vec![0.0]);
        let d3f: JacobianMap = Arc::new(|_, _, _, _| vec![0.0]);
        let d4f: JacobianMap = Arc::new(|_, _, _, _| vec![1.0]);
        SystemSpec::new(
            1,
            1,
            f,
            d1f,
            d3f,
            d4f,
            BasePoint { x0: vec![0.0], u0: vec![0.0], v0: vec![0.0], xi0: vec![1.0] },
        )
        .unwrap()
    }

    #[test]
    fn scalar_transport_symbol_is_the_covector() {
        let sys = scalar_transport();
        let a = principal_symbol(&sys, 0.0, &[0.3], &[0.1], &[0.2], &[1.7]).unwrap();
        assert_abs_diff_eq!(a[(0, 0)], 1.7, epsilon = 1e-15);
    }

    #[test]
    fn principal_symbol_is_linear_in_the_covector() {
        let sys = preset("rotation-elliptic").unwrap();
        let u = [0.4, -0.2, 0.9];
        let v = [0.1, 0.0, -0.3, 0.2, 0.5, 0.7];
        let xi = [0.6, -1.1];
        let xi2: Vec<f64> = xi.iter().map(|a| 2.0 * a).collect();
        let a1 = principal_symbol(&sys, 0.0, &[0.0, 0.0], &u, &v, &xi).unwrap();
        let a2 = principal_symbol(&sys, 0.0, &[0.0, 0.0], &u, &v, &xi2).unwrap();
        assert!((a2 - &a1 * 2.0).norm() < 1e-14);
    }

    #[test]
    fn rotation_example_matches_its_closed_form_at_the_base_point() {
        let sys = preset("rotation-elliptic").unwrap();
        let pt = sys.base_eval_point();
        let a = principal_symbol_at(&sys, &pt).unwrap();
        // A(u0, xi0) with u0 = (0,0,1), xi0 = (1,0): rotation generator in
        // the first two coordinates, zero elsewhere.
        let want = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((a.clone() - want).norm() < 1e-14);
        // At the imaginary covector the spectrum is {1, -1, 0}.
        let ai = a.map(|x| Complex64::new(0.0, x));
        let mut ev = super::super::linalg::complex_eigenvalues(&ai).unwrap();
        ev.sort_by(|p, q| p.re.partial_cmp(&q.re).unwrap());
        assert_abs_diff_eq!(ev[0].re, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ev[1].re, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ev[2].re, 1.0, epsilon = 1e-10);
        assert!(ev.iter().all(|z| z.im.abs() < 1e-10));
    }

    #[test]
    fn rotation_example_is_elliptic_with_unit_gap() {
        let sys = preset("rotation-elliptic").unwrap();
        let verdict = ellipticity_classify(&sys, &sys.base_eval_point()).unwrap();
        assert!(verdict.is_elliptic());
        assert_abs_diff_eq!(verdict.spread(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn symmetric_symbol_is_hyperbolic() {
        let sys = preset("symmetric-hyperbolic").unwrap();
        let verdict = ellipticity_classify(&sys, &sys.base_eval_point()).unwrap();
        assert!(!verdict.is_elliptic());
        assert!(verdict.spread() <= REAL_SPECTRUM_TOL);
    }

    #[test]
    fn jordan_block_with_real_eigenvalue_is_hyperbolic() {
        // F = (v_2, 0): principal symbol xi [[0,1],[0,0]], spectrum {0,0}.
        let f: SmoothMap = Arc::new(|_, _, _, v: &[f64]| vec![v[1], 0.0]);
        let d1f: SmoothMap = Arc::new(|_, _, _, _| vec![0.0; 2]);
        let d3f: JacobianMap = Arc::new(|_, _, _, _| vec![0.0; 4]);
        let d4f: JacobianMap = Arc::new(|_, _, _, _| vec![0.0, 1.0, 0.0, 0.0]);
        let sys = SystemSpec::new(
            1,
            2,
            f,
            d1f,
            d3f,
            d4f,
            BasePoint { x0: vec![0.0], u0: vec![0.0; 2], v0: vec![0.0; 2], xi0: vec![1.0] },
        )
        .unwrap();
        let verdict = ellipticity_classify(&sys, &sys.base_eval_point()).unwrap();
        assert!(!verdict.is_elliptic());
    }

    #[test]
    fn base_covector_must_be_unit() {
        let f: SmoothMap = Arc::new(|_, _, _, v: &[f64]| vec![v[0]]);
        let d1f: SmoothMap = Arc::new(|_, _, _, _| vec![0.0]);
        let d3f: JacobianMap = Arc::new(|_, _, _, _| vec![0.0]);
        let d4f: JacobianMap = Arc::new(|_, _, _, _| vec![1.0]);
        let bad = SystemSpec::new(
            1,
            1,
            f,
            d1f,
            d3f,
            d4f,
            BasePoint { x0: vec![0.0], u0: vec![0.0], v0: vec![0.0], xi0: vec![2.0] },
        );
        assert!(bad.is_err());
    }

    #[test]
    fn callback_length_mismatch_is_reported() {
        let sys = scalar_transport();
        // Evaluating with wrong-size arguments is rejected up front.
        assert!(principal_symbol(&sys, 0.0, &[0.0, 1.0], &[0.0], &[0.0], &[1.0]).is_err());
        assert!(principal_symbol(&sys, 0.0, &[0.0], &[0.0, 1.0], &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn every_preset_builds() {
        for name in preset_names() {
            assert!(preset(name).is_ok(), "preset {name} failed to build");
        }
        assert!(preset("no-such-system").is_err());
    }
}
