//! Jets of the characteristic polynomial `P(t, x, xi, lambda) =
//! det(A(t, x, u, d_x u, xi) - lambda Id)` along the solution launched by a
//! datum.
//!
//! At `t = 0` every entry of the jet is determined by the datum and the
//! equation itself: the time derivative of the state is `G = F(0, x, u_in,
//! d_x u_in)`, the time derivative of its gradient is `d_x G`, and one more
//! application of the chain rule gives the second-order coefficients.  The
//! first time derivative is assembled exactly from the derivative of the
//! determinant,
//! `d_t P = tr( adj(A_in - lambda Id) . d_t A )`,
//! while the second-order entries differentiate the same pullback along the
//! manufactured second-order path with central stencils.
//!
//! Real parts of the datum are used throughout: the systems under study are
//! real-valued, and the callbacks see real arguments.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::field_core::SampledField;

use super::linalg::{adjugate, det_shift_jet};
use super::system::{principal_symbol, SystemSpec};

/// Step for the central time stencils (five-point, fourth order).
const FD_STEP: f64 = 1e-3;

/// Largest share of the top frequency octave in the three-derivative
/// spectral mass of an acceptable datum.
const TAIL_SHARE_LIMIT: f64 = 0.5;

/// Values of the characteristic polynomial and its first partial
/// derivatives at `(t, lambda) = (0, lambda)` for fixed `(x, xi)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharJet {
    pub p: f64,
    pub p_lambda: f64,
    pub p_lambda2: f64,
    pub p_t: f64,
    pub p_t2: f64,
    pub p_t_lambda: f64,
}

/// Reject data whose three-derivative spectral mass concentrates in the top
/// frequency octave: for such data the second time derivative of `P` is not
/// pointwise meaningful, and refining the grid would keep shifting the
/// answer.
pub fn require_three_derivatives(datum: &SampledField) -> Result<()> {
    let grid = datum.grid();
    let mut r_max = 0.0f64;
    for k in 0..grid.points() {
        r_max = r_max.max(grid.xi_norm_at(k));
    }
    let mut total = 0.0;
    let mut top = 0.0;
    for c in 0..datum.ncomp() {
        let hat = datum.hat_row(c);
        for (k, z) in hat.iter().enumerate() {
            let r = grid.xi_norm_at(k);
            let w = (1.0 + r * r).powi(3) * z.norm_sqr();
            total += w;
            if r > 0.5 * r_max {
                top += w;
            }
        }
    }
    if total > 0.0 && top > TAIL_SHARE_LIMIT * total {
        return Err(crate::bad_param!(
            "datum is too rough for second time derivatives: top-octave share {:.3} of the three-derivative spectral mass",
            top / total
        ));
    }
    Ok(())
}

/// Real values of all components at a flat grid index.
pub(super) fn values_at(field: &SampledField, m: usize) -> Vec<f64> {
    (0..field.ncomp()).map(|c| field.vals()[(c, m)].re).collect()
}

/// Axis-major gradient values `v[l N + c]` at a flat grid index.
pub(super) fn gradient_at(grads: &[SampledField], m: usize) -> Vec<f64> {
    let ncomp = grads[0].ncomp();
    let mut v = vec![0.0; grads.len() * ncomp];
    for (l, g) in grads.iter().enumerate() {
        for c in 0..ncomp {
            v[l * ncomp + c] = g.vals()[(c, m)].re;
        }
    }
    v
}

/// Flat index of the grid point nearest to `x` (periodic snap).
pub(super) fn nearest_flat(grid: &crate::field_core::Grid, x: &[f64]) -> usize {
    let h = grid.x_step();
    let mut multi = vec![0usize; grid.dim];
    for (i, &xi) in x.iter().enumerate() {
        let idx = (xi / h).round() as i64;
        multi[i] = idx.rem_euclid(grid.n as i64) as usize;
    }
    grid.multi_to_flat(&multi)
}

/// First-order time coefficient of the solution: `G = F(0, x, u, d_x u)` as
/// a field over the grid.
fn time_derivative_field(sys: &SystemSpec, datum: &SampledField, grads: &[SampledField]) -> Result<SampledField> {
    let grid = *datum.grid();
    let pts = grid.points();
    let mut vals = Array2::<Complex64>::default((sys.ncomp, pts));
    let mut x = vec![0.0; grid.dim];
    for m in 0..pts {
        grid.x_at(m, &mut x);
        let u = values_at(datum, m);
        let v = gradient_at(grads, m);
        let g = sys.eval_f(0.0, &x, &u, &v)?;
        for c in 0..sys.ncomp {
            vals[(c, m)] = Complex64::new(g[c], 0.0);
        }
    }
    SampledField::from_values(grid, vals)
}

/// Second-order time coefficient: `d_t G = d_1 F + d_u F . G + d_v F . d_x G`.
fn second_time_derivative_field(
    sys: &SystemSpec,
    datum: &SampledField,
    grads: &[SampledField],
    g_field: &SampledField,
    g_grads: &[SampledField],
) -> Result<SampledField> {
    let grid = *datum.grid();
    let n = sys.ncomp;
    let pts = grid.points();
    let mut vals = Array2::<Complex64>::default((n, pts));
    let mut x = vec![0.0; grid.dim];
    for m in 0..pts {
        grid.x_at(m, &mut x);
        let u = values_at(datum, m);
        let v = gradient_at(grads, m);
        let g = values_at(g_field, m);
        let w = gradient_at(g_grads, m);
        let d1 = (sys.d1f)(0.0, &x, &u, &v);
        let d3 = (sys.d3f)(0.0, &x, &u, &v);
        let d4 = (sys.d4f)(0.0, &x, &u, &v);
        if d1.len() != n || d3.len() != n * n || d4.len() != n * n * sys.dim {
            return Err(crate::bad_param!("derivative callback returned a wrong-sized jacobian"));
        }
        for r in 0..n {
            let mut acc = d1[r];
            for c in 0..n {
                acc += d3[r * n + c] * g[c];
            }
            for l in 0..sys.dim {
                for c in 0..n {
                    acc += d4[r * n * sys.dim + l * n + c] * w[l * n + c];
                }
            }
            vals[(r, m)] = Complex64::new(acc, 0.0);
        }
    }
    SampledField::from_values(grid, vals)
}

/// Characteristic-polynomial jet at `(0, x, xi, lambda)` along the solution
/// launched by `datum`.  `x` is snapped to the nearest grid point.
pub fn char_jet(
    sys: &SystemSpec,
    datum: &SampledField,
    x: &[f64],
    xi: &[f64],
    lambda: f64,
) -> Result<CharJet> {
    if datum.ncomp() != sys.ncomp {
        return Err(crate::bad_param!("datum has {} components, system needs {}", datum.ncomp(), sys.ncomp));
    }
    if datum.grid().dim != sys.dim || x.len() != sys.dim || xi.len() != sys.dim {
        return Err(crate::bad_param!("datum grid, x and xi must all live in dimension {}", sys.dim));
    }
    require_three_derivatives(datum)?;

    let grid = *datum.grid();
    let grads: Vec<SampledField> = (0..sys.dim).map(|l| datum.partial(l)).collect();
    let g_field = time_derivative_field(sys, datum, &grads)?;
    let g_grads: Vec<SampledField> = (0..sys.dim).map(|l| g_field.partial(l)).collect();
    let g2_field = second_time_derivative_field(sys, datum, &grads, &g_field, &g_grads)?;
    let g2_grads: Vec<SampledField> = (0..sys.dim).map(|l| g2_field.partial(l)).collect();

    let m = nearest_flat(&grid, x);
    let mut xs = vec![0.0; grid.dim];
    grid.x_at(m, &mut xs);

    let u0 = values_at(datum, m);
    let v0 = gradient_at(&grads, m);
    let g = values_at(&g_field, m);
    let w = gradient_at(&g_grads, m);
    let g2 = values_at(&g2_field, m);
    let w2 = gradient_at(&g2_grads, m);

    // Second-order manufactured path: exact up to O(tau^3), which is all the
    // second-order stencils below consume.
    let n = sys.ncomp;
    let symbol_along = |tau: f64| -> Result<DMatrix<f64>> {
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n * sys.dim];
        for c in 0..n {
            u[c] = u0[c] + tau * g[c] + 0.5 * tau * tau * g2[c];
        }
        for i in 0..n * sys.dim {
            v[i] = v0[i] + tau * w[i] + 0.5 * tau * tau * w2[i];
        }
        principal_symbol(sys, tau, &xs, &u, &v, xi)
    };

    let a_in = symbol_along(0.0)?;
    let (p, p_lambda, p_lambda2) = det_shift_jet(&a_in, lambda);

    // d_t A by a five-point stencil on the path, then the determinant
    // derivative through the adjugate.
    let h = FD_STEP;
    let a_p1 = symbol_along(h)?;
    let a_m1 = symbol_along(-h)?;
    let a_p2 = symbol_along(2.0 * h)?;
    let a_m2 = symbol_along(-2.0 * h)?;
    let dta = (a_m2.clone() - &a_p2 + (&a_p1 - &a_m1) * 8.0) / (12.0 * h);
    let shifted = &a_in - DMatrix::<f64>::identity(n, n) * lambda;
    let p_t = (adjugate(&shifted) * &dta).trace();

    // Second time derivative of the determinant pullback.
    let phi = |a: &DMatrix<f64>| (a - DMatrix::<f64>::identity(n, n) * lambda).determinant();
    let p_t2 = (-phi(&a_p2) + 16.0 * phi(&a_p1) - 30.0 * phi(&a_in) + 16.0 * phi(&a_m1)
        - phi(&a_m2))
        / (12.0 * h * h);

    // Mixed derivative: lambda-derivative is exact per time sample, then the
    // same five-point stencil in time.
    let dl = |a: &DMatrix<f64>| det_shift_jet(a, lambda).1;
    let p_t_lambda =
        (dl(&a_m2) - dl(&a_p2) + 8.0 * (dl(&a_p1) - dl(&a_m1))) / (12.0 * h);

    Ok(CharJet { p, p_lambda, p_lambda2, p_t, p_t2, p_t_lambda })
}
