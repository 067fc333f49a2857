//! Paralinearization: rewriting a pointwise nonlinearity `F(u, v)`, with
//! `v_l = 2^j d_{x_l} u` the scaled gradient, as paraproducts with the
//! linearized coefficients plus a residual that is smoother than either
//! paraproduct term:
//!
//! `F(u, v) = T_{dF/du} u + sum_l T_{dF/dv_l} v_l + R`,
//!
//! with `R` controlled in a Sobolev norm of twice the excess regularity by
//! a constant depending only on the sup of the pair `(u, v)` times the
//! Sobolev norm of the pair one derivative below the data.

use crate::error::Result;
use crate::field_core::{DyadicFamily, SampledField};
use crate::quantize::apply_para;
use crate::symbol_core::{ComposedEval, SymbolSpec};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

/// Real evaluation `(u, v) -> R^len` of a nonlinearity or one of its
/// differentials; `u` has the component count, `v` stacks the scaled
/// derivatives axis-major (`v[l * ncomp + c]`).
pub type PointMap = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Pointwise nonlinearity together with its differentials in the field and
/// gradient slots.
#[derive(Clone)]
pub struct SystemMap {
    pub ncomp: usize,
    pub dim: usize,
    /// `F(u, v)`, length `ncomp`.
    pub f: PointMap,
    /// Differential in `u`: row-major `ncomp x ncomp`.
    pub d3: PointMap,
    /// Differential in `v`: row-major `ncomp x (ncomp * dim)`, the column
    /// block for axis `l` at offset `l * ncomp`.
    pub d4: PointMap,
}

/// Residual of the paraproduct rewriting, with the norms entering its bound.
#[derive(Clone, Serialize)]
pub struct ParalinearizationReport {
    #[serde(skip)]
    pub residual: SampledField,
    /// Sobolev norm of the residual at smoothness `2(s - 1) - dim/2`.
    pub norm: f64,
    /// Sup norm of the pair `(u, v)` (argument of the nonlinear constant).
    pub sup: f64,
    /// Sobolev norm of the pair at smoothness `s - 1`.
    pub pair_norm: f64,
}

fn split_re(uv: &[Complex64], ncomp: usize) -> (Vec<f64>, Vec<f64>) {
    let u: Vec<f64> = uv[..ncomp].iter().map(|z| z.re).collect();
    let v: Vec<f64> = uv[ncomp..].iter().map(|z| z.re).collect();
    (u, v)
}

/// Linearization coefficient as a composed symbol over the pair carrier:
/// `block` extracts the row-major `ncomp x ncomp` block from the
/// differential's output.
fn coefficient_symbol(
    map: PointMap,
    carrier: &SampledField,
    ncomp: usize,
    block: usize,
    blocks: usize,
) -> SymbolSpec {
    let eval: ComposedEval = Arc::new(move |uv, _xi, out| {
        let (u, v) = split_re(uv, ncomp);
        let m = map(&u, &v);
        debug_assert_eq!(m.len(), ncomp * ncomp * blocks);
        for r in 0..ncomp {
            for c in 0..ncomp {
                out[(r, c)] = Complex64::new(m[r * ncomp * blocks + block * ncomp + c], 0.0);
            }
        }
    });
    SymbolSpec::composed(ncomp, 0.0, u32::MAX, 0.0, eval, carrier.clone()).assume_xi_independent()
}

/// Evaluate `F(u, 2^j du)` and subtract the paraproducts with the linearized
/// coefficients; the returned report carries the residual and the norms in
/// its expected bound.
///
/// The nonlinearity and its differentials act on the real parts of the
/// pair: the systems under study are real-valued, so the field is expected
/// real (the paraproducts, by contrast, are complex-linear, and an
/// imaginary component would enter them but not `F`).
pub fn paralinearize_residual(
    sys: &SystemMap,
    u_h: &SampledField,
    j: u32,
    s: f64,
    family: &DyadicFamily,
) -> Result<ParalinearizationReport> {
    if u_h.ncomp() != sys.ncomp {
        return Err(crate::bad_param!(
            "field has {} components, system expects {}",
            u_h.ncomp(),
            sys.ncomp
        ));
    }
    let grid = *u_h.grid();
    if grid.dim != sys.dim {
        return Err(crate::bad_param!(
            "grid dimension {} does not match system dimension {}",
            grid.dim,
            sys.dim
        ));
    }
    let n = sys.ncomp;
    let d = sys.dim;
    let scale = Complex64::new((2.0f64).powi(j as i32), 0.0);
    let grads: Vec<SampledField> = (0..d).map(|l| u_h.partial(l).scale(scale)).collect();
    let mut parts: Vec<&SampledField> = vec![u_h];
    parts.extend(grads.iter());
    let carrier = SampledField::stack(&parts)?;

    let f = sys.f.clone();
    let nonlinear = carrier.map_values(n, move |uv, out| {
        let (u, v) = split_re(uv, n);
        let w = f(&u, &v);
        for (o, wv) in out.iter_mut().zip(w) {
            *o = Complex64::new(wv, 0.0);
        }
    })?;

    // Paraproducts are taken at scale 0: the coefficients are functions of
    // the pair, not rescaled symbols.
    let a_field = coefficient_symbol(sys.d3.clone(), &carrier, n, 0, 1);
    let mut residual = nonlinear.sub(&apply_para(&a_field, 0, u_h, family)?)?;
    for (l, grad) in grads.iter().enumerate() {
        let a_grad = coefficient_symbol(sys.d4.clone(), &carrier, n, l, d);
        residual = residual.sub(&apply_para(&a_grad, 0, grad, family)?)?;
    }

    let norm = residual.sobolev_norm(2.0 * (s - 1.0) - d as f64 / 2.0);
    let sup = carrier.linf_norm();
    let pair_norm = carrier.sobolev_norm(s - 1.0);
    Ok(ParalinearizationReport {
        residual,
        norm,
        sup,
        pair_norm,
    })
}
