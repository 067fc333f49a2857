//! Commutators of scaled Fourier multipliers with multiplication by a
//! limited-regularity function.
//!
//! For a multiplier `chi` and a function `f` of Holder class `C^theta`, the
//! commutator `[chi(2^{-j} D), f]` expands into derivative terms
//!
//! ```text
//! sum_{1 <= |alpha| <= order} 2^{-j|alpha|} ((-i)^{|alpha|}/|alpha|!)
//!     (d_x^alpha f) (d_xi^alpha chi)(2^{-j} D)
//! ```
//!
//! and the remaining gap is controlled by `2^{-j theta}` times the product of
//! the Holder seminorm of the top derivatives of `f` and the `|x|^theta`
//! moment of the multiplier's kernel.  Both factors are measured here on the
//! grid: the seminorm by divided differences at dyadic offsets, the moment by
//! quadrature of the band-limited kernel proxy.

use crate::error::Result;
use crate::field_core::SampledField;
use crate::quantize::apply_pdo;
use crate::symbol_core::SymbolSpec;
use num_complex::Complex64;
use serde::Serialize;

use super::compose::derivative_symbol;
use super::probes::pointwise_mul;

/// One commutator expansion term, stored with all its coefficients: the
/// field equals `2^{-j|alpha|} ((-i)^{|alpha|}/|alpha|!) (d_x^alpha f)
/// (d_xi^alpha chi)(2^{-j} D) g`.
#[derive(Debug, Clone)]
pub struct CommutatorTerm {
    pub alpha: Vec<u32>,
    pub field: SampledField,
}

/// Commutator of a scaled multiplier with a function, expanded into
/// derivative terms and an identity-defined remainder.
#[derive(Debug, Clone)]
pub struct CommutatorExpansion {
    /// `[chi(2^{-j} D), f] g`.
    pub commutator: SampledField,
    /// Expansion terms, coefficients included.
    pub terms: Vec<CommutatorTerm>,
    /// `commutator - sum(terms)`.
    pub remainder: SampledField,
}

/// Measured constants of the commutator bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CommutatorBoundFactors {
    /// Divided-difference estimate of `sup_{|alpha| = [theta]}` of the
    /// `C^{0, theta - [theta]}` seminorm of `d_x^alpha f`.
    pub holder_sup: f64,
    /// Quadrature of `|x|^theta |K(x)|` over the box, where `K` is the
    /// band-limited kernel of the unscaled multiplier.
    pub kernel_moment: f64,
}

impl CommutatorBoundFactors {
    /// The bound on `|remainder| / |g|` at scale `j`.
    pub fn bound(&self, j: u32, theta: f64) -> f64 {
        (2.0f64).powf(-(j as f64) * theta) * self.holder_sup * self.kernel_moment
    }
}

fn require_multiplier(chi: &SymbolSpec) -> Result<()> {
    if !chi.x_independent {
        return Err(crate::bad_param!(
            "commutator expansion needs an x-independent multiplier symbol"
        ));
    }
    Ok(())
}

/// Expand `[chi(2^{-j} D), f] g` into derivative terms up to `|alpha| <=
/// order` and the remaining gap.  `f` must be a one-component function; the
/// multiplier is applied in plain quantization (para and plain agree for
/// x-independent symbols).
pub fn multiplier_commutator(
    chi: &SymbolSpec,
    f: &SampledField,
    j: u32,
    g: &SampledField,
    order: u32,
) -> Result<CommutatorExpansion> {
    require_multiplier(chi)?;
    if f.ncomp() != 1 {
        return Err(crate::bad_param!(
            "commutator function must have one component, got {}",
            f.ncomp()
        ));
    }
    let fg = pointwise_mul(f, g)?;
    let commutator = apply_pdo(chi, j, &fg)?.sub(&pointwise_mul(f, &apply_pdo(chi, j, g)?)?)?;
    let dim = f.grid().dim;
    let mut terms = Vec::new();
    let mut remainder = commutator.clone();
    for alpha in super::compose::multi_indices_up_to(dim, order) {
        let total: u32 = alpha.iter().sum();
        if total == 0 {
            continue;
        }
        let mut df = f.clone();
        for (axis, &count) in alpha.iter().enumerate() {
            for _ in 0..count {
                df = df.partial(axis);
            }
        }
        let zero = vec![0u32; dim];
        let dchi = derivative_symbol(chi, &zero, &alpha);
        let coeff = super::compose::expansion_coeff(total)
            * Complex64::new((2.0f64).powf(-(j as f64) * total as f64), 0.0);
        let field = pointwise_mul(&df, &apply_pdo(&dchi, j, g)?)?.scale(coeff);
        remainder = remainder.sub(&field)?;
        terms.push(CommutatorTerm { alpha, field });
    }
    Ok(CommutatorExpansion {
        commutator,
        terms,
        remainder,
    })
}

/// Measure the two constants of the commutator bound: the Holder seminorm of
/// the `[theta]`-th derivatives of `f` (divided differences over dyadic grid
/// offsets along each axis) and the `|x|^theta` moment of the band-limited
/// kernel of `chi`.
pub fn commutator_bound_factors(
    chi: &SymbolSpec,
    f: &SampledField,
    theta: f64,
) -> Result<CommutatorBoundFactors> {
    require_multiplier(chi)?;
    if f.ncomp() != 1 {
        return Err(crate::bad_param!(
            "commutator function must have one component, got {}",
            f.ncomp()
        ));
    }
    if theta <= 0.0 {
        return Err(crate::bad_param!("Holder exponent must be positive"));
    }
    let grid = *f.grid();
    let order = theta.floor() as u32;
    let frac = theta - order as f64;

    // Top derivatives of f, one multi-index per axis combination of total
    // order `order`; for the seminorm the axis-aligned ones suffice because
    // the offsets are axis-aligned as well.
    let mut holder_sup = 0.0f64;
    let pts = grid.points();
    let mut multi = vec![0usize; grid.dim];
    for axis in 0..grid.dim {
        let mut df = f.clone();
        for _ in 0..order {
            df = df.partial(axis);
        }
        let vals = df.vals();
        let mut offset = 1usize;
        while offset < grid.n / 2 {
            let dist = offset as f64 * grid.x_step();
            let denom = if frac > 0.0 { dist.powf(frac) } else { 1.0 };
            for m in 0..pts {
                grid.flat_to_multi(m, &mut multi);
                multi[axis] = (multi[axis] + offset) % grid.n;
                let shifted = grid.multi_to_flat(&multi);
                let diff = (vals[(0, m)] - vals[(0, shifted)]).norm();
                holder_sup = holder_sup.max(diff / denom);
            }
            offset *= 2;
        }
    }

    // Band-limited kernel proxy of the unscaled multiplier: coefficients
    // chi(xi_k) / len^d so that values approximate the inverse transform.
    let mut out = crate::symbol_core::MatC::zeros(chi.size, chi.size);
    let volume = grid.len.powf(grid.dim as f64);
    let kernel = SampledField::from_fn_coeffs(grid, 1, |xi, _| {
        chi.eval(&vec![0.0; xi.len()], xi, &mut out);
        out[(0, 0)] / volume
    })?;
    let step = grid.x_step().powi(grid.dim as i32);
    let mut moment = 0.0;
    let mut x = vec![0.0; grid.dim];
    let origin = vec![0.0; grid.dim];
    for m in 0..pts {
        grid.x_at(m, &mut x);
        let dist = grid.torus_distance(&x, &origin);
        moment += dist.powf(theta) * kernel.vals()[(0, m)].norm() * step;
    }
    Ok(CommutatorBoundFactors {
        holder_sup,
        kernel_moment: moment,
    })
}
