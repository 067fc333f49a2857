//! Fractional-power growth of coalescing eigenvalue clusters.
//!
//! Near a parameter value where `m` eigenvalues of an analytic matrix family
//! collide, the branches expand in powers of `t^{1/p}` for some `p <= m`.
//! The probe locates the collision inside a bracket, measures the spread of
//! the cluster at dyadically shrinking offsets, and fits the growth
//! exponent; the fit is validated against the algebraic floor `1/m`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::op_calculus::fit_slope;

use super::linalg::complex_eigenvalues;

/// Samples across the bracket when hunting for the collision.
const SCAN_SAMPLES: usize = 65;

/// Eigenvalue gap below which a sample counts as a collision.
const COALESCENCE_TOL: f64 = 1e-6;

/// Radius for counting cluster membership at the collision itself.
const CLUSTER_TOL: f64 = 1e-3;

/// Dyadic offsets measured when fitting the growth exponent.
const OFFSET_LEVELS: u32 = 7;

/// Fitted fractional-power behaviour of a coalescing eigenvalue cluster.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PuiseuxFit {
    /// Parameter value of the collision.
    pub t_star: f64,
    /// Number of eigenvalues in the colliding cluster.
    pub multiplicity: usize,
    /// Fitted exponent of the cluster spread: `spread(dt) ~ dt^exponent`.
    pub exponent: f64,
}

fn min_gap(eigs: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            gap = gap.min((eigs[i] - eigs[j]).norm());
        }
    }
    gap
}

fn closest_pair_center(eigs: &[Complex64]) -> Complex64 {
    let mut best = (0, 1);
    let mut gap = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            let d = (eigs[i] - eigs[j]).norm();
            if d < gap {
                gap = d;
                best = (i, j);
            }
        }
    }
    0.5 * (eigs[best.0] + eigs[best.1])
}

/// Spread of the `count` eigenvalues nearest to `center`.
fn cluster_spread(eigs: &[Complex64], center: Complex64, count: usize) -> f64 {
    let mut dists: Vec<f64> = eigs.iter().map(|z| (z - center).norm()).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    dists[..count].iter().fold(0.0f64, |m, &d| m.max(d))
}

/// Locate an eigenvalue collision of `family` inside `[t_lo, t_hi]` and fit
/// the fractional growth exponent of the colliding cluster.
///
/// Fails if no sample in the bracket brings two eigenvalues within the
/// coalescence tolerance, or if the fitted exponent dips below the
/// algebraic floor `1/multiplicity` by more than the fit tolerance.
pub fn puiseux_probe<F>(family: F, t_lo: f64, t_hi: f64) -> Result<PuiseuxFit>
where
    F: Fn(f64) -> DMatrix<Complex64>,
{
    if !(t_lo < t_hi) || !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(crate::bad_param!("need a finite bracket with t_lo < t_hi"));
    }
    let gap_at = |t: f64| -> Result<f64> { Ok(min_gap(&complex_eigenvalues(&family(t))?)) };

    // Coarse scan, then golden-section refinement of the gap minimum.
    let mut best_i = 0;
    let mut best_gap = f64::INFINITY;
    let step = (t_hi - t_lo) / (SCAN_SAMPLES - 1) as f64;
    for i in 0..SCAN_SAMPLES {
        let g = gap_at(t_lo + step * i as f64)?;
        if g < best_gap {
            best_gap = g;
            best_i = i;
        }
    }
    let mut a = t_lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (t_lo + step * (best_i + 1) as f64).min(t_hi);
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut gc, mut gd) = (gap_at(c)?, gap_at(d)?);
    for _ in 0..70 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = gap_at(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = gap_at(d)?;
        }
    }
    let t_star = 0.5 * (a + b);
    if gap_at(t_star)? > COALESCENCE_TOL {
        return Err(crate::bad_param!(
            "no eigenvalue collision inside the bracket: smallest gap {:.3e}",
            gap_at(t_star)?
        ));
    }

    let eigs_star = complex_eigenvalues(&family(t_star))?;
    let center = closest_pair_center(&eigs_star);
    let multiplicity = eigs_star.iter().filter(|z| (*z - center).norm() < CLUSTER_TOL).count();

    // Cluster spread at dyadic offsets to the right of the collision.
    let reach = 0.5 * (t_hi - t_star);
    if reach <= 0.0 {
        return Err(crate::bad_param!("collision sits at the right edge of the bracket; widen it"));
    }
    let mut pts = Vec::with_capacity(OFFSET_LEVELS as usize);
    for k in 0..OFFSET_LEVELS {
        let dt = reach * 0.5f64.powi(k as i32);
        let eigs = complex_eigenvalues(&family(t_star + dt))?;
        let spread = cluster_spread(&eigs, center, multiplicity);
        if spread <= 0.0 {
            return Err(crate::bad_param!("cluster does not separate at offset {dt:.3e}"));
        }
        pts.push((dt.log2(), spread.log2()));
    }
    let exponent = fit_slope(&pts);

    let floor = 1.0 / multiplicity as f64;
    if exponent < floor - 0.05 {
        return Err(crate::error::Error::Numerical(format!(
            "fitted exponent {exponent:.4} undercuts the algebraic floor {floor:.4} for a cluster of {multiplicity}"
        )));
    }
    Ok(PuiseuxFit { t_star, multiplicity, exponent })
}
