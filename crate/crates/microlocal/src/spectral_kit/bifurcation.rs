//! Branching rates for a one-parameter family of 2x2 blocks whose
//! eigenvalues collide at `t = 0` and leave the real axis transversally.
//!
//! For `B(t)` with eigenvalues `mu_pm = (tr B pm sqrt(D))/2`, where
//! `D(t) = (tr B)^2 - 4 det B` is the discriminant, a transversal onset of
//! ellipticity means `D(0) = D'(0) = 0` and `D''(0) < 0`.  Then
//! `Im mu_pm(t) = pm zeta |t| + O(t^2)` with `zeta = sqrt(-D''(0) / 8)`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;

/// Step for the central stencils on the discriminant.
const FD_STEP: f64 = 1e-3;

/// How exactly the family must collide at `t = 0`, relative to its scale.
const COLLISION_TOL: f64 = 1e-8;

/// Measured branching data of a 2x2 family at `t = 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BifurcationRates {
    /// Rate of the transversal departure from the real axis:
    /// `Im mu_pm ~ pm zeta t`.
    pub zeta: f64,
    /// Measured slope `Im mu_plus(h) / h` at a small probe time.
    pub im_slope_plus: f64,
    /// Measured slope `Im mu_minus(h) / h` at a small probe time.
    pub im_slope_minus: f64,
    /// Discriminant at `t = 0` (should vanish at a collision).
    pub disc: f64,
    /// First time derivative of the discriminant at `t = 0`.
    pub disc_t: f64,
    /// Second time derivative of the discriminant at `t = 0`.
    pub disc_tt: f64,
}

fn discriminant(b: &Matrix2<f64>) -> f64 {
    let tr = b.trace();
    tr * tr - 4.0 * b.determinant()
}

fn eigenvalues(b: &Matrix2<f64>) -> (Complex64, Complex64) {
    let tr = Complex64::new(b.trace(), 0.0);
    let root = Complex64::new(discriminant(b), 0.0).sqrt();
    (0.5 * (tr + root), 0.5 * (tr - root))
}

/// Branching rates of a family that collides at `t = 0`.
///
/// Fails if the family does not actually collide there (`D(0)` or `D'(0)`
/// of the discriminant is not negligible against the family's scale), or if
/// the collision is not a transversal onset of ellipticity
/// (`D''(0) >= 0`: the eigenvalues stay real to second order).
pub fn bifurcation_rates<F>(family: F) -> Result<BifurcationRates>
where
    F: Fn(f64) -> Matrix2<f64>,
{
    let h = FD_STEP;
    let d0 = discriminant(&family(0.0));
    let dp1 = discriminant(&family(h));
    let dm1 = discriminant(&family(-h));
    let dp2 = discriminant(&family(2.0 * h));
    let dm2 = discriminant(&family(-2.0 * h));

    let disc_t = (dm2 - dp2 + 8.0 * (dp1 - dm1)) / (12.0 * h);
    let disc_tt = (-dp2 + 16.0 * dp1 - 30.0 * d0 + 16.0 * dm1 - dm2) / (12.0 * h * h);

    // Discriminant scales like the square of the matrix, so compare against
    // that.
    let b0 = family(0.0);
    let scale = b0.norm().max(1.0).powi(2);
    if d0.abs() > COLLISION_TOL * scale {
        return Err(crate::bad_param!(
            "eigenvalues do not collide at t = 0: discriminant {d0:.3e} against scale {scale:.3e}"
        ));
    }
    if disc_t.abs() > COLLISION_TOL * scale {
        return Err(crate::bad_param!(
            "collision is not stationary at t = 0: discriminant slope {disc_t:.3e} against scale {scale:.3e}"
        ));
    }
    if disc_tt >= -COLLISION_TOL * scale {
        return Err(crate::bad_param!(
            "no transversal onset of ellipticity: second discriminant derivative {disc_tt:.3e} is not negative"
        ));
    }

    let zeta = (-disc_tt / 8.0).sqrt();
    let (mu_p, mu_m) = eigenvalues(&family(h));
    Ok(BifurcationRates {
        zeta,
        im_slope_plus: mu_p.im / h,
        im_slope_minus: mu_m.im / h,
        disc: d0,
        disc_t,
        disc_tt,
    })
}
