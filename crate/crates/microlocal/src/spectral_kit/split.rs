//! Riesz projectors onto the elliptic and hyperbolic spectral groups,
//! computed by contour integration of the resolvent.
//!
//! For a matrix `M` and a closed contour `C` enclosing part of its spectrum,
//! `P = (1 / 2 pi i) \oint_C (z - M)^{-1} dz`
//! is the projector onto the direct sum of the generalized eigenspaces of
//! the enclosed eigenvalues.  Contours here are unions of circles; the
//! quadrature is the 64-point trapezoid rule per circle, which converges
//! geometrically while every eigenvalue keeps a safe distance from the
//! circle.  That distance is policed: eigenvalues grazing a contour at any
//! sample reject the whole patch.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

use super::linalg::complex_eigenvalues;

/// Quadrature nodes per circle.
const QUAD_POINTS: usize = 64;

/// Fraction of the smallest eigenvalue-to-contour gap kept as safety margin.
const MARGIN_FRACTION: f64 = 0.25;

/// Union of circles in the complex plane, traversed counterclockwise.
#[derive(Clone, Debug, Serialize)]
pub struct Contour {
    pub centers: Vec<Complex64>,
    pub radii: Vec<f64>,
}

impl Contour {
    pub fn new(centers: Vec<Complex64>, radii: Vec<f64>) -> Result<Contour> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(crate::bad_param!("a contour needs one radius per center, at least one circle"));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(crate::bad_param!("contour radii must be positive and finite"));
        }
        Ok(Contour { centers, radii })
    }

    pub fn circle(center: Complex64, radius: f64) -> Result<Contour> {
        Contour::new(vec![center], vec![radius])
    }

    /// Distance from `z` to the nearest circle line.
    fn boundary_distance(&self, z: Complex64) -> f64 {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| ((z - c).norm() - r).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `z` lies strictly inside one of the circles.
    fn encloses(&self, z: Complex64) -> bool {
        self.centers.iter().zip(&self.radii).any(|(c, r)| (z - c).norm() < *r)
    }

    /// Trapezoid contour integral of the resolvent of `m`.
    fn projector(&self, m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let n = m.nrows();
        let id = DMatrix::<Complex64>::identity(n, n);
        let mut p = DMatrix::<Complex64>::zeros(n, n);
        for (c, r) in self.centers.iter().zip(&self.radii) {
            for k in 0..QUAD_POINTS {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / QUAD_POINTS as f64;
                let w = Complex64::from_polar(1.0, theta);
                let z = c + r * w;
                let resolvent = (&id * z - m).clone().lu().try_inverse().ok_or_else(|| {
                    Error::Numerical(format!("resolvent is singular at contour node {z}"))
                })?;
                p += resolvent * (w * (r / QUAD_POINTS as f64));
            }
        }
        Ok(p)
    }
}

/// Elliptic/hyperbolic splitting of a sampled matrix patch.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    /// Elliptic eigenvalue with the smallest real part at the first sample.
    pub lambda0: Complex64,
    /// Growth rate of the selected group: `Re lambda0`.
    pub gamma: f64,
    /// Elliptic eigenvalues at the first sample.
    pub elliptic: Vec<Complex64>,
    /// Hyperbolic eigenvalues at the first sample.
    pub hyperbolic: Vec<Complex64>,
    pub contour_e: Contour,
    pub contour_h: Contour,
    /// Projector onto the elliptic group, one per sample.
    pub proj_e: Vec<DMatrix<Complex64>>,
    /// Projector onto the hyperbolic group, one per sample.
    pub proj_h: Vec<DMatrix<Complex64>>,
    /// Whether every elliptic real part sits strictly below every
    /// hyperbolic one, across all samples.
    pub separated: bool,
    /// `min Re hyperbolic - max Re elliptic` across all samples; negative
    /// when the real parts interleave.
    pub separation_margin: f64,
}

/// Riesz projectors for every sample of a matrix patch, with the elliptic
/// and hyperbolic groups delimited by the two contours.
///
/// Every eigenvalue of every sample must lie inside exactly one of the two
/// contours, and no eigenvalue may come within a quarter of the first
/// sample's smallest eigenvalue-to-contour gap of any circle; violations
/// name the offending sample.
pub fn contour_projectors(
    samples: &[DMatrix<Complex64>],
    contour_e: &Contour,
    contour_h: &Contour,
) -> Result<SpectralSplit> {
    if samples.is_empty() {
        return Err(crate::bad_param!("need at least one matrix sample"));
    }
    let n = samples[0].nrows();
    if samples.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(crate::bad_param!("all samples must be square matrices of one size"));
    }

    // Safety margin from the first sample, then enforced everywhere.
    let eigs0 = complex_eigenvalues(&samples[0])?;
    let gap0 = eigs0
        .iter()
        .map(|&z| contour_e.boundary_distance(z).min(contour_h.boundary_distance(z)))
        .fold(f64::INFINITY, f64::min);
    let margin = MARGIN_FRACTION * gap0;
    if !(margin > 0.0) {
        return Err(crate::bad_param!("an eigenvalue of the first sample lies on a contour"));
    }

    let mut elliptic = Vec::new();
    let mut hyperbolic = Vec::new();
    let mut max_re_e = f64::NEG_INFINITY;
    let mut min_re_h = f64::INFINITY;
    for (idx, m) in samples.iter().enumerate() {
        let eigs = if idx == 0 { eigs0.clone() } else { complex_eigenvalues(m)? };
        for &z in &eigs {
            let d = contour_e.boundary_distance(z).min(contour_h.boundary_distance(z));
            if d < margin {
                return Err(crate::bad_param!(
                    "eigenvalue {z} of sample {idx} is within {d:.3e} of a contour (margin {margin:.3e})"
                ));
            }
            match (contour_e.encloses(z), contour_h.encloses(z)) {
                (true, true) => {
                    crate::bad_param!("contours overlap at eigenvalue {z} of sample {idx}")
                }
                (false, false) => {
                    crate::bad_param!("eigenvalue {z} of sample {idx} escapes both contours")
                }
                (true, false) => {
                    max_re_e = max_re_e.max(z.re);
                    if idx == 0 {
                        elliptic.push(z);
                    }
                }
                (false, true) => {
                    min_re_h = min_re_h.min(z.re);
                    if idx == 0 {
                        hyperbolic.push(z);
                    }
                }
            }
        }
    }
    if elliptic.is_empty() {
        return Err(crate::bad_param!("the elliptic contour encloses no eigenvalue at the first sample"));
    }

    let lambda0 = *elliptic
        .iter()
        .min_by(|a, b| a.re.partial_cmp(&b.re).expect("finite eigenvalues"))
        .expect("nonempty elliptic group");

    let mut proj_e = Vec::with_capacity(samples.len());
    let mut proj_h = Vec::with_capacity(samples.len());
    for m in samples {
        proj_e.push(contour_e.projector(m)?);
        proj_h.push(contour_h.projector(m)?);
    }

    let separation_margin = min_re_h - max_re_e;
    Ok(SpectralSplit {
        lambda0,
        gamma: lambda0.re,
        elliptic,
        hyperbolic,
        contour_e: contour_e.clone(),
        contour_h: contour_h.clone(),
        proj_e,
        proj_h,
        separated: separation_margin > 0.0,
        separation_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_kit::linalg::complexify;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;

    fn cm(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn frobenius(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn diagonal_two_by_two_splits_exactly() {
        let m = DMatrix::from_row_slice(2, 2, &[cm(1.0, 0.0), cm(0.0, 0.0), cm(0.0, 0.0), cm(-1.0, 0.0)]);
        let ce = Contour::circle(cm(1.0, 0.0), 0.5).unwrap();
        let ch = Contour::circle(cm(-1.0, 0.0), 0.5).unwrap();
        let split = contour_projectors(&[m], &ce, &ch).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[cm(1.0, 0.0), cm(0.0, 0.0), cm(0.0, 0.0), cm(0.0, 0.0)]);
        assert!(frobenius(&(&split.proj_e[0] - &expect)) < 1e-13);
        assert_abs_diff_eq!(split.gamma, 1.0, epsilon = 1e-12);
        assert!(split.separated);
    }

    /// Block with spectrum {-1, 0, +1}: the pair at plus/minus 1 is the
    /// elliptic group, the kernel direction is hyperbolic.
    fn rotation_block() -> DMatrix<Complex64> {
        complexify(&nalgebra::DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ))
        .map(|z| z * Complex64::new(0.0, 1.0))
    }

    #[test]
    fn rotation_block_projects_onto_the_plane() {
        let m = rotation_block();
        let ce = Contour::new(vec![cm(1.0, 0.0), cm(-1.0, 0.0)], vec![0.4, 0.4]).unwrap();
        let ch = Contour::circle(cm(0.0, 0.0), 0.4).unwrap();
        let split = contour_projectors(&[m], &ce, &ch).unwrap();
        let expect = DMatrix::from_row_slice(
            3,
            3,
            &[
                cm(1.0, 0.0),
                cm(0.0, 0.0),
                cm(0.0, 0.0),
                cm(0.0, 0.0),
                cm(1.0, 0.0),
                cm(0.0, 0.0),
                cm(0.0, 0.0),
                cm(0.0, 0.0),
                cm(0.0, 0.0),
            ],
        );
        assert!(
            frobenius(&(&split.proj_e[0] - &expect)) < 1e-12,
            "projector error {:.3e}",
            frobenius(&(&split.proj_e[0] - &expect))
        );
        // The third basis vector spans the hyperbolic line, so it is killed
        // by the elliptic projector.
        let u0 = DMatrix::from_row_slice(3, 1, &[cm(0.0, 0.0), cm(0.0, 0.0), cm(1.0, 0.0)]);
        assert!(frobenius(&(&split.proj_e[0] * &u0)) < 1e-13);
        // This split straddles: elliptic real parts are plus/minus 1 around
        // the hyperbolic 0.
        assert!(!split.separated);
        assert_abs_diff_eq!(split.gamma, -1.0, epsilon = 1e-10);
        assert_eq!(split.elliptic.len(), 2);
        assert_eq!(split.hyperbolic.len(), 1);
    }

    #[test]
    fn projectors_are_complete_idempotent_and_commute() {
        let m = rotation_block();
        let ce = Contour::new(vec![cm(1.0, 0.0), cm(-1.0, 0.0)], vec![0.4, 0.4]).unwrap();
        let ch = Contour::circle(cm(0.0, 0.0), 0.4).unwrap();
        let split = contour_projectors(&[m], &ce, &ch).unwrap();
        let pe = &split.proj_e[0];
        let ph = &split.proj_h[0];
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert!(frobenius(&(pe + ph - id)) < 1e-10, "completeness");
        assert!(frobenius(&(pe * pe - pe)) < 1e-10, "idempotence");
        assert!(frobenius(&(pe * ph)) < 1e-10, "orthogonality of ranges");
        assert!(frobenius(&(pe * &m - m.clone() * pe)) < 1e-8, "commutation with the symbol");
    }

    #[test]
    fn random_diagonalizable_matrix_matches_eigenprojector() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        // Well-separated spectrum, random well-conditioned basis.
        let lambdas = [cm(2.0, 0.3), cm(-1.5, -0.2), cm(0.1, 1.0), cm(0.0, -0.9)];
        let mut v = DMatrix::<Complex64>::identity(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    v[(i, j)] = cm(0.3 * rng.gen_range(-1.0..1.0), 0.3 * rng.gen_range(-1.0..1.0));
                }
            }
        }
        let v_inv = v.clone().try_inverse().unwrap();
        let m = &v * DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&lambdas)) * &v_inv;

        // Exact projector onto the first two eigendirections.
        let sel = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[
            cm(1.0, 0.0),
            cm(1.0, 0.0),
            cm(0.0, 0.0),
            cm(0.0, 0.0),
        ]));
        let exact = &v * sel * &v_inv;

        let ce = Contour::new(vec![lambdas[0], lambdas[1]], vec![0.5, 0.5]).unwrap();
        let ch = Contour::new(vec![lambdas[2], lambdas[3]], vec![0.5, 0.5]).unwrap();
        let split = contour_projectors(&[m], &ce, &ch).unwrap();
        let err = frobenius(&(&split.proj_e[0] - &exact));
        assert!(err < 1e-9, "quadrature projector vs eigenprojector: {err:.3e}");
    }

    #[test]
    fn projectors_conjugate_under_similarity() {
        let m = rotation_block();
        let s = DMatrix::from_row_slice(
            3,
            3,
            &[
                cm(1.0, 0.0),
                cm(0.2, 0.1),
                cm(0.0, 0.0),
                cm(0.0, 0.0),
                cm(1.0, 0.0),
                cm(-0.3, 0.0),
                cm(0.1, 0.0),
                cm(0.0, 0.0),
                cm(1.0, 0.0),
            ],
        );
        let s_inv = s.clone().try_inverse().unwrap();
        let conj = &s * &m * &s_inv;
        let ce = Contour::new(vec![cm(1.0, 0.0), cm(-1.0, 0.0)], vec![0.4, 0.4]).unwrap();
        let ch = Contour::circle(cm(0.0, 0.0), 0.4).unwrap();
        let p = contour_projectors(&[m], &ce, &ch).unwrap().proj_e[0].clone();
        let p_conj = contour_projectors(&[conj], &ce, &ch).unwrap().proj_e[0].clone();
        let err = frobenius(&(&s * &p * &s_inv - p_conj));
        assert!(err < 1e-9, "similarity transport error {err:.3e}");
    }

    #[test]
    fn grazing_eigenvalue_is_rejected_with_its_sample() {
        let good = DMatrix::from_row_slice(2, 2, &[cm(1.0, 0.0), cm(0.0, 0.0), cm(0.0, 0.0), cm(-1.0, 0.0)]);
        // Second sample drifts its top eigenvalue almost onto the circle.
        let bad = DMatrix::from_row_slice(2, 2, &[cm(1.49, 0.0), cm(0.0, 0.0), cm(0.0, 0.0), cm(-1.0, 0.0)]);
        let ce = Contour::circle(cm(1.0, 0.0), 0.5).unwrap();
        let ch = Contour::circle(cm(-1.0, 0.0), 0.5).unwrap();
        let err = contour_projectors(&[good, bad], &ce, &ch).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sample 1"), "error should name the sample: {msg}");
    }

    #[test]
    fn escaping_eigenvalue_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[cm(5.0, 0.0), cm(0.0, 0.0), cm(0.0, 0.0), cm(-1.0, 0.0)]);
        let ce = Contour::circle(cm(1.0, 0.0), 0.5).unwrap();
        let ch = Contour::circle(cm(-1.0, 0.0), 0.5).unwrap();
        assert!(contour_projectors(&[m], &ce, &ch).is_err());
    }

    #[test]
    fn projector_field_is_lipschitz_along_a_smooth_patch() {
        // Sample M(s) with eigenvalues drifting smoothly; the projector
        // field should move at a comparable rate (no spikes), as long as the
        // contours keep their distance.
        let family = |s: f64| {
            DMatrix::from_row_slice(
                2,
                2,
                &[cm(1.0 + 0.2 * s, 0.0), cm(0.3 * s, 0.0), cm(0.0, 0.0), cm(-1.0 - 0.1 * s, 0.0)],
            )
        };
        let samples: Vec<_> = (0..9).map(|i| family(i as f64 / 8.0)).collect();
        let ce = Contour::circle(cm(1.1, 0.0), 0.6).unwrap();
        let ch = Contour::circle(cm(-1.05, 0.0), 0.6).unwrap();
        let split = contour_projectors(&samples, &ce, &ch).unwrap();
        let mut max_step = 0.0f64;
        for w in split.proj_e.windows(2) {
            max_step = max_step.max(frobenius(&(&w[1] - &w[0])));
        }
        // Parameter step is 1/8 and the drift is order one, so steps far
        // above that scale would signal an unstable quadrature.
        assert!(max_step < 0.1, "projector step {max_step:.3e}");
        assert!(split.separated);
    }
}
