use super::fft::{coeffs_to_values, values_to_coeffs};
use super::grid::Grid;
use crate::error::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A vector-valued trigonometric polynomial on a periodic grid.
///
/// Both representations are kept in sync: `vals[(c, m)]` is component `c`
/// sampled at grid point `m`, and `hat[(c, k)]` is the Fourier coefficient in
/// the expansion `u_c(x) = sum_k hat[(c,k)] exp(i x . xi_k)`.
#[derive(Debug, Clone)]
pub struct SampledField {
    grid: Grid,
    ncomp: usize,
    vals: Array2<Complex64>,
    hat: Array2<Complex64>,
    /// Lazily computed list of spectral indices with nonzero coefficients,
    /// shared by off-grid evaluation.
    active: std::sync::OnceLock<Vec<usize>>,
}

/// Japanese bracket `(1 + |xi|^2)^(1/2)`.
#[inline]
pub fn bracket(xi_norm: f64) -> f64 {
    xi_norm.hypot(1.0)
}

impl SampledField {
    pub fn zeros(grid: Grid, ncomp: usize) -> SampledField {
        let pts = grid.points();
        SampledField {
            grid,
            ncomp,
            vals: Array2::default((ncomp, pts)),
            hat: Array2::default((ncomp, pts)),
            active: std::sync::OnceLock::new(),
        }
    }

    pub fn from_values(grid: Grid, vals: Array2<Complex64>) -> Result<SampledField> {
        let (ncomp, pts) = vals.dim();
        if pts != grid.points() {
            return Err(Error::GridMismatch(format!(
                "value array has {pts} points, grid has {}",
                grid.points()
            )));
        }
        let mut hat = Array2::default((ncomp, pts));
        for c in 0..ncomp {
            values_to_coeffs(
                &grid,
                vals.row(c).as_slice().expect("row-major layout"),
                hat.row_mut(c).as_slice_mut().expect("row-major layout"),
            );
        }
        Ok(SampledField {
            grid,
            ncomp,
            vals,
            hat,
            active: std::sync::OnceLock::new(),
        })
    }

    pub fn from_coeffs(grid: Grid, hat: Array2<Complex64>) -> Result<SampledField> {
        let (ncomp, pts) = hat.dim();
        if pts != grid.points() {
            return Err(Error::GridMismatch(format!(
                "coefficient array has {pts} points, grid has {}",
                grid.points()
            )));
        }
        let mut vals = Array2::default((ncomp, pts));
        for c in 0..ncomp {
            coeffs_to_values(
                &grid,
                hat.row(c).as_slice().expect("row-major layout"),
                vals.row_mut(c).as_slice_mut().expect("row-major layout"),
            );
        }
        Ok(SampledField {
            grid,
            ncomp,
            vals,
            hat,
            active: std::sync::OnceLock::new(),
        })
    }

    /// Build from a pointwise value function `f(x, component)`.
    pub fn from_fn_values(
        grid: Grid,
        ncomp: usize,
        mut f: impl FnMut(&[f64], usize) -> Complex64,
    ) -> Result<SampledField> {
        let pts = grid.points();
        let mut vals = Array2::default((ncomp, pts));
        let mut x = vec![0.0; grid.dim];
        for m in 0..pts {
            grid.x_at(m, &mut x);
            for c in 0..ncomp {
                vals[(c, m)] = f(&x, c);
            }
        }
        SampledField::from_values(grid, vals)
    }

    /// Build from a coefficient function `f(xi, component)`.
    pub fn from_fn_coeffs(
        grid: Grid,
        ncomp: usize,
        mut f: impl FnMut(&[f64], usize) -> Complex64,
    ) -> Result<SampledField> {
        let pts = grid.points();
        let mut hat = Array2::default((ncomp, pts));
        let mut xi = vec![0.0; grid.dim];
        for k in 0..pts {
            grid.xi_at(k, &mut xi);
            for c in 0..ncomp {
                hat[(c, k)] = f(&xi, c);
            }
        }
        SampledField::from_coeffs(grid, hat)
    }

    /// Deterministic random field, band-limited to `|k_axis| <= kmax`.
    pub fn random_band_limited(
        grid: Grid,
        ncomp: usize,
        kmax: i64,
        seed: u64,
    ) -> Result<SampledField> {
        if kmax >= grid.max_index() {
            return Err(Error::InvalidParameter(format!(
                "kmax {kmax} must stay below the axis Nyquist index {}",
                grid.max_index()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = grid.points();
        let mut hat = Array2::default((ncomp, pts));
        let mut k = vec![0i64; grid.dim];
        for flat in 0..pts {
            grid.k_at(flat, &mut k);
            if k.iter().all(|&ka| ka.abs() <= kmax) {
                for c in 0..ncomp {
                    hat[(c, flat)] =
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
        }
        SampledField::from_coeffs(grid, hat)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn vals(&self) -> &Array2<Complex64> {
        &self.vals
    }

    pub fn hat(&self) -> &Array2<Complex64> {
        &self.hat
    }

    /// Component values as a contiguous slice.
    pub fn vals_row(&self, c: usize) -> &[Complex64] {
        self.vals.row(c).to_slice().expect("row-major layout")
    }

    /// Component coefficients as a contiguous slice.
    pub fn hat_row(&self, c: usize) -> &[Complex64] {
        self.hat.row(c).to_slice().expect("row-major layout")
    }

    /// Value vector at a flat grid point.
    pub fn value_at(&self, m: usize) -> Vec<Complex64> {
        (0..self.ncomp).map(|c| self.vals[(c, m)]).collect()
    }

    /// Extract one component as a scalar field.
    pub fn component(&self, c: usize) -> SampledField {
        let pts = self.grid.points();
        let mut vals = Array2::default((1, pts));
        let mut hat = Array2::default((1, pts));
        vals.row_mut(0).assign(&self.vals.row(c));
        hat.row_mut(0).assign(&self.hat.row(c));
        SampledField {
            grid: self.grid,
            ncomp: 1,
            vals,
            hat,
            active: std::sync::OnceLock::new(),
        }
    }

    /// Stack fields on the same grid into one multi-component field.
    pub fn stack(parts: &[&SampledField]) -> Result<SampledField> {
        let grid = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("stack of zero fields".into()))?
            .grid;
        let ncomp: usize = parts.iter().map(|p| p.ncomp).sum();
        let pts = grid.points();
        let mut vals = Array2::default((ncomp, pts));
        let mut hat = Array2::default((ncomp, pts));
        let mut row = 0;
        for p in parts {
            if p.grid != grid {
                return Err(Error::GridMismatch("stack on mismatched grids".into()));
            }
            for c in 0..p.ncomp {
                vals.row_mut(row).assign(&p.vals.row(c));
                hat.row_mut(row).assign(&p.hat.row(c));
                row += 1;
            }
        }
        Ok(SampledField {
            grid,
            ncomp,
            vals,
            hat,
            active: std::sync::OnceLock::new(),
        })
    }

    fn check_same_shape(&self, other: &SampledField) -> Result<()> {
        if self.grid != other.grid || self.ncomp != other.ncomp {
            return Err(Error::GridMismatch(
                "fields differ in grid or component count".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        self.check_same_shape(other)?;
        Ok(SampledField {
            grid: self.grid,
            ncomp: self.ncomp,
            vals: &self.vals + &other.vals,
            hat: &self.hat + &other.hat,
            active: std::sync::OnceLock::new(),
        })
    }

    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        self.check_same_shape(other)?;
        Ok(SampledField {
            grid: self.grid,
            ncomp: self.ncomp,
            vals: &self.vals - &other.vals,
            hat: &self.hat - &other.hat,
            active: std::sync::OnceLock::new(),
        })
    }

    pub fn scale(&self, a: Complex64) -> SampledField {
        SampledField {
            grid: self.grid,
            ncomp: self.ncomp,
            vals: self.vals.mapv(|v| v * a),
            hat: self.hat.mapv(|v| v * a),
            active: std::sync::OnceLock::new(),
        }
    }

    /// Pointwise map of the value vector at every grid point; the spectral
    /// side is recomputed.
    pub fn map_values(
        &self,
        ncomp_out: usize,
        mut f: impl FnMut(&[Complex64], &mut [Complex64]),
    ) -> Result<SampledField> {
        let pts = self.grid.points();
        let mut vals = Array2::default((ncomp_out, pts));
        let mut inbuf = vec![Complex64::default(); self.ncomp];
        let mut outbuf = vec![Complex64::default(); ncomp_out];
        for m in 0..pts {
            for c in 0..self.ncomp {
                inbuf[c] = self.vals[(c, m)];
            }
            f(&inbuf, &mut outbuf);
            for c in 0..ncomp_out {
                vals[(c, m)] = outbuf[c];
            }
        }
        SampledField::from_values(self.grid, vals)
    }

    /// Multiply every component pointwise by a scalar function of x.
    pub fn mul_scalar_fn(&self, mut w: impl FnMut(&[f64]) -> Complex64) -> Result<SampledField> {
        let pts = self.grid.points();
        let mut vals = self.vals.clone();
        let mut x = vec![0.0; self.grid.dim];
        for m in 0..pts {
            self.grid.x_at(m, &mut x);
            let f = w(&x);
            for c in 0..self.ncomp {
                vals[(c, m)] *= f;
            }
        }
        SampledField::from_values(self.grid, vals)
    }

    /// Apply a scalar Fourier multiplier `m(xi)` to every component.
    pub fn multiplier(&self, mut m: impl FnMut(&[f64]) -> Complex64) -> SampledField {
        let pts = self.grid.points();
        let mut hat = self.hat.clone();
        let mut xi = vec![0.0; self.grid.dim];
        for k in 0..pts {
            self.grid.xi_at(k, &mut xi);
            let f = m(&xi);
            for c in 0..self.ncomp {
                hat[(c, k)] *= f;
            }
        }
        SampledField::from_coeffs(self.grid, hat).expect("shape preserved")
    }

    /// Apply a radial Fourier multiplier `m(|xi|)` to every component.
    pub fn multiplier_radial(&self, mut m: impl FnMut(f64) -> f64) -> SampledField {
        let pts = self.grid.points();
        let mut hat = self.hat.clone();
        for k in 0..pts {
            let f = m(self.grid.xi_norm_at(k));
            for c in 0..self.ncomp {
                hat[(c, k)] *= f;
            }
        }
        SampledField::from_coeffs(self.grid, hat).expect("shape preserved")
    }

    /// Apply a matrix-valued Fourier multiplier `M(xi)` mixing components.
    pub fn multiplier_matrix(
        &self,
        mut m: impl FnMut(&[f64], &mut Array2<Complex64>),
    ) -> SampledField {
        let pts = self.grid.points();
        let mut hat = Array2::default((self.ncomp, pts));
        let mut xi = vec![0.0; self.grid.dim];
        let mut mat = Array2::default((self.ncomp, self.ncomp));
        for k in 0..pts {
            self.grid.xi_at(k, &mut xi);
            m(&xi, &mut mat);
            for r in 0..self.ncomp {
                let mut acc = Complex64::default();
                for c in 0..self.ncomp {
                    acc += mat[(r, c)] * self.hat[(c, k)];
                }
                hat[(r, k)] = acc;
            }
        }
        SampledField::from_coeffs(self.grid, hat).expect("shape preserved")
    }

    /// Partial derivative along `axis` (spectral multiplier `i xi_axis`).
    pub fn partial(&self, axis: usize) -> SampledField {
        assert!(axis < self.grid.dim);
        self.multiplier(|xi| Complex64::new(0.0, xi[axis]))
    }

    /// Multiply by the grid mode `exp(i x . xi)` with `xi = freq_step * k`.
    /// This shifts every coefficient index by `k` (an exact spectral shift as
    /// long as nothing crosses the Nyquist ring).
    pub fn modulate(&self, k: &[i64]) -> Result<SampledField> {
        if k.len() != self.grid.dim {
            return Err(Error::GridMismatch("modulation index dim mismatch".into()));
        }
        let step = self.grid.freq_step();
        let xi: Vec<f64> = k.iter().map(|&ka| step * ka as f64).collect();
        let pts = self.grid.points();
        let mut vals = self.vals.clone();
        let mut x = vec![0.0; self.grid.dim];
        for m in 0..pts {
            self.grid.x_at(m, &mut x);
            let phase: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
            let f = Complex64::new(0.0, phase).exp();
            for c in 0..self.ncomp {
                vals[(c, m)] *= f;
            }
        }
        SampledField::from_values(self.grid, vals)
    }

    /// Relabel onto a box `factor` times as long: identical samples and
    /// coefficients, frequencies shrunk by `1/factor`.  This realizes the
    /// substitution `u(x) -> u(x/factor)` exactly on the grid.
    pub fn relabel_box(&self, factor: f64) -> SampledField {
        SampledField {
            grid: self.grid.scaled_box(factor),
            ncomp: self.ncomp,
            vals: self.vals.clone(),
            hat: self.hat.clone(),
            active: self.active.clone(),
        }
    }

    /// Dyadic box relabelling `u(x) -> u(2^-j x)` (negative `j` inverts).
    pub fn dyadic_relabel(&self, j: i32) -> SampledField {
        self.relabel_box((2.0f64).powi(j))
    }

    /// Unitary dyadic rescaling `2^(-j d/2) u(2^-j x)`: preserves the L2 norm.
    pub fn dyadic_rescale_unitary(&self, j: i32) -> SampledField {
        let a = (2.0f64).powf(-0.5 * j as f64 * self.grid.dim as f64);
        self.dyadic_relabel(j).scale(Complex64::new(a, 0.0))
    }

    /// L2 norm over the box: `len^(d/2) * l2(hat)`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.hat.iter().map(|h| h.norm_sqr()).sum();
        self.grid.len.powf(0.5 * self.grid.dim as f64) * sum.sqrt()
    }

    /// Sobolev norm `len^(d/2) * (sum <xi>^2s |hat|^2)^(1/2)`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.weighted_norm(|r| bracket(r).powf(2.0 * s))
    }

    /// Scaled Sobolev norm with weight `<2^-j xi>^2s`.
    pub fn sobolev_scaled_norm(&self, j: i32, s: f64) -> f64 {
        let scale = (2.0f64).powi(-j);
        self.weighted_norm(|r| bracket(scale * r).powf(2.0 * s))
    }

    /// Norm with an arbitrary radial spectral weight applied to `|hat|^2`.
    pub fn weighted_norm(&self, mut w: impl FnMut(f64) -> f64) -> f64 {
        let pts = self.grid.points();
        let mut sum = 0.0;
        for k in 0..pts {
            let wk = w(self.grid.xi_norm_at(k));
            for c in 0..self.ncomp {
                sum += wk * self.hat[(c, k)].norm_sqr();
            }
        }
        self.grid.len.powf(0.5 * self.grid.dim as f64) * sum.sqrt()
    }

    /// Sup over grid points of the Euclidean norm of the value vector.
    pub fn linf_norm(&self) -> f64 {
        let pts = self.grid.points();
        let mut best = 0.0f64;
        for m in 0..pts {
            let mut sq = 0.0;
            for c in 0..self.ncomp {
                sq += self.vals[(c, m)].norm_sqr();
            }
            best = best.max(sq);
        }
        best.sqrt()
    }

    /// Normalize to unit L2 norm.
    pub fn normalized_l2(&self) -> Result<SampledField> {
        let n = self.l2_norm();
        if n == 0.0 {
            return Err(Error::Numerical("cannot normalize the zero field".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// Max modulus of hat coefficients (spectral sup).
    pub fn hat_max(&self) -> f64 {
        self.hat.iter().map(|h| h.norm()).fold(0.0, f64::max)
    }

    /// Cached list of spectral indices with a nonzero coefficient in some
    /// component.
    pub fn active_set(&self) -> &[usize] {
        self.active.get_or_init(|| self.active_modes(0.0))
    }

    /// Evaluate the trigonometric polynomial at an arbitrary point by direct
    /// summation over the active modes (exact, not interpolated).
    pub fn eval_at(&self, x: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.grid.dim);
        let mut out = vec![Complex64::default(); self.ncomp];
        let mut xi = vec![0.0; self.grid.dim];
        for &k in self.active_set() {
            self.grid.xi_at(k, &mut xi);
            let phase: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
            let e = Complex64::new(0.0, phase).exp();
            for c in 0..self.ncomp {
                out[c] += self.hat[(c, k)] * e;
            }
        }
        out
    }

    /// Flat spectral indices carrying coefficients above `rel_tol * hat_max`
    /// in at least one component.  `rel_tol = 0` keeps every nonzero index.
    pub fn active_modes(&self, rel_tol: f64) -> Vec<usize> {
        let cutoff = self.hat_max() * rel_tol;
        let pts = self.grid.points();
        let mut out = Vec::new();
        for k in 0..pts {
            let mut mag = 0.0f64;
            for c in 0..self.ncomp {
                mag = mag.max(self.hat[(c, k)].norm());
            }
            if mag > cutoff || (mag > 0.0 && rel_tol == 0.0) {
                out.push(k);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_l2_norm() {
        // |c| * len^(d/2) for a constant field.
        let grid = Grid::new(2, 8, 3.0).unwrap();
        let f =
            SampledField::from_fn_values(grid, 1, |_, _| Complex64::new(2.0, 0.0)).unwrap();
        assert!((f.l2_norm() - 2.0 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_mode_sobolev_norms() {
        // u = a exp(i xi_k x): H^s norm is |a| <xi_k>^s len^(d/2), and the
        // scaled norm replaces xi_k by 2^-j xi_k.
        let l = 2.0 * PI;
        let grid = Grid::new(1, 32, l).unwrap();
        let k = 5i64;
        let a = Complex64::new(0.3, -0.4); // |a| = 0.5
        let mut hat = Array2::default((1, grid.points()));
        hat[(0, grid.flat_for_k(&[k]))] = a;
        let f = SampledField::from_coeffs(grid, hat).unwrap();
        let xi = grid.freq_step() * k as f64;
        for &s in &[0.0, 1.0, 2.5, -1.0] {
            let expect = 0.5 * bracket(xi).powf(s) * l.sqrt();
            assert!((f.sobolev_norm(s) - expect).abs() < 1e-12 * expect);
        }
        let j = 3;
        let expect = 0.5 * bracket(xi / 8.0).powf(2.0) * l.sqrt();
        assert!((f.sobolev_scaled_norm(j, 2.0) - expect).abs() < 1e-12 * expect);
        // Norm increases with s once |xi_k| > 0.
        assert!(f.sobolev_norm(2.0) > f.sobolev_norm(1.0));
    }

    #[test]
    fn box_relabel_norm_identities() {
        // Relabelling u(x) -> u(2^-j x) multiplies the L2 norm by 2^(jd/2),
        // its H^s norm equals the scaled (j, s) norm times 2^(jd/2), and the
        // unitary version preserves L2 exactly.  Values are untouched, so the
        // sup norm is invariant under the plain relabelling.
        let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
        let f = SampledField::random_band_limited(grid, 2, 20, 7).unwrap();
        let j = 4;
        let g = f.dyadic_relabel(j);
        let factor = (2.0f64).powf(0.5 * j as f64);
        assert!((g.l2_norm() - factor * f.l2_norm()).abs() <= 1e-10 * g.l2_norm());
        for &s in &[0.7, 1.5, 3.0] {
            let lhs = g.sobolev_norm(s);
            let rhs = factor * f.sobolev_scaled_norm(j, s);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs);
        }
        assert!((g.linf_norm() - f.linf_norm()).abs() == 0.0);
        let h = f.dyadic_rescale_unitary(j);
        assert!((h.l2_norm() - f.l2_norm()).abs() <= 1e-10 * f.l2_norm());
        // Unitary rescale then its inverse is the identity.
        let back = h.dyadic_rescale_unitary(-j);
        let diff: f64 = back
            .hat()
            .iter()
            .zip(f.hat().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn derivative_multiplier_is_exact_on_modes() {
        let grid = Grid::new(1, 64, 5.0).unwrap();
        let k = 7i64;
        let mut hat = Array2::default((1, grid.points()));
        hat[(0, grid.flat_for_k(&[k]))] = Complex64::new(1.0, 0.0);
        let f = SampledField::from_coeffs(grid, hat).unwrap();
        let df = f.partial(0);
        let xi = grid.freq_step() * k as f64;
        let expect = Complex64::new(0.0, xi);
        let got = df.hat()[(0, grid.flat_for_k(&[k]))];
        assert!((got - expect).norm() < 1e-13);
    }

    #[test]
    fn modulation_shifts_spectrum() {
        let grid = Grid::new(1, 64, 2.0 * PI * 4.0).unwrap();
        let f = SampledField::random_band_limited(grid, 1, 5, 11).unwrap();
        let g = f.modulate(&[9]).unwrap();
        for k in -5..=5i64 {
            let a = f.hat()[(0, grid.flat_for_k(&[k]))];
            let b = g.hat()[(0, grid.flat_for_k(&[k + 9]))];
            assert!((a - b).norm() < 1e-12, "shift mismatch at k={k}");
        }
    }

    #[test]
    fn map_values_squares_pointwise() {
        let grid = Grid::new(1, 32, 1.0).unwrap();
        let f = SampledField::from_fn_values(grid, 1, |x, _| {
            Complex64::new((2.0 * PI * x[0]).cos(), 0.0)
        })
        .unwrap();
        let g = f
            .map_values(1, |v, out| {
                out[0] = v[0] * v[0];
            })
            .unwrap();
        // cos^2 = (1 + cos 2t)/2: coefficient 1/2 at zero, 1/4 at k = +/-2.
        let c0 = g.hat()[(0, grid.flat_for_k(&[0]))];
        let c2 = g.hat()[(0, grid.flat_for_k(&[2]))];
        assert!((c0 - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!((c2 - Complex64::new(0.25, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn active_modes_found() {
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let mut hat = Array2::default((1, grid.points()));
        hat[(0, grid.flat_for_k(&[3]))] = Complex64::new(1.0, 0.0);
        hat[(0, grid.flat_for_k(&[-7]))] = Complex64::new(1e-3, 0.0);
        let f = SampledField::from_coeffs(grid, hat).unwrap();
        let strong = f.active_modes(1e-2);
        assert_eq!(strong, vec![grid.flat_for_k(&[3])]);
        let mut all = f.active_modes(0.0);
        all.sort_unstable();
        let mut expect = vec![grid.flat_for_k(&[3]), grid.flat_for_k(&[-7])];
        expect.sort_unstable();
        assert_eq!(all, expect);
    }
}
