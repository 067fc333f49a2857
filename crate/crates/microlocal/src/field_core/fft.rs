use super::grid::Grid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Cached forward/inverse FFT plans keyed by transform length.
fn plans_for(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Apply a 1-D transform along every axis of the row-major buffer.
fn transform_all_axes(grid: &Grid, data: &mut [Complex64], forward: bool) {
    assert_eq!(data.len(), grid.points());
    let n = grid.n;
    let (fwd, inv) = plans_for(n);
    let plan = if forward { fwd } else { inv };

    if grid.dim == 1 {
        plan.process(data);
        return;
    }

    let total = grid.points();
    let mut scratch = vec![Complex64::default(); n];
    // Axis `a` has stride n^(dim-1-a); lines are enumerated by the remaining axes.
    for a in 0..grid.dim {
        let stride = n.pow((grid.dim - 1 - a) as u32);
        let block = stride * n; // span of one axis-a hyper-row group
        let mut line_start = 0;
        while line_start < total {
            for off in 0..stride {
                let base = line_start + off;
                for (s, slot) in scratch.iter_mut().enumerate() {
                    *slot = data[base + s * stride];
                }
                plan.process(&mut scratch);
                for (s, val) in scratch.iter().enumerate() {
                    data[base + s * stride] = *val;
                }
            }
            line_start += block;
        }
    }
}

/// Sample values -> Fourier coefficients.
///
/// With `u(x) = sum_k u_hat_k exp(i x . xi_k)` on the grid, the coefficient is
/// `u_hat_k = n^{-dim} * sum_m u(x_m) exp(-i x_m . xi_k)` (forward FFT scaled
/// by `n^{-dim}`).
pub fn values_to_coeffs(grid: &Grid, vals: &[Complex64], out: &mut [Complex64]) {
    out.copy_from_slice(vals);
    transform_all_axes(grid, out, true);
    let scale = 1.0 / grid.points() as f64;
    for v in out.iter_mut() {
        *v *= scale;
    }
}

/// Fourier coefficients -> sample values (unnormalized inverse FFT).
pub fn coeffs_to_values(grid: &Grid, hat: &[Complex64], out: &mut [Complex64]) {
    out.copy_from_slice(hat);
    transform_all_axes(grid, out, false);
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn roundtrip_1d() {
        let grid = Grid::new(1, 64, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vals: Vec<Complex64> = (0..grid.points())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut hat = vec![Complex64::default(); vals.len()];
        let mut back = vec![Complex64::default(); vals.len()];
        values_to_coeffs(&grid, &vals, &mut hat);
        coeffs_to_values(&grid, &hat, &mut back);
        assert!(max_abs_diff(&vals, &back) < 1e-12);
    }

    #[test]
    fn roundtrip_2d() {
        let grid = Grid::new(2, 16, 5.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vals: Vec<Complex64> = (0..grid.points())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut hat = vec![Complex64::default(); vals.len()];
        let mut back = vec![Complex64::default(); vals.len()];
        values_to_coeffs(&grid, &vals, &mut hat);
        coeffs_to_values(&grid, &hat, &mut back);
        assert!(max_abs_diff(&vals, &back) < 1e-12);
    }

    #[test]
    fn pure_mode_has_unit_coefficient() {
        // u(x) = exp(i x . xi_k) for k = (3, -5) must transform to a single
        // unit coefficient at that index.
        let grid = Grid::new(2, 16, 4.0).unwrap();
        let mut xi = [0.0; 2];
        let target = grid.flat_for_k(&[3, -5]);
        grid.xi_at(target, &mut xi);
        let mut x = [0.0; 2];
        let vals: Vec<Complex64> = (0..grid.points())
            .map(|m| {
                grid.x_at(m, &mut x);
                Complex64::new(0.0, x[0] * xi[0] + x[1] * xi[1]).exp()
            })
            .collect();
        let mut hat = vec![Complex64::default(); vals.len()];
        values_to_coeffs(&grid, &vals, &mut hat);
        for (idx, h) in hat.iter().enumerate() {
            let expect = if idx == target { 1.0 } else { 0.0 };
            assert!(
                (h - Complex64::new(expect, 0.0)).norm() < 1e-13,
                "coefficient at {idx} was {h}"
            );
        }
    }

    #[test]
    fn parseval_matches_quadrature() {
        // For band-limited periodic functions the rectangle rule integrates
        // |u|^2 exactly, so (len/n)^d * sum |u(x_m)|^2 = len^d * sum |u_hat|^2.
        let grid = Grid::new(2, 16, 2.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<Complex64> = (0..grid.points())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut hat = vec![Complex64::default(); vals.len()];
        values_to_coeffs(&grid, &vals, &mut hat);
        let quad: f64 =
            vals.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.x_step().powi(grid.dim as i32);
        let spectral: f64 =
            hat.iter().map(|h| h.norm_sqr()).sum::<f64>() * grid.len.powi(grid.dim as i32);
        assert!((quad - spectral).abs() <= 1e-12 * quad.max(1.0));
    }
}
