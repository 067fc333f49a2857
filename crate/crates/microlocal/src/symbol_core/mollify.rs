use super::spec::{DirectEval, MatC, SymbolKind, SymbolSpec};
use crate::error::{Error, Result};
use crate::field_core::{Grid, SampledField};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Which object gets smoothed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifyMode {
    /// Smooth the symbol itself in x (per frequency column).
    Direct,
    /// Smooth the carrier field and re-compose (variant smoothing; only for
    /// composed symbols).
    Carrier,
}

/// Record of the smoothing kernel used, for run metadata.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KernelProfile {
    pub name: &'static str,
    pub quadrature_points: usize,
}

const KERNEL_QUAD: usize = 401;

/// Fourier transform `K(s) = integral kappa(t) exp(-i s t) dt` of the unit
/// bump `kappa(t) = c exp(-1/(1 - t^2))` on (-1, 1), normalized so that
/// K(0) = 1 exactly (the quadrature weights are normalized, which keeps
/// constants invariant under mollification).
pub fn kernel_transform(s: f64) -> f64 {
    // Midpoint nodes; the integrand is smooth and compactly supported, so
    // this converges spectrally fast.
    let mut num = 0.0;
    let mut den = 0.0;
    for q in 0..KERNEL_QUAD {
        let t = -1.0 + 2.0 * (q as f64 + 0.5) / KERNEL_QUAD as f64;
        let w = (-1.0 / (1.0 - t * t)).exp();
        num += w * (s * t).cos(); // kernel is even: transform is real
        den += w;
    }
    num / den
}

/// The mollified family: multiplication of the x-spectrum by
/// `prod_axis K(eps * eta_axis)`.
pub fn filter_field(u: &SampledField, eps: f64) -> SampledField {
    u.multiplier(|eta| {
        let mut f = 1.0;
        for &e in eta {
            f *= kernel_transform(eps * e);
        }
        Complex64::new(f, 0.0)
    })
}

/// Grid-sampled, spectrally filtered x-columns of a direct symbol, cached
/// per frequency.
struct DirectMollified {
    base: SymbolSpec,
    grid: Grid,
    eps: f64,
    /// Key: bit patterns of the xi components.  Value: filtered samples,
    /// N*N entries per grid point (row-major matrix per point).
    cache: Mutex<HashMap<Vec<u64>, Arc<Vec<Complex64>>>>,
}

impl DirectMollified {
    fn column(&self, xi: &[f64]) -> Arc<Vec<Complex64>> {
        let key: Vec<u64> = xi.iter().map(|v| v.to_bits()).collect();
        if let Some(col) = self.cache.lock().expect("mollify cache").get(&key) {
            return col.clone();
        }
        let n = self.base.size;
        let pts = self.grid.points();
        // Sample the base symbol on the grid.
        let mut samples = vec![Complex64::default(); n * n * pts];
        let mut buf = MatC::zeros(n, n);
        let mut x = vec![0.0; self.grid.dim];
        for m in 0..pts {
            self.grid.x_at(m, &mut x);
            self.base.eval(&x, xi, &mut buf);
            for r in 0..n {
                for c in 0..n {
                    samples[(r * n + c) * pts + m] = buf[(r, c)];
                }
            }
        }
        // Filter each entry's x-dependence spectrally.
        let mut hat = vec![Complex64::default(); pts];
        let mut eta = vec![0.0; self.grid.dim];
        for e in 0..n * n {
            let col = &mut samples[e * pts..(e + 1) * pts];
            crate::field_core::fft::values_to_coeffs(&self.grid, &col.to_vec(), &mut hat);
            for k in 0..pts {
                self.grid.xi_at(k, &mut eta);
                let mut f = 1.0;
                for &ev in eta.iter() {
                    f *= kernel_transform(self.eps * ev);
                }
                hat[k] *= f;
            }
            crate::field_core::fft::coeffs_to_values(&self.grid, &hat.to_vec(), col);
        }
        let arc = Arc::new(samples);
        self.cache
            .lock()
            .expect("mollify cache")
            .insert(key, arc.clone());
        arc
    }

    /// Trigonometric evaluation of the filtered column at arbitrary x.
    fn eval(&self, x: &[f64], xi: &[f64], out: &mut MatC) {
        let col = self.column(xi);
        let pts = self.grid.points();
        let n = self.base.size;
        // Nearest-grid fast path when x is (almost) a sample point.
        let h = self.grid.x_step();
        let mut exact = true;
        let mut multi = vec![0usize; self.grid.dim];
        for (a, &xa) in x.iter().enumerate() {
            let pos = xa / h;
            let nearest = pos.round();
            if (pos - nearest).abs() > 1e-9 {
                exact = false;
                break;
            }
            multi[a] = (nearest as i64).rem_euclid(self.grid.n as i64) as usize;
        }
        if exact {
            let m = self.grid.multi_to_flat(&multi);
            for r in 0..n {
                for c in 0..n {
                    out[(r, c)] = col[(r * n + c) * pts + m];
                }
            }
            return;
        }
        // Off-grid: exact mode sum per entry (costly; test-scale grids only).
        let mut hat = vec![Complex64::default(); pts];
        let mut eta = vec![0.0; self.grid.dim];
        for r in 0..n {
            for c in 0..n {
                let vals: Vec<Complex64> = (0..pts).map(|m| col[(r * n + c) * pts + m]).collect();
                crate::field_core::fft::values_to_coeffs(&self.grid, &vals, &mut hat);
                let mut acc = Complex64::default();
                for k in 0..pts {
                    self.grid.xi_at(k, &mut eta);
                    let phase: f64 = x.iter().zip(&eta).map(|(a, b)| a * b).sum();
                    acc += hat[k] * Complex64::new(0.0, phase).exp();
                }
                out[(r, c)] = acc;
            }
        }
    }
}

/// Smooth a symbol at width `eps`.
///
/// * `Carrier` mode replaces the carrier `u` by its smoothed version (the
///   composed map is untouched).
/// * `Direct` mode smooths `a(., xi)` per frequency column on `grid`
///   (defaulting to the carrier grid for composed symbols).
///
/// Both realize convolution with the mass-one bump kernel, so constant
/// symbols are unchanged exactly.
pub fn mollify(
    a: &SymbolSpec,
    eps: f64,
    mode: MollifyMode,
    grid: Option<&Grid>,
) -> Result<SymbolSpec> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mollification width must be positive, got {eps}"
        )));
    }
    let bound_grid = match grid.or_else(|| a.carrier().map(|c| c.grid())) {
        Some(g) => *g,
        None => {
            return Err(Error::InvalidParameter(
                "direct mollification of a direct symbol needs a grid".into(),
            ))
        }
    };
    if eps >= bound_grid.len {
        return Err(Error::InvalidParameter(format!(
            "mollification width {eps} exceeds the box length {}",
            bound_grid.len
        )));
    }
    match mode {
        MollifyMode::Carrier => {
            let mut out = a.clone();
            match &mut out.kind {
                SymbolKind::Direct(_) => Err(Error::InvalidParameter(
                    "carrier mollification requires a composed symbol".into(),
                )),
                SymbolKind::Composed { carrier, .. }
                | SymbolKind::ComposedPolyXi { carrier, .. } => {
                    *carrier = filter_field(carrier, eps);
                    Ok(out)
                }
            }
        }
        MollifyMode::Direct => {
            let plan = Arc::new(DirectMollified {
                base: a.clone(),
                grid: bound_grid,
                eps,
                cache: Mutex::new(HashMap::new()),
            });
            let eval: DirectEval = Arc::new(move |x, xi, out| plan.eval(x, xi, out));
            Ok(SymbolSpec {
                size: a.size,
                order: a.order,
                reg_k: a.reg_k,
                reg_theta: a.reg_theta,
                kind: SymbolKind::Direct(eval),
                support: a.support.clone(),
                x_independent: a.x_independent,
                xi_independent: a.xi_independent,
            })
        }
    }
}

/// Canonical mollification width at dyadic level `j` for a symbol with one
/// Holder-theta x-derivative budget: `2^(-j / (1 + theta))`.
pub fn mollification_scale(j: u32, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularity exponent must be positive, got {theta}"
        )));
    }
    Ok((2.0f64).powf(-(j as f64) / (1.0 + theta)))
}

pub fn kernel_profile() -> KernelProfile {
    KernelProfile {
        name: "bump-exp-reciprocal",
        quadrature_points: KERNEL_QUAD,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::bracket;
    use crate::symbol_core::spec::ComposedEval;

    fn unit_grid(n: usize) -> Grid {
        Grid::new(1, n, 2.0 * std::f64::consts::PI).unwrap()
    }

    /// Least-squares slope of y against x.
    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        cov / var
    }

    fn weierstrass_carrier(grid: Grid, theta: f64, levels: i32) -> SampledField {
        SampledField::from_fn_values(grid, 1, |x, _| {
            let mut v = 0.0;
            for j in 0..=levels {
                v += (2.0f64).powf(-j as f64 * theta) * ((2.0f64).powi(j) * x[0]).cos();
            }
            Complex64::new(v, 0.0)
        })
        .unwrap()
    }

    fn identity_map() -> ComposedEval {
        Arc::new(|u, _xi, out| out[(0, 0)] = u[0])
    }

    #[test]
    fn kernel_transform_normalized() {
        assert_eq!(kernel_transform(0.0), 1.0);
        // Decay: |K(s)| is below 1 for moderate s and tiny for large s.
        assert!(kernel_transform(5.0).abs() < 0.8);
        assert!(kernel_transform(60.0).abs() < 1e-3);
    }

    #[test]
    fn constant_symbol_unchanged() {
        let grid = unit_grid(64);
        let u =
            SampledField::from_fn_values(grid, 1, |_, _| Complex64::new(2.5, -1.0)).unwrap();
        let a = SymbolSpec::composed(1, 0.0, 1, 0.0, identity_map(), u);
        for mode in [MollifyMode::Carrier, MollifyMode::Direct] {
            let am = mollify(&a, 0.3, mode, None).unwrap();
            let mut out = MatC::zeros(1, 1);
            for &x in &[0.0, 1.0, 3.3] {
                am.eval(&[x], &[0.7], &mut out);
                assert!(
                    (out[(0, 0)] - Complex64::new(2.5, -1.0)).norm() < 1e-10,
                    "constant moved under {mode:?}: {}",
                    out[(0, 0)]
                );
            }
        }
    }

    #[test]
    fn carrier_and_direct_agree_for_linear_map() {
        // For sigma(u) = u the two smoothing routes are the same operation.
        let grid = unit_grid(128);
        let u = weierstrass_carrier(grid, 0.5, 6);
        let a = SymbolSpec::composed(1, 0.0, 0, 0.5, identity_map(), u);
        let ac = mollify(&a, 0.1, MollifyMode::Carrier, None).unwrap();
        let ad = mollify(&a, 0.1, MollifyMode::Direct, None).unwrap();
        let mut mc = MatC::zeros(1, 1);
        let mut md = MatC::zeros(1, 1);
        for i in 0..40 {
            let x = 2.0 * std::f64::consts::PI * i as f64 / 40.0;
            ac.eval(&[x], &[1.0], &mut mc);
            ad.eval(&[x], &[1.0], &mut md);
            assert!(
                (mc[(0, 0)] - md[(0, 0)]).norm() < 1e-9,
                "modes disagree at x={x}"
            );
        }
    }

    #[test]
    fn sup_error_decays_at_holder_rate() {
        // Holder-1/2 carrier: || a - a_eps ||_inf ~ eps^(1/2).  The log-log
        // slope over eps = 2^-p must sit within 0.2 of theta = 0.5.
        let theta = 0.5;
        let grid = unit_grid(4096);
        let u = weierstrass_carrier(grid, theta, 10);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for p in 3..=7 {
            let eps = (2.0f64).powi(-p);
            let uf = filter_field(&u, eps);
            let diff = u.sub(&uf).unwrap().linf_norm();
            xs.push(-(p as f64));
            ys.push(diff.log2());
        }
        let sl = slope(&xs, &ys);
        assert!(
            (sl - theta).abs() <= 0.2,
            "smoothing error slope {sl}, expected ~{theta}"
        );
    }

    #[test]
    fn derivative_grows_at_reciprocal_rate() {
        // Carrier with |u_hat(k)| ~ k^-2 (a corner): second derivative of
        // the smoothed field grows like eps^-1.
        let grid = unit_grid(4096);
        let u = SampledField::from_fn_coeffs(grid, 1, |xi, _| {
            let k = xi[0].abs();
            if k >= 1.0 && k <= 1365.0 {
                Complex64::new(1.0 / (k * k), 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for p in 3..=7 {
            let eps = (2.0f64).powi(-p);
            let uf = filter_field(&u, eps);
            let d2 = uf.partial(0).partial(0).linf_norm();
            xs.push(-(p as f64));
            ys.push(d2.log2());
        }
        let sl = slope(&xs, &ys);
        assert!(
            (sl + 1.0).abs() <= 0.2,
            "derivative growth slope {sl}, expected ~-1"
        );
    }

    #[test]
    fn rejects_bad_widths() {
        let grid = unit_grid(32);
        let u = SampledField::zeros(grid, 1);
        let a = SymbolSpec::composed(1, 0.0, 1, 0.0, identity_map(), u);
        assert!(mollify(&a, 0.0, MollifyMode::Carrier, None).is_err());
        assert!(mollify(&a, 100.0, MollifyMode::Carrier, None).is_err());
        let m = SymbolSpec::multiplier(1, 0.0, |xi| Complex64::new(bracket(xi[0]), 0.0));
        assert!(mollify(&m, 0.1, MollifyMode::Direct, None).is_err()); // no grid
        assert!(mollify(&m, 0.1, MollifyMode::Carrier, None).is_err()); // not composed
    }

    #[test]
    fn canonical_width() {
        assert_eq!(mollification_scale(0, 1.0).unwrap(), 1.0);
        // theta = 1, j = 10: 2^(-10/2) = 1/32.
        assert!((mollification_scale(10, 1.0).unwrap() - 0.03125).abs() < 1e-15);
        // Rough symbols (theta -> 0) need the finest width 2^-j; very smooth
        // symbols (theta -> infinity) barely need mollifying at all.
        let w = mollification_scale(8, 1e-9).unwrap();
        assert!((w - (2.0f64).powi(-8)).abs() / w < 1e-6);
        let w = mollification_scale(8, 1e9).unwrap();
        assert!((w - 1.0).abs() < 1e-6);
        assert!(mollification_scale(3, 0.0).is_err());
    }
}
