use super::spec::{MatC, SymbolSpec};
use crate::field_core::bracket;
use crate::field_core::Grid;

/// Sampling lattice for symbolic norms.  Norms are sampled suprema (lower
/// bounds of the true suprema); derivatives are centered finite differences,
/// with x-steps tied to the carrier grid and xi-steps proportional to the
/// local bracket.
#[derive(Debug, Clone)]
pub struct NormSampling {
    /// Per-axis x-sample count over the box.
    pub x_per_axis: usize,
    /// Box side length in x.
    pub x_box: f64,
    /// Finite-difference step in x.
    pub x_step: f64,
    /// Geometric ring radii for |xi| sampling (0 is always added).
    pub xi_radii: Vec<f64>,
    /// Directions on the unit sphere for xi.
    pub xi_dirs: Vec<Vec<f64>>,
    /// Relative finite-difference step in xi: step = rel * <xi>.
    pub xi_rel_step: f64,
}

fn default_dirs(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let th = std::f64::consts::PI * 2.0 * i as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            // Axis directions and their negatives for higher dimensions.
            let mut dirs = Vec::new();
            for a in 0..dim {
                for sgn in [1.0, -1.0] {
                    let mut v = vec![0.0; dim];
                    v[a] = sgn;
                    dirs.push(v);
                }
            }
            dirs
        }
    }
}

impl NormSampling {
    /// Default lattice for a symbol living on (or composed over) `grid`.
    pub fn for_grid(grid: &Grid, xi_max: f64) -> NormSampling {
        let rings = ((xi_max / 0.25).log2().ceil() * 2.0).max(1.0) as usize;
        let mut xi_radii = vec![0.0];
        xi_radii.extend((0..=rings).map(|p| 0.25 * (xi_max / 0.25).powf(p as f64 / rings as f64)));
        NormSampling {
            x_per_axis: 32.min(grid.n),
            x_box: grid.len,
            x_step: grid.x_step() / 4.0,
            xi_radii,
            xi_dirs: default_dirs(grid.dim, 12),
            xi_rel_step: 0.02,
        }
    }

    /// Lattice concentrated on a window `|x - x0| <= rx`, `|xi - xi0| <= rxi`.
    pub fn for_window(
        dim: usize,
        x0: &[f64],
        rx: f64,
        xi0: &[f64],
        rxi: f64,
        box_len: f64,
    ) -> NormSampling {
        let _ = (x0, xi0, dim);
        NormSampling {
            x_per_axis: 24,
            x_box: 2.0 * rx,
            x_step: rx / 48.0,
            xi_radii: (0..=12).map(|p| rxi * p as f64 / 12.0).collect(),
            xi_dirs: default_dirs(dim, 8),
            xi_rel_step: 0.02,
        }
        .offset(x0, xi0, box_len)
    }

    fn offset(mut self, _x0: &[f64], _xi0: &[f64], box_len: f64) -> NormSampling {
        // Window sampling re-centers in `sample_points`; the box length is
        // only needed to keep x-steps meaningful.
        self.x_box = self.x_box.min(box_len);
        self
    }

    /// Enumerate the (x, xi) sample pairs, centered on the symbol's support
    /// window when one is declared.
    fn sample_points(&self, dim: usize, a: &SymbolSpec) -> Vec<(Vec<f64>, Vec<f64>)> {
        let (xc, xic) = match &a.support {
            Some(b) => (b.x0.clone(), b.xi0.clone()),
            None => (vec![0.0; dim], vec![0.0; dim]),
        };
        let mut xs = Vec::new();
        let per = self.x_per_axis;
        let mut idx = vec![0usize; dim];
        let total = per.pow(dim as u32);
        for flat in 0..total {
            let mut rem = flat;
            for a_ in (0..dim).rev() {
                idx[a_] = rem % per;
                rem /= per;
            }
            let x: Vec<f64> = (0..dim)
                .map(|a_| xc[a_] - self.x_box / 2.0 + self.x_box * idx[a_] as f64 / per as f64)
                .collect();
            xs.push(x);
        }
        let mut xis = Vec::new();
        for &r in &self.xi_radii {
            if r == 0.0 {
                xis.push(xic.clone());
                continue;
            }
            for dir in &self.xi_dirs {
                let xi: Vec<f64> = (0..dim).map(|a_| xic[a_] + r * dir[a_]).collect();
                xis.push(xi);
            }
        }
        let mut out = Vec::with_capacity(xs.len() * xis.len());
        for x in &xs {
            for xi in &xis {
                out.push((x.clone(), xi.clone()));
            }
        }
        out
    }
}

/// Centered finite-difference stencil (offset, weight) for the o-th
/// derivative; weights are for unit step and must be divided by h^o.
fn stencil(o: u32) -> &'static [(i32, f64)] {
    match o {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => panic!("finite-difference stencils implemented up to order 4"),
    }
}

/// All multi-indices over `dim` axes with total degree <= `max_total`.
pub fn multi_indices(dim: usize, max_total: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        for v in 0..=budget {
            cur.push(v);
            rec(dim, budget - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, max_total, &mut Vec::new(), &mut out);
    out
}

/// Mixed finite-difference derivative `D_x^alpha D_xi^beta a` at one point,
/// via tensor-product central stencils.  Frobenius norm of the matrix value
/// is returned along with the value itself in `out`.
fn fd_derivative(
    a: &SymbolSpec,
    x: &[f64],
    xi: &[f64],
    alpha: &[u32],
    beta: &[u32],
    hx: f64,
    hxi: f64,
    out: &mut MatC,
    scratch: &mut MatC,
) {
    let dim = x.len();
    // Collect per-axis stencils: first x axes, then xi axes.
    let mut axes: Vec<&[(i32, f64)]> = Vec::with_capacity(2 * dim);
    for &o in alpha {
        axes.push(stencil(o));
    }
    for &o in beta {
        axes.push(stencil(o));
    }
    out.fill(num_complex::Complex64::default());
    let mut counters = vec![0usize; axes.len()];
    let mut xp = vec![0.0; dim];
    let mut xip = vec![0.0; dim];
    'outer: loop {
        let mut w = 1.0;
        for (a_, &c) in counters.iter().enumerate() {
            w *= axes[a_][c].1;
        }
        if w != 0.0 {
            for a_ in 0..dim {
                xp[a_] = x[a_] + axes[a_][counters[a_]].0 as f64 * hx;
                xip[a_] = xi[a_] + axes[dim + a_][counters[dim + a_]].0 as f64 * hxi;
            }
            a.eval(&xp, &xip, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += s * w;
            }
        }
        // Advance the mixed counter.
        for a_ in 0..axes.len() {
            counters[a_] += 1;
            if counters[a_] < axes[a_].len() {
                continue 'outer;
            }
            counters[a_] = 0;
        }
        break;
    }
    let ho: f64 = alpha.iter().map(|&o| hx.powi(o as i32)).product::<f64>()
        * beta.iter().map(|&o| hxi.powi(o as i32)).product::<f64>();
    for o in out.iter_mut() {
        *o /= ho;
    }
}

/// Entrywise max modulus; comparable to the operator norm up to a factor N,
/// and exactly 1 on the identity.
fn mat_mag(m: &MatC) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Sampled symbolic norm: sup over the lattice of
/// `<xi>^(|beta| - m) |D_x^alpha D_xi^beta a(x, xi)|` for `|alpha| <= k1`,
/// `|beta| <= k2` (entrywise max matrix modulus; a lower bound of the true
/// sup over continuum points).
pub fn symbol_norm(a: &SymbolSpec, m: f64, k1: u32, k2: u32, sampling: &NormSampling) -> f64 {
    let dim = sampling.xi_dirs[0].len();
    let pts = sampling.sample_points(dim, a);
    let alphas = multi_indices(dim, k1);
    let betas = multi_indices(dim, k2);
    let mut out = MatC::zeros(a.size, a.size);
    let mut scratch = MatC::zeros(a.size, a.size);
    let mut best = 0.0f64;
    for (x, xi) in &pts {
        let br = bracket(xi.iter().map(|v| v * v).sum::<f64>().sqrt());
        let hxi = sampling.xi_rel_step * br;
        for alpha in &alphas {
            for beta in &betas {
                fd_derivative(
                    a,
                    x,
                    xi,
                    alpha,
                    beta,
                    sampling.x_step,
                    hxi,
                    &mut out,
                    &mut scratch,
                );
                let bsum: u32 = beta.iter().sum();
                let weight = br.powf(bsum as f64 - m);
                best = best.max(weight * mat_mag(&out));
            }
        }
    }
    best
}

/// Holder-seminorm variant: on top of `symbol_norm(a, m, k, k2)`, measures
/// the divided differences of the k-th x-derivatives,
/// `|D^alpha a(x + h e, xi) - D^alpha a(x, xi)| / h^theta`, over dyadic
/// separations, weighted by `<xi>^(|beta| - m)`.
pub fn symbol_norm_holder(
    a: &SymbolSpec,
    m: f64,
    k: u32,
    theta: f64,
    k2: u32,
    sampling: &NormSampling,
) -> f64 {
    let base = symbol_norm(a, m, k, k2, sampling);
    let dim = sampling.xi_dirs[0].len();
    let pts = sampling.sample_points(dim, a);
    let alphas: Vec<Vec<u32>> = multi_indices(dim, k)
        .into_iter()
        .filter(|al| al.iter().sum::<u32>() == k)
        .collect();
    let betas = multi_indices(dim, k2);
    let mut da = MatC::zeros(a.size, a.size);
    let mut db = MatC::zeros(a.size, a.size);
    let mut scratch = MatC::zeros(a.size, a.size);
    let mut semi = 0.0f64;
    for (x, xi) in &pts {
        let br = bracket(xi.iter().map(|v| v * v).sum::<f64>().sqrt());
        let hxi = sampling.xi_rel_step * br;
        for alpha in &alphas {
            for beta in &betas {
                let bsum: u32 = beta.iter().sum();
                let weight = br.powf(bsum as f64 - m);
                fd_derivative(a, x, xi, alpha, beta, sampling.x_step, hxi, &mut da, &mut scratch);
                for p in 0..4 {
                    let h = sampling.x_step * (2.0f64).powi(p + 2);
                    for axis in 0..dim {
                        let mut xs = x.clone();
                        xs[axis] += h;
                        fd_derivative(
                            a,
                            &xs,
                            xi,
                            alpha,
                            beta,
                            sampling.x_step,
                            hxi,
                            &mut db,
                            &mut scratch,
                        );
                        let mut diff = 0.0f64;
                        for (va, vb) in da.iter().zip(db.iter()) {
                            diff = diff.max((va - vb).norm());
                        }
                        semi = semi.max(weight * diff / h.powf(theta));
                    }
                }
            }
        }
    }
    base.max(semi)
}
