//! Smooth phase-space cutoff operators.
//!
//! A cutoff is a tensor product `psi1(x) psi2(xi)` of radial bumps around a
//! phase-space point `(x0, xi0)`, quantized at scale j so the frequency
//! factor reads the scaled variable `2^{-j} xi`.  The pseudo-differential
//! quantization of such a product factorizes exactly into a pointwise
//! multiplication and a Fourier multiplier; the para-differential version
//! differs by terms that decay faster than any fixed power of `2^{-j}`
//! because the bumps are infinitely smooth.

use crate::error::Result;
use crate::field_core::{smoothstep, DyadicFamily, SampledField};
use crate::quantize::apply::apply_para;
use crate::symbol_core::{SupportBall, SymbolSpec};
use ndarray::Array2;
use num_complex::Complex64;

/// Radial bump: identically 1 inside `plateau`, 0 outside `support`, with a
/// smooth monotone transition between.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialBump {
    pub center: Vec<f64>,
    pub plateau: f64,
    pub support: f64,
}

impl RadialBump {
    pub fn new(center: Vec<f64>, plateau: f64, support: f64) -> Result<RadialBump> {
        if !(0.0 <= plateau && plateau < support) {
            return Err(crate::bad_param!(
                "bump radii need 0 <= plateau < support, got ({plateau}, {support})"
            ));
        }
        Ok(RadialBump {
            center,
            plateau,
            support,
        })
    }

    /// Profile as a function of the distance from the center.
    pub fn profile(&self, r: f64) -> f64 {
        smoothstep((self.support - r) / (self.support - self.plateau))
    }

    /// Value at a point, Euclidean distance.
    pub fn eval(&self, p: &[f64]) -> f64 {
        let r = p
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        self.profile(r)
    }

    /// Value at a point with each axis measured modulo `period`.
    pub fn eval_periodic(&self, p: &[f64], period: f64) -> f64 {
        let r = p
            .iter()
            .zip(&self.center)
            .map(|(a, b)| {
                let mut d = (a - b).abs().rem_euclid(period);
                if d > period / 2.0 {
                    d = period - d;
                }
                d * d
            })
            .sum::<f64>()
            .sqrt();
        self.profile(r)
    }
}

/// Tensor-product phase-space cutoff `psi1(x) psi2(xi)`.  A missing x bump
/// means `psi1 = 1` (frequency-only localization).
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffPair {
    pub x_bump: Option<RadialBump>,
    pub xi_bump: RadialBump,
    /// Spatial period used for the x-side distance.
    pub period: f64,
}

impl CutoffPair {
    /// Build a cutoff with support radius below 1 on both factors (the
    /// localization only means anything on small phase-space balls).
    pub fn new(x_bump: Option<RadialBump>, xi_bump: RadialBump, period: f64) -> Result<CutoffPair> {
        if let Some(b) = &x_bump {
            if b.support >= 1.0 {
                return Err(crate::bad_param!(
                    "x cutoff support radius {} must be < 1",
                    b.support
                ));
            }
        }
        if xi_bump.support >= 1.0 {
            return Err(crate::bad_param!(
                "frequency cutoff support radius {} must be < 1",
                xi_bump.support
            ));
        }
        Ok(CutoffPair {
            x_bump,
            xi_bump,
            period,
        })
    }

    /// Evaluate the scalar cutoff at `(x, xi)` (xi already scaled).
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        let vx = self
            .x_bump
            .as_ref()
            .map_or(1.0, |b| b.eval_periodic(x, self.period));
        vx * self.xi_bump.eval(xi)
    }

    /// The cutoff as a diagonal symbol (the scalar value times the
    /// identity), carrying its support ball.
    pub fn to_symbol(&self, size: usize) -> SymbolSpec {
        let this = self.clone();
        let x_independent = this.x_bump.is_none();
        let sym = SymbolSpec::direct(
            size,
            0.0,
            u32::MAX,
            0.0,
            std::sync::Arc::new(move |x: &[f64], xi: &[f64], out: &mut crate::symbol_core::MatC| {
                let v = Complex64::new(this.eval(x, xi), 0.0);
                out.fill(Complex64::default());
                for i in 0..out.nrows() {
                    out[(i, i)] = v;
                }
            }),
        );
        let mut sym = if let Some(xb) = &self.x_bump {
            sym.with_support(SupportBall {
                x0: xb.center.clone(),
                xi0: self.xi_bump.center.clone(),
                radius: xb.support + self.xi_bump.support,
            })
        } else {
            sym
        };
        sym.x_independent = x_independent;
        sym
    }

    /// Enlarged cutoff that is identically 1 on this cutoff's support, so
    /// that `(1 - sharp) * self = 0` everywhere.  The enlarged support
    /// radii grow by `margin` and must stay below 1.
    pub fn enlarged(&self, margin: f64) -> Result<CutoffPair> {
        if margin <= 0.0 {
            return Err(crate::bad_param!("enlargement margin must be positive"));
        }
        let grow = |b: &RadialBump| RadialBump {
            center: b.center.clone(),
            plateau: b.support,
            support: b.support + margin,
        };
        CutoffPair::new(
            self.x_bump.as_ref().map(grow),
            grow(&self.xi_bump),
            self.period,
        )
    }
}

/// Build the enlarged partner for cutoff nesting checks.
pub fn nested_cutoff_pair(inner: &CutoffPair, margin: f64) -> Result<CutoffPair> {
    inner.enlarged(margin)
}

/// Para-differential application of the cutoff at scale j.
pub fn localized_cutoff_op(
    pair: &CutoffPair,
    j: u32,
    f: &SampledField,
    family: &DyadicFamily,
) -> Result<SampledField> {
    apply_para(&pair.to_symbol(f.ncomp()), j, f, family)
}

/// Pseudo-differential application of the cutoff at scale j, via the exact
/// factorization into a Fourier multiplier followed by a pointwise
/// multiplication.
pub fn localized_cutoff_pdo(pair: &CutoffPair, j: u32, f: &SampledField) -> Result<SampledField> {
    let grid = *f.grid();
    let scale = (2.0f64).powi(-(j as i32));
    let mut xis = vec![0.0; grid.dim];
    let filtered = f.multiplier(|xi| {
        for (d, v) in xi.iter().enumerate() {
            xis[d] = scale * v;
        }
        Complex64::new(pair.xi_bump.eval(&xis), 0.0)
    });
    match &pair.x_bump {
        None => Ok(filtered),
        Some(xb) => {
            let pts = grid.points();
            let mut vals = Array2::zeros((f.ncomp(), pts));
            let mut x = vec![0.0; grid.dim];
            for i in 0..pts {
                grid.x_at(i, &mut x);
                let w = Complex64::new(xb.eval_periodic(&x, pair.period), 0.0);
                for c in 0..f.ncomp() {
                    vals[(c, i)] = w * filtered.vals()[(c, i)];
                }
            }
            SampledField::from_values(grid, vals)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::Grid;
    use crate::quantize::apply::apply_pdo;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn wave_packet(grid: Grid, carrier: i64, halfwidth: i64, seed: u64) -> SampledField {
        // envelope modes within `halfwidth` of the carrier, deterministic
        let env = SampledField::random_band_limited(grid, 1, halfwidth, seed).unwrap();
        env.modulate(&[carrier]).unwrap()
    }

    #[test]
    fn oversized_support_rejected() {
        let xi_b = RadialBump::new(vec![1.0], 0.5, 1.2).unwrap();
        assert!(CutoffPair::new(None, xi_b, TAU).is_err());
        let xi_ok = RadialBump::new(vec![1.0], 0.5, 0.9).unwrap();
        let x_bad = RadialBump::new(vec![0.0], 0.6, 1.0).unwrap();
        assert!(CutoffPair::new(Some(x_bad), xi_ok, TAU).is_err());
        assert!(RadialBump::new(vec![0.0], 0.9, 0.5).is_err());
    }

    #[test]
    fn plateau_band_passes_through_unchanged() {
        let grid = Grid::new(1, 256, TAU).unwrap();
        let pair = CutoffPair::new(
            None,
            RadialBump::new(vec![1.0], 0.6, 0.9).unwrap(),
            TAU,
        )
        .unwrap();
        let j = 5;
        // carrier 2^5 = 32, envelope half-width 8: scaled modes within
        // [0.75, 1.25], all inside the plateau ball around xi0 = 1.
        let f = wave_packet(grid, 32, 8, 3);
        let fam = DyadicFamily::default();
        let out = localized_cutoff_op(&pair, j, &f, &fam).unwrap();
        assert!(out.sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
        let out = localized_cutoff_pdo(&pair, j, &f).unwrap();
        assert!(out.sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn pdo_factorization_matches_engine() {
        let grid = Grid::new(1, 256, TAU).unwrap();
        let pair = CutoffPair::new(
            Some(RadialBump::new(vec![std::f64::consts::PI], 0.3, 0.6).unwrap()),
            RadialBump::new(vec![1.0], 0.5, 0.9).unwrap(),
            TAU,
        )
        .unwrap();
        let j = 6;
        let f = wave_packet(grid, 64, 4, 5);
        let fast = localized_cutoff_pdo(&pair, j, &f).unwrap();
        let engine = apply_pdo(&pair.to_symbol(1), j, &f).unwrap();
        assert!(fast.sub(&engine).unwrap().l2_norm() <= 1e-10 * f.l2_norm());
    }

    #[test]
    fn packet_in_frequency_plateau_reduces_to_x_window() {
        let grid = Grid::new(1, 256, TAU).unwrap();
        let xb = RadialBump::new(vec![std::f64::consts::PI], 0.3, 0.6).unwrap();
        let pair = CutoffPair::new(
            Some(xb.clone()),
            RadialBump::new(vec![1.0], 0.5, 0.9).unwrap(),
            TAU,
        )
        .unwrap();
        let j = 6;
        let f = wave_packet(grid, 64, 4, 7);
        // All active modes have scaled frequency within 4/64 of 1, well
        // inside the frequency plateau, so the multiplier acts as identity
        // and only the spatial window remains.
        let got = localized_cutoff_pdo(&pair, j, &f).unwrap();
        let mut x = vec![0.0];
        let mut vals = Array2::zeros((1, grid.points()));
        for i in 0..grid.points() {
            grid.x_at(i, &mut x);
            vals[(0, i)] = Complex64::new(xb.eval_periodic(&x, TAU), 0.0) * f.vals()[(0, i)];
        }
        let want = SampledField::from_values(grid, vals).unwrap();
        assert!(got.sub(&want).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn para_and_pdo_cutoffs_converge_fast() {
        // The two quantizations differ only through the cutoff's x-spectrum
        // above ~2^{j-3}, and the smooth bump's spectral tail decays like
        // exp(-c sqrt(eta)), so the per-step decay steepens as j grows.
        // The threshold depends on the scaled frequency of the probe's
        // modes and not on a carrier, so a low-frequency probe measures the
        // same rate as a wave packet at 2^j.
        let grid = Grid::new(1, 256, TAU).unwrap();
        let pair = CutoffPair::new(
            Some(RadialBump::new(vec![std::f64::consts::PI], 0.1, 0.7).unwrap()),
            RadialBump::new(vec![0.0], 0.5, 0.9).unwrap(),
            TAU,
        )
        .unwrap();
        let fam = DyadicFamily::default();
        let f = SampledField::random_band_limited(grid, 1, 3, 11).unwrap();
        let mut logs = Vec::new();
        for j in 4..=9u32 {
            let para = localized_cutoff_op(&pair, j, &f, &fam).unwrap();
            let pdo = localized_cutoff_pdo(&pair, j, &f).unwrap();
            let rel = para.sub(&pdo).unwrap().l2_norm() / f.l2_norm();
            logs.push((j as f64, rel.max(1e-300).log2()));
        }
        println!("cutoff pdo/para gap (j, log2 rel): {logs:?}");
        for w in logs.windows(2) {
            assert!(
                w[1].1 < w[0].1,
                "cutoff quantization gap not decreasing: {logs:?}"
            );
        }
        let tail = &logs[logs.len() - 3..];
        let tail_slope = (tail[2].1 - tail[0].1) / 2.0;
        assert!(
            tail_slope <= -3.0,
            "cutoff quantization gap tail slope {tail_slope} too shallow: {logs:?}"
        );
    }

    #[test]
    fn nested_cutoff_absorbs_inner() {
        let grid = Grid::new(1, 256, TAU).unwrap();
        let inner = CutoffPair::new(
            Some(RadialBump::new(vec![std::f64::consts::PI], 0.1, 0.4).unwrap()),
            RadialBump::new(vec![0.0], 0.3, 0.5).unwrap(),
            TAU,
        )
        .unwrap();
        let outer = nested_cutoff_pair(&inner, 0.45).unwrap();
        // pointwise nesting: (1 - outer) * inner = 0 on a sample sweep
        for t in 0..200 {
            let x = [TAU * t as f64 / 200.0];
            for s in 0..40 {
                let xi = [-0.5 + 2.0 * s as f64 / 40.0];
                let v_in = inner.eval(&x, &xi);
                let v_out = outer.eval(&x, &xi);
                assert!(
                    ((1.0 - v_out) * v_in).abs() <= 1e-15,
                    "nesting violated at x={:?} xi={:?}",
                    x,
                    xi
                );
            }
        }
        // Operator nesting: applying the enlarged cutoff after the inner
        // one changes nothing, up to terms that decay faster than 2^{-4j}
        // once the truncation threshold reaches the smooth tail.
        let fam = DyadicFamily::default();
        let f = SampledField::random_band_limited(grid, 1, 3, 23).unwrap();
        let mut logs = Vec::new();
        for j in 4..=9u32 {
            let once = localized_cutoff_op(&inner, j, &f, &fam).unwrap();
            let twice = localized_cutoff_op(&outer, j, &once, &fam).unwrap();
            let rel = twice.sub(&once).unwrap().l2_norm() / f.l2_norm();
            logs.push((j as f64, rel.max(1e-300).log2()));
        }
        println!("nesting residual (j, log2 rel): {logs:?}");
        let last = logs.len() - 1;
        let final_step = logs[last].1 - logs[last - 1].1;
        assert!(
            final_step <= -4.0,
            "nesting residual final step {final_step} shallower than -4: {logs:?}"
        );
    }
}
