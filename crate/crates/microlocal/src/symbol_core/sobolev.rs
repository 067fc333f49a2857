use crate::error::{Error, Result};
use crate::field_core::{bracket, SampledField};
use num_complex::Complex64;

/// Scalar nonlinear map `sigma(u, xi)` applied pointwise to field values.
pub type ScalarMap<'a> = &'a (dyn Fn(&[Complex64], &[f64]) -> Complex64 + Sync);

/// Nondecreasing envelope `C(r)` fitted on a corpus, bounding the ratio
/// `||sigma(u, xi)||_{H^s} / (<xi>^m ||u||_{H^s})` as a function of
/// `r = ||u||_inf`.
#[derive(Debug, Clone)]
pub struct NonlinearEnvelope {
    pub order: f64,
    pub s: f64,
    /// (r, C(r)) knots, sorted in r with nondecreasing C.
    pub knots: Vec<(f64, f64)>,
}

impl NonlinearEnvelope {
    /// Envelope value at sup-norm `r` (constant extension outside the
    /// fitted range).
    pub fn value(&self, r: f64) -> f64 {
        let mut best = self.knots.first().map(|k| k.1).unwrap_or(0.0);
        for &(rk, ck) in &self.knots {
            if rk <= r {
                best = ck;
            } else {
                break;
            }
        }
        best
    }
}

fn apply_pointwise(
    sigma: ScalarMap,
    u: &SampledField,
    xi: &[f64],
) -> Result<SampledField> {
    u.map_values(1, |vals, out| out[0] = sigma(vals, xi))
}

fn check_vanishes_at_zero(sigma: ScalarMap, ncomp: usize, xi: &[f64]) -> Result<()> {
    let zero = vec![Complex64::default(); ncomp];
    let v = sigma(&zero, xi);
    if v.norm() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "nonlinear map must vanish at u = 0; got |sigma(0)| = {}",
            v.norm()
        )));
    }
    Ok(())
}

/// Fit the nondecreasing envelope on a corpus of fields and frequencies.
/// Knots are cumulative maxima of the observed ratios ordered by sup norm,
/// so by construction `lhs <= rhs` on the corpus itself.
pub fn fit_nonlinear_envelope(
    sigma: ScalarMap,
    order: f64,
    s: f64,
    corpus: &[SampledField],
    xis: &[Vec<f64>],
) -> Result<NonlinearEnvelope> {
    if corpus.is_empty() || xis.is_empty() {
        return Err(Error::InvalidParameter("empty envelope corpus".into()));
    }
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for u in corpus {
        check_vanishes_at_zero(sigma, u.ncomp(), &xis[0])?;
        let r = u.linf_norm();
        let base = u.sobolev_norm(s);
        if base == 0.0 {
            continue;
        }
        for xi in xis {
            let g = apply_pointwise(sigma, u, xi)?;
            let xnorm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ratio = g.sobolev_norm(s) / (bracket(xnorm).powf(order) * base);
            samples.push((r, ratio));
        }
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let mut cur = 0.0f64;
    for (r, ratio) in samples {
        cur = cur.max(ratio);
        match knots.last_mut() {
            Some(last) if last.0 == r => last.1 = cur,
            _ => knots.push((r, cur)),
        }
    }
    Ok(NonlinearEnvelope { order, s, knots })
}

/// Evaluate both sides of the nonlinear Sobolev comparison for one field:
/// `lhs = ||sigma(u, xi)||_{H^s}` and
/// `rhs = <xi>^m C(||u||_inf) ||u||_{H^s}` with the fitted envelope `C`.
pub fn nonlinear_sobolev_check(
    sigma: ScalarMap,
    u: &SampledField,
    xi: &[f64],
    env: &NonlinearEnvelope,
) -> Result<(f64, f64)> {
    check_vanishes_at_zero(sigma, u.ncomp(), xi)?;
    let g = apply_pointwise(sigma, u, xi)?;
    let lhs = g.sobolev_norm(env.s);
    let xnorm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rhs = bracket(xnorm).powf(env.order) * env.value(u.linf_norm()) * u.sobolev_norm(env.s);
    Ok((lhs, rhs))
}
