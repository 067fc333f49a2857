//! Classifier for systems that start hyperbolic and turn elliptic: checks,
//! on a sampled region of `(x, xi)` space, the four conditions that make
//! the transition analysis go through.
//!
//! 1. Initial hyperbolicity: the spectrum of the principal symbol at
//!    `t = 0` is real on the whole region.
//! 2. Diagonalizability: the eigenbasis condition number stays bounded.
//! 3. Double roots: some real eigenvalue is a multiple root of the
//!    characteristic polynomial at some region point.
//! 4. Transversal bifurcation: at each double root the first time
//!    derivative of the polynomial vanishes while the second-order jet has
//!    positive margin `(d_t^2 P . d_lambda^2 P - (d_t d_lambda P)^2) / 4`,
//!    so the double root splits off the real axis at a linear rate.
//!
//! Every verdict carries the measured margin, and measurements that land
//! inside the tolerance band come back as `Inconclusive` rather than as a
//! silent yes or no.

use serde::Serialize;

use crate::error::Result;
use crate::field_core::SampledField;

use super::jet::{char_jet, gradient_at, nearest_flat, values_at};
use super::linalg::{complex_eigenvalues, complexify, eigenbasis_condition};
use super::system::{principal_symbol, SystemSpec};

/// Classification tolerance for "zero" quantities (imaginary parts, time
/// derivatives at double roots).
const TOL: f64 = 1e-8;

/// A root counts as double when the lambda-derivative of the polynomial is
/// this small there.
const DOUBLE_TOL: f64 = 1e-6;

/// Largest acceptable eigenbasis condition number on the region.
const COND_LIMIT: f64 = 1e6;

/// Outcome of a single condition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Verdict plus the measured quantity it was derived from.  `margin` is
/// `None` when nothing was measurable (for instance no real root exists
/// anywhere on the region).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub margin: Option<f64>,
}

/// Region verdicts for the four transition conditions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TransitionReport {
    /// Margin: largest imaginary part of the symbol spectrum at `t = 0`.
    pub initial_hyperbolicity: ConditionReport,
    /// Margin: largest eigenbasis condition number.
    pub diagonalizability: ConditionReport,
    /// Margin: smallest `|d_lambda P|` over all real roots.
    pub double_roots: ConditionReport,
    /// Margin: smallest second-order jet margin over all double roots.
    pub bifurcation: ConditionReport,
    /// All four conditions hold.
    pub transitional: bool,
}

/// Sampled `(x, xi)` region: the cartesian product of the two point lists.
#[derive(Clone, Debug)]
pub struct Region {
    pub xs: Vec<Vec<f64>>,
    pub xis: Vec<Vec<f64>>,
}

impl Region {
    pub fn new(xs: Vec<Vec<f64>>, xis: Vec<Vec<f64>>) -> Result<Region> {
        if xs.is_empty() || xis.is_empty() {
            return Err(crate::bad_param!("region needs at least one x and one xi sample"));
        }
        Ok(Region { xs, xis })
    }
}

/// Zero-test verdict with a decade of tolerance band on each side.
fn smallness_verdict(value: f64) -> Verdict {
    if value <= TOL / 10.0 {
        Verdict::Holds
    } else if value >= TOL * 10.0 {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

fn combine(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        _ => Verdict::Inconclusive,
    }
}

/// Check the four transition conditions for `sys` with initial state
/// `datum` on the sampled region.
pub fn transition_classify(
    sys: &SystemSpec,
    datum: &SampledField,
    region: &Region,
) -> Result<TransitionReport> {
    if datum.ncomp() != sys.ncomp || datum.grid().dim != sys.dim {
        return Err(crate::bad_param!("datum does not match the system's dimensions"));
    }
    for x in &region.xs {
        if x.len() != sys.dim {
            return Err(crate::bad_param!("region x sample of length {}, need {}", x.len(), sys.dim));
        }
    }
    for xi in &region.xis {
        if xi.len() != sys.dim {
            return Err(crate::bad_param!("region xi sample of length {}, need {}", xi.len(), sys.dim));
        }
    }

    let grid = *datum.grid();
    let grads: Vec<SampledField> = (0..sys.dim).map(|l| datum.partial(l)).collect();

    let mut max_imag = 0.0f64;
    let mut max_cond = 0.0f64;
    let mut min_dlambda: Option<f64> = None;
    let mut max_pt: Option<f64> = None;
    let mut min_margin: Option<f64> = None;

    for x in &region.xs {
        let m = nearest_flat(&grid, x);
        let mut xs = vec![0.0; grid.dim];
        grid.x_at(m, &mut xs);
        let u = values_at(datum, m);
        let v = gradient_at(&grads, m);
        for xi in &region.xis {
            let a = principal_symbol(sys, 0.0, &xs, &u, &v, xi)?;
            let eigs = complex_eigenvalues(&complexify(&a))?;
            for z in &eigs {
                max_imag = max_imag.max(z.im.abs());
            }
            max_cond = max_cond.max(eigenbasis_condition(&complexify(&a))?);

            // Real roots of the polynomial, deduplicated, probed for
            // multiplicity through the jet.
            let mut tested: Vec<f64> = Vec::new();
            for z in &eigs {
                if z.im.abs() > TOL {
                    continue;
                }
                if tested.iter().any(|r| (r - z.re).abs() < 1e-10) {
                    continue;
                }
                tested.push(z.re);
                let jet = char_jet(sys, datum, &xs, xi, z.re)?;
                let dl = jet.p_lambda.abs();
                min_dlambda = Some(min_dlambda.map_or(dl, |m| m.min(dl)));
                if dl <= DOUBLE_TOL {
                    let margin =
                        (jet.p_t2 * jet.p_lambda2 - jet.p_t_lambda * jet.p_t_lambda) / 4.0;
                    max_pt = Some(max_pt.map_or(jet.p_t.abs(), |m| m.max(jet.p_t.abs())));
                    min_margin = Some(min_margin.map_or(margin, |m| m.min(margin)));
                }
            }
        }
    }

    let initial_hyperbolicity = ConditionReport {
        verdict: smallness_verdict(max_imag),
        margin: Some(max_imag),
    };
    let diagonalizability = ConditionReport {
        verdict: if max_cond <= COND_LIMIT {
            Verdict::Holds
        } else if max_cond >= 100.0 * COND_LIMIT {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        },
        margin: Some(max_cond),
    };
    let double_roots = ConditionReport {
        verdict: match min_dlambda {
            None => Verdict::Fails,
            Some(dl) => {
                if dl <= DOUBLE_TOL / 10.0 {
                    Verdict::Holds
                } else if dl >= DOUBLE_TOL * 10.0 {
                    Verdict::Fails
                } else {
                    Verdict::Inconclusive
                }
            }
        },
        margin: min_dlambda,
    };
    let bifurcation = ConditionReport {
        verdict: match (max_pt, min_margin) {
            (Some(pt), Some(margin)) => {
                let positivity = if margin >= TOL * 10.0 {
                    Verdict::Holds
                } else if margin <= -TOL * 10.0 {
                    Verdict::Fails
                } else {
                    Verdict::Inconclusive
                };
                combine(smallness_verdict(pt), positivity)
            }
            // No double root anywhere: nothing to bifurcate, nothing measured.
            _ => Verdict::Inconclusive,
        },
        margin: min_margin,
    };
    let transitional = [&initial_hyperbolicity, &diagonalizability, &double_roots, &bifurcation]
        .iter()
        .all(|c| c.verdict == Verdict::Holds);
    Ok(TransitionReport {
        initial_hyperbolicity,
        diagonalizability,
        double_roots,
        bifurcation,
        transitional,
    })
}
