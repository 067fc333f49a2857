use crate::error::{Error, Result};
use crate::field_core::SampledField;
use num_complex::Complex64;
use std::sync::Arc;

/// Dense complex matrix used for symbol values (sizes are tiny: N <= 3).
pub type MatC = nalgebra::DMatrix<Complex64>;

/// Black-box evaluator `a(x, xi) -> N x N`.
pub type DirectEval = Arc<dyn Fn(&[f64], &[f64], &mut MatC) + Send + Sync>;
/// Composed evaluator `sigma(u, xi) -> N x N` fed with carrier values `u`.
pub type ComposedEval = Arc<dyn Fn(&[Complex64], &[f64], &mut MatC) + Send + Sync>;
/// Coefficient map `u -> N x N` for one monomial in xi.
pub type CoeffEval = Arc<dyn Fn(&[Complex64], &mut MatC) + Send + Sync>;

/// One term `C_alpha(u) * xi^alpha` of a polynomial-in-xi composed symbol.
#[derive(Clone)]
pub struct PolyTerm {
    /// Monomial exponents per frequency axis.
    pub alpha: Vec<u32>,
    pub coeff: CoeffEval,
}

/// How the symbol produces values.
#[derive(Clone)]
pub enum SymbolKind {
    /// Arbitrary evaluator of (x, xi).
    Direct(DirectEval),
    /// `sigma(u(x), xi)` with a sampled carrier field `u`.
    Composed {
        map: ComposedEval,
        carrier: SampledField,
    },
    /// `sum_alpha C_alpha(u(x)) xi^alpha`: polynomial frequency dependence,
    /// which unlocks exact separable fast paths in quantization.
    ComposedPolyXi {
        terms: Vec<PolyTerm>,
        carrier: SampledField,
    },
}

/// Declared compact support window `{|x - x0| + |xi - xi0| <= radius}`.
#[derive(Debug, Clone)]
pub struct SupportBall {
    pub x0: Vec<f64>,
    pub xi0: Vec<f64>,
    pub radius: f64,
}

impl SupportBall {
    /// Combined distance `|x - x0| + |xi - xi0|` (x measured modulo `period`
    /// per axis when given).
    pub fn distance(&self, x: &[f64], xi: &[f64], period: Option<f64>) -> f64 {
        let mut dx_sq = 0.0;
        for (&xa, &xb) in x.iter().zip(&self.x0) {
            let mut d = (xa - xb).abs();
            if let Some(p) = period {
                d = d.rem_euclid(p);
                if d > p / 2.0 {
                    d = p - d;
                }
            }
            dx_sq += d * d;
        }
        let mut dxi_sq = 0.0;
        for (&fa, &fb) in xi.iter().zip(&self.xi0) {
            dxi_sq += (fa - fb) * (fa - fb);
        }
        dx_sq.sqrt() + dxi_sq.sqrt()
    }

    pub fn contains(&self, x: &[f64], xi: &[f64], period: Option<f64>) -> bool {
        self.distance(x, xi, period) <= self.radius
    }
}

/// A matrix symbol `a(x, xi)` of declared order and limited x-regularity
/// `C^{k, theta}`.
#[derive(Clone)]
pub struct SymbolSpec {
    /// Matrix size N.
    pub size: usize,
    /// Symbol order m: derivatives in xi are weighed by `<xi>^(|beta| - m)`.
    pub order: f64,
    /// Number of controlled x-derivatives.
    pub reg_k: u32,
    /// Holder exponent of the k-th x-derivative, in [0, 1).
    pub reg_theta: f64,
    pub kind: SymbolKind,
    /// Optional declared support window.
    pub support: Option<SupportBall>,
    /// True when the evaluator provably ignores x (Fourier multiplier).
    pub x_independent: bool,
    /// True when the evaluator provably ignores xi (pure coefficient).
    pub xi_independent: bool,
}

impl std::fmt::Debug for SymbolSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            SymbolKind::Direct(_) => "direct",
            SymbolKind::Composed { .. } => "composed",
            SymbolKind::ComposedPolyXi { .. } => "composed-poly-xi",
        };
        f.debug_struct("SymbolSpec")
            .field("size", &self.size)
            .field("order", &self.order)
            .field("reg_k", &self.reg_k)
            .field("reg_theta", &self.reg_theta)
            .field("kind", &kind)
            .field("support", &self.support)
            .field("x_independent", &self.x_independent)
            .finish()
    }
}

fn poly_eval(terms: &[PolyTerm], u: &[Complex64], xi: &[f64], out: &mut MatC) {
    let n = out.nrows();
    out.fill(Complex64::default());
    let mut scratch = MatC::zeros(n, n);
    for term in terms {
        let mut mono = 1.0;
        for (&e, &f) in term.alpha.iter().zip(xi) {
            mono *= f.powi(e as i32);
        }
        if mono == 0.0 {
            continue;
        }
        (term.coeff)(u, &mut scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += s * mono;
        }
    }
}

impl SymbolSpec {
    pub fn direct(
        size: usize,
        order: f64,
        reg_k: u32,
        reg_theta: f64,
        eval: DirectEval,
    ) -> SymbolSpec {
        SymbolSpec {
            size,
            order,
            reg_k,
            reg_theta,
            kind: SymbolKind::Direct(eval),
            support: None,
            x_independent: false,
            xi_independent: false,
        }
    }

    /// Scalar Fourier multiplier `m(xi) * Id`.
    pub fn multiplier(
        size: usize,
        order: f64,
        m: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> SymbolSpec {
        let eval: DirectEval = Arc::new(move |_x, xi, out| {
            let v = m(xi);
            out.fill(Complex64::default());
            for i in 0..out.nrows() {
                out[(i, i)] = v;
            }
        });
        SymbolSpec {
            size,
            order,
            reg_k: u32::MAX,
            reg_theta: 0.0,
            kind: SymbolKind::Direct(eval),
            support: None,
            x_independent: true,
            xi_independent: false,
        }
    }

    /// Matrix-valued Fourier multiplier `M(xi)`.
    pub fn matrix_multiplier(
        size: usize,
        order: f64,
        m: impl Fn(&[f64], &mut MatC) + Send + Sync + 'static,
    ) -> SymbolSpec {
        let eval: DirectEval = Arc::new(move |_x, xi, out| m(xi, out));
        SymbolSpec {
            size,
            order,
            reg_k: u32::MAX,
            reg_theta: 0.0,
            kind: SymbolKind::Direct(eval),
            support: None,
            x_independent: true,
            xi_independent: false,
        }
    }

    pub fn composed(
        size: usize,
        order: f64,
        reg_k: u32,
        reg_theta: f64,
        map: ComposedEval,
        carrier: SampledField,
    ) -> SymbolSpec {
        SymbolSpec {
            size,
            order,
            reg_k,
            reg_theta,
            kind: SymbolKind::Composed { map, carrier },
            support: None,
            x_independent: false,
            xi_independent: false,
        }
    }

    pub fn composed_poly(
        size: usize,
        order: f64,
        reg_k: u32,
        reg_theta: f64,
        terms: Vec<PolyTerm>,
        carrier: SampledField,
    ) -> SymbolSpec {
        SymbolSpec {
            size,
            order,
            reg_k,
            reg_theta,
            kind: SymbolKind::ComposedPolyXi { terms, carrier },
            support: None,
            x_independent: false,
            xi_independent: false,
        }
    }

    /// Multiplication symbol `a(x) = u(x)` from a one-component field: the
    /// quantization of this symbol in para form is the paraproduct `T_u`.
    pub fn scalar_coefficient(field: SampledField, reg_k: u32, reg_theta: f64) -> Result<SymbolSpec> {
        if field.ncomp() != 1 {
            return Err(crate::bad_param!(
                "scalar coefficient symbol needs a 1-component field"
            ));
        }
        let map: ComposedEval = Arc::new(|u: &[Complex64], _xi: &[f64], out: &mut MatC| {
            out[(0, 0)] = u[0];
        });
        let mut a = SymbolSpec::composed(1, 0.0, reg_k, reg_theta, map, field);
        a.xi_independent = true;
        Ok(a)
    }

    pub fn with_support(mut self, ball: SupportBall) -> SymbolSpec {
        self.support = Some(ball);
        self
    }

    /// Declare that the evaluator ignores its xi argument, enabling shared
    /// spectral work across frequency columns during quantization.
    pub fn assume_xi_independent(mut self) -> SymbolSpec {
        self.xi_independent = true;
        self
    }

    /// Carrier field for composed kinds.
    pub fn carrier(&self) -> Option<&SampledField> {
        match &self.kind {
            SymbolKind::Direct(_) => None,
            SymbolKind::Composed { carrier, .. } => Some(carrier),
            SymbolKind::ComposedPolyXi { carrier, .. } => Some(carrier),
        }
    }

    /// Evaluate at an arbitrary point (off-grid carrier values come from the
    /// exact mode sum).
    pub fn eval(&self, x: &[f64], xi: &[f64], out: &mut MatC) {
        debug_assert_eq!(out.nrows(), self.size);
        match &self.kind {
            SymbolKind::Direct(f) => f(x, xi, out),
            SymbolKind::Composed { map, carrier } => {
                let u = carrier.eval_at(x);
                map(&u, xi, out);
            }
            SymbolKind::ComposedPolyXi { terms, carrier } => {
                let u = carrier.eval_at(x);
                poly_eval(terms, &u, xi, out);
            }
        }
    }

    /// Evaluate with externally supplied carrier values (fast path for grid
    /// points).  Direct symbols just use `x`.
    pub fn eval_with_carrier(&self, x: &[f64], u: &[Complex64], xi: &[f64], out: &mut MatC) {
        match &self.kind {
            SymbolKind::Direct(f) => f(x, xi, out),
            SymbolKind::Composed { map, .. } => map(u, xi, out),
            SymbolKind::ComposedPolyXi { terms, .. } => poly_eval(terms, u, xi, out),
        }
    }

    /// Evaluate at grid point `m` of the carrier grid (or of `grid` for
    /// direct symbols) using stored sample values.
    pub fn eval_grid_point(
        &self,
        grid: &crate::field_core::Grid,
        m: usize,
        xi: &[f64],
        out: &mut MatC,
    ) {
        match &self.kind {
            SymbolKind::Direct(f) => {
                let mut x = vec![0.0; grid.dim];
                grid.x_at(m, &mut x);
                f(&x, xi, out);
            }
            SymbolKind::Composed { map, carrier } => {
                let u: Vec<Complex64> = (0..carrier.ncomp()).map(|c| carrier.vals()[(c, m)]).collect();
                map(&u, xi, out);
            }
            SymbolKind::ComposedPolyXi { terms, carrier } => {
                let u: Vec<Complex64> = (0..carrier.ncomp()).map(|c| carrier.vals()[(c, m)]).collect();
                poly_eval(terms, &u, xi, out);
            }
        }
    }

    /// Verify a declared support window by sampling: the evaluator must
    /// vanish at the given points outside the ball.
    pub fn check_support(&self, pts: &[(Vec<f64>, Vec<f64>)], period: Option<f64>) -> Result<()> {
        let ball = self
            .support
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("no support window declared".into()))?;
        let mut buf = MatC::zeros(self.size, self.size);
        for (x, xi) in pts {
            if !ball.contains(x, xi, period) {
                self.eval(x, xi, &mut buf);
                let mag: f64 = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if mag > 1e-12 {
                    return Err(Error::Numerical(format!(
                        "symbol does not vanish outside its declared support: |a| = {mag} at x={x:?}, xi={xi:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}
