use super::expr::parse_expr;
use super::spec::SymbolSpec;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Built-in symbols addressable by name from configs.
///
/// * `identity` — the identity matrix at every (x, xi);
/// * `multiplier:<expr>` — scalar Fourier multiplier given by an expression
///   in `xi1..xi3`, `normxi`, `brxi`, `i` (see the expression grammar);
/// * `paper-3x3-elliptic` — the frozen principal symbol `A(u0, i xi)` of the
///   3x3 rotational system at its base state `u0 = (0,0,1)`: an
///   antisymmetric coupling of the first two components through `i xi_1`,
///   with spectrum `{i xi_1, -i xi_1, 0}`;
/// * `burgers-transition` — the frozen symbol of the 2x2 transitional system
///   at its base state `u0 = (1,0)`: `i xi Id_2`.
///
/// `size` is only consulted for `identity`/`multiplier:` (matrix presets fix
/// their own size); `order` likewise defaults to the preset's natural order.
pub fn symbol_by_name(name: &str, size: usize, order: Option<f64>) -> Result<SymbolSpec> {
    if name == "identity" {
        return Ok(SymbolSpec::multiplier(size, order.unwrap_or(0.0), |_| {
            Complex64::new(1.0, 0.0)
        }));
    }
    if let Some(src) = name.strip_prefix("multiplier:") {
        let expr = parse_expr(src)?;
        return Ok(SymbolSpec::multiplier(
            size,
            order.unwrap_or(0.0),
            move |xi| expr.eval(xi),
        ));
    }
    match name {
        "paper-3x3-elliptic" => Ok(SymbolSpec::matrix_multiplier(
            3,
            order.unwrap_or(1.0),
            |xi, out| {
                out.fill(Complex64::default());
                let ix1 = Complex64::new(0.0, xi[0]);
                out[(0, 1)] = ix1;
                out[(1, 0)] = -ix1;
            },
        )),
        "burgers-transition" => Ok(SymbolSpec::matrix_multiplier(
            2,
            order.unwrap_or(1.0),
            |xi, out| {
                out.fill(Complex64::default());
                let ix = Complex64::new(0.0, xi[0]);
                out[(0, 0)] = ix;
                out[(1, 1)] = ix;
            },
        )),
        _ => Err(Error::InvalidParameter(format!(
            "unknown symbol preset '{name}'"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol_core::spec::MatC;

    #[test]
    fn identity_preset() {
        let a = symbol_by_name("identity", 2, None).unwrap();
        let mut m = MatC::zeros(2, 2);
        a.eval(&[0.3], &[5.0], &mut m);
        assert_eq!(m[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::default());
    }

    #[test]
    fn multiplier_preset_parses_and_evaluates() {
        let a = symbol_by_name("multiplier:xi1^2/(1+xi1^2)", 1, None).unwrap();
        assert!(a.x_independent);
        let mut m = MatC::zeros(1, 1);
        a.eval(&[9.9], &[3.0], &mut m);
        assert!((m[(0, 0)].re - 0.9).abs() < 1e-15);
        assert!(symbol_by_name("multiplier:flub(2)", 1, None).is_err());
    }

    #[test]
    fn rotational_3x3_preset_matrix() {
        let a = symbol_by_name("paper-3x3-elliptic", 3, None).unwrap();
        let mut m = MatC::zeros(3, 3);
        // At xi = (1, 0): the Hermitian block [[0, i], [-i, 0]] in the upper
        // corner and zero elsewhere, so the spectrum is real: {1, -1, 0}.
        // Eigenvalues off the imaginary axis are what drive exponential
        // growth for this system.
        a.eval(&[0.0, 0.0], &[1.0, 0.0], &mut m);
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 1.0));
        assert_eq!(m[(1, 0)], Complex64::new(0.0, -1.0));
        for (r, c) in [(0, 0), (1, 1), (2, 2), (0, 2), (2, 0), (1, 2), (2, 1)] {
            assert_eq!(m[(r, c)], Complex64::default());
        }
        let eig = m.clone().eigenvalues().unwrap();
        let mut re: Vec<f64> = eig.iter().map(|l| l.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for l in eig.iter() {
            assert!(l.im.abs() < 1e-12);
        }
        assert!((re[0] + 1.0).abs() < 1e-12);
        assert!(re[1].abs() < 1e-12);
        assert!((re[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transitional_2x2_preset_matrix() {
        let a = symbol_by_name("burgers-transition", 2, None).unwrap();
        let mut m = MatC::zeros(2, 2);
        a.eval(&[0.0], &[2.0], &mut m);
        assert_eq!(m[(0, 0)], Complex64::new(0.0, 2.0));
        assert_eq!(m[(1, 1)], Complex64::new(0.0, 2.0));
        assert_eq!(m[(0, 1)], Complex64::default());
    }
}
