use crate::error::{Error, Result};
use num_complex::Complex64;

/// Parsed scalar expression in the frequency variables.
///
/// Grammar (usual precedence, `^` right-associative, unary minus):
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | '/') factor)*
///   factor := unary ('^' factor)?
///   unary  := '-' unary | primary
///   primary:= number | ident | ident '(' expr ')' | '(' expr ')'
///
/// Identifiers: `xi1`, `xi2`, `xi3` (frequency components), `normxi` (the
/// Euclidean norm |xi|), `brxi` (the bracket (1+|xi|^2)^(1/2)), `i` (the
/// imaginary unit), `pi`; functions `sin cos tan exp log sqrt abs tanh sinh
/// cosh re im`.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Imag,
    Var(usize),
    NormXi,
    BracketXi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
    Sinh,
    Cosh,
    Re,
    Im,
}

impl Expr {
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        match self {
            Expr::Num(v) => Complex64::new(*v, 0.0),
            Expr::Imag => Complex64::new(0.0, 1.0),
            Expr::Var(a) => {
                Complex64::new(xi.get(*a).copied().unwrap_or(0.0), 0.0)
            }
            Expr::NormXi => {
                Complex64::new(xi.iter().map(|v| v * v).sum::<f64>().sqrt(), 0.0)
            }
            Expr::BracketXi => Complex64::new(
                (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt(),
                0.0,
            ),
            Expr::Neg(e) => -e.eval(xi),
            Expr::Add(a, b) => a.eval(xi) + b.eval(xi),
            Expr::Sub(a, b) => a.eval(xi) - b.eval(xi),
            Expr::Mul(a, b) => a.eval(xi) * b.eval(xi),
            Expr::Div(a, b) => a.eval(xi) / b.eval(xi),
            Expr::Pow(a, b) => {
                let base = canonical_zero(a.eval(xi));
                let exp = b.eval(xi);
                if exp.im == 0.0 && base.im == 0.0 && base.re >= 0.0 {
                    Complex64::new(base.re.powf(exp.re), 0.0)
                } else if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() < 64.0 {
                    base.powi(exp.re as i32)
                } else {
                    base.powc(exp)
                }
            }
            Expr::Call(f, e) => {
                // Branch-cut functions must see +0.0 imaginary parts so that
                // real arguments land on the principal branch (sqrt(-1) = i).
                let v = canonical_zero(e.eval(xi));
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => Complex64::new(v.norm(), 0.0),
                    Func::Tanh => v.tanh(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                    Func::Re => Complex64::new(v.re, 0.0),
                    Func::Im => Complex64::new(v.im, 0.0),
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::InvalidParameter(format!(
            "multiplier expression error at byte {}: {msg}",
            self.pos
        )))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // Power binds tighter than unary minus (`-2^2` is -(2^2)) and is
    // right-associative; its exponent may itself be signed (`2^-3`).
    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.expr()?;
                if self.bump() != Some(b')') {
                    return self.fail("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => self.fail(&format!("unexpected character '{}'", c as char)),
            None => self.fail("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || (matches!(self.src[self.pos], b'e' | b'E')
                    && self.pos + 1 < self.src.len()
                    && (self.src[self.pos + 1].is_ascii_digit()
                        || matches!(self.src[self.pos + 1], b'+' | b'-')))
                || (matches!(self.src[self.pos], b'+' | b'-')
                    && self.pos > start
                    && matches!(self.src[self.pos - 1], b'e' | b'E')))
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Num(v)),
            Err(_) => self.fail(&format!("bad number literal '{text}'")),
        }
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            "tanh" => Some(Func::Tanh),
            "sinh" => Some(Func::Sinh),
            "cosh" => Some(Func::Cosh),
            "re" => Some(Func::Re),
            "im" => Some(Func::Im),
            _ => None,
        };
        if let Some(f) = func {
            if self.bump() != Some(b'(') {
                return self.fail(&format!("function '{name}' needs parentheses"));
            }
            let arg = self.expr()?;
            if self.bump() != Some(b')') {
                return self.fail("expected ')'");
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        match name {
            "xi1" => Ok(Expr::Var(0)),
            "xi2" => Ok(Expr::Var(1)),
            "xi3" => Ok(Expr::Var(2)),
            "normxi" => Ok(Expr::NormXi),
            "brxi" => Ok(Expr::BracketXi),
            "i" => Ok(Expr::Imag),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            _ => self.fail(&format!("unknown identifier '{name}'")),
        }
    }
}

/// Replace signed zeros by +0.0 so branch cuts behave as on the real line.
fn canonical_zero(v: Complex64) -> Complex64 {
    Complex64::new(
        if v.re == 0.0 { 0.0 } else { v.re },
        if v.im == 0.0 { 0.0 } else { v.im },
    )
}

/// Parse a multiplier expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    if !src.is_ascii() {
        return Err(Error::InvalidParameter(
            "multiplier expressions must be ASCII".into(),
        ));
    }
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.fail("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, xi: &[f64]) -> Complex64 {
        parse_expr(src).unwrap().eval(xi)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1+2*3", &[0.0]).re, 7.0);
        assert_eq!(ev("(1+2)*3", &[0.0]).re, 9.0);
        assert_eq!(ev("2^3^2", &[0.0]).re, 512.0); // right-assoc
        assert_eq!(ev("-2^2", &[0.0]).re, -4.0); // power binds tighter
        assert_eq!(ev("2^-2", &[0.0]).re, 0.25);
        assert_eq!(ev("1-2-3", &[0.0]).re, -4.0);
        assert_eq!(ev("8/4/2", &[0.0]).re, 1.0);
    }

    #[test]
    fn variables_and_functions() {
        let xi = [3.0, 4.0];
        assert_eq!(ev("xi1", &xi).re, 3.0);
        assert_eq!(ev("xi2", &xi).re, 4.0);
        assert_eq!(ev("normxi", &xi).re, 5.0);
        assert!((ev("brxi", &xi).re - 26.0f64.sqrt()).abs() < 1e-15);
        assert!((ev("sin(xi1)", &xi).re - 3.0f64.sin()).abs() < 1e-15);
        assert!((ev("xi1^2/(1+xi1^2)", &xi).re - 0.9).abs() < 1e-15);
        assert!((ev("exp(-normxi^2)", &xi).re - (-25.0f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn complex_values() {
        let v = ev("i*xi1", &[2.0]);
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        let w = ev("abs(i*xi1)", &[-2.0]);
        assert!((w.re - 2.0).abs() < 1e-15);
        let s = ev("sqrt(-1)", &[0.0]);
        assert!((s - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn scientific_notation() {
        assert!((ev("1.5e-3", &[0.0]).re - 0.0015).abs() < 1e-18);
        assert!((ev("2E2", &[0.0]).re - 200.0).abs() < 1e-12);
    }

    #[test]
    fn errors_reported() {
        assert!(parse_expr("xi9").is_err());
        assert!(parse_expr("1+").is_err());
        assert!(parse_expr("sin 3").is_err());
        assert!(parse_expr("(1+2").is_err());
        assert!(parse_expr("1 2").is_err());
        assert!(parse_expr("bogus(1)").is_err());
    }
}
