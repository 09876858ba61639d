use super::{BinOp, Expr, Func};
use crate::special;
use crate::C64;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalErrorKind {
    /// Division by zero or a function evaluated exactly at a pole.
    Pole,
    /// Argument outside the function's domain, or a non-finite result.
    Domain,
}

/// Evaluation failure naming the offending subtree.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subtree: String,
    pub t: f64,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            EvalErrorKind::Pole => "pole",
            EvalErrorKind::Domain => "domain error",
        };
        write!(f, "{what} in `{}` at t = {}", self.subtree, self.t)
    }
}

impl std::error::Error for EvalError {}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn pow(base: C64, exp: C64) -> Option<C64> {
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= 1024.0 {
        let n = exp.re as i32;
        if base == ZERO && n < 0 {
            return None;
        }
        return Some(base.powi(n));
    }
    let base = C64::new(base.re, base.im + 0.0);
    if base == ZERO {
        return if exp.re > 0.0 { Some(ZERO) } else { None };
    }
    Some(base.powc(exp))
}

impl Expr {
    /// Evaluates the tree at `t`.
    pub fn eval(&self, t: f64) -> Result<C64, EvalError> {
        let fail = |kind| EvalError {
            kind,
            subtree: self.to_string(),
            t,
        };
        let v = match self {
            Expr::Num(v) => real(*v),
            Expr::Pi => real(std::f64::consts::PI),
            Expr::I => C64::i(),
            Expr::T => real(t),
            Expr::Neg(e) => ZERO - e.eval(t)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(t)?;
                let y = b.eval(t)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == ZERO {
                            return Err(fail(EvalErrorKind::Pole));
                        }
                        x / y
                    }
                    BinOp::Pow => pow(x, y).ok_or_else(|| fail(EvalErrorKind::Pole))?,
                }
            }
            Expr::Call(func, e) => {
                let z = e.eval(t)?;
                apply(*func, z).map_err(fail)?
            }
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(fail(EvalErrorKind::Domain));
        }
        Ok(v)
    }

    /// Real part of [`Expr::eval`]; errors when the imaginary part is not negligible.
    pub fn eval_real(&self, t: f64) -> Result<f64, EvalError> {
        let z = self.eval(t)?;
        if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
            return Err(EvalError {
                kind: EvalErrorKind::Domain,
                subtree: self.to_string(),
                t,
            });
        }
        Ok(z.re)
    }
}

/// Applies a built-in function with principal branches.
pub(crate) fn apply(func: Func, z: C64) -> Result<C64, EvalErrorKind> {
    // a signed zero imaginary part must not pick the other side of a branch cut
    let z = C64::new(z.re, z.im + 0.0);
    Ok(match func {
        Func::Sin => z.sin(),
        Func::Cos => z.cos(),
        Func::Tan => {
            let c = z.cos();
            if c == ZERO {
                return Err(EvalErrorKind::Pole);
            }
            z.sin() / c
        }
        Func::Cot => {
            let s = z.sin();
            if s == ZERO {
                return Err(EvalErrorKind::Pole);
            }
            z.cos() / s
        }
        Func::Sec => {
            let c = z.cos();
            if c == ZERO {
                return Err(EvalErrorKind::Pole);
            }
            ONE / c
        }
        Func::Csc => {
            let s = z.sin();
            if s == ZERO {
                return Err(EvalErrorKind::Pole);
            }
            ONE / s
        }
        Func::Exp => z.exp(),
        Func::Ln => {
            if z == ZERO {
                return Err(EvalErrorKind::Pole);
            }
            z.ln()
        }
        Func::Sqrt => z.sqrt(),
        Func::Atan => {
            // atan has branch points at ±i
            if z.re == 0.0 && z.im.abs() == 1.0 {
                return Err(EvalErrorKind::Pole);
            }
            z.atan()
        }
        Func::Erf | Func::Erfc => {
            if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
                return Err(EvalErrorKind::Domain);
            }
            let v = if func == Func::Erf {
                special::erf(z.re)
            } else {
                special::erfc(z.re)
            };
            real(v)
        }
        Func::Abs => real(z.norm()),
        Func::Re => real(z.re),
        Func::Im => real(z.im),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ev(s: &str, t: f64) -> C64 {
        Expr::parse(s).unwrap().eval(t).unwrap()
    }

    #[test]
    fn simple_values() {
        assert_eq!(ev("t", 3.5), real(3.5));
        assert_eq!(ev("1 - 2*t/(1+t^2)", 1.0), ZERO);
        assert!((ev("cot(t)", PI / 4.0) - ONE).norm() < 1e-15);
        assert_eq!(ev("i*t", 2.0), C64::new(0.0, 2.0));
        assert_eq!(ev("-t^2", 3.0), real(-9.0));
        assert_eq!(ev("(-2)^3", 0.0), real(-8.0));
        assert_eq!(ev("abs(3+4*i)", 0.0), real(5.0));
        assert_eq!(ev("re(3+4*i) + im(3+4*i)", 0.0), real(7.0));
    }

    #[test]
    fn principal_branches() {
        assert!((ev("sqrt(-1)", 0.0) - C64::i()).norm() < 1e-15);
        assert!((ev("ln(-1)", 0.0) - C64::new(0.0, PI)).norm() < 1e-15);
        assert!((ev("(-1)^0.5", 0.0) - C64::i()).norm() < 1e-15);
    }

    #[test]
    fn two_over_sqrt_pi() {
        let v = ev("2/sqrt(pi)*exp(-t^2)", 0.0);
        assert!((v.re - 1.1283791670955126).abs() <= 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn poles_report_subtree() {
        let err = Expr::parse("1 + cot(t)").unwrap().eval(0.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::Pole);
        assert_eq!(err.subtree, "cot(t)");

        let err = Expr::parse("ln(t)").unwrap().eval(0.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::Pole);

        let err = Expr::parse("1/(t-1)").unwrap().eval(1.0).unwrap_err();
        assert_eq!(err.subtree, "1/(t-1)");

        let err = Expr::parse("erf(i)").unwrap().eval(0.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::Domain);
    }

    #[test]
    fn deterministic_bits() {
        let e = Expr::parse("exp(i*t)*atan(t)/(1+t^2)").unwrap();
        for k in 0..50 {
            let t = k as f64 * 0.37 - 9.0;
            let a = e.eval(t).unwrap();
            let b = e.eval(t).unwrap();
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
