use super::{BinOp, Expr, Func};
use std::fmt;

/// `differentiate` met `abs`, `re` or `im` applied to a `t`-dependent argument.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffError {
    pub subtree: String,
}

impl fmt::Display for DiffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` is not complex-differentiable", self.subtree)
    }
}

impl std::error::Error for DiffError {}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v + 0.0),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        (a, b) if is_num(&a, 0.0) => b,
        (a, b) if is_num(&b, 0.0) => a,
        (a, Expr::Neg(b)) => Expr::bin(BinOp::Sub, a, *b),
        (a, b) => Expr::bin(BinOp::Add, a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        (a, b) if is_num(&b, 0.0) => a,
        (a, b) if is_num(&a, 0.0) => neg(b),
        (a, b) => Expr::bin(BinOp::Sub, a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        (a, b) if is_num(&a, 0.0) || is_num(&b, 0.0) => Expr::Num(0.0),
        (a, b) if is_num(&a, 1.0) => b,
        (a, b) if is_num(&b, 1.0) => a,
        (a, b) if is_num(&a, -1.0) => neg(b),
        (a, b) if is_num(&b, -1.0) => neg(a),
        (Expr::Neg(a), b) => neg(mul(*a, b)),
        (a, Expr::Neg(b)) => neg(mul(a, *b)),
        // keep numeric factors in front
        (a, b @ Expr::Num(_)) => Expr::bin(BinOp::Mul, b, a),
        (a, b) => Expr::bin(BinOp::Mul, a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if is_num(&a, 0.0) => Expr::Num(0.0),
        (a, b) if is_num(&b, 1.0) => a,
        (Expr::Neg(a), b) => neg(div(*a, b)),
        (a, b) => Expr::bin(BinOp::Div, a, b),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        a
    } else if is_num(&b, 0.0) {
        Expr::Num(1.0)
    } else {
        Expr::bin(BinOp::Pow, a, b)
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::call(f, a)
}

impl Expr {
    /// Symbolic derivative with respect to `t`, lightly simplified.
    ///
    /// `abs`, `re` and `im` are accepted only on `t`-free arguments.
    pub fn differentiate(&self) -> Result<Expr, DiffError> {
        Ok(match self {
            Expr::Num(_) | Expr::Pi | Expr::I => Expr::Num(0.0),
            Expr::T => Expr::Num(1.0),
            Expr::Neg(e) => neg(e.differentiate()?),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                match op {
                    BinOp::Add => add(a.differentiate()?, b.differentiate()?),
                    BinOp::Sub => sub(a.differentiate()?, b.differentiate()?),
                    BinOp::Mul => add(
                        mul(a.differentiate()?, b.clone()),
                        mul(a.clone(), b.differentiate()?),
                    ),
                    BinOp::Div => {
                        let db = b.differentiate()?;
                        let sq = pow(b.clone(), Expr::Num(2.0));
                        if a.is_constant() {
                            neg(div(mul(a.clone(), db), sq))
                        } else if b.is_constant() {
                            div(a.differentiate()?, b.clone())
                        } else {
                            div(
                                sub(mul(a.differentiate()?, b.clone()), mul(a.clone(), db)),
                                sq,
                            )
                        }
                    }
                    BinOp::Pow => {
                        if b.is_constant() {
                            mul(
                                mul(b.clone(), pow(a.clone(), sub(b.clone(), Expr::Num(1.0)))),
                                a.differentiate()?,
                            )
                        } else {
                            // a^b (b' ln a + b a'/a)
                            mul(
                                self.clone(),
                                add(
                                    mul(b.differentiate()?, call(Func::Ln, a.clone())),
                                    div(mul(b.clone(), a.differentiate()?), a.clone()),
                                ),
                            )
                        }
                    }
                }
            }
            Expr::Call(func, u) => {
                if u.is_constant() {
                    return Ok(Expr::Num(0.0));
                }
                if !func.is_analytic() {
                    return Err(DiffError {
                        subtree: self.to_string(),
                    });
                }
                let du = u.differentiate()?;
                let u = u.as_ref().clone();
                let outer = match func {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Tan => pow(call(Func::Sec, u), Expr::Num(2.0)),
                    Func::Cot => neg(pow(call(Func::Csc, u), Expr::Num(2.0))),
                    Func::Sec => mul(call(Func::Sec, u.clone()), call(Func::Tan, u)),
                    Func::Csc => neg(mul(call(Func::Csc, u.clone()), call(Func::Cot, u))),
                    Func::Exp => call(Func::Exp, u),
                    Func::Ln => return Ok(div(du, u)),
                    Func::Sqrt => {
                        return Ok(div(du, mul(Expr::Num(2.0), call(Func::Sqrt, u))));
                    }
                    Func::Atan => {
                        return Ok(div(du, add(Expr::Num(1.0), pow(u, Expr::Num(2.0)))));
                    }
                    Func::Erf | Func::Erfc => {
                        let g = mul(
                            div(Expr::Num(2.0), call(Func::Sqrt, Expr::Pi)),
                            call(Func::Exp, neg(pow(u, Expr::Num(2.0)))),
                        );
                        if *func == Func::Erf {
                            g
                        } else {
                            neg(g)
                        }
                    }
                    Func::Abs | Func::Re | Func::Im => unreachable!(),
                };
                mul(outer, du)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Expr {
        Expr::parse(s).unwrap().differentiate().unwrap()
    }

    #[test]
    fn textbook_forms() {
        assert_eq!(d("t^2").to_string(), "2*t");
        assert_eq!(d("atan(t)").to_string(), "1/(1+t^2)");
        assert_eq!(d("3*t").to_string(), "3");
        assert_eq!(d("sin(t)").to_string(), "cos(t)");
        assert_eq!(d("erf(t)").to_string(), "2/sqrt(pi)*exp(-t^2)");
        assert_eq!(d("ln(t)").to_string(), "1/t");
    }

    #[test]
    fn erf_slope_at_zero() {
        let v = d("erf(t)").eval(0.0).unwrap();
        assert!((v.re - 1.1283791670955126).abs() <= 1e-15);
    }

    #[test]
    fn product_and_quotient() {
        let e = d("t*exp(t)/(1+t^2)");
        let t = 0.7_f64;
        let exact = (t.exp() * (1.0 + t) * (1.0 + t * t) - t * t.exp() * 2.0 * t)
            / (1.0 + t * t).powi(2);
        assert!((e.eval(t).unwrap().re - exact).abs() < 1e-14);
    }

    #[test]
    fn variable_exponent() {
        let e = d("t^t");
        let t = 1.3_f64;
        let exact = t.powf(t) * (t.ln() + 1.0);
        assert!((e.eval(t).unwrap().re - exact).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_analytic() {
        let err = Expr::parse("1 + abs(t)").unwrap().differentiate().unwrap_err();
        assert_eq!(err.subtree, "abs(t)");
        assert!(Expr::parse("re(t*i)").unwrap().differentiate().is_err());
        // t-free arguments differentiate to zero
        assert_eq!(d("t + abs(2)").to_string(), "1");
    }
}
