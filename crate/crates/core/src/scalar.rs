//! Scalar functions of time: parsed expressions, constants or native closures.

use crate::expr::{EvalError, EvalErrorKind, Expr};
use crate::C64;
use std::fmt;
use std::sync::Arc;

type NativeFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// A complex-valued function of `t`.
#[derive(Clone)]
pub enum ScalarFn {
    Const(C64),
    Expr(Arc<Expr>),
    /// A closure with a display label used in error messages.
    Native(NativeFn, Arc<str>),
}

impl ScalarFn {
    pub fn constant(v: impl Into<C64>) -> Self {
        ScalarFn::Const(v.into())
    }

    pub fn real(v: f64) -> Self {
        ScalarFn::Const(C64::new(v, 0.0))
    }

    pub fn expr(e: Expr) -> Self {
        match e.is_constant().then(|| e.eval(0.0)) {
            Some(Ok(v)) => ScalarFn::Const(v),
            _ => ScalarFn::Expr(Arc::new(e)),
        }
    }

    pub fn parse(source: &str) -> Result<Self, crate::expr::ParseError> {
        Ok(Self::expr(Expr::parse(source)?))
    }

    pub fn native(label: &str, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        ScalarFn::Native(Arc::new(f), label.into())
    }

    pub fn eval(&self, t: f64) -> Result<C64, EvalError> {
        match self {
            ScalarFn::Const(v) => Ok(*v),
            ScalarFn::Expr(e) => e.eval(t),
            ScalarFn::Native(f, label) => {
                let v = f(t);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(EvalError {
                        kind: EvalErrorKind::Domain,
                        subtree: label.to_string(),
                        t,
                    })
                }
            }
        }
    }

    pub fn as_constant(&self) -> Option<C64> {
        match self {
            ScalarFn::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            ScalarFn::Expr(e) => Some(e),
            _ => None,
        }
    }

    /// Real part as a new function.
    pub fn re(&self) -> ScalarFn {
        match self {
            ScalarFn::Const(v) => ScalarFn::real(v.re),
            other => {
                let f = other.clone();
                ScalarFn::native(&format!("re({f})"), move |t| match f.eval(t) {
                    Ok(v) => C64::new(v.re, 0.0),
                    Err(_) => C64::new(f64::NAN, 0.0),
                })
            }
        }
    }

    /// Imaginary part as a new function.
    pub fn im(&self) -> ScalarFn {
        match self {
            ScalarFn::Const(v) => ScalarFn::real(v.im),
            other => {
                let f = other.clone();
                ScalarFn::native(&format!("im({f})"), move |t| match f.eval(t) {
                    Ok(v) => C64::new(v.im, 0.0),
                    Err(_) => C64::new(f64::NAN, 0.0),
                })
            }
        }
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Const(v) if v.im == 0.0 => write!(f, "{}", v.re),
            ScalarFn::Const(v) => write!(f, "{}+{}*i", v.re, v.im),
            ScalarFn::Expr(e) => write!(f, "{e}"),
            ScalarFn::Native(_, label) => f.write_str(label),
        }
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({self})")
    }
}

impl From<f64> for ScalarFn {
    fn from(v: f64) -> Self {
        ScalarFn::real(v)
    }
}

impl From<C64> for ScalarFn {
    fn from(v: C64) -> Self {
        ScalarFn::Const(v)
    }
}

impl From<Expr> for ScalarFn {
    fn from(e: Expr) -> Self {
        ScalarFn::expr(e)
    }
}
