//! Quadrature, antiderivative grids and improper integrals.

mod grid;
mod improper;
mod quad;

pub use grid::{AntiderivativeGrid, Pinned};
pub use improper::{
    improper_integral, improper_on_schedule, schedule, Convergence, Endpoint, ImproperOptions, ImproperResult,
};
pub use quad::{integrate, QuadResult, QuadValue};

use crate::expr::EvalError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Finite-panel quadrature tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            rel: 1e-9,
            abs: 1e-12,
            max_panels: 1 << 20,
        }
    }
}

impl Tol {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tol {
            rel,
            abs,
            ..Tol::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CalculusError {
    #[error("integrand not evaluable on [{a}, {b}]: {source}")]
    Singularity {
        a: f64,
        b: f64,
        #[source]
        source: EvalError,
    },
    #[error("integrand is not finite on [{a}, {b}]")]
    NonFinite { a: f64, b: f64 },
    #[error("tolerance not met on [{a}, {b}]: error {error:e} after {panels} panels")]
    ToleranceNotMet {
        a: f64,
        b: f64,
        error: f64,
        panels: usize,
    },
    #[error("finite quadrature asked for an infinite range [{a}, {b}]")]
    InfiniteRange { a: f64, b: f64 },
    #[error("invalid interval: {0}")]
    BadInterval(String),
    #[error("point {t} is outside the grid range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
}

/// An interval with possibly infinite ends and per-end closedness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub closed_left: bool,
    pub closed_right: bool,
}

impl Interval {
    pub fn new(a: f64, b: f64, closed_left: bool, closed_right: bool) -> Result<Self, CalculusError> {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(CalculusError::BadInterval(format!("need a < b, got a={a}, b={b}")));
        }
        if (closed_left && a.is_infinite()) || (closed_right && b.is_infinite()) {
            return Err(CalculusError::BadInterval("infinite endpoints must be open".into()));
        }
        Ok(Interval {
            a,
            b,
            closed_left,
            closed_right,
        })
    }

    pub fn open(a: f64, b: f64) -> Result<Self, CalculusError> {
        Self::new(a, b, false, false)
    }

    pub fn real_line() -> Self {
        Interval {
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
            closed_left: false,
            closed_right: false,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let left = if self.closed_left { t >= self.a } else { t > self.a };
        let right = if self.closed_right { t <= self.b } else { t < self.b };
        left && right
    }

    pub fn is_interior(&self, t: f64) -> bool {
        t > self.a && t < self.b
    }

    pub fn is_bounded(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    pub fn left(&self) -> Endpoint {
        Endpoint {
            value: self.a,
            closed: self.closed_left,
        }
    }

    pub fn right(&self) -> Endpoint {
        Endpoint {
            value: self.b,
            closed: self.closed_right,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.closed_left { '[' } else { '(' };
        let r = if self.closed_right { ']' } else { ')' };
        let show = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{v}")
            }
        };
        write!(f, "{l}{}, {}{r}", show(self.a), show(self.b))
    }
}

/// Parses `(a,b)`, `[a,b]`, `(a,b]` or `[a,b)`. Ends are `inf`, `-inf` or
/// constant expressions such as `pi/2`.
impl std::str::FromStr for Interval {
    type Err = CalculusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| CalculusError::BadInterval(format!("`{s}`: {why}"));
        let s = s.trim();
        let closed_left = match s.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad("must start with `(` or `[`")),
        };
        let closed_right = match s.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad("must end with `)` or `]`")),
        };
        let body = &s[1..s.len() - 1];
        let (l, r) = body.split_once(',').ok_or_else(|| bad("expected two comma-separated ends"))?;
        let end = |e: &str| -> Result<f64, CalculusError> {
            match e.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => return Ok(f64::INFINITY),
                "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
                _ => {}
            }
            let f = crate::scalar::ScalarFn::parse(e).map_err(|err| bad(&err.to_string()))?;
            let v0 = f.eval(0.0).map_err(|err| bad(&err.to_string()))?;
            let v1 = f.eval(1.0).map_err(|err| bad(&err.to_string()))?;
            if v0 != v1 || v0.im != 0.0 || !v0.re.is_finite() {
                return Err(bad(&format!("end `{}` is not a real constant", e.trim())));
            }
            Ok(v0.re)
        };
        Interval::new(end(l)?, end(r)?, closed_left, closed_right)
    }
}
