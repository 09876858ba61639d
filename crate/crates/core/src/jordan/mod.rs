//! The three generalized Jordan forms, their fundamental matrices and norms.
//!
//! * form I: `A = diag(λ1, λ2)`
//! * form II: `A = [[λ, μ], [0, λ]]`
//! * form III: `A = [[α, β], [-β, α]]` with real `α`, `β`

mod mat;
mod prepared;

pub use mat::{Mat2, NormKind, Vec2};
pub use prepared::{knots, Prepared, State};

use crate::calculus::{CalculusError, Interval};
use crate::expr::EvalError;
use crate::scalar::ScalarFn;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum JordanError {
    #[error("base point t0 = {t0} is not interior to {interval}")]
    BaseNotInterior { t0: f64, interval: Interval },
    #[error("form III coefficient `{name}` is not real at t = {t}: imaginary part {im:e}")]
    NotReal { name: &'static str, t: f64, im: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    I,
    II,
    III,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::I => "I",
            Form::II => "II",
            Form::III => "III",
        })
    }
}

impl std::str::FromStr for Form {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" | "diagonal" => Ok(Form::I),
            "ii" | "2" | "shear" => Ok(Form::II),
            "iii" | "3" | "rotation" => Ok(Form::III),
            other => Err(format!("unknown form `{other}` (expected I, II or III)")),
        }
    }
}

/// Coefficient functions of a Jordan-form system.
#[derive(Clone, Debug)]
pub enum Coefficients {
    Diagonal { lambda1: ScalarFn, lambda2: ScalarFn },
    Shear { lambda: ScalarFn, mu: ScalarFn },
    Rotation { alpha: ScalarFn, beta: ScalarFn },
}

impl Coefficients {
    pub fn form(&self) -> Form {
        match self {
            Coefficients::Diagonal { .. } => Form::I,
            Coefficients::Shear { .. } => Form::II,
            Coefficients::Rotation { .. } => Form::III,
        }
    }

    /// The two coefficient functions in declaration order.
    pub fn pair(&self) -> (&ScalarFn, &ScalarFn) {
        match self {
            Coefficients::Diagonal { lambda1, lambda2 } => (lambda1, lambda2),
            Coefficients::Shear { lambda, mu } => (lambda, mu),
            Coefficients::Rotation { alpha, beta } => (alpha, beta),
        }
    }

    pub fn names(&self) -> (&'static str, &'static str) {
        match self {
            Coefficients::Diagonal { .. } => ("lambda1", "lambda2"),
            Coefficients::Shear { .. } => ("lambda", "mu"),
            Coefficients::Rotation { .. } => ("alpha", "beta"),
        }
    }
}

/// A two-dimensional system `x' = A(t) x` in one of the Jordan forms.
#[derive(Clone, Debug)]
pub struct JordanSystem {
    pub coeffs: Coefficients,
    pub interval: Interval,
    pub t0: f64,
}

impl JordanSystem {
    pub fn new(coeffs: Coefficients, interval: Interval, t0: f64) -> Result<Self, JordanError> {
        if !interval.is_interior(t0) {
            return Err(JordanError::BaseNotInterior { t0, interval });
        }
        let sys = JordanSystem {
            coeffs,
            interval,
            t0,
        };
        if let Coefficients::Rotation { alpha, beta } = &sys.coeffs {
            for t in sys.probe_points() {
                for (name, f) in [("alpha", alpha), ("beta", beta)] {
                    let v = f.eval(t)?;
                    if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
                        return Err(JordanError::NotReal { name, t, im: v.im });
                    }
                }
            }
        }
        Ok(sys)
    }

    pub fn diagonal(
        lambda1: impl Into<ScalarFn>,
        lambda2: impl Into<ScalarFn>,
        interval: Interval,
        t0: f64,
    ) -> Result<Self, JordanError> {
        Self::new(
            Coefficients::Diagonal {
                lambda1: lambda1.into(),
                lambda2: lambda2.into(),
            },
            interval,
            t0,
        )
    }

    pub fn shear(
        lambda: impl Into<ScalarFn>,
        mu: impl Into<ScalarFn>,
        interval: Interval,
        t0: f64,
    ) -> Result<Self, JordanError> {
        Self::new(
            Coefficients::Shear {
                lambda: lambda.into(),
                mu: mu.into(),
            },
            interval,
            t0,
        )
    }

    pub fn rotation(
        alpha: impl Into<ScalarFn>,
        beta: impl Into<ScalarFn>,
        interval: Interval,
        t0: f64,
    ) -> Result<Self, JordanError> {
        Self::new(
            Coefficients::Rotation {
                alpha: alpha.into(),
                beta: beta.into(),
            },
            interval,
            t0,
        )
    }

    pub fn form(&self) -> Form {
        self.coeffs.form()
    }

    /// A copy with a different base point.
    pub fn with_t0(&self, t0: f64) -> Result<Self, JordanError> {
        Self::new(self.coeffs.clone(), self.interval, t0)
    }

    /// `A(t)` assembled per the form.
    pub fn coefficient_matrix(&self, t: f64) -> Result<Mat2, EvalError> {
        let z = C64::new(0.0, 0.0);
        let (f, g) = self.coeffs.pair();
        let (p, q) = (f.eval(t)?, g.eval(t)?);
        Ok(match self.coeffs {
            Coefficients::Diagonal { .. } => Mat2::diag(p, q),
            Coefficients::Shear { .. } => Mat2::new(p, q, z, p),
            Coefficients::Rotation { .. } => {
                let (a, b) = (C64::new(p.re, 0.0), C64::new(q.re, 0.0));
                Mat2::new(a, b, -b, a)
            }
        })
    }

    /// True when both coefficients are constants.
    pub fn is_constant(&self) -> bool {
        let (f, g) = self.coeffs.pair();
        f.as_constant().is_some() && g.as_constant().is_some()
    }

    /// Interior points spread over the interval, used for sanity sampling.
    pub(crate) fn probe_points(&self) -> Vec<f64> {
        let (a, b) = (self.interval.a, self.interval.b);
        let n = 33;
        (1..n)
            .map(|k| {
                let u = k as f64 / n as f64;
                match (a.is_finite(), b.is_finite()) {
                    (true, true) => a + (b - a) * u,
                    (true, false) => a + (u / (1.0 - u)) * a.abs().max(1.0),
                    (false, true) => b - ((1.0 - u) / u) * b.abs().max(1.0),
                    (false, false) => self.t0 + 10.0 * (u - 0.5) / (u * (1.0 - u)),
                }
            })
            .collect()
    }
}
