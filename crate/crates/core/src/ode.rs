//! Dormand–Prince 5(4) integration of `x' = A(t) x + f(t)` on C², with dense
//! output.
//!
//! The complex system is integrated as the real 4-D system
//! `[re x1, im x1, re x2, im x2]`.

use crate::expr::EvalError;
use crate::jordan::{JordanSystem, Mat2, Vec2};
use crate::scalar::ScalarFn;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (last accepted t = {last_good})")]
    StepUnderflow { t: f64, last_good: f64 },
    #[error("non-finite state at t = {t} (last accepted t = {last_good})")]
    NonFinite { t: f64, last_good: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("right-hand side failed (last accepted t = {last_good}): {source}")]
    Eval {
        last_good: f64,
        #[source]
        source: EvalError,
    },
    #[error("empty integration range")]
    EmptyRange,
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; defaults to `1e-3 · |t1 − t0|`.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            h0: None,
            max_steps: 10_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

/// Inhomogeneous term `f(t) = (f1(t), f2(t))`.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub f1: ScalarFn,
    pub f2: ScalarFn,
}

impl Forcing {
    pub fn new(f1: impl Into<ScalarFn>, f2: impl Into<ScalarFn>) -> Self {
        Forcing {
            f1: f1.into(),
            f2: f2.into(),
        }
    }

    pub fn zero() -> Self {
        Forcing::new(0.0, 0.0)
    }

    pub fn eval(&self, t: f64) -> Result<Vec2, EvalError> {
        Ok(Vec2::new(self.f1.eval(t)?, self.f2.eval(t)?))
    }
}

type R4 = [f64; 4];

fn axpy(y: &R4, h: f64, terms: &[(f64, &R4)]) -> R4 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One accepted step with its continuous extension.
#[derive(Clone, Debug)]
struct Segment {
    t: f64,
    h: f64,
    r: [R4; 5],
}

impl Segment {
    fn eval(&self, t: f64) -> R4 {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        let r = &self.r;
        let mut y = [0.0; 4];
        for i in 0..4 {
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }

    fn lo(&self) -> f64 {
        self.t.min(self.t + self.h)
    }

    fn hi(&self) -> f64 {
        self.t.max(self.t + self.h)
    }
}

/// Accepted steps of an integration, queryable anywhere in the covered range.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec2>,
    segments: Vec<Segment>,
}

impl Trajectory {
    /// Step endpoints, strictly increasing.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec2] {
        &self.states
    }

    pub fn range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    /// Dense-output state at `t`, or `None` outside the covered range.
    pub fn at(&self, t: f64) -> Option<Vec2> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&t) {
            return None;
        }
        let i = self.segments.partition_point(|s| s.hi() < t).min(self.segments.len() - 1);
        let s = &self.segments[i];
        if t == s.lo() || t == s.hi() {
            let j = self.times.partition_point(|&x| x < t);
            return Some(self.states[j]);
        }
        Some(Vec2::from_reals(s.eval(t)))
    }

    /// `n + 1` evenly spaced sample times over the covered range.
    pub fn uniform_times(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.range();
        (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
    }

    /// CSV with header `t,re_x1,im_x1,re_x2,im_x2`, one row per time in range.
    pub fn to_csv(&self, times: &[f64]) -> String {
        let mut out = String::from("t,re_x1,im_x1,re_x2,im_x2\n");
        for &t in times {
            if let Some(x) = self.at(t) {
                let r = x.to_reals();
                let _ = writeln!(out, "{t},{},{},{},{}", r[0], r[1], r[2], r[3]);
            }
        }
        out
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `x' = A(t) x + f(t)` from `(t0, x0)` to `t1` (either direction).
pub fn integrate<A, F>(a: A, f: F, x0: Vec2, t0: f64, t1: f64, opts: &OdeOptions) -> Result<Trajectory, OdeError>
where
    A: Fn(f64) -> Result<Mat2, EvalError>,
    F: Fn(f64) -> Result<Vec2, EvalError>,
{
    if t0 == t1 || !(t0.is_finite() && t1.is_finite()) {
        return Err(OdeError::EmptyRange);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut last_good = t0;
    let rhs = |t: f64, y: &R4, last_good: f64| -> Result<R4, OdeError> {
        let m = a(t).map_err(|source| OdeError::Eval { last_good, source })?;
        let g = f(t).map_err(|source| OdeError::Eval { last_good, source })?;
        let d = m.apply(Vec2::from_reals(*y)) + g;
        Ok(d.to_reals())
    };

    let mut t = t0;
    let mut y = x0.to_reals();
    let mut k1 = rhs(t, &y, t)?;
    let mut h = dir * opts.h0.map(f64::abs).unwrap_or(1e-3 * span).min(span);
    let mut times = vec![t0];
    let mut states = vec![x0];
    let mut segments = Vec::new();
    let mut steps = 0usize;
    let mut last_rejected = false;

    while (t1 - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(OdeError::TooManySteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t: t + h, last_good });
        }
        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]), last_good)?;
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]), last_good)?;
        let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]), last_good)?;
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            last_good,
        )?;
        let tn = if (t + h - t1) * dir >= 0.0 { t1 } else { t + h };
        let k6 = rhs(
            tn,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            last_good,
        )?;
        let yn = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(tn, &yn, last_good)?;
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(yn[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() || yn.iter().any(|v| !v.is_finite()) {
            if h.abs() < 1e-12 * span {
                return Err(OdeError::NonFinite { t: tn, last_good });
            }
            h *= 0.1;
            last_rejected = true;
            continue;
        }
        steps += 1;
        let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
        if err <= 1.0 {
            let mut r = [[0.0; 4]; 5];
            for i in 0..4 {
                let ydiff = yn[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h * k7[i] - bspl;
                r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            segments.push(Segment { t, h: tn - t, r });
            t = tn;
            y = yn;
            k1 = k7;
            last_good = t;
            times.push(t);
            states.push(Vec2::from_reals(y));
            h *= if last_rejected { fac.min(1.0) } else { fac };
            last_rejected = false;
        } else {
            h *= fac.min(1.0);
            last_rejected = true;
        }
    }
    if dir < 0.0 {
        times.reverse();
        states.reverse();
        segments.reverse();
    }
    Ok(Trajectory {
        times,
        states,
        segments,
    })
}

/// [`integrate`] for a Jordan-form system with forcing.
pub fn integrate_system(
    sys: &JordanSystem,
    forcing: &Forcing,
    x0: Vec2,
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
) -> Result<Trajectory, OdeError> {
    integrate(|t| sys.coefficient_matrix(t), |t| forcing.eval(t), x0, t0, t1, opts)
}
