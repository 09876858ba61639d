//! Shadowing: defect of an approximate solution, anchor extraction, the
//! true solution `X(t)·anchor`, deviation, and uniqueness probing.

use crate::calculus::{schedule, Endpoint, ImproperOptions};
use crate::expr::{DiffError, EvalError, Expr};
use crate::jordan::{JordanError, JordanSystem, NormKind, Prepared, Vec2};
use crate::kappa::{best_constant, check_condition, check_conditions, Direction, KappaError, SupOptions, Verdict};
use crate::extremal::{anchored_response, ExtremalError};
use crate::ode::{integrate_system, Forcing, OdeError, OdeOptions, Trajectory};
use crate::C64;
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum ShadowError {
    #[error("approximate solution is not defined at t = {0}")]
    OutsideDomain(f64),
    #[error("X^-1(t) phi(t) has no limit toward {end}: last step {step:e} at t = {t}")]
    NoLimit { end: f64, t: f64, step: f64 },
    #[error("non-finite anchor")]
    NonFiniteAnchor,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Jordan(#[from] JordanError),
    #[error(transparent)]
    Kappa(#[from] KappaError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Extremal(#[from] ExtremalError),
}

type VecFn = Arc<dyn Fn(f64) -> Result<Vec2, EvalError> + Send + Sync>;

/// An approximate solution `φ`.
#[derive(Clone)]
pub enum Approx {
    /// Expressions with symbolic derivatives.
    Analytic { phi: [Expr; 2], dphi: [Expr; 2], domain: (f64, f64) },
    /// Dense ODE output; derivatives by finite differences.
    Dense(Trajectory),
    /// Any function, with an optional exact derivative.
    Function { value: VecFn, derivative: Option<VecFn>, domain: (f64, f64) },
}

impl std::fmt::Debug for Approx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Approx::Analytic { phi, .. } => write!(f, "Analytic({}, {})", phi[0], phi[1]),
            Approx::Dense(tr) => write!(f, "Dense({:?})", tr.range()),
            Approx::Function { domain, .. } => write!(f, "Function({domain:?})"),
        }
    }
}

impl Approx {
    pub fn analytic(phi1: Expr, phi2: Expr, domain: (f64, f64)) -> Result<Approx, DiffError> {
        let dphi = [phi1.differentiate()?, phi2.differentiate()?];
        Ok(Approx::Analytic {
            phi: [phi1, phi2],
            dphi,
            domain,
        })
    }

    pub fn function(domain: (f64, f64), f: impl Fn(f64) -> Result<Vec2, EvalError> + Send + Sync + 'static) -> Approx {
        Approx::Function {
            value: Arc::new(f),
            derivative: None,
            domain,
        }
    }

    /// Attaches an exact derivative to a [`Approx::Function`].
    pub fn with_derivative(self, df: impl Fn(f64) -> Result<Vec2, EvalError> + Send + Sync + 'static) -> Approx {
        match self {
            Approx::Function { value, domain, .. } => Approx::Function {
                value,
                derivative: Some(Arc::new(df)),
                domain,
            },
            other => other,
        }
    }

    /// The exact solution `X(t) c`.
    pub fn solution(p: Arc<Prepared>, c: Vec2) -> Approx {
        let domain = (p.interval().a, p.interval().b);
        let q = p.clone();
        let value = move |t: f64| -> Result<Vec2, EvalError> {
            let st = p.state(t).map_err(|e| jordan_eval(e, t))?;
            Ok(p.apply_x(&st, c))
        };
        let deriv = move |t: f64| -> Result<Vec2, EvalError> {
            let st = q.state(t).map_err(|e| jordan_eval(e, t))?;
            Ok(q.sys.coefficient_matrix(t)?.apply(q.apply_x(&st, c)))
        };
        Approx::function(domain, value).with_derivative(deriv)
    }

    /// Closed range where `φ` may be evaluated (ends may be infinite or open).
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Approx::Analytic { domain, .. } | Approx::Function { domain, .. } => *domain,
            Approx::Dense(tr) => tr.range(),
        }
    }

    pub fn value(&self, t: f64) -> Result<Vec2, ShadowError> {
        match self {
            Approx::Analytic { phi, .. } => Ok(Vec2::new(phi[0].eval(t)?, phi[1].eval(t)?)),
            Approx::Dense(tr) => tr.at(t).ok_or(ShadowError::OutsideDomain(t)),
            Approx::Function { value, .. } => Ok(value(t)?),
        }
    }

    pub fn derivative(&self, t: f64) -> Result<Vec2, ShadowError> {
        match self {
            Approx::Analytic { dphi, .. } => Ok(Vec2::new(dphi[0].eval(t)?, dphi[1].eval(t)?)),
            Approx::Function {
                derivative: Some(d), ..
            } => Ok(d(t)?),
            _ => self.numeric_derivative(t),
        }
    }

    /// Fourth-order differences: central when the stencil fits, one-sided
    /// toward the interior otherwise.
    fn numeric_derivative(&self, t: f64) -> Result<Vec2, ShadowError> {
        let (lo, hi) = self.domain();
        let scale = t.abs().max(1.0);
        let h0 = 1e-3 * scale;
        let room = (t - lo).min(hi - t) / 2.01;
        let f = |x: f64| self.value(x);
        if room >= h0.min(1e-4 * scale) {
            let h = h0.min(room);
            let d = (f(t - 2.0 * h)? - f(t + 2.0 * h)? + (f(t + h)? - f(t - h)?) * 8.0) * (1.0 / (12.0 * h));
            return Ok(d);
        }
        let h = if hi - t >= t - lo { h0.min((hi - t) / 4.0) } else { -h0.min((t - lo) / 4.0) };
        let d = (f(t)? * -25.0 + f(t + h)? * 48.0 - f(t + 2.0 * h)? * 36.0 + f(t + 3.0 * h)? * 16.0
            - f(t + 4.0 * h)? * 3.0)
            * (1.0 / (12.0 * h));
        Ok(d)
    }
}

fn jordan_eval(e: JordanError, t: f64) -> EvalError {
    match e {
        JordanError::Eval(e) => e,
        other => EvalError {
            kind: crate::expr::EvalErrorKind::Domain,
            subtree: other.to_string(),
            t,
        },
    }
}

/// `f = φ' − A(t) φ` sampled on a grid.
#[derive(Clone, Debug)]
pub struct DefectReport {
    pub grid: Vec<f64>,
    pub forcing: Vec<Vec2>,
    /// Sup of `‖f‖` over the grid.
    pub epsilon: f64,
    pub argmax_t: f64,
    /// Sup over every other grid point differs from `epsilon` by more than 1%.
    pub coarse_warning: bool,
}

pub fn defect(phi: &Approx, sys: &JordanSystem, grid: &[f64], norm: NormKind) -> Result<DefectReport, ShadowError> {
    let mut forcing = Vec::with_capacity(grid.len());
    for &t in grid {
        let d = phi.derivative(t)? - sys.coefficient_matrix(t)?.apply(phi.value(t)?);
        forcing.push(d);
    }
    let (mut eps, mut arg, mut half) = (0.0f64, grid.first().copied().unwrap_or(f64::NAN), 0.0f64);
    for (i, (f, &t)) in forcing.iter().zip(grid).enumerate() {
        let n = f.norm(norm);
        if n > eps {
            eps = n;
            arg = t;
        }
        if i % 2 == 0 {
            half = half.max(n);
        }
    }
    Ok(DefectReport {
        grid: grid.to_vec(),
        forcing,
        epsilon: eps,
        argmax_t: arg,
        coarse_warning: (eps - half) > 0.01 * eps,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ShadowOptions {
    /// Absolute Cauchy tolerance for the anchor limit.
    pub anchor_tol: f64,
    /// Return the last anchor iterate when `φ`'s domain ends before the
    /// limit settles, instead of failing.
    pub accept_truncated: bool,
    pub improper: ImproperOptions,
}

impl Default for ShadowOptions {
    fn default() -> Self {
        ShadowOptions {
            anchor_tol: 1e-7,
            accept_truncated: false,
            improper: ImproperOptions::default(),
        }
    }
}

/// `lim X⁻¹(t) φ(t)` toward the direction's endpoint(s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anchor {
    pub value: Vec2,
    pub converged: bool,
    /// Last times used for the first and second components.
    pub truncation: (f64, f64),
}

/// Points from `t0` toward `end`, kept inside `φ`'s domain and the grids' reach.
fn limit_points(p: &Prepared, phi: &Approx, end: Endpoint, opts: &ImproperOptions) -> Vec<f64> {
    let (lo, hi) = phi.domain();
    let t0 = p.t0();
    let inside = |t: f64| t >= lo && t <= hi && p.interval().contains(t);
    let mut pts: Vec<f64> = schedule(t0, end, opts).into_iter().take_while(|&t| inside(t)).collect();
    // a finite domain that stops short of the end still contributes its edge
    let edge = if end.value > t0 { hi } else { lo };
    if edge.is_finite() && inside(edge) && pts.last().is_none_or(|&l| (edge - l) * (end.value - t0) > 0.0) {
        pts.push(edge);
    }
    pts
}

const MAX_HALVINGS: u32 = 12;

fn component_limit(
    p: &Prepared,
    phi: &Approx,
    end: Endpoint,
    comp: usize,
    opts: &ShadowOptions,
) -> Result<(C64, bool, f64), ShadowError> {
    let mut pts = limit_points(p, phi, end, &opts.improper).into_iter();
    let mut prev: Option<C64> = None;
    let mut small = 0;
    let mut last = (C64::new(f64::NAN, 0.0), p.t0(), f64::INFINITY);
    // where X or φ stopped being finite; later points approach it by halving
    let mut failed: Option<f64> = None;
    let mut halvings = 0;
    let mut next = pts.next();
    while let Some(t) = next {
        let v = match p.state(t) {
            Ok(st) => p.apply_xinv(&st, phi.value(t)?).0[comp],
            Err(_) => C64::new(f64::NAN, 0.0),
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            failed = Some(t);
        } else {
            let step = prev.map_or(f64::INFINITY, |q| (v - q).norm());
            small = if step <= opts.anchor_tol { small + 1 } else { 0 };
            last = (v, t, step);
            if small >= 2 {
                return Ok((v, true, t));
            }
            prev = Some(v);
        }
        next = match failed {
            None => pts.next(),
            Some(f) if halvings < MAX_HALVINGS && prev.is_some() => {
                halvings += 1;
                Some(0.5 * (last.1 + f)).filter(|&m| m != last.1 && m != f)
            }
            Some(_) => None,
        };
    }
    if last.0.re.is_nan() {
        return Err(ShadowError::NonFiniteAnchor);
    }
    // overflow or the grids' reach can end the sequence right after it settled
    if last.2 <= opts.anchor_tol {
        return Ok((last.0, true, last.1));
    }
    if opts.accept_truncated {
        return Ok((last.0, last.2 <= opts.anchor_tol, last.1));
    }
    Err(ShadowError::NoLimit {
        end: end.value,
        t: last.1,
        step: last.2,
    })
}

pub fn anchor(phi: &Approx, p: &Prepared, dir: Direction, opts: &ShadowOptions) -> Result<Anchor, ShadowError> {
    let iv = p.interval();
    let (e1, e2) = match dir {
        Direction::Forward => (iv.right(), iv.right()),
        Direction::Backward => (iv.left(), iv.left()),
        Direction::Hyperbolic => (iv.right(), iv.left()),
    };
    let (v1, c1, t1) = component_limit(p, phi, e1, 0, opts)?;
    let (v2, c2, t2) = component_limit(p, phi, e2, 1, opts)?;
    Ok(Anchor {
        value: Vec2::new(v1, v2),
        converged: c1 && c2,
        truncation: (t1, t2),
    })
}

/// `x(t) = X(t)·anchor` on `grid`.
pub fn shadow_solution(anchor: Vec2, p: &Prepared, grid: &[f64]) -> Result<Vec<Vec2>, ShadowError> {
    grid.iter().map(|&t| Ok(p.apply_x(&p.state(t)?, anchor))).collect()
}

/// `(sup ‖φ − x‖, argsup)` over the grid; `x` is aligned with `grid`.
pub fn deviation(phi: &Approx, x: &[Vec2], grid: &[f64], norm: NormKind) -> Result<(f64, f64), ShadowError> {
    let mut best = (0.0f64, grid.first().copied().unwrap_or(f64::NAN));
    for (&t, xv) in grid.iter().zip(x) {
        let d = (phi.value(t)? - *xv).norm(norm);
        if d > best.0 || d.is_nan() {
            best = (d, t);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct Conditions {
    pub kappa_exists: bool,
    pub sup_finite: bool,
    pub divergence: Verdict,
}

impl Conditions {
    pub fn all_hold(&self) -> bool {
        self.kappa_exists && self.sup_finite && self.divergence == Verdict::Holds
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShadowReport {
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub direction: Direction,
    pub norm: NormKind,
    pub anchor: [f64; 4],
    pub sup_deviation: f64,
    pub ratio: Option<f64>,
    pub argsup_t: f64,
    pub conditions: Conditions,
    #[serde(skip)]
    pub anchor_converged: bool,
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub deviations: Vec<f64>,
}

impl ShadowReport {
    /// `t,deviation` rows over the evaluation grid.
    pub fn deviation_csv(&self) -> String {
        let mut out = String::from("t,deviation\n");
        for (t, d) in self.grid.iter().zip(&self.deviations) {
            let _ = writeln!(out, "{t},{d}");
        }
        out
    }
}

/// Full pipeline: defect, constant, conditions, anchor, shadow, deviation.
pub fn shadow(
    p: &Prepared,
    phi: &Approx,
    dir: Direction,
    norm: NormKind,
    grid: &[f64],
    sup: &SupOptions,
    opts: &ShadowOptions,
) -> Result<ShadowReport, ShadowError> {
    let eps = defect(phi, &p.sys, grid, norm)?.epsilon;
    let divergence = check_conditions(&check_condition(p, dir, &opts.improper)?);
    let (k, kappa_exists, sup_finite) = match best_constant(p, dir, norm, sup) {
        Ok(r) => (Some(r.k), true, true),
        Err(KappaError::Nonexistent { .. }) => (None, false, false),
        Err(KappaError::SupUnbounded { .. }) => (None, true, false),
        Err(e) => return Err(e.into()),
    };
    let a = anchor(phi, p, dir, opts)?;
    let x = shadow_solution(a.value, p, grid)?;
    let mut deviations = Vec::with_capacity(grid.len());
    for (&t, xv) in grid.iter().zip(&x) {
        deviations.push((phi.value(t)? - *xv).norm(norm));
    }
    let (sup_deviation, argsup_t) = deviations
        .iter()
        .zip(grid)
        .fold((0.0f64, grid.first().copied().unwrap_or(f64::NAN)), |acc, (&d, &t)| {
            if d > acc.0 { (d, t) } else { acc }
        });
    let ratio = k.filter(|&k| k * eps > 0.0).map(|k| sup_deviation / (k * eps));
    Ok(ShadowReport {
        epsilon: eps,
        k,
        direction: dir,
        norm,
        anchor: a.value.to_reals(),
        sup_deviation,
        ratio,
        argsup_t,
        conditions: Conditions {
            kappa_exists,
            sup_finite,
            divergence,
        },
        anchor_converged: a.converged,
        grid: grid.to_vec(),
        deviations,
    })
}

/// A solution of `φ' = A φ + f` started at `φ(span.0) = x0`, sampled on a
/// uniform grid, with the shadow `x = X·anchor` of its direction.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub x0: Vec2,
    pub anchor: Vec2,
    pub times: Vec<f64>,
    pub phi: Vec<Vec2>,
    pub shadow: Vec<Vec2>,
    pub deviation: Vec<f64>,
}

impl Orbit {
    pub fn max_deviation(&self) -> f64 {
        self.deviation.iter().fold(0.0, |m, &d| if d > m || d.is_nan() { d } else { m })
    }
}

/// The anchor is `X⁻¹(t_s)(φ(t_s) − ψ(t_s))`, where `ψ` is the forced
/// response with zero anchor; `φ` itself comes from the ODE solver.
pub fn perturbed_orbit(
    p: &Prepared,
    dir: Direction,
    forcing: &Forcing,
    x0: Vec2,
    span: (f64, f64),
    points: usize,
    norm: NormKind,
    ode: &OdeOptions,
    improper: &ImproperOptions,
) -> Result<Orbit, ShadowError> {
    let (ts, te) = span;
    let traj = integrate_system(&p.sys, forcing, x0, ts, te, ode)?;
    let f = |t: f64| forcing.eval(t);
    let psi = anchored_response(p, dir, &f, ts, improper)?;
    let anchor = p.apply_xinv(&p.state(ts)?, x0 - psi);
    let n = points.max(2);
    let times: Vec<f64> = (0..n).map(|k| ts + (te - ts) * k as f64 / (n - 1) as f64).collect();
    let mut phi = Vec::with_capacity(n);
    let mut shadow = Vec::with_capacity(n);
    let mut deviation = Vec::with_capacity(n);
    for &t in &times {
        let v = traj.at(t).ok_or(ShadowError::OutsideDomain(t))?;
        let x = p.apply_x(&p.state(t)?, anchor);
        deviation.push((v - x).norm(norm));
        phi.push(v);
        shadow.push(x);
    }
    Ok(Orbit {
        x0,
        anchor,
        times,
        phi,
        shadow,
        deviation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    Diverges,
    NoDivergence,
}

/// `ln ‖X(t) δ‖` toward one endpoint.
#[derive(Clone, Debug)]
pub struct GrowthCurve {
    pub end: f64,
    pub points: Vec<(f64, f64)>,
    pub verdict: Growth,
}

/// Tracks `‖X(t) δ‖` along the truncation schedule toward the endpoint(s) of
/// `dir`; it diverges when it ends above `threshold` and still increasing.
pub fn uniqueness_probe(
    p: &Prepared,
    dir: Direction,
    delta: Vec2,
    threshold: f64,
    norm: NormKind,
    opts: &ImproperOptions,
) -> Vec<GrowthCurve> {
    let iv = p.interval();
    let ends = match dir {
        Direction::Forward => vec![iv.right()],
        Direction::Backward => vec![iv.left()],
        Direction::Hyperbolic => vec![iv.right(), iv.left()],
    };
    let log_th = threshold.ln();
    ends.into_iter()
        .map(|end| {
            let mut points = Vec::new();
            for t in std::iter::once(p.t0()).chain(schedule(p.t0(), end, opts)) {
                let Ok(st) = p.state(t) else { break };
                let [a, b] = p.log_abs_x(&st, delta);
                let m = a.max(b);
                let ln = match norm {
                    NormKind::Max => m,
                    NormKind::Euclid if m == f64::NEG_INFINITY => m,
                    NormKind::Euclid => m + 0.5 * ((2.0 * (a - m)).exp() + (2.0 * (b - m)).exp()).ln(),
                };
                points.push((t, ln));
            }
            let n = points.len();
            let rising = n >= 2 && points[n - 1].1 > points[n - 2].1 + 1e-12;
            let verdict = if n > 0 && points[n - 1].1 > log_th && rising {
                Growth::Diverges
            } else {
                Growth::NoDivergence
            };
            GrowthCurve {
                end: end.value,
                points,
                verdict,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Interval;
    use crate::scalar::ScalarFn;

    fn blow_up() -> Arc<Prepared> {
        Arc::new(
            Prepared::new(
                JordanSystem::diagonal(
                    ScalarFn::parse("1/(1-t)").unwrap(),
                    ScalarFn::parse("-1/t").unwrap(),
                    Interval::open(0.0, 1.0).unwrap(),
                    0.5,
                )
                .unwrap(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn exact_solution_has_zero_defect_and_recovers_anchor() {
        let p = blow_up();
        let c = Vec2::new(C64::new(0.3, -0.2), C64::new(-1.5, 0.0));
        let phi = Approx::solution(p.clone(), c);
        let grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
        let d = defect(&phi, &p.sys, &grid, NormKind::Max).unwrap();
        assert!(d.epsilon < 1e-9, "{}", d.epsilon);
        let a = anchor(&phi, &p, Direction::Hyperbolic, &Default::default()).unwrap();
        assert!(a.converged);
        assert!((a.value - c).norm(NormKind::Max) < 1e-9);
        let x = shadow_solution(a.value, &p, &grid).unwrap();
        assert!(deviation(&phi, &x, &grid, NormKind::Max).unwrap().0 < 1e-8);
    }

    #[test]
    fn analytic_defect_of_unstable_shear() {
        // phi = X(t) (eps atan t, 0) with X = (1+t^2)[[1,t],[0,1]]
        let sys = JordanSystem::shear(ScalarFn::parse("2*t/(1+t^2)").unwrap(), 1.0, Interval::real_line(), 0.0).unwrap();
        let phi = Approx::analytic(Expr::parse("(1+t^2)*0.1*atan(t)").unwrap(), Expr::parse("0").unwrap(), (f64::NEG_INFINITY, f64::INFINITY))
            .unwrap();
        let grid: Vec<f64> = (-50..=50).map(|k| k as f64 / 5.0).collect();
        let d = defect(&phi, &sys, &grid, NormKind::Max).unwrap();
        assert!((d.epsilon - 0.1).abs() < 1e-12);
        assert!(d.forcing.iter().all(|f| (f.0[0].re - 0.1).abs() < 1e-12 && f.0[1].norm() < 1e-15));
    }

    #[test]
    fn shifted_solution_defect() {
        // phi = x + c for lambda1 = lambda2 = -1 gives f = -A c = c
        let sys = JordanSystem::diagonal(-1.0, -1.0, Interval::real_line(), 0.0).unwrap();
        let p = Arc::new(Prepared::new(sys.clone()).unwrap());
        let base = Approx::solution(p.clone(), Vec2::real(1.0, 2.0));
        let c = Vec2::new(C64::new(0.25, 0.0), C64::new(0.0, -0.5));
        let phi = Approx::function((f64::NEG_INFINITY, f64::INFINITY), move |t| Ok(base.value(t).unwrap() + c));
        let grid: Vec<f64> = (-20..=20).map(|k| k as f64 / 4.0).collect();
        let d = defect(&phi, &sys, &grid, NormKind::Max).unwrap();
        assert!((d.epsilon - 0.5).abs() < 1e-6, "{}", d.epsilon);
    }

    #[test]
    fn probe_verdicts() {
        let grow = Prepared::new(JordanSystem::diagonal(1.0, 1.0, Interval::real_line(), 0.0).unwrap()).unwrap();
        let c = uniqueness_probe(&grow, Direction::Forward, Vec2::real(1.0, 0.0), 10.0, NormKind::Max, &Default::default());
        assert_eq!(c[0].verdict, Growth::Diverges);
        let p = blow_up();
        let c = uniqueness_probe(&p, Direction::Hyperbolic, Vec2::real(1.0, 0.0), 10.0, NormKind::Max, &Default::default());
        assert_eq!(c[0].verdict, Growth::Diverges);
        let center = Prepared::new(JordanSystem::rotation(0.0, 1.0, Interval::real_line(), 0.0).unwrap()).unwrap();
        let c = uniqueness_probe(&center, Direction::Forward, Vec2::real(1.0, 0.0), 10.0, NormKind::Euclid, &Default::default());
        assert_eq!(c[0].verdict, Growth::NoDivergence);
    }

    #[test]
    fn report_json_fields() {
        let p = Arc::new(Prepared::new(JordanSystem::diagonal(1.0, -1.0, Interval::real_line(), 0.0).unwrap()).unwrap());
        let base = Approx::solution(p.clone(), Vec2::real(0.0, 0.0));
        let phi = Approx::function((-30.0, 30.0), move |t| Ok(base.value(t).unwrap() + Vec2::real(0.2, -0.2)));
        let grid: Vec<f64> = (-100..=100).map(|k| k as f64 * 0.2).collect();
        let o = ShadowOptions {
            accept_truncated: true,
            ..Default::default()
        };
        let r = shadow(&p, &phi, Direction::Hyperbolic, NormKind::Max, &grid, &SupOptions::default(), &o).unwrap();
        assert!(r.conditions.all_hold());
        assert!((r.epsilon - 0.2).abs() < 1e-6);
        assert!(r.sup_deviation <= r.k.unwrap() * r.epsilon * 1.01);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["epsilon", "K", "direction", "norm", "anchor", "sup_deviation", "ratio", "argsup_t", "conditions"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["conditions"]["divergence"], "holds");
    }
}
