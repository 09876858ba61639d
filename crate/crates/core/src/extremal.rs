//! Extremal forcings and sharpness experiments.
//!
//! The extremal forcing drives an approximate solution whose distance from the
//! shadowing solution is exactly `ε κ(t)`, so its supremum reaches `K ε`.

use crate::calculus::{schedule, Endpoint, ImproperOptions};
use crate::expr::EvalError;
use crate::jordan::{Form, JordanError, Mat2, NormKind, Prepared, Vec2};
use crate::kappa::{
    best_constant, calc_to_eval, check_condition, check_conditions, golden, integral_within, kappa_profile,
    native_norm, Direction, KappaError, SupOptions, Verdict, EXP_CAP,
};
use crate::ode::{integrate, OdeError, OdeOptions};
use crate::C64;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum ExtremalError {
    #[error("x_star must be nonzero")]
    ZeroDirection,
    #[error("mu changes sign or is not real (value {value} at t = {t}); the lower bound is not established for this case")]
    SignChangingMu { t: f64, value: C64 },
    #[error("stability hypotheses do not hold: divergence {divergence}")]
    Hypotheses { divergence: &'static str },
    #[error("no extremal profile for form {form} in the {norm} norm")]
    UnsupportedNorm { form: Form, norm: NormKind },
    #[error("needs constant alpha != 0 and beta != 0: {0}")]
    NotConstantRotation(String),
    #[error("anchored response did not converge at t = {0}")]
    Unanchored(f64),
    #[error("empty horizon ({0}, {1})")]
    EmptyHorizon(f64, f64),
    #[error(transparent)]
    Kappa(#[from] KappaError),
    #[error(transparent)]
    Jordan(#[from] JordanError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Closed-form worst-case forcing for one system and direction.
#[derive(Clone, Debug)]
pub struct ExtremalForcing<'a> {
    p: &'a Prepared,
    pub form: Form,
    pub eps: f64,
    /// Form III direction (real, nonzero).
    pub x_star: Option<[f64; 2]>,
    /// Form II second component sign: `-1` anchors at `b`, `+1` at `a`
    /// (flipped when `μ ≤ 0`).
    pub sign: f64,
    /// Form III divisor `‖x*‖` in the experiment's norm.
    scale: f64,
}

impl<'a> ExtremalForcing<'a> {
    /// `f(t)`: form I `ε(e^{i Im Λ1}, e^{i Im Λ2})`, form II `ε e^{i Im Λ}(1, ∓1)`,
    /// form III `ε e^{-∫α} X(t) x*/‖x*‖`.
    pub fn eval(&self, t: f64) -> Result<Vec2, ExtremalError> {
        let st = self.p.state(t)?;
        let e = C64::new(self.eps, 0.0);
        let phase = |z: C64| C64::from_polar(1.0, z.im);
        Ok(match self.form {
            Form::I => Vec2::new(e * phase(st.p), e * phase(st.q)),
            Form::II => Vec2::new(e, e * self.sign).scale(phase(st.p)),
            Form::III => {
                let [a, b] = self.x_star.expect("form III direction");
                let (s, c) = st.q.re.sin_cos();
                let k = self.eps / self.scale;
                Vec2::real(k * (c * a + s * b), k * (-s * a + c * b))
            }
        })
    }
}

/// Builds the extremal forcing for `dir`; `x_star` defaults to `(1, 0)`.
///
/// Form II needs `μ` of one sign on the probe points; the second component
/// sign follows the direction and the sign of `μ`.
pub fn extremal_forcing<'a>(
    p: &'a Prepared,
    dir: Direction,
    eps: f64,
    x_star: Option<[f64; 2]>,
) -> Result<ExtremalForcing<'a>, ExtremalError> {
    extremal_forcing_in(p, dir, eps, x_star, native_norm(p.form()))
}

fn extremal_forcing_in<'a>(
    p: &'a Prepared,
    dir: Direction,
    eps: f64,
    x_star: Option<[f64; 2]>,
    norm: NormKind,
) -> Result<ExtremalForcing<'a>, ExtremalError> {
    let form = p.form();
    if !dir.allowed(form) {
        return Err(KappaError::BadDirection { form, dir }.into());
    }
    let mut sign = 1.0;
    if form == Form::II {
        sign = if dir == Direction::Forward { -1.0 } else { 1.0 };
        if mu_sign(p)? < 0.0 {
            sign = -sign;
        }
    }
    let (x_star, scale) = match form {
        Form::III => {
            let x = x_star.unwrap_or([1.0, 0.0]);
            let n = Vec2::real(x[0], x[1]).norm(norm);
            if n == 0.0 || !n.is_finite() {
                return Err(ExtremalError::ZeroDirection);
            }
            (Some(x), n)
        }
        _ => (None, 1.0),
    };
    Ok(ExtremalForcing {
        p,
        form,
        eps,
        x_star,
        sign,
        scale,
    })
}

/// `+1` when `μ ≥ 0` on the probe points, `-1` when `μ ≤ 0`.
fn mu_sign(p: &Prepared) -> Result<f64, ExtremalError> {
    let (_, mu) = p.sys.coeffs.pair();
    let (mut pos, mut neg) = (false, false);
    for t in p.sys.probe_points() {
        let v = mu.eval(t)?;
        if v.im.abs() > 1e-12 * v.norm().max(1.0) {
            return Err(ExtremalError::SignChangingMu { t, value: v });
        }
        pos |= v.re > 0.0;
        neg |= v.re < 0.0;
        if pos && neg {
            return Err(ExtremalError::SignChangingMu { t, value: v });
        }
    }
    Ok(if neg { -1.0 } else { 1.0 })
}

/// `X(t) X⁻¹(s)` from grid differences, exponent capped.
fn propagator(p: &Prepared, t: f64, s: f64) -> Result<Mat2, EvalError> {
    let d1 = -p.first().diff(s, t).map_err(calc_to_eval(s))?;
    let d2 = -p.second().diff(s, t).map_err(calc_to_eval(s))?;
    let capped = |z: C64| C64::new(z.re.min(EXP_CAP), z.im).exp();
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    Ok(match p.form() {
        Form::I => Mat2::diag(capped(d1), capped(d2)),
        Form::II => Mat2::new(one, d2, z, one).scale(capped(d1)),
        Form::III => {
            let (sn, c) = d2.re.sin_cos();
            Mat2::real(c, sn, -sn, c).scale(capped(C64::new(d1.re, 0.0)))
        }
    })
}

fn reach(p: &Prepared) -> (f64, f64) {
    let (a, b) = p.first().reach();
    let (c, d) = p.second().reach();
    (a.max(c), b.min(d))
}

/// `∫_t^end X(t)X⁻¹(s) f(s) ds`, restricted to component `keep` when given
/// (the other one may diverge toward this end).
fn toward(
    p: &Prepared,
    f: &(dyn Fn(f64) -> Result<Vec2, EvalError> + Sync),
    t: f64,
    end: Endpoint,
    keep: Option<usize>,
    opts: &ImproperOptions,
) -> Result<Vec2, ExtremalError> {
    let integrand = |s: f64| -> Result<Vec2, EvalError> {
        let mut v = propagator(p, t, s)?.apply(f(s)?);
        if let Some(k) = keep {
            v.0[1 - k] = C64::new(0.0, 0.0);
        }
        Ok(v)
    };
    let r = integral_within(integrand, t, end, reach(p), opts).map_err(KappaError::from)?;
    if !r.converged() {
        return Err(ExtremalError::Unanchored(t));
    }
    Ok(r.value)
}

/// The solution of `φ' = A φ + f` whose anchor for `dir` is zero:
/// forward `−∫_t^b X(t)X⁻¹(s) f(s) ds`, backward `∫_a^t …`, hyperbolic
/// the first component forward and the second backward.
pub fn anchored_response(
    p: &Prepared,
    dir: Direction,
    f: &(dyn Fn(f64) -> Result<Vec2, EvalError> + Sync),
    t: f64,
    opts: &ImproperOptions,
) -> Result<Vec2, ExtremalError> {
    let iv = p.interval();
    // integrals toward a are signed, so −∫_t^a = ∫_a^t and both ends negate
    Ok(match dir {
        Direction::Forward => -toward(p, f, t, iv.right(), None, opts)?,
        Direction::Backward => -toward(p, f, t, iv.left(), None, opts)?,
        Direction::Hyperbolic => {
            // form I: X is diagonal, so the components decouple
            let r = toward(p, f, t, iv.right(), Some(0), opts)?;
            let l = toward(p, f, t, iv.left(), Some(1), opts)?;
            Vec2::new(-r.0[0], -l.0[1])
        }
    })
}

const DECAY: f64 = 27.631021115928547; // ln 1e12

/// Evaluation window: from `t0` toward each end until the rate integral
/// reaches `ln 1e12`, at most 40 from `t0` on infinite ends and stopping
/// `10⁻³` of the span short of finite ends.
pub fn default_horizon(p: &Prepared, opts: &ImproperOptions) -> (f64, f64) {
    let iv = p.interval();
    let t0 = p.t0();
    let grids: Vec<_> = match p.form() {
        Form::I => vec![p.first(), p.second()],
        _ => vec![p.first()],
    };
    let (lo, hi) = reach(p);
    let side = |end: Endpoint| -> f64 {
        let cap = if end.value.is_infinite() {
            t0 + end.value.signum() * 40.0
        } else {
            let span = if iv.is_bounded() { iv.b - iv.a } else { (end.value - t0).abs() };
            end.value - (end.value - t0).signum() * 1e-3 * span
        };
        for t in schedule(t0, end, opts) {
            if (t - cap) * (cap - t0) >= 0.0 || t < lo || t > hi {
                break;
            }
            let decayed = grids.iter().all(|g| g.eval(t).map(|v| v.re.abs() >= DECAY).unwrap_or(true));
            if decayed {
                return t;
            }
        }
        cap.clamp(lo, hi)
    };
    (side(iv.left()), side(iv.right()))
}

#[derive(Clone, Debug)]
pub struct SharpnessOptions {
    /// Evaluation window; [`default_horizon`] when `None`.
    pub horizon: Option<(f64, f64)>,
    pub points: usize,
    pub improper: ImproperOptions,
    pub sup: SupOptions,
    /// Relative tolerance of the pointwise profile check.
    pub rel_tol: f64,
    pub x_star: Option<[f64; 2]>,
}

impl Default for SharpnessOptions {
    fn default() -> Self {
        SharpnessOptions {
            horizon: None,
            points: 801,
            improper: ImproperOptions::default(),
            sup: SupOptions::default(),
            rel_tol: 1e-3,
            x_star: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessReport {
    pub form: Form,
    pub direction: Direction,
    pub norm: NormKind,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub horizon: (f64, f64),
    /// `sup ‖φ − x‖ / (K ε)` over the window.
    pub sup_ratio: f64,
    pub argmax_t: f64,
    /// Largest relative gap between deviation/ε and the profile on the
    /// interior 80% of the window.
    pub pointwise_rel_err: f64,
    pub pointwise_ok: bool,
    /// Largest `|‖f‖ − ε| / ε` on the grid.
    pub forcing_norm_err: f64,
    /// `sup ‖f‖` in the experiment's norm (exceeds `ε` only for form III in
    /// the max norm).
    pub forcing_sup: f64,
    /// Relative gap between an ODE solve and the quadrature response over a
    /// unit window.
    pub ode_mismatch: f64,
    /// `‖anchor‖` recovered from the response; zero by construction.
    pub anchor_norm: f64,
    /// Form III max-norm runs: deviation/(K ε) at `t_n = (π/4 + nπ)/β + t0`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tn_ratios: Vec<(f64, f64)>,
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub profile: Vec<f64>,
    #[serde(skip)]
    pub deviation_over_eps: Vec<f64>,
}

impl SharpnessReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,kappa_t,deviation_over_eps\n");
        for ((t, k), d) in self.grid.iter().zip(&self.profile).zip(&self.deviation_over_eps) {
            let _ = writeln!(out, "{t},{k},{d}");
        }
        out
    }

    pub fn passes(&self, band: f64) -> bool {
        self.pointwise_ok && (self.sup_ratio - 1.0).abs() <= band
    }
}

/// Drives the system with its extremal forcing and compares the anchored
/// deviation with `ε κ(t)`.
///
/// Native norms use `κ` directly; form III in the max norm uses
/// `κ(t) ‖R(∫β) x*‖∞ / ‖x*‖∞` with `R` the rotation of `X`.
pub fn sharpness_experiment(
    p: &Prepared,
    dir: Direction,
    eps: f64,
    norm: NormKind,
    opts: &SharpnessOptions,
) -> Result<SharpnessReport, ExtremalError> {
    let form = p.form();
    if norm != native_norm(form) && form != Form::III {
        return Err(ExtremalError::UnsupportedNorm { form, norm });
    }
    let divergence = check_conditions(&check_condition(p, dir, &opts.improper)?);
    if divergence != Verdict::Holds {
        return Err(ExtremalError::Hypotheses {
            divergence: divergence.name(),
        });
    }
    let forcing = extremal_forcing_in(p, dir, eps, opts.x_star, norm)?;
    let k = best_constant(p, dir, norm, &opts.sup)?.k;
    let (lo, hi) = opts.horizon.unwrap_or_else(|| default_horizon(p, &opts.improper));
    if !(hi > lo) {
        return Err(ExtremalError::EmptyHorizon(lo, hi));
    }
    let n = opts.points.max(3);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let f = |s: f64| forcing.eval(s).map_err(|e| to_eval(e, s));
    let dev = |t: f64| -> Result<f64, ExtremalError> { Ok(anchored_response(p, dir, &f, t, &opts.improper)?.norm(norm) / eps) };
    let deviation_over_eps = grid.par_iter().map(|&t| dev(t)).collect::<Result<Vec<_>, _>>()?;

    let kp = kappa_profile(p, dir, native_norm(form), &grid, &opts.improper)?;
    let shape = |t: f64| -> Result<f64, ExtremalError> {
        if norm == native_norm(form) {
            return Ok(1.0);
        }
        let x = forcing.x_star.expect("form III");
        let (s, c) = p.state(t)?.q.re.sin_cos();
        Ok(Vec2::real(c * x[0] + s * x[1], -s * x[0] + c * x[1]).norm(norm) / forcing.scale)
    };
    let mut profile = Vec::with_capacity(n);
    for (kpt, &t) in kp.points.iter().zip(&grid) {
        profile.push(kpt.value * shape(t)?);
    }

    let (ilo, ihi) = (lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo));
    let mut rel = 0.0f64;
    for ((&t, &d), &kv) in grid.iter().zip(&deviation_over_eps).zip(&profile) {
        if t >= ilo && t <= ihi {
            rel = rel.max((d - kv).abs() / kv.abs().max(1e-300));
        }
    }

    // refine the largest sample between its neighbours
    let (imax, _) = deviation_over_eps
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
    let (a, b) = (grid[imax.saturating_sub(1)], grid[(imax + 1).min(n - 1)]);
    let (mut argmax_t, mut best) = (grid[imax], deviation_over_eps[imax]);
    if b > a {
        let (t, v) = golden(|t| dev(t), a, b, 1e-9 * (hi - lo).max(1.0))?;
        if v > best {
            (argmax_t, best) = (t, v);
        }
    }

    let (mut fmax, mut ferr) = (0.0f64, 0.0f64);
    for &t in &grid {
        let v = forcing.eval(t)?.norm(norm);
        fmax = fmax.max(v);
        ferr = ferr.max((v - eps).abs() / eps);
    }

    let ode_mismatch = ode_check(p, dir, &f, (lo, hi), &opts.improper)?;
    let anchor_norm = anchor_check(p, dir, &f, &opts.improper)?;

    let mut tn_ratios = Vec::new();
    if form == Form::III && norm == NormKind::Max {
        if let (Some(beta), true) = (p.sys.coeffs.pair().1.as_constant(), p.sys.is_constant()) {
            if beta.re != 0.0 {
                let period = std::f64::consts::PI / beta.re.abs();
                let t0 = p.t0();
                let first = ((lo - t0) / period).ceil() as i64;
                let last = ((hi - t0) / period).floor() as i64;
                for m in first..=last {
                    // t_n = (π/4 + nπ)/β + t0, enumerated in increasing t
                    let t = t0 + (std::f64::consts::FRAC_PI_4 / beta.re) + m as f64 * period;
                    if t >= lo && t <= hi {
                        tn_ratios.push((t, dev(t)? / k));
                    }
                }
            }
        }
    }

    Ok(SharpnessReport {
        form,
        direction: dir,
        norm,
        epsilon: eps,
        k,
        horizon: (lo, hi),
        sup_ratio: best / k,
        argmax_t,
        pointwise_rel_err: rel,
        pointwise_ok: rel <= opts.rel_tol,
        forcing_norm_err: ferr,
        forcing_sup: fmax,
        ode_mismatch,
        anchor_norm,
        tn_ratios,
        grid,
        profile,
        deviation_over_eps,
    })
}

/// Constant form III in the max norm with `x* = (1, −1)`; the deviation
/// peaks at `t_n = (π/4 + nπ)/β + t0`.
pub fn maxnorm_form3_experiment(p: &Prepared, eps: f64, opts: &SharpnessOptions) -> Result<SharpnessReport, ExtremalError> {
    if p.form() != Form::III || !p.sys.is_constant() {
        return Err(ExtremalError::NotConstantRotation("system must be constant form III".into()));
    }
    let (a, b) = p.sys.coeffs.pair();
    let (alpha, beta) = (a.as_constant().unwrap_or_default().re, b.as_constant().unwrap_or_default().re);
    if alpha == 0.0 || beta == 0.0 {
        return Err(ExtremalError::NotConstantRotation(format!("alpha = {alpha}, beta = {beta}")));
    }
    let dir = if alpha > 0.0 { Direction::Forward } else { Direction::Backward };
    let o = SharpnessOptions {
        x_star: Some([1.0, -1.0]),
        ..opts.clone()
    };
    sharpness_experiment(p, dir, eps, NormKind::Max, &o)
}

fn to_eval(e: ExtremalError, t: f64) -> EvalError {
    match e {
        ExtremalError::Eval(e) => e,
        ExtremalError::Jordan(JordanError::Eval(e)) => e,
        other => EvalError {
            kind: crate::expr::EvalErrorKind::Domain,
            subtree: other.to_string(),
            t,
        },
    }
}

/// Integrates the forced system over a unit window in the middle of the
/// horizon, starting from the quadrature response, and compares endpoints.
fn ode_check(
    p: &Prepared,
    dir: Direction,
    f: &(dyn Fn(f64) -> Result<Vec2, EvalError> + Sync),
    (lo, hi): (f64, f64),
    opts: &ImproperOptions,
) -> Result<f64, ExtremalError> {
    let mid = 0.5 * (lo + hi);
    let len = (0.1 * (hi - lo)).min(1.0);
    let (t_a, t_b) = (mid - 0.5 * len, mid + 0.5 * len);
    let x0 = anchored_response(p, dir, f, t_a, opts)?;
    let want = anchored_response(p, dir, f, t_b, opts)?;
    let tr = integrate(|t| p.sys.coefficient_matrix(t), f, x0, t_a, t_b, &OdeOptions::with_tol(1e-11))?;
    let got = *tr.states().last().expect("nonempty trajectory");
    Ok((got - want).norm(NormKind::Euclid) / want.norm(NormKind::Euclid).max(f64::MIN_POSITIVE))
}

/// `‖lim X⁻¹φ‖` for the anchored response, taken at the last resolved
/// schedule point toward each anchoring end.
fn anchor_check(
    p: &Prepared,
    dir: Direction,
    f: &(dyn Fn(f64) -> Result<Vec2, EvalError> + Sync),
    opts: &ImproperOptions,
) -> Result<f64, ExtremalError> {
    let iv = p.interval();
    let (lo, hi) = reach(p);
    let ends: &[(Endpoint, usize)] = match dir {
        Direction::Forward => &[(iv.right(), 0), (iv.right(), 1)],
        Direction::Backward => &[(iv.left(), 0), (iv.left(), 1)],
        Direction::Hyperbolic => &[(iv.right(), 0), (iv.left(), 1)],
    };
    let mut out = Vec2::ZERO;
    for &(end, comp) in ends {
        // a few steps out: far enough to show decay, close enough to resolve
        let pts: Vec<f64> = schedule(p.t0(), end, opts).into_iter().filter(|t| *t > lo && *t < hi).take(8).collect();
        let Some(&t) = pts.last() else { continue };
        let phi = anchored_response(p, dir, f, t, opts)?;
        out.0[comp] = p.apply_xinv(&p.state(t)?, phi).0[comp];
    }
    Ok(out.norm(NormKind::Euclid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Interval;
    use crate::jordan::JordanSystem;
    use crate::scalar::ScalarFn;

    fn prep(sys: JordanSystem) -> Prepared {
        Prepared::new(sys).unwrap()
    }

    #[test]
    fn real_coefficients_give_constant_forcings() {
        let p = prep(JordanSystem::diagonal(1.0, -1.0, Interval::real_line(), 0.0).unwrap());
        let f = extremal_forcing(&p, Direction::Hyperbolic, 0.3, None).unwrap();
        for t in [-5.0, 0.0, 2.5] {
            assert_eq!(f.eval(t).unwrap(), Vec2::real(0.3, 0.3));
        }
        let p = prep(JordanSystem::shear(-1.0, 1.0, Interval::real_line(), 0.0).unwrap());
        let f = extremal_forcing(&p, Direction::Forward, 0.5, None).unwrap();
        assert_eq!(f.eval(1.0).unwrap(), Vec2::real(0.5, -0.5));
    }

    #[test]
    fn rotation_forcing_has_norm_eps() {
        let p = prep(JordanSystem::rotation(-1.0, 2.0, Interval::real_line(), 0.0).unwrap());
        let f = extremal_forcing(&p, Direction::Backward, 0.2, Some([1.0, 0.0])).unwrap();
        for k in 0..50 {
            let t = -10.0 + 0.4 * k as f64;
            assert!((f.eval(t).unwrap().norm(NormKind::Euclid) - 0.2).abs() < 1e-12);
        }
        assert!(matches!(extremal_forcing(&p, Direction::Backward, 0.2, Some([0.0, 0.0])), Err(ExtremalError::ZeroDirection)));
    }

    #[test]
    fn sign_changing_mu_is_refused() {
        let p = prep(JordanSystem::shear(1.0, ScalarFn::parse("t").unwrap(), Interval::real_line(), 0.0).unwrap());
        assert!(matches!(extremal_forcing(&p, Direction::Forward, 0.1, None), Err(ExtremalError::SignChangingMu { .. })));
    }

    #[test]
    fn saddle_deviation_equals_eps() {
        let p = prep(JordanSystem::diagonal(1.0, -1.0, Interval::real_line(), 0.0).unwrap());
        let o = SharpnessOptions {
            horizon: Some((-10.0, 10.0)),
            points: 41,
            ..Default::default()
        };
        let r = sharpness_experiment(&p, Direction::Hyperbolic, 0.2, NormKind::Max, &o).unwrap();
        assert!((r.sup_ratio - 1.0).abs() < 1e-6, "{r:?}");
        assert!(r.pointwise_ok && r.ode_mismatch < 1e-6 && r.anchor_norm < 1e-6, "{r:?}");
    }

    #[test]
    fn shear_backward_profile_is_two() {
        let p = prep(JordanSystem::shear(-1.0, 1.0, Interval::real_line(), 0.0).unwrap());
        let o = SharpnessOptions {
            horizon: Some((-10.0, 10.0)),
            points: 41,
            ..Default::default()
        };
        let r = sharpness_experiment(&p, Direction::Backward, 0.1, NormKind::Max, &o).unwrap();
        for d in &r.deviation_over_eps {
            assert!((d - 2.0).abs() < 1e-6, "{d}");
        }
    }

    #[test]
    fn max_norm_peaks_at_tn() {
        let p = prep(JordanSystem::rotation(1.0, 1.0, Interval::real_line(), 0.0).unwrap());
        let o = SharpnessOptions {
            horizon: Some((-8.0, 8.0)),
            points: 161,
            ..Default::default()
        };
        let r = maxnorm_form3_experiment(&p, 0.1, &o).unwrap();
        assert!(!r.tn_ratios.is_empty());
        for &(t, q) in &r.tn_ratios {
            assert!((q - 1.0).abs() < 1e-6, "{t}: {q}");
        }
        // the max-norm forcing itself reaches √2 ε
        assert!((r.forcing_sup / 0.1 - 2f64.sqrt()).abs() < 1e-3);
    }
}
