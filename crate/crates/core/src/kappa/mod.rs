//! κ-profiles, divergence conditions and supremum search.
//!
//! For a direction the profile `κ(t)` is an improper integral of a weight
//! times `exp(-(R(s) - R(t)))` toward the anchoring endpoint, where `R` is the
//! antiderivative of the relevant rate:
//!
//! | form | direction  | rate                    | weight         |
//! |------|------------|-------------------------|----------------|
//! | I    | forward    | `min(Re λ1, Re λ2)`     | 1              |
//! | I    | backward   | `max(Re λ1, Re λ2)`     | 1              |
//! | I    | hyperbolic | `Re λ1` fwd, `Re λ2` bwd| 1 (max of both)|
//! | II   | fwd / bwd  | `Re λ`                  | `1 + |∫_t^s μ|`|
//! | III  | fwd / bwd  | `α`                     | 1              |
//!
//! The supremum of the profile over the interval is the Ulam constant; under
//! the matching divergence condition it is the best one.

mod closed;
mod condition;
mod sup;

pub use closed::{closed_form_constant, ClosedForm};
pub use condition::{check_condition, check_conditions, ConditionReport, Verdict};
pub use sup::{best_constant, coarse_grid, SupOptions, SupResult};
pub(crate) use sup::golden;

use crate::calculus::{
    improper_integral, improper_on_schedule, schedule, CalculusError, Convergence, Endpoint, ImproperOptions,
    ImproperResult,
};
use crate::expr::EvalError;
use crate::jordan::{Form, JordanError, NormKind, Prepared};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Anchored at the right end `b`.
    Forward,
    /// Anchored at the left end `a`.
    Backward,
    /// Form I only: first component anchored at `b`, second at `a`.
    Hyperbolic,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::Hyperbolic => "hyperbolic",
        }
    }

    pub fn allowed(self, form: Form) -> bool {
        self != Direction::Hyperbolic || form == Form::I
    }

    pub fn candidates(form: Form) -> &'static [Direction] {
        match form {
            Form::I => &[Direction::Forward, Direction::Backward, Direction::Hyperbolic],
            _ => &[Direction::Forward, Direction::Backward],
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "forward" | "fwd" | "b" => Ok(Direction::Forward),
            "backward" | "bwd" | "a" => Ok(Direction::Backward),
            "hyperbolic" | "saddle" | "mixed" => Ok(Direction::Hyperbolic),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum KappaError {
    #[error("direction {dir} is not available for form {form}")]
    BadDirection { form: Form, dir: Direction },
    #[error("kappa does not exist at t = {t} ({status:?})")]
    Nonexistent { t: f64, status: Convergence },
    #[error("supremum appears unbounded toward t = {toward}: last value {last:e}")]
    SupUnbounded { toward: f64, last: f64 },
    #[error("closed form needs constant coefficients: {0}")]
    NotConstant(String),
    #[error("closed form needs a nonzero real part: {0}")]
    ZeroRealPart(String),
    #[error(transparent)]
    Jordan(#[from] JordanError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Multiplier turning the form's native κ into a constant for `norm`.
///
/// Forms I and II are native in the max norm and form III in the Euclidean
/// norm; the other pairing costs a factor `√2` by norm equivalence.
pub fn norm_factor(form: Form, norm: NormKind) -> f64 {
    match (form, norm) {
        (Form::I | Form::II, NormKind::Max) | (Form::III, NormKind::Euclid) => 1.0,
        _ => std::f64::consts::SQRT_2,
    }
}

/// The norm in which a form's κ is a best constant.
pub fn native_norm(form: Form) -> NormKind {
    match form {
        Form::III => NormKind::Euclid,
        _ => NormKind::Max,
    }
}

/// One evaluation of the native κ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaPoint {
    pub t: f64,
    pub value: f64,
    pub status: Convergence,
}

impl KappaPoint {
    pub fn exists(&self) -> bool {
        self.status == Convergence::Converged
    }
}

// exponents beyond this only feed integrals far past the divergence threshold
pub(crate) const EXP_CAP: f64 = 600.0;

fn one_sided(
    p: &Prepared,
    grid: &crate::calculus::AntiderivativeGrid,
    weighted: bool,
    forward: bool,
    t: f64,
    opts: &ImproperOptions,
) -> Result<(f64, Convergence), KappaError> {
    let iv = p.interval();
    let end: Endpoint = if forward { iv.right() } else { iv.left() };
    let at = grid.pin(t)?;
    let at2 = if weighted { Some(p.second().pin(t)?) } else { None };
    let integrand = |s: f64| -> Result<f64, EvalError> {
        // forward e^{-∫_t^s r}, backward e^{∫_s^t r}: the same expression
        let expo = -grid.diff_from(s, &at).map_err(calc_to_eval(s))?.re;
        let mut w = 1.0;
        if let Some(at2) = &at2 {
            w += p.second().diff_from(s, at2).map_err(calc_to_eval(s))?.norm();
        }
        Ok(w * expo.min(EXP_CAP).exp())
    };
    let mut reach = grid.reach();
    if weighted {
        let (lo, hi) = p.second().reach();
        reach = (reach.0.max(lo), reach.1.min(hi));
    }
    let r = integral_within(integrand, t, end, reach, opts)?;
    let v = if forward { r.value } else { -r.value };
    Ok((v, r.status))
}

/// Improper integral toward `end` that stops where the antiderivative grids
/// stop resolving; the end-of-schedule classification then decides.
pub(crate) fn integral_within<V, F>(
    f: F,
    from: f64,
    end: Endpoint,
    reach: (f64, f64),
    opts: &ImproperOptions,
) -> Result<ImproperResult<V>, CalculusError>
where
    V: crate::calculus::QuadValue,
    F: FnMut(f64) -> Result<V, EvalError>,
{
    let inside = |t: f64| t >= reach.0 && t <= reach.1;
    if inside(end.value) {
        return improper_integral(f, from, end, opts);
    }
    let pts: Vec<f64> = schedule(from, end, opts).into_iter().take_while(|&t| inside(t)).collect();
    improper_on_schedule(f, from, &pts, opts)
}

pub(crate) fn calc_to_eval(s: f64) -> impl Fn(CalculusError) -> EvalError {
    move |e| match e {
        CalculusError::Singularity { source, .. } => source,
        other => EvalError {
            kind: crate::expr::EvalErrorKind::Domain,
            subtree: other.to_string(),
            t: s,
        },
    }
}

fn worse(a: Convergence, b: Convergence) -> Convergence {
    use Convergence::*;
    match (a, b) {
        (Diverged, _) | (_, Diverged) => Diverged,
        (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
        _ => Converged,
    }
}

/// Native κ at `t` (max norm for forms I/II, Euclidean for form III).
pub fn kappa_at(p: &Prepared, dir: Direction, t: f64, opts: &ImproperOptions) -> Result<KappaPoint, KappaError> {
    let form = p.form();
    if !dir.allowed(form) {
        return Err(KappaError::BadDirection { form, dir });
    }
    let (value, status) = match (form, dir) {
        (Form::I, Direction::Forward) => one_sided(p, p.min_rate().expect("form I")?, false, true, t, opts)?,
        (Form::I, Direction::Backward) => one_sided(p, p.max_rate().expect("form I")?, false, false, t, opts)?,
        (Form::I, Direction::Hyperbolic) => {
            let (v1, s1) = one_sided(p, p.first(), false, true, t, opts)?;
            let (v2, s2) = one_sided(p, p.second(), false, false, t, opts)?;
            (v1.max(v2), worse(s1, s2))
        }
        (Form::II, d) => one_sided(p, p.first(), true, d == Direction::Forward, t, opts)?,
        (Form::III, d) => one_sided(p, p.first(), false, d == Direction::Forward, t, opts)?,
    };
    Ok(KappaPoint {
        t,
        value: value.max(0.0),
        status,
    })
}

/// Sampled κ with existence bookkeeping.
#[derive(Clone, Debug)]
pub struct KappaProfile {
    pub direction: Direction,
    pub norm: NormKind,
    /// Multiplier applied to native κ values for `norm`.
    pub factor: f64,
    pub points: Vec<KappaPoint>,
    pub exists_everywhere: bool,
    /// First sample where κ failed to converge.
    pub witness: Option<f64>,
}

impl KappaProfile {
    /// Largest scaled sample value.
    pub fn max(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.t, p.value * self.factor))
            .fold(None, |acc, (t, v)| match acc {
                Some((_, bv)) if bv >= v => acc,
                _ => Some((t, v)),
            })
    }
}

/// Evaluates κ at every sample time in parallel; results keep input order.
pub fn kappa_profile(
    p: &Prepared,
    dir: Direction,
    norm: NormKind,
    times: &[f64],
    opts: &ImproperOptions,
) -> Result<KappaProfile, KappaError> {
    if !dir.allowed(p.form()) {
        return Err(KappaError::BadDirection { form: p.form(), dir });
    }
    let points = times
        .par_iter()
        .map(|&t| kappa_at(p, dir, t, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let witness = points.iter().find(|k| !k.exists()).map(|k| k.t);
    Ok(KappaProfile {
        direction: dir,
        norm,
        factor: norm_factor(p.form(), norm),
        exists_everywhere: witness.is_none(),
        witness,
        points,
    })
}

/// Picks the first direction whose condition holds and whose κ exists at `t0`.
pub fn auto_direction(p: &Prepared, opts: &ImproperOptions) -> Result<Option<Direction>, KappaError> {
    for &dir in Direction::candidates(p.form()) {
        let cond = check_condition(p, dir, opts)?;
        if cond.iter().all(|c| c.verdict == Verdict::Holds) && kappa_at(p, dir, p.t0(), opts)?.exists() {
            return Ok(Some(dir));
        }
    }
    Ok(None)
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
    fn blow_up_hyperbolic_profile() {
        let p = prep(
            JordanSystem::diagonal(
                ScalarFn::parse("1/(1-t)").unwrap(),
                ScalarFn::parse("-1/t").unwrap(),
                Interval::open(0.0, 1.0).unwrap(),
                0.5,
            )
            .unwrap(),
        );
        for t in [0.1, 0.25, 0.5, 0.9] {
            let k = kappa_at(&p, Direction::Hyperbolic, t, &Default::default()).unwrap();
            assert!(k.exists());
            let want = 0.5 * ((t - 0.5f64).abs() + 0.5);
            assert!((k.value - want).abs() < 1e-8, "{t}: {} vs {want}", k.value);
        }
    }

    #[test]
    fn shear_profile_with_erfc() {
        let p = prep(
            JordanSystem::shear(
                ScalarFn::parse("1+i*t").unwrap(),
                ScalarFn::parse("2/sqrt(pi)*exp(-t^2)").unwrap(),
                Interval::real_line(),
                0.0,
            )
            .unwrap(),
        );
        for t in [-2.0, -0.6, 0.0, 1.5] {
            let k = kappa_at(&p, Direction::Forward, t, &Default::default()).unwrap();
            let want = 1.0 + (0.25 + t).exp() * crate::special::erfc(0.5 + t);
            assert!((k.value - want).abs() < 1e-8, "{t}: {} vs {want}", k.value);
        }
    }

    #[test]
    fn rotation_rational_profile() {
        let p = prep(
            JordanSystem::rotation(ScalarFn::parse("1-2*t/(1+t^2)").unwrap(), ScalarFn::parse("t").unwrap(), Interval::real_line(), 0.0)
                .unwrap(),
        );
        for t in [-3.0, 0.0, 0.4142135623730951, 2.0] {
            let k = kappa_at(&p, Direction::Forward, t, &Default::default()).unwrap();
            let want = (t * t + 2.0 * t + 3.0) / (t * t + 1.0);
            assert!((k.value - want).abs() < 1e-8, "{t}: {} vs {want}", k.value);
        }
    }

    #[test]
    fn far_out_rotation_point() {
        let p = prep(
            JordanSystem::rotation(ScalarFn::parse("1-2*t/(1+t^2)").unwrap(), ScalarFn::parse("t").unwrap(), Interval::real_line(), 0.0)
                .unwrap(),
        );
        let t = -41585510.98085106;
        let k = kappa_at(&p, Direction::Forward, t, &Default::default()).unwrap();
        let want = (t * t + 2.0 * t + 3.0) / (t * t + 1.0);
        assert!(k.exists() && (k.value - want).abs() < 1e-8, "{k:?}");
    }

    #[test]
    fn hyperbolic_rejected_outside_form_one() {
        let p = prep(JordanSystem::rotation(1.0, 1.0, Interval::real_line(), 0.0).unwrap());
        assert!(matches!(
            kappa_at(&p, Direction::Hyperbolic, 0.0, &Default::default()),
            Err(KappaError::BadDirection { .. })
        ));
    }

    #[test]
    fn divergent_kappa_is_flagged() {
        let p = prep(
            JordanSystem::shear(
                ScalarFn::parse("2*t/(1+t^2)").unwrap(),
                1.0,
                Interval::real_line(),
                0.0,
            )
            .unwrap(),
        );
        let prof = kappa_profile(&p, Direction::Forward, NormKind::Max, &[0.0, 1.0], &Default::default()).unwrap();
        assert!(!prof.exists_everywhere);
        assert_eq!(prof.witness, Some(0.0));
    }
}
