use super::{Direction, KappaError};
use crate::calculus::{AntiderivativeGrid, Convergence, ImproperOptions};
use crate::jordan::{Form, Prepared};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// The least favourable of two verdicts.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Holds,
        }
    }
}

/// Outcome of checking that a rate integral from `t0` grows without bound
/// toward an endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Human-readable statement of the limit being checked.
    pub condition: String,
    pub verdict: Verdict,
    /// Signed rate integral from `t0` at the last truncation point.
    pub evidence: f64,
    pub horizon: f64,
}

fn check_one(
    grid: &AntiderivativeGrid,
    p: &Prepared,
    forward: bool,
    label: &str,
    opts: &ImproperOptions,
) -> Result<ConditionReport, KappaError> {
    let iv = p.interval();
    let end = if forward { iv.right() } else { iv.left() };
    let rate = grid.integrand();
    let r = super::integral_within(|s| rate.eval(s).map(|v| v.re), p.t0(), end, grid.reach(), opts)?;
    // the rate integral is signed toward the end, so both sides need +inf
    let verdict = match r.status {
        Convergence::Diverged if r.value > 0.0 => Verdict::Holds,
        Convergence::Diverged | Convergence::Converged => Verdict::Fails,
        Convergence::Inconclusive => Verdict::Inconclusive,
    };
    let toward = if forward { "b" } else { "a" };
    Ok(ConditionReport {
        condition: format!("integral of {label} from t0 toward {toward} grows to +inf"),
        verdict,
        evidence: r.value,
        horizon: r.truncation,
    })
}

/// Divergence conditions guaranteeing uniqueness of the shadowing solution.
///
/// One report for forward/backward, two for hyperbolic (one per component).
pub fn check_condition(p: &Prepared, dir: Direction, opts: &ImproperOptions) -> Result<Vec<ConditionReport>, KappaError> {
    let form = p.form();
    if !dir.allowed(form) {
        return Err(KappaError::BadDirection { form, dir });
    }
    let (fwd_name, bwd_name) = match form {
        Form::I => ("min(Re lambda1, Re lambda2)", "-max(Re lambda1, Re lambda2)"),
        Form::II => ("Re lambda", "-Re lambda"),
        Form::III => ("alpha", "-alpha"),
    };
    Ok(match (form, dir) {
        (Form::I, Direction::Forward) => vec![check_one(p.min_rate().expect("form I")?, p, true, fwd_name, opts)?],
        (Form::I, Direction::Backward) => vec![check_one(p.max_rate().expect("form I")?, p, false, bwd_name, opts)?],
        (Form::I, Direction::Hyperbolic) => vec![
            check_one(p.first(), p, true, "Re lambda1", opts)?,
            check_one(p.second(), p, false, "-Re lambda2", opts)?,
        ],
        (_, Direction::Forward) => vec![check_one(p.first(), p, true, fwd_name, opts)?],
        (_, _) => vec![check_one(p.first(), p, false, bwd_name, opts)?],
    })
}

/// Combined verdict over all reports.
pub fn check_conditions(reports: &[ConditionReport]) -> Verdict {
    reports.iter().fold(Verdict::Holds, |v, r| v.and(r.verdict))
}
