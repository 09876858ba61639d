use super::{Direction, KappaError};
use crate::jordan::{Coefficients, JordanSystem, NormKind};
use crate::scalar::ScalarFn;
use crate::C64;
use serde::Serialize;

/// Constant-coefficient Ulam constant from a closed formula.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub value: f64,
    /// Direction whose κ realizes the value; `None` for the mirrored saddle
    /// `Re λ1 < 0 < Re λ2`, which is the hyperbolic case with components swapped.
    pub direction: Option<Direction>,
    /// Whether `value` is known to be the best constant in this norm.
    pub best_known: bool,
    pub formula: &'static str,
}

fn constant_value(sys: &JordanSystem, name: &str, f: &ScalarFn) -> Result<C64, KappaError> {
    if let Some(c) = f.as_constant() {
        return Ok(c);
    }
    let pts = sys.probe_points();
    let c = f.eval(pts[0])?;
    for &t in &pts[1..] {
        let v = f.eval(t)?;
        if (v - c).norm() > 1e-12 * c.norm().max(1.0) {
            return Err(KappaError::NotConstant(format!("{name} = {f} varies: {c} at t = {} vs {v} at t = {t}", pts[0])));
        }
    }
    Ok(c)
}

/// Closed-form constants for constant coefficients.
///
/// * I: `max(1/|Re λ1|, 1/|Re λ2|)`
/// * II: `(|Re λ| + |μ|)/(Re λ)²`, which is `(|Re λ| + 1)/(Re λ)²` at `μ = 1`
/// * III: `1/|α|` (Euclidean), `√2/|α|` (max norm, `β ≠ 0`)
///
/// Forms I and II in the Euclidean norm are reported as `√2` times the max-norm
/// value with `best_known = false`.
pub fn closed_form_constant(sys: &JordanSystem, norm: NormKind) -> Result<ClosedForm, KappaError> {
    let (f, g) = sys.coeffs.pair();
    let (nf, ng) = sys.coeffs.names();
    let p = constant_value(sys, nf, f)?;
    let q = constant_value(sys, ng, g)?;
    let nonzero = |name: &str, r: f64| {
        if r == 0.0 {
            Err(KappaError::ZeroRealPart(format!("Re {name} = 0")))
        } else {
            Ok(r)
        }
    };
    let (value, direction, formula) = match sys.coeffs {
        Coefficients::Diagonal { .. } => {
            let r1 = nonzero(nf, p.re)?;
            let r2 = nonzero(ng, q.re)?;
            let dir = match (r1 > 0.0, r2 > 0.0) {
                (true, true) => Some(Direction::Forward),
                (false, false) => Some(Direction::Backward),
                (true, false) => Some(Direction::Hyperbolic),
                (false, true) => None,
            };
            ((1.0 / r1.abs()).max(1.0 / r2.abs()), dir, "max(1/|Re lambda1|, 1/|Re lambda2|)")
        }
        Coefficients::Shear { .. } => {
            let r = nonzero(nf, p.re)?;
            let dir = if r > 0.0 { Direction::Forward } else { Direction::Backward };
            ((r.abs() + q.norm()) / (r * r), Some(dir), "(|Re lambda| + |mu|)/(Re lambda)^2")
        }
        Coefficients::Rotation { .. } => {
            let a = nonzero("alpha", p.re)?;
            let dir = if a > 0.0 { Direction::Forward } else { Direction::Backward };
            let out = match norm {
                NormKind::Euclid => (1.0 / a.abs(), "1/|alpha|"),
                NormKind::Max if q.re != 0.0 => (std::f64::consts::SQRT_2 / a.abs(), "sqrt(2)/|alpha|"),
                // beta = 0 is diagonal
                NormKind::Max => (1.0 / a.abs(), "1/|alpha|"),
            };
            return Ok(ClosedForm {
                value: out.0,
                direction: Some(dir),
                best_known: true,
                formula: out.1,
            });
        }
    };
    Ok(match norm {
        NormKind::Max => ClosedForm {
            value,
            direction,
            best_known: true,
            formula,
        },
        NormKind::Euclid => ClosedForm {
            value: std::f64::consts::SQRT_2 * value,
            direction,
            best_known: false,
            formula,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Interval;

    fn line() -> Interval {
        Interval::real_line()
    }

    #[test]
    fn diagonal_cases() {
        let s = JordanSystem::diagonal(1.0, -1.0, line(), 0.0).unwrap();
        let c = closed_form_constant(&s, NormKind::Max).unwrap();
        assert_eq!((c.value, c.direction), (1.0, Some(Direction::Hyperbolic)));
        let s = JordanSystem::diagonal(C64::new(2.0, 1.0), 3.0, line(), 0.0).unwrap();
        let c = closed_form_constant(&s, NormKind::Max).unwrap();
        assert_eq!((c.value, c.direction), (0.5, Some(Direction::Forward)));
        let s = JordanSystem::diagonal(-4.0, 2.0, line(), 0.0).unwrap();
        assert_eq!(closed_form_constant(&s, NormKind::Max).unwrap().direction, None);
    }

    #[test]
    fn shear_cases() {
        let s = JordanSystem::shear(-1.0, 1.0, line(), 0.0).unwrap();
        let c = closed_form_constant(&s, NormKind::Max).unwrap();
        assert_eq!((c.value, c.direction), (2.0, Some(Direction::Backward)));
        let s = JordanSystem::shear(2.0, 1.0, line(), 0.0).unwrap();
        assert_eq!(closed_form_constant(&s, NormKind::Max).unwrap().value, 0.75);
        let e = closed_form_constant(&s, NormKind::Euclid).unwrap();
        assert!(!e.best_known && (e.value - 0.75 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rotation_cases() {
        let s = JordanSystem::rotation(-1.0, 2.0, line(), 0.0).unwrap();
        assert_eq!(closed_form_constant(&s, NormKind::Euclid).unwrap().value, 1.0);
        assert_eq!(closed_form_constant(&s, NormKind::Max).unwrap().value, 2f64.sqrt());
        let s = JordanSystem::rotation(0.0, 2.0, line(), 0.0).unwrap();
        assert!(matches!(closed_form_constant(&s, NormKind::Euclid), Err(KappaError::ZeroRealPart(_))));
    }

    #[test]
    fn constant_expressions_are_accepted() {
        let s = JordanSystem::rotation(ScalarFn::parse("2*0.5+0*t").unwrap(), 1.0, line(), 0.0).unwrap();
        assert_eq!(closed_form_constant(&s, NormKind::Euclid).unwrap().value, 1.0);
        let s = JordanSystem::rotation(ScalarFn::parse("t").unwrap(), 1.0, line(), 0.0).unwrap();
        assert!(matches!(closed_form_constant(&s, NormKind::Euclid), Err(KappaError::NotConstant(_))));
    }
}
