#![allow(dead_code)]

use std::sync::Arc;
use ulamkit::calculus::ImproperOptions;
use ulamkit::expr::{EvalError, EvalErrorKind};
use ulamkit::extremal::anchored_response;
use ulamkit::jordan::{Form, Prepared, Vec2};
use ulamkit::kappa::Direction;
use ulamkit::scalar::ScalarFn;
use ulamkit::shadow::Approx;
use ulamkit::C64;

pub type VecFn = Arc<dyn Fn(f64) -> Vec2 + Send + Sync>;

pub fn parse(s: &str) -> ScalarFn {
    ScalarFn::parse(s).unwrap()
}

pub fn domain_error(t: f64, msg: String) -> EvalError {
    EvalError {
        kind: EvalErrorKind::Domain,
        subtree: msg,
        t,
    }
}

/// `t ↦ ψ(t) + X(t) c`, where `ψ` is the zero-anchor response to `f`.
pub fn approximate(p: &Arc<Prepared>, dir: Direction, f: VecFn, c: Vec2) -> Approx {
    let p = p.clone();
    let iv = p.interval();
    Approx::function((iv.a, iv.b), move |t| {
        let g = |s: f64| Ok(f(s));
        let psi = anchored_response(&p, dir, &g, t, &ImproperOptions::default())
            .map_err(|e| domain_error(t, e.to_string()))?;
        let st = p.state(t).map_err(|e| domain_error(t, e.to_string()))?;
        Ok(psi + p.apply_x(&st, c))
    })
}

/// A forcing of norm at most `eps` in the form's native norm: a real rotating
/// vector for form III, two complex phasors otherwise.
pub fn wave_forcing(form: Form, eps: f64, r: [f64; 2], w: [f64; 2], phase: [f64; 2]) -> VecFn {
    match form {
        Form::III => Arc::new(move |t| {
            let a = w[0] * t + phase[0];
            Vec2::real(eps * r[0] * a.cos(), eps * r[0] * a.sin())
        }),
        _ => Arc::new(move |t| {
            Vec2::new(
                C64::from_polar(eps * r[0], w[0] * t + phase[0]),
                C64::from_polar(eps * r[1], w[1] * t + phase[1]),
            )
        }),
    }
}
