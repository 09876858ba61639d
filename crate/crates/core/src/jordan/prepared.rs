use super::{Coefficients, Form, JordanError, JordanSystem, Mat2, Vec2};
use crate::calculus::{AntiderivativeGrid, Interval, Tol};
use crate::scalar::ScalarFn;
use crate::C64;
use std::sync::OnceLock;

/// Knot layout for antiderivative grids on `interval` around `t0`.
///
/// Infinite sides: spacing 1/8 out to distance 64, then geometric (ratio 1.04)
/// out to `2^42·max(1, |t0|)`. Finite sides: 256 uniform panels, then
/// geometric clustering (ratio 0.85) toward the end down to `1e-14` of the
/// side length; a closed end is itself a knot.
pub fn knots(interval: &Interval, t0: f64) -> Vec<f64> {
    let mut ks = vec![t0];
    for (end, closed, sign) in [
        (interval.b, interval.closed_right, 1.0),
        (interval.a, interval.closed_left, -1.0),
    ] {
        if end.is_infinite() {
            for k in 1..=512 {
                ks.push(t0 + sign * k as f64 / 8.0);
            }
            let far = 2f64.powi(42) * t0.abs().max(1.0);
            let mut d = 64.0;
            while d < far {
                d *= 1.04;
                ks.push(t0 + sign * d);
            }
        } else {
            let len = (end - t0).abs();
            for k in 1..256 {
                ks.push(t0 + sign * len * k as f64 / 256.0);
            }
            let mut d = len / 256.0;
            while d > 1e-14 * len {
                d *= 0.85;
                let p = end - sign * d;
                if p != end {
                    ks.push(p);
                }
            }
            if closed {
                ks.push(end);
            }
        }
    }
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    ks
}

/// Points where `Re λ1 − Re λ2` changes sign between adjacent knots, located
/// by bisection. They are the kinks of `min`/`max` of the two rates.
fn crossings(l1: &ScalarFn, l2: &ScalarFn, ks: &[f64]) -> Vec<f64> {
    let d = |t: f64| match (l1.eval(t), l2.eval(t)) {
        (Ok(a), Ok(b)) if (a.re - b.re).is_finite() => Some(a.re - b.re),
        _ => None,
    };
    if l1.as_constant().is_some() && l2.as_constant().is_some() {
        return Vec::new();
    }
    let vals: Vec<Option<f64>> = ks.iter().map(|&t| d(t)).collect();
    let mut out = Vec::new();
    for (w, v) in ks.windows(2).zip(vals.windows(2)) {
        let (Some(mut da), Some(db)) = (v[0], v[1]) else { continue };
        if da == 0.0 || db == 0.0 || da.signum() == db.signum() {
            continue;
        }
        let (mut a, mut b) = (w[0], w[1]);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            match d(m) {
                Some(dm) if dm == 0.0 => {
                    (a, b) = (m, m);
                    break;
                }
                Some(dm) if dm.signum() == da.signum() => {
                    a = m;
                    da = dm;
                }
                Some(_) => b = m,
                None => break,
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Antiderivative values of both coefficients at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    /// I: `Λ1`; II: `Λ`; III: `∫α` (real).
    pub p: C64,
    /// I: `Λ2`; II: `∫μ`; III: `∫β` (real).
    pub q: C64,
}

/// A system with its coefficient antiderivatives tabulated from `t0`.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub sys: JordanSystem,
    g1: AntiderivativeGrid,
    g2: AntiderivativeGrid,
    /// Form I only: integrands `min(Re λ1, Re λ2)` and `max(Re λ1, Re λ2)`.
    rates: Option<(ScalarFn, ScalarFn)>,
    /// Their grids, built on first use (the hyperbolic direction needs neither).
    min_rate: OnceLock<AntiderivativeGrid>,
    max_rate: OnceLock<AntiderivativeGrid>,
}

pub(crate) fn grid_tol() -> Tol {
    Tol {
        rel: 1e-12,
        abs: 1e-14,
        // fast oscillation far out then truncates the grid early instead of
        // exhausting a large panel budget at every knot
        max_panels: 1 << 12,
    }
}

impl Prepared {
    pub fn new(sys: JordanSystem) -> Result<Self, JordanError> {
        let ks = knots(&sys.interval, sys.t0);
        let tol = grid_tol();
        let (f, g) = sys.coeffs.pair();
        let (f, g) = match sys.coeffs {
            Coefficients::Rotation { .. } => (f.re(), g.re()),
            _ => (f.clone(), g.clone()),
        };
        let g1 = AntiderivativeGrid::build(f, sys.t0, &ks, tol)?;
        let g2 = AntiderivativeGrid::build(g, sys.t0, &ks, tol)?;
        let rates = match &sys.coeffs {
            Coefficients::Diagonal { lambda1, lambda2 } => {
                let rate = |pick_min: bool| -> ScalarFn {
                    if let (Some(a), Some(b)) = (lambda1.as_constant(), lambda2.as_constant()) {
                        return ScalarFn::real(if pick_min { a.re.min(b.re) } else { a.re.max(b.re) });
                    }
                    let (l1, l2) = (lambda1.clone(), lambda2.clone());
                    let label = if pick_min { "min(re(lambda1),re(lambda2))" } else { "max(re(lambda1),re(lambda2))" };
                    ScalarFn::native(label, move |t| {
                        match (l1.eval(t), l2.eval(t)) {
                            (Ok(a), Ok(b)) => {
                                C64::new(if pick_min { a.re.min(b.re) } else { a.re.max(b.re) }, 0.0)
                            }
                            _ => C64::new(f64::NAN, 0.0),
                        }
                    })
                };
                Some((rate(true), rate(false)))
            }
            _ => None,
        };
        Ok(Prepared {
            sys,
            g1,
            g2,
            rates,
            min_rate: OnceLock::new(),
            max_rate: OnceLock::new(),
        })
    }

    pub fn form(&self) -> Form {
        self.sys.form()
    }

    pub fn t0(&self) -> f64 {
        self.sys.t0
    }

    pub fn interval(&self) -> Interval {
        self.sys.interval
    }

    pub fn state(&self, t: f64) -> Result<State, JordanError> {
        Ok(State {
            t,
            p: self.g1.eval(t)?,
            q: self.g2.eval(t)?,
        })
    }

    /// Grid for the first coefficient (`λ1`, `λ`, `α`).
    pub fn first(&self) -> &AntiderivativeGrid {
        &self.g1
    }

    /// Grid for the second coefficient (`λ2`, `μ`, `β`).
    pub fn second(&self) -> &AntiderivativeGrid {
        &self.g2
    }

    /// Form I: grid of `∫ min(Re λ1, Re λ2)`; `None` for other forms.
    pub fn min_rate(&self) -> Option<Result<&AntiderivativeGrid, JordanError>> {
        self.rate_grid(true)
    }

    /// Form I: grid of `∫ max(Re λ1, Re λ2)`; `None` for other forms.
    pub fn max_rate(&self) -> Option<Result<&AntiderivativeGrid, JordanError>> {
        self.rate_grid(false)
    }

    fn rate_grid(&self, pick_min: bool) -> Option<Result<&AntiderivativeGrid, JordanError>> {
        let (lo, hi) = self.rates.as_ref()?;
        let (f, cell) = if pick_min { (lo, &self.min_rate) } else { (hi, &self.max_rate) };
        if let Some(g) = cell.get() {
            return Some(Ok(g));
        }
        let mut ks = knots(&self.sys.interval, self.sys.t0);
        if let Coefficients::Diagonal { lambda1, lambda2 } = &self.sys.coeffs {
            let cross = crossings(lambda1, lambda2, &ks);
            ks.extend(cross);
        }
        Some(match AntiderivativeGrid::build(f.clone(), self.sys.t0, &ks, grid_tol()) {
            Ok(g) => Ok(cell.get_or_init(|| g)),
            Err(e) => Err(e.into()),
        })
    }

    /// `(X(t), X⁻¹(t))`.
    pub fn fundamental(&self, t: f64) -> Result<(Mat2, Mat2), JordanError> {
        let st = self.state(t)?;
        Ok((self.x_of(&st), self.xinv_of(&st)))
    }

    pub fn x_of(&self, st: &State) -> Mat2 {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self.form() {
            Form::I => Mat2::diag(st.p.exp(), st.q.exp()),
            Form::II => Mat2::new(one, st.q, z, one).scale(st.p.exp()),
            Form::III => rotation(st.q.re).scale(C64::new(st.p.re.exp(), 0.0)),
        }
    }

    pub fn xinv_of(&self, st: &State) -> Mat2 {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self.form() {
            Form::I => Mat2::diag((-st.p).exp(), (-st.q).exp()),
            Form::II => Mat2::new(one, -st.q, z, one).scale((-st.p).exp()),
            Form::III => rotation(-st.q.re).scale(C64::new((-st.p.re).exp(), 0.0)),
        }
    }

    /// `X(t) v`, scaling each component in log space so that a huge `X`
    /// applied to a tiny `v` stays finite.
    pub fn apply_x(&self, st: &State, v: Vec2) -> Vec2 {
        self.apply_scaled(st, v, 1.0)
    }

    /// `X⁻¹(t) v`, log-scaled like [`Prepared::apply_x`].
    pub fn apply_xinv(&self, st: &State, v: Vec2) -> Vec2 {
        self.apply_scaled(st, v, -1.0)
    }

    /// `ln |(X(t) v)_j|` per component, finite even where `X(t) v` overflows.
    pub fn log_abs_x(&self, st: &State, v: Vec2) -> [f64; 2] {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let (s1, s2, w) = match self.form() {
            Form::I => (st.p.re, st.q.re, v),
            Form::II => (st.p.re, st.p.re, Mat2::new(one, st.q, z, one).apply(v)),
            Form::III => (st.p.re, st.p.re, rotation(st.q.re).apply(v)),
        };
        [s1 + w.0[0].norm().ln(), s2 + w.0[1].norm().ln()]
    }

    fn apply_scaled(&self, st: &State, v: Vec2, sg: f64) -> Vec2 {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self.form() {
            Form::I => Vec2::new(log_scale(st.p * sg, v.0[0]), log_scale(st.q * sg, v.0[1])),
            Form::II => {
                let w = Mat2::new(one, st.q * sg, z, one).apply(v);
                Vec2::new(log_scale(st.p * sg, w.0[0]), log_scale(st.p * sg, w.0[1]))
            }
            Form::III => {
                let w = rotation(sg * st.q.re).apply(v);
                let a = C64::new(sg * st.p.re, 0.0);
                Vec2::new(log_scale(a, w.0[0]), log_scale(a, w.0[1]))
            }
        }
    }

    /// `X(t) X⁻¹(s)` with exponents combined before exponentiation.
    pub fn propagator(&self, t: &State, s: &State) -> Mat2 {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let dp = t.p - s.p;
        let dq = t.q - s.q;
        match self.form() {
            Form::I => Mat2::diag(dp.exp(), dq.exp()),
            Form::II => Mat2::new(one, dq, z, one).scale(dp.exp()),
            Form::III => rotation(dq.re).scale(C64::new(dp.re.exp(), 0.0)),
        }
    }
}

/// `e^{scale} x` formed as `e^{scale + ln x}`.
fn log_scale(scale: C64, x: C64) -> C64 {
    if x.re == 0.0 && x.im == 0.0 {
        x
    } else if scale.re.abs() < 500.0 {
        scale.exp() * x
    } else {
        (scale + x.ln()).exp()
    }
}

/// `[[cos θ, sin θ], [-sin θ, cos θ]]`
fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::real(c, s, -s, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jordan::NormKind;

    #[test]
    fn identity_at_base_point() {
        let sys = JordanSystem::shear(
            ScalarFn::parse("1+i*t").unwrap(),
            ScalarFn::parse("cos(t)").unwrap(),
            Interval::real_line(),
            0.3,
        )
        .unwrap();
        let p = Prepared::new(sys).unwrap();
        let (x, xi) = p.fundamental(0.3).unwrap();
        assert_eq!(x, Mat2::identity());
        assert_eq!(xi, Mat2::identity());
    }

    #[test]
    fn blow_up_diagonal_closed_form() {
        let sys = JordanSystem::diagonal(
            ScalarFn::parse("1/(1-t)").unwrap(),
            ScalarFn::parse("-1/t").unwrap(),
            Interval::open(0.0, 1.0).unwrap(),
            0.5,
        )
        .unwrap();
        let p = Prepared::new(sys).unwrap();
        let t0 = 0.5;
        for t in [0.01, 0.2, 0.7, 0.999] {
            let (x, xi) = p.fundamental(t).unwrap();
            let want = Mat2::real((1.0 - t0) / (1.0 - t), 0.0, 0.0, t0 / t);
            assert!(x.max_abs_diff(&want) < 1e-10 * want.norm(NormKind::Max), "{t}");
            assert!((x * xi).max_abs_diff(&Mat2::identity()) < 1e-10);
        }
    }

    #[test]
    fn quarter_turn() {
        let sys = JordanSystem::rotation(0.0, 1.0, Interval::real_line(), 0.0).unwrap();
        let p = Prepared::new(sys).unwrap();
        let (x, _) = p.fundamental(std::f64::consts::FRAC_PI_2).unwrap();
        assert!(x.max_abs_diff(&Mat2::real(0.0, 1.0, -1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn log_scaled_products() {
        // e^1000 overflows on its own
        let sys = JordanSystem::diagonal(1000.0, -3.0, Interval::real_line(), 0.0).unwrap();
        let p = Prepared::new(sys).unwrap();
        let st = p.state(1.0).unwrap();
        let v = Vec2::real((-700.0f64).exp(), 1.0);
        let x = p.apply_x(&st, v);
        assert!((x.0[0].re / 300f64.exp() - 1.0).abs() < 1e-12);
        assert!((x.0[1].re - (-3.0f64).exp()).abs() < 1e-15);
        let back = p.apply_xinv(&st, x);
        assert!(((back.0[0].re - v.0[0].re) / v.0[0].re).abs() < 1e-12);
        let sys = JordanSystem::rotation(-1.0, 2.0, Interval::real_line(), 0.0).unwrap();
        let p = Prepared::new(sys).unwrap();
        let st = p.state(0.7).unwrap();
        let v = Vec2::real(0.3, -2.0);
        let (x, _) = p.fundamental(0.7).unwrap();
        assert!((p.apply_x(&st, v) - x.apply(v)).norm(NormKind::Max) < 1e-15);
    }

    #[test]
    fn knots_cover_ends() {
        let ks = knots(&Interval::open(0.0, 1.0).unwrap(), 0.5);
        assert!(ks[0] > 0.0 && ks[0] < 1e-13);
        assert!(*ks.last().unwrap() < 1.0 && *ks.last().unwrap() > 1.0 - 1e-13);
        let ks = knots(&Interval::real_line(), 0.0);
        assert!(ks[0] < -4e12 && *ks.last().unwrap() > 4e12);
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
    }
}
