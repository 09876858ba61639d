use super::quad::gk15;
use super::{integrate, CalculusError, Tol};
use crate::scalar::ScalarFn;
use crate::C64;
use rayon::prelude::*;

/// Cumulative integrals `Λ(t) = ∫_{t0}^t g(s) ds` tabulated at knots.
///
/// Off-knot values are the nearest knot value plus the integral over the
/// remaining gap. Each panel between knots carries a Chebyshev fit of the
/// antiderivative, accepted only when its tail is negligible and it
/// reproduces the panel integral; gaps in panels without a fit, and spans too
/// short for a fit difference to stay accurate, are integrated adaptively.
///
/// Panels are resolved outward from `t0`. A panel that cannot meet the
/// tolerance (fast oscillation far out, rounding next to a singular end)
/// truncates the grid on that side; [`AntiderivativeGrid::reach`] reports the
/// resolved range and evaluation beyond a truncated side fails.
#[derive(Clone, Debug)]
pub struct AntiderivativeGrid {
    g: ScalarFn,
    t0: f64,
    knots: Vec<f64>,
    values: Vec<C64>,
    /// Rounding residue of the cumulative sums, so knot differences stay
    /// accurate far from `t0`.
    residue: Vec<C64>,
    tol: Tol,
    truncated: (bool, bool),
    /// `fits[j]` covers `[knots[j], knots[j + 1]]`.
    fits: Vec<Option<PanelFit>>,
}

const FIT_NODES: usize = 20;

/// Chebyshev series of `∫_{a}^t g` on one panel `[a, b]`.
#[derive(Clone, Debug)]
struct PanelFit {
    a: f64,
    b: f64,
    coef: [C64; FIT_NODES + 1],
}

impl PanelFit {
    fn new(g: &ScalarFn, a: f64, b: f64, total: C64, tol: Tol) -> Option<PanelFit> {
        let n = FIT_NODES;
        let (mid, hw) = (0.5 * (a + b), 0.5 * (b - a));
        let theta = |m: usize| std::f64::consts::PI * (m as f64 + 0.5) / n as f64;
        let mut vals = [C64::new(0.0, 0.0); FIT_NODES];
        for (m, v) in vals.iter_mut().enumerate() {
            *v = g.eval(mid + hw * theta(m).cos()).ok()?;
        }
        // g = Σ c_k T_k
        let mut c = [C64::new(0.0, 0.0); FIT_NODES];
        for (k, ck) in c.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (m, v) in vals.iter().enumerate() {
                acc += v * (k as f64 * theta(m)).cos();
            }
            *ck = acc * if k == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 };
        }
        let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !scale.is_finite() || c[n - 1].norm().max(c[n - 2].norm()) > 1e-14 * scale {
            return None;
        }
        let mut coef = [C64::new(0.0, 0.0); FIT_NODES + 1];
        coef[1] += c[0];
        coef[2] += c[1] * 0.25;
        for k in 2..n {
            coef[k + 1] += c[k] / (2.0 * (k + 1) as f64);
            coef[k - 1] -= c[k] / (2.0 * (k - 1) as f64);
        }
        for z in coef.iter_mut() {
            *z *= hw;
        }
        let at_minus_one: C64 = coef.iter().enumerate().skip(1).map(|(k, z)| if k % 2 == 0 { *z } else { -*z }).sum();
        coef[0] = -at_minus_one;
        let fit = PanelFit { a, b, coef };
        let err = (fit.eval(b) - total).norm();
        (err <= tol.abs.max(tol.rel * total.norm())).then_some(fit)
    }

    /// `∫_a^t g` by Clenshaw recurrence.
    fn eval(&self, t: f64) -> C64 {
        let x = (2.0 * t - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for z in self.coef[1..].iter().rev() {
            let b0 = z + b1 * (2.0 * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coef[0] + b1 * x - b2
    }
}

/// A grid position prepared by [`AntiderivativeGrid::pin`].
#[derive(Clone, Copy, Debug)]
pub struct Pinned {
    t: f64,
    i: usize,
    gap: C64,
}

/// Error-free `a + b` per component.
fn two_sum(a: C64, b: C64) -> (C64, C64) {
    let f = |a: f64, b: f64| {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    };
    let (re, ere) = f(a.re, b.re);
    let (im, eim) = f(a.im, b.im);
    (C64::new(re, im), C64::new(ere, eim))
}

const CHUNK: usize = 64;

/// Panel integrals from `from` through `steps`, stopping at the first
/// unresolvable panel. Returns the resolved integrals and whether it stopped.
fn outward(g: &ScalarFn, from: f64, steps: &[f64], tol: Tol) -> Result<(Vec<C64>, bool), CalculusError> {
    let mut out = Vec::with_capacity(steps.len());
    let mut prev = from;
    for chunk in steps.chunks(CHUNK) {
        let starts: Vec<f64> = std::iter::once(prev).chain(chunk[..chunk.len() - 1].iter().copied()).collect();
        let res: Vec<Result<C64, CalculusError>> = match g {
            ScalarFn::Const(c) => starts.iter().zip(chunk).map(|(&a, &b)| Ok(*c * (b - a))).collect(),
            _ => starts
                .par_iter()
                .zip(chunk.par_iter())
                .map(|(&a, &b)| integrate(|s| g.eval(s), a, b, tol).map(|r| r.value))
                .collect(),
        };
        for r in res {
            match r {
                Ok(v) => out.push(v),
                Err(CalculusError::ToleranceNotMet { .. } | CalculusError::NonFinite { .. }) => return Ok((out, true)),
                Err(e) => return Err(e),
            }
        }
        prev = *chunk.last().unwrap();
    }
    Ok((out, false))
}

impl AntiderivativeGrid {
    /// Integrates `g` panel by panel between the sorted `samples` (plus `t0`).
    pub fn build(g: ScalarFn, t0: f64, samples: &[f64], tol: Tol) -> Result<Self, CalculusError> {
        let mut knots: Vec<f64> = samples.iter().copied().filter(|s| s.is_finite()).collect();
        knots.push(t0);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let i0 = knots.binary_search_by(|k| k.total_cmp(&t0)).expect("t0 inserted");

        let right: Vec<f64> = knots[i0 + 1..].to_vec();
        let left: Vec<f64> = knots[..i0].iter().rev().copied().collect();
        let (rp, rcut) = outward(&g, t0, &right, tol)?;
        let (lp, lcut) = outward(&g, t0, &left, tol)?;

        let zero = C64::new(0.0, 0.0);
        let mut ks = Vec::with_capacity(lp.len() + rp.len() + 1);
        let mut values = Vec::with_capacity(ks.capacity());
        let mut residue = Vec::with_capacity(ks.capacity());
        // panels toward the left are integrated right-to-left, so already signed
        for (side, knots, panels) in [(0, &left, &lp), (1, &right, &rp)] {
            let (mut hi, mut lo) = (zero, zero);
            for (k, p) in knots.iter().zip(panels) {
                let (s, e) = two_sum(hi, *p);
                hi = s;
                lo += e;
                ks.push(*k);
                values.push(hi);
                residue.push(lo);
            }
            if side == 0 {
                ks.reverse();
                values.reverse();
                residue.reverse();
                ks.push(t0);
                values.push(zero);
                residue.push(zero);
            }
        }
        let fits = match &g {
            ScalarFn::Const(_) => Vec::new(),
            _ => (0..ks.len().saturating_sub(1))
                .into_par_iter()
                .map(|j| {
                    let total = (values[j + 1] - values[j]) + (residue[j + 1] - residue[j]);
                    PanelFit::new(&g, ks[j], ks[j + 1], total, tol)
                })
                .collect(),
        };
        Ok(AntiderivativeGrid {
            g,
            t0,
            knots: ks,
            values,
            residue,
            tol,
            truncated: (lcut, rcut),
            fits,
        })
    }

    /// Range where `eval` is available; infinite on sides that were not truncated.
    pub fn reach(&self) -> (f64, f64) {
        let lo = if self.truncated.0 { self.knots[0] } else { f64::NEG_INFINITY };
        let hi = if self.truncated.1 { *self.knots.last().unwrap() } else { f64::INFINITY };
        (lo, hi)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn integrand(&self) -> &ScalarFn {
        &self.g
    }

    /// `Λ(t)`; points beyond the outermost knots integrate from the end knot.
    pub fn eval(&self, t: f64) -> Result<C64, CalculusError> {
        if let ScalarFn::Const(c) = &self.g {
            return Ok(*c * (t - self.t0));
        }
        let i = self.locate(t)?;
        Ok(self.values[i] + (self.residue[i] + self.gap(i, t)?))
    }

    /// `∫_t^s g = Λ(s) − Λ(t)` without cancellation between large values.
    pub fn diff(&self, s: f64, t: f64) -> Result<C64, CalculusError> {
        if let ScalarFn::Const(c) = &self.g {
            return Ok(*c * (s - t));
        }
        let (is, it) = (self.locate(s)?, self.locate(t)?);
        // integrating straight from t to s is more accurate, unless that
        // crosses the shared knot (a possible kink)
        let k = self.knots[is];
        if is == it && !((t < k && k < s) || (s < k && k < t)) {
            return self.piece(t, s);
        }
        let knots = (self.values[is] - self.values[it]) + (self.residue[is] - self.residue[it]);
        Ok(knots + (self.gap(is, s)? - self.gap(it, t)?))
    }

    /// Fixes the lower end `t` of repeated [`AntiderivativeGrid::diff_from`] calls.
    pub fn pin(&self, t: f64) -> Result<Pinned, CalculusError> {
        if let ScalarFn::Const(_) = &self.g {
            return Ok(Pinned {
                t,
                i: 0,
                gap: C64::new(0.0, 0.0),
            });
        }
        let i = self.locate(t)?;
        Ok(Pinned {
            t,
            i,
            gap: self.gap(i, t)?,
        })
    }

    /// `diff(s, at.t)` with the gap at the pinned end computed once.
    pub fn diff_from(&self, s: f64, at: &Pinned) -> Result<C64, CalculusError> {
        if let ScalarFn::Const(c) = &self.g {
            return Ok(*c * (s - at.t));
        }
        let is = self.locate(s)?;
        let k = self.knots[is];
        if is == at.i && !((at.t < k && k < s) || (s < k && k < at.t)) {
            return self.piece(at.t, s);
        }
        let knots = (self.values[is] - self.values[at.i]) + (self.residue[is] - self.residue[at.i]);
        Ok(knots + (self.gap(is, s)? - at.gap))
    }

    /// Index of the knot nearest to `t`.
    fn locate(&self, t: f64) -> Result<usize, CalculusError> {
        let (lo, hi) = self.reach();
        if t < lo || t > hi || t.is_nan() {
            return Err(CalculusError::OutOfRange { t, lo, hi });
        }
        Ok(match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.knots.len() => i - 1,
            Err(i) if t - self.knots[i - 1] <= self.knots[i] - t => i - 1,
            Err(i) => i,
        })
    }

    /// `∫_{knot i}^t g`: one Gauss–Kronrod panel when that already meets the
    /// tolerance (smooth in `t`), adaptive otherwise.
    fn gap(&self, i: usize, t: f64) -> Result<C64, CalculusError> {
        self.piece(self.knots[i], t)
    }

    /// `∫_a^b g` from the fit of the panel holding both ends, when the span is
    /// long enough for the difference of fit values to keep its precision.
    fn fitted(&self, a: f64, b: f64) -> Option<C64> {
        let (lo, hi) = (a.min(b), a.max(b));
        let j = match self.knots.binary_search_by(|k| k.total_cmp(&lo)) {
            Ok(j) => j,
            Err(j) => j.checked_sub(1)?,
        };
        let fit = self.fits.get(j)?.as_ref()?;
        if hi > fit.b || hi - lo < 1e-3 * (fit.b - fit.a) {
            return None;
        }
        Some(fit.eval(b) - fit.eval(a))
    }

    fn piece(&self, k: f64, t: f64) -> Result<C64, CalculusError> {
        if k == t {
            return Ok(C64::new(0.0, 0.0));
        }
        if let Some(v) = self.fitted(k, t) {
            return Ok(v);
        }
        let mut f = |s: f64| self.g.eval(s);
        if let Ok((v, err)) = gk15::<C64, _>(&mut f, k, t) {
            if v.re.is_finite() && v.im.is_finite() && err <= self.tol.abs.max(self.tol.rel * v.norm()) {
                return Ok(v);
            }
        }
        let local = Tol {
            max_panels: 1 << 14,
            ..self.tol
        };
        match integrate(&mut f, k, t, local) {
            Ok(r) => Ok(r.value),
            // rounding-limited next to a singular end
            Err(CalculusError::ToleranceNotMet { .. }) => Ok(integrate(f, k, t, Tol { rel: 1e-9, ..local })?.value),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    }

    #[test]
    fn constant_integrand() {
        let g = AntiderivativeGrid::build(ScalarFn::real(1.0), 0.0, &uniform(-5.0, 5.0, 10), Tol::default())
            .unwrap();
        assert_eq!(g.eval(3.0).unwrap().re, 3.0);
        assert_eq!(g.eval(0.0).unwrap().re, 0.0);
    }

    #[test]
    fn log_of_one_plus_square() {
        let f = ScalarFn::parse("2*t/(1+t^2)").unwrap();
        let g = AntiderivativeGrid::build(f, 0.0, &uniform(-4.0, 4.0, 64), Tol::default()).unwrap();
        assert_eq!(g.values()[g.knots().iter().position(|&k| k == 0.0).unwrap()].re, 0.0);
        let v = g.eval(1.0).unwrap();
        assert!((v.re - 0.6931471805599453).abs() < 1e-12);
        let v = g.eval(0.3217).unwrap();
        assert!((v.re - (1.0 + 0.3217f64 * 0.3217).ln()).abs() < 1e-12);
    }

    #[test]
    fn near_singular_endpoint() {
        let f = ScalarFn::parse("1/(1-t)").unwrap();
        let g = AntiderivativeGrid::build(f, 0.5, &uniform(0.1, 0.95, 40), Tol::default()).unwrap();
        let v = g.eval(0.9).unwrap();
        assert!((v.re - 1.6094379124341003).abs() < 1e-12);
    }

    #[test]
    fn additive_between_knots() {
        let f = ScalarFn::parse("exp(i*t)*cos(3*t)").unwrap();
        let knots = uniform(-3.0, 3.0, 37);
        let tol = Tol::default();
        let g = AntiderivativeGrid::build(f.clone(), 0.4, &knots, tol).unwrap();
        for (b, c) in [(-3.0, 3.0), (-1.2, 0.7), (0.4, 2.1)] {
            let direct = integrate(|s| f.eval(s), b, c, tol).unwrap().value;
            let diff = g.eval(c).unwrap() - g.eval(b).unwrap() - direct;
            assert!(diff.norm() <= 2.0 * tol.abs.max(tol.rel * direct.norm()), "{b} {c}: {diff} {direct}");
        }
    }

    #[test]
    fn differences_far_from_base() {
        let f = ScalarFn::parse("1-2*t/(1+t^2)").unwrap();
        let ks = crate::jordan::knots(&crate::calculus::Interval::real_line(), 0.0);
        let g = AntiderivativeGrid::build(f, 0.0, &ks, Tol::new(1e-12, 1e-14)).unwrap();
        let big = |x: f64| x - (1.0 + x * x).ln();
        let (t, s): (f64, f64) = (-41585510.98085106, -41585507.5);
        let want = (s - t) - ((1.0 + s * s) / (1.0 + t * t)).ln();
        let d = g.diff(s, t).unwrap().re;
        assert!((d - want).abs() < 1e-12, "{d} vs {want}");
        assert!((g.eval(s).unwrap().re - big(s)).abs() < 1e-12 * big(s).abs());
    }

    #[test]
    fn panel_fits_match_quadrature() {
        let f = ScalarFn::parse("exp(i*t)*cos(3*t) + abs(t - 0.3)").unwrap();
        let tol = Tol::new(1e-12, 1e-14);
        let g = AntiderivativeGrid::build(f.clone(), 0.0, &uniform(-2.0, 2.0, 32), tol).unwrap();
        let kinked = g.knots().iter().position(|&k| k > 0.3).unwrap() - 1;
        assert!(g.fits[kinked].is_none());
        assert!(g.fits.iter().filter(|x| x.is_some()).count() >= 30);
        for k in 0..57 {
            let t = -1.97 + 0.07 * k as f64;
            let q = |a: f64, b: f64| integrate(|s| f.eval(s), a, b, Tol::new(1e-13, 1e-16)).unwrap().value;
            let direct = if t > 0.3 { q(0.0, 0.3) + q(0.3, t) } else { q(0.0, t) };
            assert!((g.eval(t).unwrap() - direct).norm() < 1e-12, "{t}");
        }
    }

    #[test]
    fn truncates_at_unresolved_panel() {
        let f = ScalarFn::parse("cos(t^2)").unwrap();
        let mut knots = uniform(0.0, 4.0, 32);
        knots.extend([1e6, 1e9]);
        let tol = Tol { max_panels: 64, ..Tol::default() };
        let g = AntiderivativeGrid::build(f, 0.0, &knots, tol).unwrap();
        assert_eq!(g.reach(), (f64::NEG_INFINITY, 4.0));
        assert!(matches!(g.eval(5.0), Err(CalculusError::OutOfRange { .. })));
        assert!(g.eval(-1.0).is_ok());
    }

}
