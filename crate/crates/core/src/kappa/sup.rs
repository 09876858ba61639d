use super::{kappa_at, kappa_profile, norm_factor, Direction, KappaError, KappaProfile};
use crate::calculus::{CalculusError, Convergence, ImproperOptions, Interval};
use crate::jordan::{NormKind, Prepared};

/// Knobs for [`best_constant`].
#[derive(Clone, Debug)]
pub struct SupOptions {
    pub improper: ImproperOptions,
    /// Number of coarse interior samples.
    pub coarse: usize,
    /// Golden-section stopping width in `t`.
    pub refine_tol: f64,
    /// Distance from `t0` covered by the stretched grid on infinite sides.
    pub horizon: f64,
    /// Restrict the search to `[lo, hi]`; disables boundary probing.
    pub window: Option<(f64, f64)>,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions {
            improper: ImproperOptions::default(),
            coarse: 512,
            refine_tol: 1e-8,
            horizon: 40.0,
            window: None,
        }
    }
}

/// Supremum of a κ-profile, scaled to the requested norm.
#[derive(Clone, Debug)]
pub struct SupResult {
    pub direction: Direction,
    pub norm: NormKind,
    /// The Ulam constant `factor · sup κ`.
    pub k: f64,
    /// Supremum of the native κ.
    pub native: f64,
    /// Argmax; an endpoint (possibly infinite) when not attained.
    pub t_star: f64,
    pub attained: bool,
    /// The coarse samples the search started from.
    pub profile: KappaProfile,
}

const TIE: f64 = 1e-9;
const UNBOUNDED: f64 = 1e10;

fn beats(v: f64, best: f64) -> bool {
    v > best + TIE * best.abs()
}

/// Coarse sample times for the sup search.
///
/// Finite intervals get a uniform midpoint grid plus any closed endpoint.
/// Infinite sides are stretched with `sinh` so that about half the points sit
/// within `horizon` of `t0`.
pub fn coarse_grid(iv: &Interval, t0: f64, n: usize, horizon: f64, window: Option<(f64, f64)>) -> Vec<f64> {
    let u = |k: usize| (k as f64 + 0.5) / n as f64;
    let mut ts: Vec<f64> = if let Some((lo, hi)) = window {
        let lo = lo.max(iv.a);
        let hi = hi.min(iv.b);
        let mut v: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * u(k)).collect();
        v.extend([lo, hi].into_iter().filter(|&e| iv.contains(e)));
        v
    } else {
        match (iv.a.is_finite(), iv.b.is_finite()) {
            (true, true) => (0..n).map(|k| iv.a + (iv.b - iv.a) * u(k)).collect(),
            (false, false) => {
                let s = horizon.asinh();
                (0..n).map(|k| t0 + (s * (2.0 * u(k) - 1.0)).sinh()).collect()
            }
            (true, false) => {
                let s = (horizon + (t0 - iv.a).abs()).asinh();
                (0..n).map(|k| iv.a + (s * u(k)).sinh()).collect()
            }
            (false, true) => {
                let s = (horizon + (iv.b - t0).abs()).asinh();
                (0..n).map(|k| iv.b - (s * u(k)).sinh()).collect()
            }
        }
    };
    if window.is_none() {
        if iv.closed_left {
            ts.push(iv.a);
        }
        if iv.closed_right {
            ts.push(iv.b);
        }
    }
    ts.retain(|&t| iv.contains(t));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

struct Probe {
    end: f64,
    points: Vec<(f64, f64)>,
    limit: f64,
}

/// Walks from the outermost sample `p` toward an open or infinite end.
fn probe(
    p: &Prepared,
    dir: Direction,
    start: (f64, f64),
    end: f64,
    opts: &ImproperOptions,
) -> Result<Probe, KappaError> {
    let (p0, v0) = start;
    let ts: Vec<f64> = if end.is_infinite() {
        (0..=24).map(|k| p0 + end.signum() * 2f64.powi(k) * p0.abs().max(1.0)).collect()
    } else {
        (1..=10).map(|j| end - (end - p0) * 10f64.powi(-j)).filter(|&t| t != end).collect()
    };
    let mut points = vec![(p0, v0)];
    let mut still = 0;
    for t in ts {
        let k = match kappa_at(p, dir, t, opts) {
            // the coefficient grids stop short of the end
            Err(KappaError::Calculus(CalculusError::OutOfRange { .. })) => break,
            r => r?,
        };
        match k.status {
            Convergence::Converged => {}
            // floating-point resolution near the end is used up
            Convergence::Inconclusive if points.len() >= 3 => break,
            status => return Err(KappaError::Nonexistent { t, status }),
        }
        if k.value > UNBOUNDED {
            return Err(KappaError::SupUnbounded { toward: end, last: k.value });
        }
        let prev = points.last().unwrap().1;
        points.push((t, k.value));
        still = if (k.value - prev).abs() <= 1e-12 * (1.0 + k.value.abs()) { still + 1 } else { 0 };
        if still >= 2 {
            break;
        }
    }
    let d: Vec<f64> = points.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let n = d.len();
    let w = 4.min(n);
    if n >= 4 && d[n - w..].iter().all(|&x| x > 0.0) && d[n - w..].windows(2).all(|x| x[1] >= 0.95 * x[0]) {
        return Err(KappaError::SupUnbounded { toward: end, last: points.last().unwrap().1 });
    }
    let last = points.last().unwrap().1;
    let tail = if n >= 2 && d[n - 1].abs() < d[n - 2].abs() {
        let r = d[n - 1].abs() / d[n - 2].abs();
        d[n - 1] * r / (1.0 - r)
    } else {
        0.0
    };
    Ok(Probe {
        end,
        points,
        limit: last + tail,
    })
}

/// Maximizes `f` on `[lo, hi]` by golden-section search.
pub(crate) fn golden<F, E>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        // ties move right so the left (smaller) argmax is kept
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Sup of κ over the interval (or the configured window).
///
/// Coarse grid maximum, golden-section refinement on the bracketing panel,
/// then one-sided extrapolation toward open or infinite ends; a boundary
/// limit that beats every interior value is reported with `attained = false`.
pub fn best_constant(p: &Prepared, dir: Direction, norm: NormKind, opts: &SupOptions) -> Result<SupResult, KappaError> {
    let iv = p.interval();
    let ts = coarse_grid(&iv, p.t0(), opts.coarse.max(3), opts.horizon, opts.window);
    let profile = kappa_profile(p, dir, norm, &ts, &opts.improper)?;
    if let Some(t) = profile.witness {
        let status = profile.points.iter().find(|k| k.t == t).map(|k| k.status).unwrap();
        return Err(KappaError::Nonexistent { t, status });
    }
    let pts = &profile.points;
    if let Some(k) = pts.iter().find(|k| k.value > UNBOUNDED) {
        return Err(KappaError::SupUnbounded { toward: k.t, last: k.value });
    }
    let mut i = 0;
    for (j, k) in pts.iter().enumerate() {
        if beats(k.value, pts[i].value) {
            i = j;
        }
    }
    let eval = |t: f64| -> Result<f64, KappaError> {
        let k = kappa_at(p, dir, t, &opts.improper)?;
        if !k.exists() {
            return Err(KappaError::Nonexistent { t, status: k.status });
        }
        Ok(k.value)
    };
    let bracket = |i: usize, xs: &[f64]| -> (f64, f64) {
        let n = xs.len();
        let lo = if i > 0 { xs[i - 1] } else { inward(&iv, xs[0], xs[0] - (xs[1.min(n - 1)] - xs[0])) };
        let hi = if i + 1 < n { xs[i + 1] } else { inward(&iv, xs[n - 1], xs[n - 1] + (xs[n - 1] - xs[n.saturating_sub(2)])) };
        (lo, hi)
    };
    let times: Vec<f64> = pts.iter().map(|k| k.t).collect();
    let (mut t_star, mut best) = (pts[i].t, pts[i].value);
    let (lo, hi) = bracket(i, &times);
    if hi - lo > opts.refine_tol {
        let (t, v) = golden(eval, lo, hi, opts.refine_tol)?;
        if beats(v, best) {
            t_star = t;
            best = v;
        }
    }
    let mut attained = true;
    if opts.window.is_none() {
        let mut probes = Vec::new();
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        if !iv.closed_left {
            probes.push(probe(p, dir, (first.t, first.value), iv.a, &opts.improper)?);
        }
        if !iv.closed_right {
            probes.push(probe(p, dir, (last.t, last.value), iv.b, &opts.improper)?);
        }
        for pr in probes {
            let (j, &(tj, vj)) = pr
                .points
                .iter()
                .enumerate()
                .skip(1)
                .fold(None, |acc: Option<(usize, &(f64, f64))>, (j, x)| match acc {
                    Some((_, b)) if !beats(x.1, b.1) => acc,
                    _ => Some((j, x)),
                })
                .unwrap_or((0, &pr.points[0]));
            if beats(pr.limit, best) && !beats(vj, pr.limit) {
                best = pr.limit;
                t_star = pr.end;
                attained = false;
            } else if j > 0 && beats(vj, best) {
                let xs: Vec<f64> = pr.points.iter().map(|x| x.0).collect();
                let (a, b) = if j + 1 < xs.len() { (xs[j - 1], xs[j + 1]) } else { (xs[j - 1], xs[j]) };
                let (a, b) = (a.min(b), a.max(b));
                let (t, v) = golden(eval, a, b, opts.refine_tol * (1.0 + tj.abs()))?;
                (t_star, best) = if v >= vj { (t, v) } else { (tj, vj) };
                attained = true;
            }
        }
    }
    let factor = norm_factor(p.form(), norm);
    Ok(SupResult {
        direction: dir,
        norm,
        k: factor * best,
        native: best,
        t_star,
        attained,
        profile,
    })
}

/// Moves `t` toward `from` if it left the interval.
fn inward(iv: &Interval, from: f64, t: f64) -> f64 {
    if iv.contains(t) && (iv.is_interior(t) || t == iv.a || t == iv.b) {
        t
    } else if t < from {
        0.5 * (from + iv.a)
    } else {
        0.5 * (from + iv.b)
    }
}
