use super::{integrate, CalculusError, QuadValue, Tol};
use crate::expr::EvalError;
use serde::{Deserialize, Serialize};

/// One end of an integration range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Endpoint {
    pub value: f64,
    pub closed: bool,
}

impl Endpoint {
    pub fn closed(value: f64) -> Self {
        Endpoint {
            value,
            closed: true,
        }
    }

    pub fn open(value: f64) -> Self {
        Endpoint {
            value,
            closed: false,
        }
    }

    /// True when the integral toward this end needs a truncation schedule.
    pub fn needs_limit(&self) -> bool {
        !(self.closed && self.value.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImproperOptions {
    /// Relative convergence tolerance on successive truncations.
    pub rel: f64,
    /// Absolute convergence tolerance; `1/abs` is the divergence threshold.
    pub abs: f64,
    /// Doublings toward an infinite end.
    pub max_doublings: u32,
    /// Decades toward a finite open end.
    pub max_decades: u32,
    /// Tolerance for each truncation piece.
    pub quad: Tol,
}

impl Default for ImproperOptions {
    fn default() -> Self {
        ImproperOptions {
            rel: 1e-9,
            abs: 1e-10,
            max_doublings: 40,
            max_decades: 12,
            quad: Tol {
                rel: 1e-11,
                abs: 1e-13,
                max_panels: 1 << 14,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converged,
    /// Partial values blew past the threshold or kept growing to the end.
    Diverged,
    /// Neither convergence nor divergence could be established.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImproperResult<V> {
    /// Last partial value, signed by direction (`∫_from^truncation`).
    pub value: V,
    pub status: Convergence,
    pub truncation: f64,
    /// Geometric estimate of the neglected remainder.
    pub tail: f64,
    pub steps: usize,
}

impl<V> ImproperResult<V> {
    pub fn converged(&self) -> bool {
        self.status == Convergence::Converged
    }
}

/// Truncation points from `from` toward `to`.
///
/// Infinite ends use `from ± 2^k·max(1, |from|)`, preceded by unit-scale
/// steps `from ± 2^k` when `|from| > 1` so that mass concentrated near `from`
/// is resolved; finite open ends use `to − 10^{−j}(to − from)`; a finite
/// closed end is reached directly.
pub fn schedule(from: f64, to: Endpoint, opts: &ImproperOptions) -> Vec<f64> {
    let scale = from.abs().max(1.0);
    if to.value.is_infinite() {
        let sign = to.value.signum();
        let mut pts: Vec<f64> = (0..)
            .map(|k| 2f64.powi(k))
            .take_while(|&d| d < scale)
            .map(|d| from + sign * d)
            .collect();
        pts.extend((0..=opts.max_doublings).map(|k| from + sign * 2f64.powi(k as i32) * scale));
        pts
    } else if to.closed {
        vec![to.value]
    } else {
        let span = to.value - from;
        (1..=opts.max_decades)
            .map(|j| to.value - 10f64.powi(-(j as i32)) * span)
            .filter(|&p| p != to.value)
            .collect()
    }
}

/// `∫_from^to f` with `to` possibly infinite or a singular open end.
///
/// The value is signed: integrating toward a smaller `to` gives `-∫_to^from f`.
pub fn improper_integral<V, F>(
    f: F,
    from: f64,
    to: Endpoint,
    opts: &ImproperOptions,
) -> Result<ImproperResult<V>, CalculusError>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V, EvalError>,
{
    if from == to.value {
        return Ok(ImproperResult {
            value: V::default(),
            status: Convergence::Converged,
            truncation: from,
            tail: 0.0,
            steps: 0,
        });
    }
    let points = schedule(from, to, opts);
    if !to.needs_limit() {
        let mut f = f;
        let r = integrate(&mut f, from, to.value, opts.quad)?;
        return Ok(ImproperResult {
            value: r.value,
            status: Convergence::Converged,
            truncation: to.value,
            tail: 0.0,
            steps: 1,
        });
    }
    improper_on_schedule(f, from, &points, opts)
}

/// Same as [`improper_integral`] with an explicit increasing-distance schedule.
pub fn improper_on_schedule<V, F>(
    mut f: F,
    from: f64,
    points: &[f64],
    opts: &ImproperOptions,
) -> Result<ImproperResult<V>, CalculusError>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V, EvalError>,
{
    let mut value = V::default();
    let mut prev = from;
    let mut incs: Vec<f64> = Vec::with_capacity(points.len());
    let mut growth: Vec<f64> = Vec::with_capacity(points.len());
    let mut tail = f64::INFINITY;
    for (k, &p) in points.iter().enumerate() {
        let piece = match integrate(&mut f, prev, p, opts.quad) {
            Ok(r) => r.value,
            // resolution exhausted; classify what we have
            Err(CalculusError::ToleranceNotMet { .. }) => break,
            Err(e) => return Err(e),
        };
        let before = value.magnitude();
        value = value + piece;
        prev = p;
        let d = piece.magnitude();
        incs.push(d);
        growth.push(value.magnitude() - before);
        let mag = value.magnitude();
        if mag > 1.0 / opts.abs {
            return Ok(ImproperResult {
                value,
                status: Convergence::Diverged,
                truncation: p,
                tail: f64::INFINITY,
                steps: k + 1,
            });
        }
        let bound = opts.rel * mag + opts.abs;
        if k >= 1 {
            let dp = incs[k - 1];
            tail = if d == 0.0 {
                0.0
            } else if d < dp {
                let r = d / dp;
                d * r / (1.0 - r)
            } else {
                f64::INFINITY
            };
            if d <= bound && tail <= bound {
                return Ok(ImproperResult {
                    value,
                    status: Convergence::Converged,
                    truncation: p,
                    tail,
                    steps: k + 1,
                });
            }
        }
    }
    // Out of schedule (or resolution): steadily non-shrinking growth means divergence.
    let n = growth.len();
    let w = 4.min(n);
    let steady = n >= 2
        && growth[n - w..].iter().all(|&g| g > 0.0)
        && growth[n - w..].windows(2).all(|p| p[1] >= 0.95 * p[0])
        && growth[n - 1] > opts.rel * value.magnitude() + opts.abs;
    Ok(ImproperResult {
        value,
        status: if steady {
            Convergence::Diverged
        } else {
            Convergence::Inconclusive
        },
        truncation: prev,
        tail,
        steps: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok<V>(v: V) -> Result<V, EvalError> {
        Ok(v)
    }

    #[test]
    fn unit_exponential_tail() {
        let t = 0.75;
        let r = improper_integral(|s: f64| ok((-(s - t)).exp()), t, Endpoint::open(f64::INFINITY), &Default::default())
            .unwrap();
        assert!(r.converged());
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(r.tail <= 1e-9 * r.value + 1e-10);
    }

    #[test]
    fn exponential_rates() {
        for m in [0.1, 1.0, 10.0] {
            let r = improper_integral(|s: f64| ok((-m * s).exp()), 0.0, Endpoint::open(f64::INFINITY), &Default::default())
                .unwrap();
            assert!(r.converged(), "{m}");
            assert!(((r.value - 1.0 / m) * m).abs() <= 1e-9, "{m}: {}", r.value);
        }
    }

    #[test]
    fn backward_is_signed() {
        let r = improper_integral(|s: f64| ok(s.exp()), 0.0, Endpoint::open(f64::NEG_INFINITY), &Default::default())
            .unwrap();
        assert!(r.converged());
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn toward_singular_finite_end() {
        // ∫_t^0 (s/t) ds taken toward the open end 0 equals -t/2
        let t = 0.6;
        let r = improper_integral(|s: f64| ok(s / t), t, Endpoint::open(0.0), &Default::default()).unwrap();
        assert!(r.converged());
        assert!((-r.value - t / 2.0).abs() < 1e-12);
    }

    #[test]
    fn growing_integrand_diverges() {
        let t = 1.0;
        let r = improper_integral(
            |s: f64| ok((1.0 + s - t) * (s - t).exp()),
            t,
            Endpoint::open(f64::INFINITY),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(r.status, Convergence::Diverged);
    }

    #[test]
    fn logarithmic_growth_diverges() {
        let r = improper_integral(|s: f64| ok(1.0 / (1.0 + s)), 0.0, Endpoint::open(f64::INFINITY), &Default::default())
            .unwrap();
        assert_eq!(r.status, Convergence::Diverged, "{r:?}");
        let r = improper_integral(|s: f64| ok(1.0 / (1.0 - s)), 0.0, Endpoint::open(1.0), &Default::default()).unwrap();
        assert_eq!(r.status, Convergence::Diverged, "{r:?}");
    }

    #[test]
    fn oscillation_is_inconclusive() {
        let r = improper_integral(|s: f64| ok(s.cos()), 0.0, Endpoint::open(f64::INFINITY), &Default::default())
            .unwrap();
        assert_eq!(r.status, Convergence::Inconclusive);
    }

    #[test]
    fn closed_end_is_direct() {
        let r = improper_integral(|s: f64| ok(s), 0.0, Endpoint::closed(2.0), &Default::default()).unwrap();
        assert!(r.converged());
        assert_eq!(r.steps, 1);
        assert!((r.value - 2.0).abs() < 1e-14);
    }
}
