//! Adaptive Gauss–Kronrod (7/15) quadrature.

use super::{CalculusError, Tol};
use crate::expr::EvalError;
use crate::C64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

/// Values the quadrature can accumulate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7K15 panel: (Kronrod estimate, error estimate).
pub(crate) fn gk15<V, F>(f: &mut F, a: f64, b: f64) -> Result<(V, f64), EvalError>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V, EvalError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.magnitude() * WGK[7];
    let mut fv1 = [V::default(); 7];
    let mut fv2 = [V::default(); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kron = kron + (f1 + f2) * WGK[j];
        abs_sum += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let habs = h.abs();
    let result = kron * h;
    let res_abs = abs_sum * habs;
    let res_asc = asc * habs;
    let mut err = ((kron - gauss) * h).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err))
}

/// Result of a finite adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub panels: usize,
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
    seq: usize,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        // largest error first, earliest panel on ties
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Integrates `f` over `[a, b]` (or `-∫_b^a` when `b < a`) to `tol`.
///
/// The domain is bisected at the panel with the largest error estimate until
/// the summed estimate is within `max(tol.abs, tol.rel * |I|)`. Panel sums are
/// combined in left-to-right order so results do not depend on refinement
/// history beyond the panel set itself.
pub fn integrate<V, F>(mut f: F, a: f64, b: f64, tol: Tol) -> Result<QuadResult<V>, CalculusError>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V, EvalError>,
{
    if a == b {
        return Ok(QuadResult {
            value: V::default(),
            error: 0.0,
            panels: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(CalculusError::InfiniteRange { a, b });
    }
    let eval_panel = |f: &mut F, a: f64, b: f64, seq: usize| -> Result<Panel<V>, CalculusError> {
        let (value, error) = gk15(f, a, b).map_err(|source| CalculusError::Singularity {
            a: a.min(b),
            b: a.max(b),
            source,
        })?;
        if !(value.magnitude().is_finite() && error.is_finite()) {
            return Err(CalculusError::NonFinite { a, b });
        }
        Ok(Panel {
            a,
            b,
            value,
            error,
            seq,
        })
    };

    let first = eval_panel(&mut f, a, b, 0)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut seq = 1;
    loop {
        let bound = tol.abs.max(tol.rel * total.magnitude());
        if total_err <= bound {
            break;
        }
        if heap.len() >= tol.max_panels {
            return Err(CalculusError::ToleranceNotMet {
                a,
                b,
                error: total_err,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b || (worst.b - worst.a).abs() < 1e3 * f64::EPSILON * mid.abs().max(1e-300) {
            return Err(CalculusError::ToleranceNotMet {
                a,
                b,
                error: total_err,
                panels: heap.len() + 1,
            });
        }
        let left = eval_panel(&mut f, worst.a, mid, seq)?;
        let right = eval_panel(&mut f, mid, worst.b, seq + 1)?;
        seq += 2;
        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| {
        if a < b {
            p.a.total_cmp(&q.a)
        } else {
            q.a.total_cmp(&p.a)
        }
    });
    let n = panels.len();
    let mut value = V::default();
    let mut error = 0.0;
    for p in panels {
        value = value + p.value;
        error += p.error;
    }
    Ok(QuadResult {
        value,
        error,
        panels: n,
    })
}
