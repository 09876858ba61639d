//! Time-dependent similarity transforms and reduction of inhomogeneous
//! problems.
//!
//! With `y = R(t) x`, solutions of `x' = A x` map to solutions of `y' = J y`,
//! `J = (R' + R A) R⁻¹`. Bounded `R`, `R⁻¹` carry Ulam constants across with
//! the factor `sup‖R‖ · sup‖R⁻¹‖`.

use crate::calculus::{schedule, Interval};
use crate::expr::{DiffError, EvalError, EvalErrorKind, ParseError};
use crate::jordan::{Coefficients, Form, JordanError, JordanSystem, Mat2, NormKind, Vec2};
use crate::kappa::{coarse_grid, golden};
use crate::scalar::ScalarFn;
use crate::shadow::{Approx, ShadowError};
use crate::C64;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum TransformError {
    #[error("R(t) is singular at t = {t} (|det| = {det:e})")]
    Singular { t: f64, det: f64 },
    #[error("sup ||{which}|| is unbounded toward t = {toward}")]
    Unbounded { which: &'static str, toward: f64 },
    #[error("particular solution residual {residual:e} at t = {t} exceeds {tol:e}")]
    Residual { t: f64, residual: f64, tol: f64 },
    #[error("J(t) does not match a Jordan form")]
    General,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jordan(#[from] JordanError),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
}

/// A 2×2 matrix of scalar functions, row-major.
#[derive(Clone, Debug)]
pub struct MatrixFn(pub [ScalarFn; 4]);

impl MatrixFn {
    pub fn parse(entries: [&str; 4]) -> Result<Self, ParseError> {
        let [a, b, c, d] = entries;
        Ok(MatrixFn([ScalarFn::parse(a)?, ScalarFn::parse(b)?, ScalarFn::parse(c)?, ScalarFn::parse(d)?]))
    }

    pub fn constant(m: Mat2) -> Self {
        let e = m.0;
        MatrixFn([e[0][0].into(), e[0][1].into(), e[1][0].into(), e[1][1].into()])
    }

    /// The coefficient matrix of a Jordan-form system.
    pub fn from_system(sys: &JordanSystem) -> Self {
        let s = sys.clone();
        let entry = |i: usize, j: usize| {
            let s = s.clone();
            ScalarFn::native(&format!("A{}{}", i + 1, j + 1), move |t| {
                s.coefficient_matrix(t).map(|m| m.0[i][j]).unwrap_or(C64::new(f64::NAN, 0.0))
            })
        };
        MatrixFn([entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1)])
    }

    pub fn eval(&self, t: f64) -> Result<Mat2, EvalError> {
        let [a, b, c, d] = &self.0;
        Ok(Mat2::new(a.eval(t)?, b.eval(t)?, c.eval(t)?, d.eval(t)?))
    }

    /// Entrywise symbolic derivative; `None` unless every entry is a
    /// constant or an expression.
    pub fn differentiate(&self) -> Result<Option<MatrixFn>, DiffError> {
        let mut out = Vec::with_capacity(4);
        for e in &self.0 {
            out.push(match e {
                ScalarFn::Const(_) => ScalarFn::real(0.0),
                ScalarFn::Expr(x) => ScalarFn::expr(x.differentiate()?),
                ScalarFn::Native(..) => return Ok(None),
            });
        }
        let [a, b, c, d]: [ScalarFn; 4] = out.try_into().expect("four entries");
        Ok(Some(MatrixFn([a, b, c, d])))
    }
}

/// `M(t)` as a closure, for entries that are not expressions.
pub type MatFn = Arc<dyn Fn(f64) -> Result<Mat2, EvalError> + Send + Sync>;

/// `R(t)` with its derivative on an interval.
#[derive(Clone)]
pub struct TransformSpec {
    r: MatFn,
    /// `None` means 4th-order finite differences.
    dr: Option<MatFn>,
    pub interval: Interval,
    /// Point used to centre grids on infinite intervals.
    pub t0: f64,
    label: String,
}

impl std::fmt::Debug for TransformSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TransformSpec({}, symbolic R' = {})", self.label, self.dr.is_some())
    }
}

impl TransformSpec {
    /// Symbolic `R'` when all entries are expressions, numeric otherwise.
    pub fn new(r: MatrixFn, interval: Interval, t0: f64) -> Result<Self, TransformError> {
        let label = format!("[[{}, {}], [{}, {}]]", r.0[0], r.0[1], r.0[2], r.0[3]);
        let dr = r.differentiate()?.map(|d| Arc::new(move |t| d.eval(t)) as MatFn);
        Ok(TransformSpec {
            r: Arc::new(move |t| r.eval(t)),
            dr,
            interval,
            t0,
            label,
        })
    }

    pub fn parse(entries: [&str; 4], interval: Interval, t0: f64) -> Result<Self, TransformError> {
        Self::new(MatrixFn::parse(entries)?, interval, t0)
    }

    /// From closures; `dr = None` selects finite differences.
    pub fn from_fns(r: MatFn, dr: Option<MatFn>, interval: Interval, t0: f64, label: &str) -> Self {
        TransformSpec {
            r,
            dr,
            interval,
            t0,
            label: label.to_string(),
        }
    }

    pub fn symbolic_derivative(&self) -> bool {
        self.dr.is_some()
    }

    pub fn r(&self, t: f64) -> Result<Mat2, TransformError> {
        Ok((self.r)(t)?)
    }

    pub fn r_inv(&self, t: f64) -> Result<Mat2, TransformError> {
        let m = self.r(t)?;
        let det = m.det().norm();
        match m.inverse() {
            Some(inv) if det > 1e-12 => Ok(inv),
            _ => Err(TransformError::Singular { t, det }),
        }
    }

    pub fn dr(&self, t: f64) -> Result<Mat2, TransformError> {
        match &self.dr {
            Some(d) => Ok(d(t)?),
            None => self.numeric_dr(t),
        }
    }

    fn numeric_dr(&self, t: f64) -> Result<Mat2, TransformError> {
        let iv = self.interval;
        let scale = t.abs().max(1.0);
        let h0 = 1e-3 * scale;
        let room = (t - iv.a).min(iv.b - t) / 2.01;
        let r = |x: f64| self.r(x);
        let lin = |terms: &[(f64, Mat2)], k: f64| {
            let mut out = Mat2::default();
            for (c, m) in terms {
                for i in 0..2 {
                    for j in 0..2 {
                        out.0[i][j] += m.0[i][j] * (c * k);
                    }
                }
            }
            out
        };
        if room >= 1e-4 * scale {
            let h = h0.min(room);
            let terms = [(1.0, r(t - 2.0 * h)?), (-8.0, r(t - h)?), (8.0, r(t + h)?), (-1.0, r(t + 2.0 * h)?)];
            return Ok(lin(&terms, 1.0 / (12.0 * h)));
        }
        let h = if iv.b - t >= t - iv.a { h0.min((iv.b - t) / 4.0) } else { -h0.min((t - iv.a) / 4.0) };
        let terms = [
            (-25.0, r(t)?),
            (48.0, r(t + h)?),
            (-36.0, r(t + 2.0 * h)?),
            (16.0, r(t + 3.0 * h)?),
            (-3.0, r(t + 4.0 * h)?),
        ];
        Ok(lin(&terms, 1.0 / (12.0 * h)))
    }

    /// The transform `R⁻¹` with derivative `−R⁻¹ R' R⁻¹`.
    pub fn inverse(&self) -> TransformSpec {
        let a = self.clone();
        let b = self.clone();
        let bad = |t: f64, e: TransformError| EvalError {
            kind: EvalErrorKind::Domain,
            subtree: e.to_string(),
            t,
        };
        TransformSpec {
            r: Arc::new(move |t| a.r_inv(t).map_err(|e| bad(t, e))),
            dr: Some(Arc::new(move |t| {
                let inv = b.r_inv(t).map_err(|e| bad(t, e))?;
                let d = b.dr(t).map_err(|e| bad(t, e))?;
                Ok(mul(mul(inv, d), inv).scale(C64::new(-1.0, 0.0)))
            })),
            interval: self.interval,
            t0: self.t0,
            label: format!("inverse of {}", self.label),
        }
    }
}

pub(crate) fn mul(a: Mat2, b: Mat2) -> Mat2 {
    let mut out = Mat2::default();
    for i in 0..2 {
        for j in 0..2 {
            out.0[i][j] = a.0[i][0] * b.0[0][j] + a.0[i][1] * b.0[1][j];
        }
    }
    out
}

fn add(a: Mat2, b: Mat2) -> Mat2 {
    let mut out = a;
    for i in 0..2 {
        for j in 0..2 {
            out.0[i][j] += b.0[i][j];
        }
    }
    out
}

/// `J(t) = (R'(t) + R(t) A(t)) R⁻¹(t)`.
#[derive(Clone)]
pub struct Similarity {
    pub a: MatFn,
    pub spec: TransformSpec,
}

impl Similarity {
    pub fn new(a: MatrixFn, spec: TransformSpec) -> Self {
        Similarity {
            a: Arc::new(move |t| a.eval(t)),
            spec,
        }
    }

    pub fn j(&self, t: f64) -> Result<Mat2, TransformError> {
        let r = self.spec.r(t)?;
        let inv = self.spec.r_inv(t)?;
        let m = add(self.spec.dr(t)?, mul(r, (self.a)(t)?));
        Ok(mul(m, inv))
    }

    /// `max ‖(J R − R' − R A)(t)‖` over `times`, entrywise.
    pub fn residual(&self, times: &[f64]) -> Result<f64, TransformError> {
        let mut worst = 0.0f64;
        for &t in times {
            let r = self.spec.r(t)?;
            let lhs = mul(self.j(t)?, r);
            let rhs = add(self.spec.dr(t)?, mul(r, (self.a)(t)?));
            let scale = rhs.norm(NormKind::Max).max(1.0);
            worst = worst.max(lhs.max_abs_diff(&rhs) / scale);
        }
        Ok(worst)
    }

    /// Pattern-matches `J` against the three forms at `times`.
    pub fn classify(&self, times: &[f64]) -> Result<Classification, TransformError> {
        let mut samples = Vec::with_capacity(times.len());
        for &t in times {
            samples.push((t, self.j(t)?));
        }
        let tol = 1e-10;
        let close = |x: C64, y: C64, m: &Mat2| (x - y).norm() <= tol * m.norm(NormKind::Max).max(1.0);
        let zero = C64::new(0.0, 0.0);
        let all = |pred: &dyn Fn(&Mat2) -> bool| samples.iter().all(|(_, m)| pred(m));
        let e = |m: &Mat2, i: usize, j: usize| m.0[i][j];
        let form = if all(&|m| close(e(m, 0, 1), zero, m) && close(e(m, 1, 0), zero, m)) {
            Some(Form::I)
        } else if all(&|m| close(e(m, 1, 0), zero, m) && close(e(m, 0, 0), e(m, 1, 1), m)) {
            Some(Form::II)
        } else if all(&|m| {
            let real = e(m, 0, 0).im.abs() + e(m, 0, 1).im.abs() + e(m, 1, 0).im.abs() + e(m, 1, 1).im.abs()
                <= tol * m.norm(NormKind::Max).max(1.0);
            real && close(e(m, 0, 0), e(m, 1, 1), m) && close(e(m, 0, 1), -e(m, 1, 0), m)
        }) {
            Some(Form::III)
        } else {
            None
        };
        Ok(Classification { form, samples })
    }

    /// `J` as a Jordan-form system on the transform's interval.
    pub fn to_jordan(&self, form: Form, t0: f64) -> Result<JordanSystem, TransformError> {
        let entry = |i: usize, j: usize, re_only: bool| {
            let s = self.clone();
            ScalarFn::native(&format!("J{}{}", i + 1, j + 1), move |t| match s.j(t) {
                Ok(m) if re_only => C64::new(m.0[i][j].re, 0.0),
                Ok(m) => m.0[i][j],
                Err(_) => C64::new(f64::NAN, 0.0),
            })
        };
        let coeffs = match form {
            Form::I => Coefficients::Diagonal {
                lambda1: entry(0, 0, false),
                lambda2: entry(1, 1, false),
            },
            Form::II => Coefficients::Shear {
                lambda: entry(0, 0, false),
                mu: entry(0, 1, false),
            },
            Form::III => Coefficients::Rotation {
                alpha: entry(0, 0, true),
                beta: entry(0, 1, true),
            },
        };
        Ok(JordanSystem::new(coeffs, self.spec.interval, t0)?)
    }

    /// `ψ = R φ` with `ψ' = R' φ + R φ'`; its defect for `J` is `R` times the
    /// defect of `φ` for `A`.
    pub fn push_forward(&self, phi: Approx) -> Approx {
        let (s1, s2) = (self.spec.clone(), self.spec.clone());
        let (p1, p2) = (phi.clone(), phi.clone());
        let bad = |t: f64, e: String| EvalError {
            kind: EvalErrorKind::Domain,
            subtree: e,
            t,
        };
        let domain = phi.domain();
        Approx::function(domain, move |t| {
            let r = s1.r(t).map_err(|e| bad(t, e.to_string()))?;
            Ok(r.apply(p1.value(t).map_err(|e| bad(t, e.to_string()))?))
        })
        .with_derivative(move |t| {
            let r = s2.r(t).map_err(|e| bad(t, e.to_string()))?;
            let dr = s2.dr(t).map_err(|e| bad(t, e.to_string()))?;
            let v = p2.value(t).map_err(|e| bad(t, e.to_string()))?;
            let dv = p2.derivative(t).map_err(|e| bad(t, e.to_string()))?;
            Ok(dr.apply(v) + r.apply(dv))
        })
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    /// `None` for a general matrix.
    pub form: Option<Form>,
    pub samples: Vec<(f64, Mat2)>,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self.form {
            Some(Form::I) => "I",
            Some(Form::II) => "II",
            Some(Form::III) => "III",
            None => "general",
        }
    }
}

/// `sup ‖M(t)‖` over the interval with a boundedness verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSup {
    pub value: f64,
    pub argmax_t: f64,
    pub bounded: bool,
    /// Endpoint toward which growth was seen, when unbounded.
    pub toward: Option<f64>,
}

/// Coarse grid maximum, golden refinement, and probes toward open ends.
pub fn sup_norm<F>(f: F, iv: &Interval, t0: f64, norm: NormKind) -> Result<NormSup, TransformError>
where
    F: Fn(f64) -> Result<Mat2, TransformError>,
{
    let g = |t: f64| f(t).map(|m| m.norm(norm));
    let grid = coarse_grid(iv, t0, 512, 40.0, None);
    let mut vals = Vec::with_capacity(grid.len());
    for &t in &grid {
        vals.push(g(t)?);
    }
    let (i, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let (mut arg, mut best) = (grid[i], vals[i]);
    let (a, b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
    if b > a {
        let (t, v) = golden(g, a, b, 1e-12 * (b - a).max(1.0))?;
        if v > best {
            (arg, best) = (t, v);
        }
    }
    let mut out = NormSup {
        value: best,
        argmax_t: arg,
        bounded: true,
        toward: None,
    };
    let opts = crate::calculus::ImproperOptions {
        max_doublings: 24,
        max_decades: 10,
        ..Default::default()
    };
    for end in [iv.left(), iv.right()] {
        if !end.needs_limit() {
            continue;
        }
        let from = if end.value < t0 { grid[0] } else { grid[grid.len() - 1] };
        let mut seq = Vec::new();
        for t in schedule(from, end, &opts) {
            if !iv.contains(t) {
                break;
            }
            match g(t) {
                Ok(v) if v.is_finite() => seq.push((t, v)),
                _ => break,
            }
        }
        if let Some(&(t, v)) = seq.iter().max_by(|x, y| x.1.total_cmp(&y.1)) {
            if v > out.value {
                out.value = v;
                out.argmax_t = t;
            }
        }
        let n = seq.len();
        let growing = n >= 4 && seq[n - 4..].windows(2).all(|w| w[1].1 > w[0].1 * 1.5);
        if growing || seq.last().is_some_and(|l| l.1 > 1e10) || (n == 0 && end.value.is_finite() && g(end.value).is_err()) {
            out.bounded = false;
            out.toward = Some(end.value);
        }
    }
    Ok(out)
}

/// `sup‖R‖ · sup‖R⁻¹‖ · K` with both sups in `norm`'s induced norm.
#[derive(Clone, Debug, Serialize)]
pub struct Propagated {
    pub r_sup: NormSup,
    pub r_inv_sup: NormSup,
    pub factor: f64,
    /// An Ulam constant for the transformed system; an upper bound only.
    pub constant: f64,
}

pub fn propagate_constant(k: f64, spec: &TransformSpec, norm: NormKind) -> Result<Propagated, TransformError> {
    let r_sup = sup_norm(|t| spec.r(t), &spec.interval, spec.t0, norm)?;
    if !r_sup.bounded {
        return Err(TransformError::Unbounded {
            which: "R",
            toward: r_sup.toward.unwrap_or(f64::NAN),
        });
    }
    let r_inv_sup = sup_norm(|t| spec.r_inv(t), &spec.interval, spec.t0, norm)?;
    if !r_inv_sup.bounded {
        return Err(TransformError::Unbounded {
            which: "R^-1",
            toward: r_inv_sup.toward.unwrap_or(f64::NAN),
        });
    }
    let factor = r_sup.value * r_inv_sup.value;
    Ok(Propagated {
        r_sup,
        r_inv_sup,
        factor,
        constant: factor * k,
    })
}

/// `φ − z` as an approximate solution of the homogeneous system, where `z`
/// solves `z' = A z + f`; a shadow `y` of it lifts to `y + z`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub homogeneous: Approx,
    pub particular: Approx,
    /// `sup ‖z' − A z − f‖` over the check grid.
    pub residual: f64,
}

impl Reduction {
    pub fn lift(&self, t: f64, y: Vec2) -> Result<Vec2, TransformError> {
        Ok(y + self.particular.value(t)?)
    }
}

pub fn reduce_inhomogeneous(
    a: &dyn Fn(f64) -> Result<Mat2, EvalError>,
    f: &dyn Fn(f64) -> Result<Vec2, EvalError>,
    z: Approx,
    phi: Approx,
    grid: &[f64],
    tol: f64,
) -> Result<Reduction, TransformError> {
    let mut residual = 0.0f64;
    for &t in grid {
        let r = (z.derivative(t)? - a(t)?.apply(z.value(t)?) - f(t)?).norm(NormKind::Max);
        let scale = f(t)?.norm(NormKind::Max).max(1.0);
        if r > tol * scale {
            return Err(TransformError::Residual { t, residual: r, tol: tol * scale });
        }
        residual = residual.max(r);
    }
    let dom = {
        let (a1, b1) = phi.domain();
        let (a2, b2) = z.domain();
        (a1.max(a2), b1.min(b2))
    };
    let (pv, zv) = (phi.clone(), z.clone());
    let (pd, zd) = (phi, z.clone());
    let bad = |t: f64, e: ShadowError| EvalError {
        kind: EvalErrorKind::Domain,
        subtree: e.to_string(),
        t,
    };
    let homogeneous = Approx::function(dom, move |t| {
        Ok(pv.value(t).map_err(|e| bad(t, e))? - zv.value(t).map_err(|e| bad(t, e))?)
    })
    .with_derivative(move |t| Ok(pd.derivative(t).map_err(|e| bad(t, e))? - zd.derivative(t).map_err(|e| bad(t, e))?));
    Ok(Reduction {
        homogeneous,
        particular: z,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn ex65() -> (MatrixFn, TransformSpec) {
        let iv = Interval::open(0.0, FRAC_PI_2).unwrap();
        let a = MatrixFn::parse(["2*cot(2*t)", "i", "-3*i", "-2*cot(2*t)"]).unwrap();
        let r = TransformSpec::parse(["cos(t)", "i*sin(t)", "i*sin(t)", "cos(t)"], iv, FRAC_PI_4).unwrap();
        (a, r)
    }

    #[test]
    fn cot_t_diagonal_is_not_jordan() {
        // with 2cot(t) on the diagonal J keeps off-diagonal entries -2i, 2i
        let (_, r) = ex65();
        let a = MatrixFn::parse(["2*cot(t)", "i", "-3*i", "-2*cot(t)"]).unwrap();
        let s = Similarity::new(a, r);
        assert_eq!(s.classify(&samples()).unwrap().form, None);
        let j = s.j(0.7).unwrap();
        assert!((j.0[0][1] - C64::new(0.0, -2.0)).norm() < 1e-12 && (j.0[1][0] - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    fn samples() -> Vec<f64> {
        (1..60).map(|k| FRAC_PI_2 * k as f64 / 60.0).collect()
    }

    #[test]
    fn example_similarity_is_diagonal() {
        let (a, r) = ex65();
        assert!(r.symbolic_derivative());
        let s = Similarity::new(a, r);
        let c = s.classify(&samples()).unwrap();
        assert_eq!(c.form, Some(Form::I));
        for (t, j) in &c.samples {
            let want = 1.0 / (t.sin() * t.cos());
            assert!((j.0[0][0] - want).norm() < 1e-8 * want && (j.0[1][1] + want).norm() < 1e-8 * want, "{t}");
        }
        assert!(s.residual(&samples()).unwrap() < 1e-12);
    }

    #[test]
    fn example_norm_sups() {
        let (_, r) = ex65();
        let p = propagate_constant(1.0, &r, NormKind::Max).unwrap();
        assert!((p.r_sup.value - SQRT_2).abs() < 1e-12, "{:?}", p.r_sup);
        assert!((p.r_inv_sup.value - SQRT_2).abs() < 1e-12);
        assert!((p.factor - 2.0).abs() < 1e-11);
    }

    #[test]
    fn identity_and_diagonal_factors() {
        let iv = Interval::real_line();
        let a = MatrixFn::parse(["t", "1", "0", "-t"]).unwrap();
        let id = TransformSpec::new(MatrixFn::constant(Mat2::identity()), iv, 0.0).unwrap();
        let s = Similarity::new(a.clone(), id);
        for t in [-3.0, 0.5, 7.0] {
            assert!(s.j(t).unwrap().max_abs_diff(&a.eval(t).unwrap()) < 1e-15);
        }
        let d = TransformSpec::new(MatrixFn::constant(Mat2::real(2.0, 0.0, 0.0, 1.0)), iv, 0.0).unwrap();
        assert_eq!(propagate_constant(1.0, &d, NormKind::Max).unwrap().factor, 2.0);
        let th: f64 = 0.7;
        let rot = Mat2::real(th.cos(), -th.sin(), th.sin(), th.cos());
        let o = TransformSpec::new(MatrixFn::constant(rot), iv, 0.0).unwrap();
        assert!((propagate_constant(3.0, &o, NormKind::Euclid).unwrap().constant - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_transform_is_refused() {
        let r = TransformSpec::parse(["exp(t)", "0", "0", "1"], Interval::real_line(), 0.0).unwrap();
        assert!(matches!(propagate_constant(1.0, &r, NormKind::Max), Err(TransformError::Unbounded { .. })));
    }

    #[test]
    fn round_trip_recovers_a() {
        let (a, r) = ex65();
        let s = Similarity::new(a.clone(), r.clone());
        let j = s.clone();
        let back = Similarity {
            a: Arc::new(move |t| j.j(t).map_err(|e| EvalError {
                kind: EvalErrorKind::Domain,
                subtree: e.to_string(),
                t,
            })),
            spec: r.inverse(),
        };
        for t in samples() {
            let want = a.eval(t).unwrap();
            assert!(back.j(t).unwrap().max_abs_diff(&want) < 1e-8 * want.norm(NormKind::Max).max(1.0), "{t}");
        }
    }

    #[test]
    fn numeric_derivative_matches_symbolic() {
        let (_, r) = ex65();
        let num = TransformSpec::from_fns(
            Arc::new(move |t| Ok(Mat2::new(C64::new(t.cos(), 0.0), C64::new(0.0, t.sin()), C64::new(0.0, t.sin()), C64::new(t.cos(), 0.0)))),
            None,
            r.interval,
            r.t0,
            "ex",
        );
        for t in [1e-6, 0.3, 1.0, FRAC_PI_2 - 1e-6] {
            assert!(num.dr(t).unwrap().max_abs_diff(&r.dr(t).unwrap()) < 1e-9, "{t}");
        }
    }

    #[test]
    fn constant_inhomogeneity_reduces() {
        // z = -A^{-1}(1,1) for A = diag(1,-1) solves z' = A z + (1,1)
        let a = |_: f64| Ok(Mat2::real(1.0, 0.0, 0.0, -1.0));
        let f = |_: f64| Ok(Vec2::real(1.0, 1.0));
        let z = Approx::function((f64::NEG_INFINITY, f64::INFINITY), |_| Ok(Vec2::real(-1.0, 1.0)))
            .with_derivative(|_| Ok(Vec2::ZERO));
        let phi = Approx::function((f64::NEG_INFINITY, f64::INFINITY), |t: f64| Ok(Vec2::real(-1.0 + 0.1 * t.sin(), 1.0)));
        let grid: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let red = reduce_inhomogeneous(&a, &f, z, phi, &grid, 1e-9).unwrap();
        let y = red.homogeneous.value(2.0).unwrap();
        assert!((y - Vec2::real(0.1 * 2f64.sin(), 0.0)).norm(NormKind::Max) < 1e-15);
        assert_eq!(red.lift(2.0, Vec2::ZERO).unwrap(), Vec2::real(-1.0, 1.0));
        let bad = Approx::function((f64::NEG_INFINITY, f64::INFINITY), |_| Ok(Vec2::ZERO));
        let phi = Approx::function((f64::NEG_INFINITY, f64::INFINITY), |_| Ok(Vec2::ZERO));
        assert!(matches!(reduce_inhomogeneous(&a, &f, bad, phi, &grid, 1e-9), Err(TransformError::Residual { .. })));
    }
}
