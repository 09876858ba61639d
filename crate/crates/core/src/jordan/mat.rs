use crate::C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Vector norm on C², paired with its induced matrix norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `max(|v1|, |v2|)`; induced norm is the maximum row sum.
    Max,
    /// `sqrt(|v1|² + |v2|²)`; induced norm is the largest singular value.
    Euclid,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Max => "max",
            NormKind::Euclid => "euclid",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for NormKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "max" | "maxnorm" | "inf" | "infinity" => Ok(NormKind::Max),
            "euclid" | "euclidean" | "euclidnorm" | "2" | "l2" => Ok(NormKind::Euclid),
            other => Err(format!("unknown norm `{other}` (expected max or euclid)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2(pub [C64; 2]);

impl Vec2 {
    pub const ZERO: Vec2 = Vec2([C64::new(0.0, 0.0); 2]);

    pub fn new(a: C64, b: C64) -> Self {
        Vec2([a, b])
    }

    pub fn real(a: f64, b: f64) -> Self {
        Vec2([C64::new(a, 0.0), C64::new(b, 0.0)])
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        let (a, b) = (self.0[0].norm(), self.0[1].norm());
        match kind {
            NormKind::Max => a.max(b),
            NormKind::Euclid => a.hypot(b),
        }
    }

    pub fn scale(self, k: C64) -> Vec2 {
        Vec2([self.0[0] * k, self.0[1] * k])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `[re1, im1, re2, im2]`
    pub fn to_reals(self) -> [f64; 4] {
        [self.0[0].re, self.0[0].im, self.0[1].re, self.0[1].im]
    }

    pub fn from_reals(r: [f64; 4]) -> Vec2 {
        Vec2([C64::new(r[0], r[1]), C64::new(r[2], r[3])])
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2([-self.0[0], -self.0[1]])
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2([self.0[0] * k, self.0[1] * k])
    }
}

impl crate::calculus::QuadValue for Vec2 {
    fn magnitude(self) -> f64 {
        self.norm(NormKind::Euclid)
    }
}

/// Row-major complex 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    pub fn real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        let c = |v| C64::new(v, 0.0);
        Mat2::new(c(m11), c(m12), c(m21), c(m22))
    }

    pub fn identity() -> Self {
        Mat2::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn diag(a: C64, b: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2::new(a, z, z, b)
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !(d.re.is_finite() && d.im.is_finite()) {
            return None;
        }
        let m = &self.0;
        Some(Mat2::new(m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d))
    }

    pub fn scale(self, k: C64) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        Vec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    /// Induced operator norm for `kind`.
    pub fn norm(&self, kind: NormKind) -> f64 {
        let m = &self.0;
        match kind {
            NormKind::Max => (m[0][0].norm() + m[0][1].norm()).max(m[1][0].norm() + m[1][1].norm()),
            NormKind::Euclid => {
                // largest eigenvalue of the Hermitian M^H M
                let p = m[0][0].norm_sqr() + m[1][0].norm_sqr();
                let r = m[0][1].norm_sqr() + m[1][1].norm_sqr();
                let q = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
                let half = 0.5 * (p - r);
                (0.5 * (p + r) + half.hypot(q.norm())).max(0.0).sqrt()
            }
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Mat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, k: f64) -> Mat2 {
        self.scale(C64::new(k, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_norms() {
        let v = Vec2::real(1.0, -1.0);
        assert_eq!(v.norm(NormKind::Max), 1.0);
        assert!((v.norm(NormKind::Euclid) - 2f64.sqrt()).abs() < 1e-15);
        let w = Vec2::new(C64::new(3.0, 4.0), C64::new(0.0, 0.0));
        assert_eq!(w.norm(NormKind::Max), 5.0);
        assert_eq!(w.norm(NormKind::Euclid), 5.0);
    }

    #[test]
    fn induced_norms() {
        let d = Mat2::real(2.0, 0.0, 0.0, 1.0);
        assert_eq!(d.norm(NormKind::Max), 2.0);
        assert!((d.norm(NormKind::Euclid) - 2.0).abs() < 1e-15);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = Mat2::real(c, s, -s, c);
        assert!((rot.norm(NormKind::Euclid) - 1.0).abs() < 1e-15);
        assert!((rot.norm(NormKind::Max) - (c + s)).abs() < 1e-15);
        // singular values of [[1,2],[3,4]]: 5.4649857042190426...
        let m = Mat2::real(1.0, 2.0, 3.0, 4.0);
        assert!((m.norm(NormKind::Euclid) - 5.464985704219043).abs() < 1e-13);
    }

    #[test]
    fn inverse_round_trip() {
        let m = Mat2::new(C64::new(1.0, 2.0), C64::new(0.5, 0.0), C64::new(0.0, -1.0), C64::new(3.0, 0.1));
        let p = m * m.inverse().unwrap();
        assert!(p.max_abs_diff(&Mat2::identity()) < 1e-15);
        assert!(Mat2::real(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }
}
