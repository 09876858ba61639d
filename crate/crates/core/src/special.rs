//! Error function and its complement on the real line.

/// `erf(x)`, relative accuracy near one ulp across the real line.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// `erfc(x) = 1 - erf(x)` without cancellation for large `x`.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Maclaurin series, fine for |x| <= 2 in double precision.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    // Continued fraction erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    fn erfc_cf(x: f64) -> f64 {
        let mut f = x;
        for k in (1..400).rev() {
            f = x + (k as f64 / 2.0) / f;
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }

    #[test]
    fn matches_series_and_continued_fraction() {
        for k in 0..=40 {
            let x = -2.0 + 0.1 * k as f64;
            let want = erf_series(x);
            assert!((erf(x) - want).abs() <= 1e-14 * want.abs().max(1e-300) + 1e-16, "{x}");
        }
        for k in 0..=30 {
            let x = 3.0 + 0.5 * k as f64;
            let want = erfc_cf(x);
            assert!(((erfc(x) - want) / want).abs() <= 1e-14, "{x}");
        }
    }

    #[test]
    fn erfc_half() {
        let oracle = 1.0 - erf_series(0.5);
        assert!((oracle - 0.4795001221869535).abs() < 1e-15);
        assert!((erfc(0.5) - 0.4795001221869535).abs() <= 1e-15);
    }
}
