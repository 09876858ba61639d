mod common;

use common::{approximate, parse, wave_forcing, VecFn};
use proptest::prelude::*;
use std::sync::Arc;
use ulamkit::calculus::{ImproperOptions, Interval};
use ulamkit::jordan::{Form, JordanSystem, NormKind, Prepared, Vec2};
use ulamkit::kappa::{best_constant, native_norm, Direction, SupOptions};
use ulamkit::registry::case_system;
use ulamkit::shadow::{anchor, deviation, shadow_solution, uniqueness_probe, Growth, ShadowOptions};
use ulamkit::C64;

fn vec2() -> impl Strategy<Value = Vec2> {
    let x = || -1.0f64..1.0;
    (x(), x(), x(), x()).prop_map(|(a, b, c, d)| Vec2::new(C64::new(a, b), C64::new(c, d)))
}

/// Amplitudes, frequencies and phases of a [`wave_forcing`].
#[derive(Clone, Copy, Debug)]
struct Wave([f64; 2], [f64; 2], [f64; 2]);

impl Wave {
    fn forcing(self, form: Form, eps: f64) -> VecFn {
        wave_forcing(form, eps, self.0, self.1, self.2)
    }
}

fn wave() -> impl Strategy<Value = Wave> {
    let pair = |r: std::ops::Range<f64>| [r.clone(), r];
    (pair(0.0..1.0), pair(0.2..3.0), pair(0.0..6.3)).prop_map(|(r, w, ph)| Wave(r, w, ph))
}

/// Form III solutions are real.
fn fit(form: Form, c: Vec2) -> Vec2 {
    if form == Form::III { Vec2::real(c.0[0].re, c.0[1].re) } else { c }
}

fn case(id: &str) -> (Arc<Prepared>, Direction) {
    let dir = match id {
        "ex6.1" | "ex6.7" => Direction::Hyperbolic,
        "ex6.6" | "ex6.8" | "ex6.9" => Direction::Backward,
        _ => Direction::Forward,
    };
    (Arc::new(Prepared::new(case_system(id).unwrap()).unwrap()), dir)
}

fn diff(a: Vec2, b: Vec2) -> f64 {
    (a - b).norm(NormKind::Max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// `φ + X c` is anchored at `anchor(φ) + c`; the zero-anchor response
    /// makes `anchor(φ)` itself equal to the chosen offset.
    #[test]
    fn anchors_are_affine(
        id in prop::sample::select(vec!["ex6.1", "ex6.2", "ex6.4", "ex6.6"]),
        w in wave(),
        c1 in vec2(),
        c2 in vec2(),
    ) {
        let (p, dir) = case(id);
        let (c1, c2) = (fit(p.form(), c1), fit(p.form(), c2));
        let opts = ShadowOptions::default();
        let f = w.forcing(p.form(), 0.2);
        let a1 = anchor(&approximate(&p, dir, f.clone(), c1), &p, dir, &opts).unwrap();
        let a2 = anchor(&approximate(&p, dir, f, c1 + c2), &p, dir, &opts).unwrap();
        prop_assert!(a1.converged && a2.converged);
        prop_assert!(diff(a1.value, c1) <= 1e-6, "{id}: {:?} vs {c1:?}", a1.value);
        prop_assert!(diff(a2.value - a1.value, c2) <= 1e-6, "{id}");
    }
}

/// `σ (c0 + c2 (t - s)²)`: a rate bounded away from zero on the line.
fn bowl(sign: f64) -> impl Strategy<Value = String> {
    (0.5f64..2.0, 0.0f64..0.25, -1.0f64..1.0).prop_map(move |(c0, c2, s)| format!("({sign})*(({c0}) + ({c2})*(t - ({s}))^2)"))
}

fn bounded() -> impl Strategy<Value = String> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(b0, b1, s)| format!("(({b0}) + ({b1})*(t - ({s}))/(1 + (t - ({s}))^2))"))
}

fn random_system() -> impl Strategy<Value = (JordanSystem, Direction)> {
    let iv = Interval::real_line();
    prop_oneof![
        (bowl(1.0), bowl(-1.0), bounded(), bounded()).prop_map(move |(l1, l2, b1, b2)| {
            let sys = JordanSystem::diagonal(parse(&format!("{l1} + i*{b1}")), parse(&format!("{l2} + i*{b2}")), iv, 0.0);
            (sys.unwrap(), Direction::Hyperbolic)
        }),
        (bowl(-1.0), bounded(), bounded()).prop_map(move |(l, b, mu)| {
            let sys = JordanSystem::shear(parse(&format!("{l} + i*{b}")), parse(&mu), iv, 0.0);
            (sys.unwrap(), Direction::Backward)
        }),
        (bowl(1.0), bounded()).prop_map(move |(a, b)| {
            (JordanSystem::rotation(parse(&a), parse(&b), iv, 0.0).unwrap(), Direction::Forward)
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(9))]

    #[test]
    fn shadows_stay_within_k_eps(
        (sys, dir) in random_system(),
        eps in 0.01f64..0.5,
        w in wave(),
        c in vec2(),
    ) {
        let form = sys.form();
        let c = fit(form, c);
        let p = Arc::new(Prepared::new(sys).unwrap());
        let norm = native_norm(form);
        let k = best_constant(&p, dir, norm, &SupOptions::default()).unwrap().k;
        let phi = approximate(&p, dir, w.forcing(form, eps), c);
        let a = anchor(&phi, &p, dir, &ShadowOptions::default()).unwrap();
        prop_assert!(diff(a.value, c) <= 1e-6);
        let grid: Vec<f64> = (0..=40).map(|j| -4.0 + 0.2 * j as f64).collect();
        let x = shadow_solution(a.value, &p, &grid).unwrap();
        let (sup, _) = deviation(&phi, &x, &grid, norm).unwrap();
        prop_assert!(sup <= 1.01 * k * eps, "{sup} > K eps = {}", k * eps);
    }
}

/// Shifting the anchor by `δ` moves the candidate off by `X(t)δ`, which
/// leaves the `2Kε` tube within the horizon whenever the probe diverges.
/// The horizon stays where `X(t)` times the anchor error is far below `ε`.
#[test]
fn other_anchors_leave_the_tube() {
    let eps = 0.2;
    let deltas = [
        Vec2::real(1e-4, 0.0),
        Vec2::real(0.0, -1e-4),
        Vec2::new(C64::new(0.3, -0.2), C64::new(0.0, 0.5)),
        Vec2::real(-1.0, 1.0),
    ];
    for id in ["ex6.7", "ex6.8", "ex6.9"] {
        let (p, dir) = case(id);
        let form = p.form();
        let norm = native_norm(form);
        let k = best_constant(&p, dir, norm, &SupOptions::default()).unwrap().k;
        let phi = approximate(&p, dir, Wave([1.0, 0.8], [0.7, 1.9], [0.0, 1.0]).forcing(form, eps), Vec2::real(0.5, -0.5));
        let a = anchor(&phi, &p, dir, &ShadowOptions::default()).unwrap().value;
        let grid: Vec<f64> = (0..=300).map(|j| -15.0 + 0.1 * j as f64).collect();
        let shadow = shadow_solution(a, &p, &grid).unwrap();
        let (inside, _) = deviation(&phi, &shadow, &grid, norm).unwrap();
        assert!(inside <= 1.01 * k * eps, "{id}: {inside}");
        for d in deltas {
            let d = fit(form, d);
            let curves = uniqueness_probe(&p, dir, d, 4.0 * k * eps, norm, &ImproperOptions::default());
            assert!(curves.iter().any(|c| c.verdict == Growth::Diverges), "{id} {d:?}");
            let other = shadow_solution(a + d, &p, &grid).unwrap();
            let (outside, _) = deviation(&phi, &other, &grid, norm).unwrap();
            assert!(outside > 2.0 * k * eps, "{id} {d:?}: {outside}");
        }
    }
}
