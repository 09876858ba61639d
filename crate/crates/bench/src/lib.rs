//! Fixtures shared by the benchmarks.

use ulamkit::calculus::Interval;
use ulamkit::jordan::{JordanSystem, Prepared};
use ulamkit::kappa::Direction;
use ulamkit::registry::case_system;
use ulamkit::scalar::ScalarFn;

/// Registered systems with the direction their constant is computed for.
pub fn cases() -> Vec<(&'static str, JordanSystem, Direction)> {
    [("ex6.1", Direction::Hyperbolic), ("ex6.2", Direction::Forward), ("ex6.4", Direction::Forward)]
        .into_iter()
        .map(|(id, dir)| (id, case_system(id).expect("registered"), dir))
        .collect()
}

/// A rotation system whose rate oscillates, the slow case for grid builds.
pub fn oscillating() -> JordanSystem {
    let alpha = ScalarFn::parse("2 + sin(3*t) + 0.5*cos(t)").expect("parses");
    let beta = ScalarFn::parse("t").expect("parses");
    JordanSystem::rotation(alpha, beta, Interval::real_line(), 0.0).expect("well-formed")
}

pub fn prepared(sys: &JordanSystem) -> Prepared {
    Prepared::new(sys.clone()).expect("grids build")
}
