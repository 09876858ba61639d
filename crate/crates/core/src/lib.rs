pub mod calculus;
pub mod expr;
pub mod extremal;
pub mod jordan;
pub mod kappa;
pub mod ode;
pub mod registry;
pub mod scalar;
pub mod shadow;
pub mod special;
pub mod transform;

pub type C64 = num_complex::Complex64;
