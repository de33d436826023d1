//! Special functions, semi-infinite quadrature and bisection.

mod bisection;
mod quadrature;
pub(crate) mod special;

pub use bisection::{bisect, BisectionOptions};
pub use quadrature::{integrate_finite, integrate_semi_infinite, Integral, QuadratureOptions, TailPolicy};
pub use special::{beta, gamma, incomplete_beta, ln_gamma, lower_incomplete_gamma};
