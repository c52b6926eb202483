//! Special functions and quadrature used by the outage analysis.
//!
//! Only what the analysis needs is here: the first-order modified Bessel
//! function of the second kind, the lower incomplete gamma function for
//! integer order, and adaptive Gauss-Kronrod quadrature with a variant that
//! tolerates a logarithmic singularity at the lower endpoint.

mod bessel;
mod gamma;
mod quadrature;

pub use bessel::{bessel_k1, bessel_k1_scaled, x_k1_minus_one};
pub use gamma::{ln_factorial, ln_normalized_lower_gamma, lower_incomplete_gamma};
pub use quadrature::{h_l_integral, integrate, quad_log_endpoint, QuadratureSpec};

/// Euler-Mascheroni constant to double precision.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860;

/// Harmonic number `H_n = 1 + 1/2 + ... + 1/n`, with `H_0 = 0`.
pub fn harmonic(n: u32) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}
