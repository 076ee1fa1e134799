//! Special functions backing the analytic NMSE expressions: incomplete gamma
//! functions generalized to non-positive order, modified Bessel functions of
//! the second kind, and the combinatorial coefficients of the truncated
//! Bessel expansion.

mod bessel;
mod coeffs;
mod gamma;

pub use bessel::{bessel_k_ref, bessel_k_series};
pub use coeffs::{g_coeff, lah, psi_coeff, SeriesTruncation};
pub use gamma::{exp_integral_e1, factorial, gamma, gamma_lower, gamma_upper, ln_gamma};

pub(crate) use gamma::pochhammer;
