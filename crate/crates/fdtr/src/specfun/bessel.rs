//! Modified Bessel function of the second kind: a quadrature reference for
//! integer order, and the finite exponential-times-polynomial expansion used
//! by the closed-form NMSE expressions.

use crate::error::{Error, Result};
use crate::quad::integrate;

use super::coeffs::{psi_coeff, SeriesTruncation};

fn ln_cosh(y: f64) -> f64 {
    let y = y.abs();
    if y > 20.0 {
        y - std::f64::consts::LN_2 + (-2.0 * y).exp().ln_1p()
    } else {
        y.cosh().ln()
    }
}

/// Reference K_m(x) for integer order via the integral representation
/// int_0^inf exp(-x cosh t) cosh(m t) dt, evaluated in log scale so that
/// both huge (small x, large m) and tiny (large x) values stay accurate.
pub fn bessel_k_ref(m: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_k_ref requires x > 0, got x = {x}"
        )));
    }
    let mf = m as f64;
    let g = |t: f64| -x * t.cosh() + ln_cosh(mf * t);
    let t_peak = (mf / x).asinh();
    let g_max = g(t_peak);
    let mut upper = t_peak + 1.0;
    let mut guard = 0;
    while g(upper) > g_max - 55.0 {
        upper += 1.0;
        guard += 1;
        if guard > 2_000 {
            return Err(Error::Domain(format!(
                "bessel_k_ref integrand tail does not decay for m = {m}, x = {x}"
            )));
        }
    }
    let scaled = |t: f64| (g(t) - g_max).exp();
    let integral = integrate(&scaled, 0.0, upper, 1e-11);
    Ok(g_max.exp() * integral)
}

/// Truncated expansion K_m(x) ~ sum_{q=0}^{d} sum_{l=q}^{d} psi(m, l, q)
/// e^{-x} x^{q-m} for m >= 1; order zero goes through the two-step
/// recurrence K_0 = K_2 - (2/x) K_1 applied to the same expansion.
pub fn bessel_k_series(m: u32, x: f64, trunc: SeriesTruncation) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_k_series requires x > 0, got x = {x}"
        )));
    }
    if m == 0 {
        let k2 = bessel_k_series(2, x, trunc)?;
        let k1 = bessel_k_series(1, x, trunc)?;
        return Ok(k2 - (2.0 / x) * k1);
    }
    let mf = m as f64;
    let emx = (-x).exp();
    let mut sum = 0.0;
    for q in 0..=trunc.d {
        let mut column = 0.0;
        for l in q..=trunc.d {
            column += psi_coeff(m, l, q)?;
        }
        sum += column * emx * x.powf(q as f64 - mf);
    }
    Ok(sum)
}
