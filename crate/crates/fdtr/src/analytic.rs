//! Analytic NMSE of the precoded link: exact semi-infinite integrals over
//! the gain distributions, closed-form evaluations built from incomplete
//! gamma functions and the truncated Bessel expansion, and high- and low-SNR
//! asymptotes. Each path is independent of the simulation code so the test
//! suite can hold them against each other.

use crate::error::{Error, Result};
use crate::quad::integrate_semi_infinite;
use crate::randdist::{pdf_abs_product_sum, pdf_gamma_sum, ProductSumParams};
use crate::specfun::{
    factorial, g_coeff, gamma, gamma_lower, gamma_upper, lah, pochhammer, SeriesTruncation,
};

/// Operating point of the closed-form expressions: linear SNR, back-off
/// factor, antenna count, and the truncation depth of the Bessel expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormParams {
    pub gamma: f64,
    pub u: u32,
    pub n_t: u32,
    pub trunc: SeriesTruncation,
}

impl ClosedFormParams {
    pub fn new(gamma: f64, u: u32, n_t: u32, trunc: SeriesTruncation) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "linear SNR must be positive and finite, got {gamma}"
            )));
        }
        if u == 0 || n_t == 0 {
            return Err(Error::Domain(format!(
                "back-off factor and antenna count must be >= 1, got ({u}, {n_t})"
            )));
        }
        Ok(Self {
            gamma,
            u,
            n_t,
            trunc,
        })
    }

    pub fn from_snr_db(snr_db: f64, u: u32, n_t: u32) -> Result<Self> {
        Self::new(
            10f64.powf(snr_db / 10.0),
            u,
            n_t,
            SeriesTruncation::default(),
        )
    }

    /// Diversity order U * N_T.
    pub fn m(&self) -> u32 {
        self.u * self.n_t
    }
}

fn ascending_breaks(candidates: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = candidates
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > 0.0)
        .collect();
    v.push(0.0);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    v
}

/// Mean NMSE at the intended position by quadrature of the exact integral:
/// the MMSE kernel gamma^-1 / (z^2 / U^2 + gamma^-1) averaged over the
/// gamma-distributed matched gain z.
pub fn nmse_intended_integral(params: &ClosedFormParams) -> Result<f64> {
    let m = params.m();
    let inv_g = 1.0 / params.gamma;
    let u2 = (params.u * params.u) as f64;
    let z0 = params.u as f64 * inv_g.sqrt();
    let mf = m as f64;
    let f = move |z: f64| {
        pdf_gamma_sum(m, z).unwrap() * inv_g / (z * z / u2 + inv_g)
    };
    let breaks = ascending_breaks(&[
        0.5 * z0,
        z0,
        2.0 * z0,
        0.5 * mf,
        mf,
        mf + 10.0,
    ]);
    Ok(integrate_semi_infinite(&f, &breaks, 1e-8))
}

/// Mean NMSE at the intended position in closed form: the kernel is
/// expanded geometrically on both sides of the knee z0 = U gamma^-1/2 and
/// integrated term by term against the gamma weight, leaving lower and
/// upper incomplete gamma functions evaluated at t0 = U gamma^-1/2.
pub fn nmse_intended_closed(params: &ClosedFormParams) -> Result<f64> {
    let m = params.m() as f64;
    let g = params.gamma;
    let u2 = (params.u * params.u) as f64;
    let t0 = params.u as f64 / g.sqrt();
    let s = gamma_lower(m, t0)?
        - g / u2 * gamma_lower(m + 2.0, t0)?
        + g * g / (u2 * u2) * gamma_lower(m + 4.0, t0)?
        + u2 / g * gamma_upper(m - 2.0, t0)?
        - u2 * u2 / (g * g) * gamma_upper(m - 4.0, t0)?;
    Ok(s / factorial(params.m() - 1))
}

/// Mean NMSE at an unintended position by quadrature: the MMSE kernel
/// averaged over the product-sum magnitude law of the mismatched gain.
pub fn nmse_unintended_integral(params: &ClosedFormParams) -> Result<f64> {
    let m = params.m();
    let inv_g = 1.0 / params.gamma;
    let u2 = (params.u * params.u) as f64;
    let z0 = params.u as f64 * inv_g.sqrt();
    let mf = m as f64;
    let law = ProductSumParams::new(m, 1.0, 1.0)?;
    let f = move |r: f64| {
        if r == 0.0 {
            0.0
        } else {
            pdf_abs_product_sum(&law, r).unwrap() * inv_g / (r * r / u2 + inv_g)
        }
    };
    let breaks = ascending_breaks(&[
        0.1,
        1.0,
        0.5 * z0,
        z0,
        2.0 * z0,
        0.5 * mf + 2.0,
        mf + 10.0,
    ]);
    Ok(integrate_semi_infinite(&f, &breaks, 1e-7))
}

/// Mean NMSE at an unintended position in closed form: the Bessel density
/// is replaced by its truncated exponential expansion and the kernel by its
/// two-sided geometric expansion, integrated term by term at
/// t1 = 2 U gamma^-1/2.
///
/// The single-product case m = 1 goes through the order-zero branch of the
/// expansion, whose q = 0 column is structurally zero and is skipped: its
/// coefficient vanishes identically while its integral diverges, so the
/// term is the limit 0 and never evaluated.
pub fn nmse_unintended_closed(params: &ClosedFormParams) -> Result<f64> {
    let m = params.m();
    let g = params.gamma;
    let u2 = (params.u * params.u) as f64;
    let t1 = 2.0 * params.u as f64 / g.sqrt();
    let d = params.trunc.d;
    let mf = m as f64;
    let mut total = 0.0;
    if m > 1 {
        let two = 2f64;
        for q in 0..=d {
            let gq = g_coeff(m, q, params.trunc)?;
            let qf = q as f64;
            let bracket = two.powf(-(mf - 1.0)) * gamma_lower(qf + 2.0, t1)?
                - g / u2 * two.powf(-(mf + 1.0)) * gamma_lower(qf + 4.0, t1)?
                + g * g / (u2 * u2) * two.powf(-(mf + 3.0)) * gamma_lower(qf + 6.0, t1)?
                + u2 / g * two.powf(-(mf - 3.0)) * gamma_upper(qf, t1)?
                - u2 * u2 / (g * g) * two.powf(-(mf - 5.0)) * gamma_upper(qf - 2.0, t1)?;
            total += gq * bracket;
        }
        return Ok(total / factorial(m - 1));
    }
    for q in 1..=d {
        let gq = g_coeff(1, q, params.trunc)?;
        let qf = q as f64;
        let bracket = gamma_lower(qf, t1)?
            - g / (4.0 * u2) * gamma_lower(qf + 2.0, t1)?
            + g * g / (16.0 * u2 * u2) * gamma_lower(qf + 4.0, t1)?
            + 4.0 * u2 / g * gamma_upper(qf - 2.0, t1)?
            - 16.0 * u2 * u2 / (g * g) * gamma_upper(qf - 4.0, t1)?;
        total += gq * bracket;
    }
    Ok(total)
}

/// High-SNR asymptote of the intended NMSE,
/// gamma^-1 / ((N_T - 1/U)(N_T - 2/U)); requires diversity order above two
/// so both pole factors are positive.
pub fn asym_intended_high(params: &ClosedFormParams) -> Result<f64> {
    if params.m() <= 2 {
        return Err(Error::Domain(format!(
            "high-SNR intended asymptote needs U * N_T > 2, got {}",
            params.m()
        )));
    }
    let u = params.u as f64;
    let nt = params.n_t as f64;
    Ok(1.0 / params.gamma / ((nt - 1.0 / u) * (nt - 2.0 / u)))
}

/// Low-SNR asymptote of the intended NMSE,
/// 1 - e^{-t0} sum_{k=1}^{M} t0^{M-k} / (M-k)! with t0 = U gamma^-1/2,
/// which is exactly the regularized lower incomplete gamma at t0.
pub fn asym_intended_low(params: &ClosedFormParams) -> Result<f64> {
    let m = params.m();
    let t0 = params.u as f64 / params.gamma.sqrt();
    let mut sum = 0.0;
    for k in 1..=m {
        sum += t0.powi((m - k) as i32) / factorial(m - k);
    }
    Ok(1.0 - (-t0).exp() * sum)
}

/// High-SNR asymptote of the unintended NMSE: exactly linear in gamma^-1
/// with a coefficient depending only on the diversity order through a
/// truncated double sum. Requires diversity order above one.
pub fn asym_unintended_high(params: &ClosedFormParams) -> Result<f64> {
    let m = params.m();
    if m <= 1 {
        return Err(Error::Domain(format!(
            "high-SNR unintended asymptote needs U * N_T > 1, got {m}"
        )));
    }
    let mf = m as f64;
    let d = params.trunc.d;
    let mut total = 0.0;
    for q in 1..=d {
        for l in q..=d {
            let num = (-2f64).powi(q as i32)
                * lah(l, q)? as f64
                * gamma(q as f64)
                * pochhammer(1.5 - mf, l);
            let den = factorial(l) * pochhammer(mf - 0.5, l);
            total += num / den;
        }
    }
    Ok(2.0 / params.gamma * (params.u * params.u) as f64 / (mf - 1.0) * total)
}

/// Refinement of the high-SNR unintended asymptote that starts the column
/// sum at q = 0 and keeps the upper incomplete gamma at t1 in place of its
/// limit, so it stays accurate down to moderate SNR.
pub fn asym_unintended_high_refined(params: &ClosedFormParams) -> Result<f64> {
    let m = params.m();
    if m <= 1 {
        return Err(Error::Domain(format!(
            "high-SNR unintended asymptote needs U * N_T > 1, got {m}"
        )));
    }
    let mf = m as f64;
    let d = params.trunc.d;
    let t1 = 2.0 * params.u as f64 / params.gamma.sqrt();
    let mut total = 0.0;
    for q in 0..=d {
        for l in q..=d {
            let lah_lq = lah(l, q)?;
            if lah_lq == 0 {
                continue;
            }
            let num = (-2f64).powi(q as i32)
                * lah_lq as f64
                * gamma_upper(q as f64, t1)?
                * pochhammer(1.5 - mf, l);
            let den = factorial(l) * pochhammer(mf - 0.5, l);
            total += num / den;
        }
    }
    Ok(2.0 / params.gamma * (params.u * params.u) as f64 / (mf - 1.0) * total)
}
