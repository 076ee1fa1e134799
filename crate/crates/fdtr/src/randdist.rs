//! Distributions of the effective gain: the gamma law of the matched-sum
//! power at the intended position and the law of the magnitude of a sum of
//! products of independent complex Gaussians at an unintended position,
//! together with samplers and goodness-of-fit helpers.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::specfun::{bessel_k_ref, factorial, gamma};

/// Parameters of the product-sum magnitude law: the number of summed
/// products and the scales of the two complex Gaussian factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductSumParams {
    pub m: u32,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl ProductSumParams {
    pub fn new(m: u32, sigma1: f64, sigma2: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("product-sum law requires m >= 1".into()));
        }
        if !(sigma1 > 0.0) || !(sigma2 > 0.0) || !sigma1.is_finite() || !sigma2.is_finite() {
            return Err(Error::Domain(format!(
                "product-sum law requires positive finite scales, got ({sigma1}, {sigma2})"
            )));
        }
        Ok(Self { m, sigma1, sigma2 })
    }

    fn scale(&self) -> f64 {
        self.sigma1 * self.sigma2
    }
}

/// Density of a sum of `m` unit-mean exponential powers, the gamma law with
/// shape `m` and unit scale that the matched gain power follows at the
/// intended position.
pub fn pdf_gamma_sum(m: u32, z: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("pdf_gamma_sum requires m >= 1".into()));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!(
            "pdf_gamma_sum requires z >= 0, got z = {z}"
        )));
    }
    if z == 0.0 {
        return Ok(if m == 1 { 1.0 } else { 0.0 });
    }
    Ok(((m as f64 - 1.0) * z.ln() - z).exp() / factorial(m - 1))
}

/// Density of r = |sum_{i=1}^{m} X_i Y_i| with X_i, Y_i independent
/// circularly symmetric complex Gaussians of scales sigma1, sigma2:
///
///   f(r) = 4 r^m / (Gamma(m) (sigma1 sigma2)^{m+1}) K_{m-1}(2 r / (sigma1 sigma2)).
///
/// At r = 0 the m = 1 case multiplies a vanishing power by the logarithmic
/// blow-up of K_0 and is reported as a singularity; for m >= 2 the limit is
/// zero and is returned directly.
pub fn pdf_abs_product_sum(params: &ProductSumParams, r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "pdf_abs_product_sum requires r >= 0, got r = {r}"
        )));
    }
    if r == 0.0 {
        if params.m == 1 {
            return Err(Error::Singularity(
                "pdf_abs_product_sum is indeterminate at r = 0 for m = 1; the density's limit there is 0".into(),
            ));
        }
        return Ok(0.0);
    }
    let s = params.scale();
    let m = params.m;
    let k = bessel_k_ref(m - 1, 2.0 * r / s)?;
    Ok(4.0 * r.powi(m as i32) / (gamma(m as f64) * s.powi(m as i32 + 1)) * k)
}

fn pdf_at(params: &ProductSumParams, r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        pdf_abs_product_sum(params, r).unwrap_or(0.0)
    }
}

/// One draw of the complex product sum Z = sum X_i Y_i.
pub fn sample_product_sum_z<R: Rng + ?Sized>(params: &ProductSumParams, rng: &mut R) -> Complex64 {
    let s1 = params.sigma1 / std::f64::consts::SQRT_2;
    let s2 = params.sigma2 / std::f64::consts::SQRT_2;
    let mut z = Complex64::new(0.0, 0.0);
    for _ in 0..params.m {
        let xr: f64 = rng.sample(StandardNormal);
        let xi: f64 = rng.sample(StandardNormal);
        let yr: f64 = rng.sample(StandardNormal);
        let yi: f64 = rng.sample(StandardNormal);
        let x = Complex64::new(s1 * xr, s1 * xi);
        let y = Complex64::new(s2 * yr, s2 * yi);
        z += x * y;
    }
    z
}

/// One draw of the magnitude r = |Z|.
pub fn sample_product_sum<R: Rng + ?Sized>(params: &ProductSumParams, rng: &mut R) -> f64 {
    sample_product_sum_z(params, rng).norm()
}

/// Joint characteristic function of (Re Z, Im Z) at frequency `omega`; by
/// circular symmetry it is real:
///
///   cf(w1, w2) = (1 + sigma1^2 sigma2^2 (w1^2 + w2^2) / 4)^{-m}.
pub fn cf_analytic(params: &ProductSumParams, omega: (f64, f64)) -> f64 {
    let s2 = params.scale() * params.scale();
    (1.0 + s2 * (omega.0 * omega.0 + omega.1 * omega.1) / 4.0).powi(-(params.m as i32))
}

/// Empirical characteristic function from `n` seeded draws next to its
/// analytic value, returned as a (empirical, analytic) pair. Requires
/// n >= 10^4 so the comparison has meaningful resolution.
pub fn empirical_cf_check(
    params: &ProductSumParams,
    omega: (f64, f64),
    n: usize,
    seed: u64,
) -> Result<(Complex64, Complex64)> {
    if n < 10_000 {
        return Err(Error::Config(format!(
            "empirical_cf_check requires n >= 10000, got n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let z = sample_product_sum_z(params, &mut rng);
        let phase = omega.0 * z.re + omega.1 * z.im;
        acc += Complex64::new(phase.cos(), phase.sin());
    }
    let empirical = acc / n as f64;
    let analytic = Complex64::new(cf_analytic(params, omega), 0.0);
    Ok((empirical, analytic))
}

/// Tabulated CDF of the product-sum magnitude, built once by quadrature of
/// the density and then evaluated by interpolation; the grid reaches far
/// enough into the exponential tail that the truncated mass is negligible.
#[derive(Debug, Clone)]
pub struct ProductSumCdf {
    step: f64,
    cum: Vec<f64>,
}

impl ProductSumCdf {
    pub fn build(params: &ProductSumParams, panels: usize) -> Result<Self> {
        if panels < 16 {
            return Err(Error::Config(format!(
                "cdf table needs at least 16 panels, got {panels}"
            )));
        }
        let r_max = params.scale() * (0.5 * params.m as f64 + 45.0);
        let step = r_max / panels as f64;
        let mut cum = Vec::with_capacity(panels + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        let mut comp = 0.0;
        let mut f_lo = pdf_at(params, 0.0);
        for i in 0..panels {
            let lo = i as f64 * step;
            let hi = lo + step;
            let f_mid = pdf_at(params, 0.5 * (lo + hi));
            let f_hi = pdf_at(params, hi);
            let mass = step / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
            let y = mass - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            cum.push(acc);
            f_lo = f_hi;
        }
        Ok(Self { step, cum })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let pos = r / self.step;
        let idx = pos as usize;
        if idx + 1 >= self.cum.len() {
            return 1.0_f64.min(*self.cum.last().unwrap());
        }
        let frac = pos - idx as f64;
        (self.cum[idx] + frac * (self.cum[idx + 1] - self.cum[idx])).min(1.0)
    }
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against a tabulated
/// CDF. Sorts the slice in place.
pub fn ks_statistic(samples: &mut [f64], cdf: &ProductSumCdf) -> f64 {
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf.eval(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}
