//! Gamma-family kernels: log-gamma, the incomplete gamma pair, and the
//! generalization of the upper incomplete gamma to non-positive first
//! argument required by the closed-form NMSE expressions.

use crate::error::{Error, Result};

const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for strictly positive argument.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_TWO_PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for strictly positive argument.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Exact-in-f64 factorial by integer product; n! for n up to 170.
pub fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Pochhammer product x(x+1)...(x+l-1) with its sign, as a plain value.
pub(crate) fn pochhammer(x: f64, l: u32) -> f64 {
    (0..l).map(|j| x + j as f64).product()
}

/// Pochhammer product split into (ln of magnitude, sign) for use inside
/// log-space coefficient assembly. The product never crosses zero for the
/// half-integer arguments used by the series coefficients.
pub(crate) fn pochhammer_ln(x: f64, l: u32) -> (f64, f64) {
    let mut ln_abs = 0.0;
    let mut sign = 1.0;
    for j in 0..l {
        let f = x + j as f64;
        if f < 0.0 {
            sign = -sign;
        }
        ln_abs += f.abs().ln();
    }
    (ln_abs, sign)
}

/// Lower incomplete gamma via its ascending series; valid for t < a + 1.
fn lower_series(a: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while term.abs() > sum.abs() * 1e-17 {
        term *= t / (a + n);
        sum += term;
        n += 1.0;
        if n > 10_000.0 {
            break;
        }
    }
    (a * t.ln() - t).exp() * sum
}

/// Upper incomplete gamma via the Lentz continued fraction; valid for any
/// real a when t > 0, efficient and stable for t >= 1 or t >= a + 1.
fn upper_cf(a: f64, t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = t + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / if b.abs() < TINY { TINY } else { b };
    let mut h = d;
    for i in 1..200_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (a * t.ln() - t).exp() * h
}

/// Lower incomplete gamma, integral of x^{a-1} e^{-x} on [0, t].
///
/// Requires a > 0 (the integral diverges at the origin otherwise).
pub fn gamma_lower(a: f64, t: f64) -> Result<f64> {
    if !a.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!(
            "gamma_lower requires finite arguments, got a = {a}, t = {t}"
        )));
    }
    if a <= 0.0 {
        return Err(Error::Domain(format!(
            "gamma_lower requires a > 0, got a = {a}"
        )));
    }
    if t < 0.0 {
        return Err(Error::Domain(format!(
            "gamma_lower requires t >= 0, got t = {t}"
        )));
    }
    if t < a + 1.0 {
        Ok(lower_series(a, t))
    } else {
        Ok(gamma(a) - upper_cf(a, t))
    }
}

/// Upper incomplete gamma, integral of x^{a-1} e^{-x} on [t, inf), for any
/// real a as long as t > 0; at t = 0 only a > 0 is accepted (the value is
/// the complete gamma function there).
///
/// Non-positive a uses two regimes: for t >= 1 the continued fraction is
/// evaluated directly, because stepping the downward recurrence
/// (gamma_upper(a+1,t) - t^a e^{-t}) / a subtracts nearly equal quantities
/// when t is large relative to |a| and loses a factor of roughly t/|a| in
/// precision per step; for t < 1 that recurrence is well conditioned and is
/// applied from an anchor at a = 0 (the exponential integral) for integer a,
/// or at the fractional part of a otherwise.
pub fn gamma_upper(a: f64, t: f64) -> Result<f64> {
    if !a.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!(
            "gamma_upper requires finite arguments, got a = {a}, t = {t}"
        )));
    }
    if t < 0.0 {
        return Err(Error::Domain(format!(
            "gamma_upper requires t >= 0, got t = {t}"
        )));
    }
    if t == 0.0 {
        if a > 0.0 {
            return Ok(gamma(a));
        }
        return Err(Error::Domain(format!(
            "gamma_upper diverges at t = 0 for a <= 0, got a = {a}"
        )));
    }
    if a > 0.0 {
        if t < a + 1.0 {
            Ok(gamma(a) - lower_series(a, t))
        } else {
            Ok(upper_cf(a, t))
        }
    } else if a == 0.0 {
        exp_integral_e1(t)
    } else if t >= 1.0 {
        Ok(upper_cf(a, t))
    } else {
        let is_integer = a == a.trunc();
        let anchor_a = if is_integer { 0.0 } else { a - a.floor() };
        let mut g = if is_integer {
            exp_integral_e1(t)?
        } else {
            gamma(anchor_a) - lower_series(anchor_a, t)
        };
        let emt = (-t).exp();
        let mut b = anchor_a;
        while b > a + 0.5 {
            let bm = b - 1.0;
            g = (g - t.powf(bm) * emt) / bm;
            b = bm;
        }
        Ok(g)
    }
}

/// Exponential integral E1(t) = gamma_upper(0, t) for t > 0.
pub fn exp_integral_e1(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "exp_integral_e1 requires t > 0, got t = {t}"
        )));
    }
    if t >= 1.0 {
        return Ok(upper_cf(0.0, t));
    }
    let mut sum = -EULER_GAMMA - t.ln();
    let mut tk = 1.0;
    let mut kfac = 1.0;
    for k in 1..=80u32 {
        tk *= t;
        kfac *= k as f64;
        let add = tk / (k as f64 * kfac);
        if k % 2 == 1 {
            sum += add;
        } else {
            sum -= add;
        }
        if add < 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_reference_points() {
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(2.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            max_relative = 1e-13
        );
        assert_relative_eq!(gamma(20.0), factorial(19), max_relative = 1e-13);
        assert_relative_eq!(gamma(1.5), 0.886_226_925_452_758, max_relative = 1e-13);
    }

    #[test]
    fn gamma_lower_reference_points() {
        let cases = [
            (2.0, 1.0, 0.264_241_117_657_115_36),
            (1.0, std::f64::consts::LN_2, 0.5),
            (5.0, 2.5, 2.611_727_546_060_370_2),
            (0.5, 0.3, 0.995_094_539_655_707_98),
            (12.0, 10.0, 12_103_725.923_248_151),
            (32.0, 0.16, 9.105_689_520_626_393_7e-28),
            (3.0, 0.7, 0.068_283_168_251_416_977),
        ];
        for (a, t, want) in cases {
            assert_relative_eq!(gamma_lower(a, t).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_lower_closed_form_example() {
        let want = 1.0 - 2.0 / std::f64::consts::E;
        assert_relative_eq!(gamma_lower(2.0, 1.0).unwrap(), want, max_relative = 1e-13);
    }

    #[test]
    fn gamma_lower_monotone_in_t() {
        let mut prev = 0.0;
        for i in 1..=40 {
            let t = 0.25 * i as f64;
            let v = gamma_lower(3.7, t).unwrap();
            assert!(v >= prev, "gamma_lower not monotone at t = {t}");
            prev = v;
        }
    }

    #[test]
    fn gamma_lower_domain_errors() {
        assert!(gamma_lower(0.0, 1.0).is_err());
        assert!(gamma_lower(-1.0, 1.0).is_err());
        assert!(gamma_lower(2.0, -0.5).is_err());
        assert!(gamma_lower(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn gamma_upper_positive_and_zero_order() {
        let cases = [
            (1.0, 1.0, 0.367_879_441_171_442_32),
            (0.0, 1.0, 0.219_383_934_395_520_27),
            (0.0, 2.0, 0.048_900_510_708_061_12),
            (0.0, 100.0, 3.683_597_761_682_032_2e-46),
            (0.0, 0.1265, 1.612_906_589_307_712_5),
            (7.5, 0.5, 1_871.253_831_314_254_9),
            (25.0, 30.0, 9.756_056_448_535_457_2e22),
            (60.0, 100.0, 8.794_594_715_756_816_3e74),
            (30.0, 0.16, 8.841_761_993_739_702e30),
            (0.5, 0.25, 0.849_891_838_079_931_13),
            (0.25, 0.5, 0.556_580_414_009_427_13),
            (6.0, 4.0, 94.215_646_443_648_623),
            (4.0, 4.0, 2.600_820_722_200_253_6),
            (5.0, 0.5, 23.995_869_224_881_06),
            (5.0, 2.0, 22.736_327_583_750_932),
        ];
        for (a, t, want) in cases {
            assert_relative_eq!(gamma_upper(a, t).unwrap(), want, max_relative = 1e-11);
        }
    }

    #[test]
    fn gamma_upper_negative_order() {
        let cases = [
            (-2.0, 1.0, 0.109_691_967_197_760_14),
            (-1.0, 0.01, 94.967_053_798_378_689),
            (-4.0, 0.2, 120.131_454_224_111_64),
            (-10.0, 100.0, 3.354_366_980_564_055_4e-66),
            (-10.0, 0.01, 9.889_511_514_864_318_3e18),
            (-0.5, 2.0, 0.030_098_757_100_186_466),
            (-2.5, 7.5, 3.350_251_899_276_718e-7),
            (-3.0, 160.0, 4.850_013_389_778_218_8e-79),
            (-1.0, 0.1265, 5.352_896_964_395_967_3),
            (-3.0, 28.5, 5.594_406_630_737_825e-19),
            (-2.0, 0.5, 0.886_417_457_100_713_83),
            (-5.0, 0.5, 3.462_668_824_734_086_4),
            (-5.0, 2.0, 5.793_155_176_997_915_5e-4),
            (-10.0, 1.0, 0.033_148_544_714_002_592),
            (-7.0, 1.0, 0.045_211_482_061_884_666),
            (-10.0, 2.5, 6.772_404_182_297_401_6e-7),
            (-9.5, 1.0, 0.034_696_365_957_232_469),
            (-0.3, 0.4, 0.756_204_249_284_117_34),
            (-6.7, 0.2, 5_692.339_842_170_512_8),
            (-1.5, 0.8, 0.235_422_724_694_734_75),
        ];
        for (a, t, want) in cases {
            assert_relative_eq!(gamma_upper(a, t).unwrap(), want, max_relative = 1e-10);
        }
    }

    #[test]
    fn gamma_upper_continuous_across_evaluation_switch() {
        assert_relative_eq!(
            gamma_upper(-10.0, 0.999).unwrap(),
            0.033_518_640_968_365_361,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            gamma_upper(-10.0, 1.001).unwrap(),
            0.032_782_863_078_723_538,
            max_relative = 1e-10
        );
    }

    #[test]
    fn gamma_upper_e1_halving_identity() {
        let e1 = gamma_upper(0.0, 1.0).unwrap();
        let v = gamma_upper(-2.0, 1.0).unwrap();
        assert_relative_eq!(v, e1 / 2.0, max_relative = 1e-11);
    }

    #[test]
    fn gamma_upper_domain_errors() {
        assert!(gamma_upper(-1.0, 0.0).is_err());
        assert!(gamma_upper(0.0, 0.0).is_err());
        assert!(gamma_upper(2.0, f64::NAN).is_err());
        assert!(gamma_upper(f64::INFINITY, 1.0).is_err());
        assert_relative_eq!(gamma_upper(3.0, 0.0).unwrap(), 2.0, max_relative = 1e-13);
    }

    #[test]
    fn incomplete_pair_sums_to_gamma() {
        for a in 1..=20u32 {
            for t in [0.1, 1.0, 10.0] {
                let lo = gamma_lower(a as f64, t).unwrap();
                let hi = gamma_upper(a as f64, t).unwrap();
                assert_relative_eq!(lo + hi, gamma(a as f64), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn downward_recurrence_consistency() {
        let mut grid = Vec::new();
        let mut a = -5.0;
        while a <= 5.0 {
            grid.push(a);
            a += 0.5;
        }
        grid.extend([-4.3, -2.7, -0.9, 1.3, 3.8]);
        for a in grid {
            for t in [0.5, 2.0] {
                let up1 = gamma_upper(a + 1.0, t).unwrap();
                let lhs = if a == 0.0 {
                    (-t).exp()
                } else {
                    a * gamma_upper(a, t).unwrap() + t.powf(a) * (-t).exp()
                };
                assert_relative_eq!(lhs, up1, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn e1_series_and_fraction_agree_near_switch() {
        let lo = exp_integral_e1(0.999_999).unwrap();
        let hi = exp_integral_e1(1.000_001).unwrap();
        assert_relative_eq!(lo, hi, max_relative = 1e-5);
        assert_relative_eq!(
            exp_integral_e1(2.0).unwrap(),
            0.048_900_510_708_061_12,
            max_relative = 1e-11
        );
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(-1.5, 3), -1.5 * -0.5 * 0.5);
        let (ln_abs, sign) = pochhammer_ln(-1.5, 3);
        assert_relative_eq!(sign * ln_abs.exp(), pochhammer(-1.5, 3), max_relative = 1e-13);
    }
}
