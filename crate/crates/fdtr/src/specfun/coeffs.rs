//! Combinatorial coefficients feeding the truncated Bessel expansion and the
//! closed-form NMSE expressions: exact Lah numbers, the signed expansion
//! coefficients, and their column sums.

use crate::error::{Error, Result};

use super::gamma::{ln_gamma, pochhammer_ln};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2: f64 = std::f64::consts::LN_2;

/// Truncation depth for the finite Bessel expansion and everything built on
/// it. Both inner and outer sums run from their lower limit up to `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesTruncation {
    pub d: u32,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self { d: 10 }
    }
}

fn binom_u128(n: u32, k: u32) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        let num = (n as u128) - (k as u128) + i;
        acc = acc
            .checked_mul(num)
            .ok_or_else(|| Error::Overflow(format!("binomial({n}, {k}) exceeds u128")))?
            / i;
    }
    Ok(acc)
}

/// Lah number L(l, q), the count of partitions of an l-set into q ordered
/// lists, computed exactly in u128. Returns an overflow error when the exact
/// value does not fit.
pub fn lah(l: u32, q: u32) -> Result<u128> {
    if q > l {
        return Ok(0);
    }
    if l == 0 {
        return Ok(1);
    }
    if q == 0 {
        return Ok(0);
    }
    let binom = binom_u128(l - 1, q - 1)?;
    let mut falling: u128 = 1;
    for j in (q + 1)..=l {
        falling = falling
            .checked_mul(j as u128)
            .ok_or_else(|| Error::Overflow(format!("lah({l}, {q}) exceeds u128")))?;
    }
    binom
        .checked_mul(falling)
        .ok_or_else(|| Error::Overflow(format!("lah({l}, {q}) exceeds u128")))
}

/// Signed coefficient of the truncated Bessel expansion,
///
///   psi(m, l, q) = (-1)^q sqrt(pi) Gamma(2m) (1/2 - m)_l L(l, q)
///                  / (2^{m-q} Gamma(1/2 + l + m) l!),
///
/// assembled in log space so that large orders stay representable. Requires
/// m >= 1 (the m = 0 case sits on a gamma pole) and q <= l.
pub fn psi_coeff(m: u32, l: u32, q: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain(
            "psi_coeff requires m >= 1; the prefactor has a pole at m = 0".into(),
        ));
    }
    if q > l {
        return Err(Error::Domain(format!(
            "psi_coeff requires q <= l, got l = {l}, q = {q}"
        )));
    }
    let lah_lq = lah(l, q)?;
    if lah_lq == 0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    let lf = l as f64;
    let qf = q as f64;
    let (poch_ln, poch_sign) = pochhammer_ln(0.5 - mf, l);
    let ln_abs = 0.5 * LN_PI + ln_gamma(2.0 * mf) + poch_ln + (lah_lq as f64).ln()
        - (mf - qf) * LN_2
        - ln_gamma(0.5 + lf + mf)
        - ln_gamma(lf + 1.0);
    let sign = poch_sign * if q % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * ln_abs.exp())
}

/// Column sum of expansion coefficients entering the closed-form NMSE at an
/// unintended position: for m >= 2 the sum of psi(m - 1, l, q) over
/// l = q..=d, and for m = 1 the combination psi(2, l, q) - 2 psi(1, l, q)
/// that realizes the order-zero Bessel function through the two-step
/// recurrence. Requires m >= 1.
pub fn g_coeff(m: u32, q: u32, trunc: SeriesTruncation) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("g_coeff requires m >= 1".into()));
    }
    let mut sum = 0.0;
    for l in q..=trunc.d {
        let term = if m == 1 {
            psi_coeff(2, l, q)? - 2.0 * psi_coeff(1, l, q)?
        } else {
            psi_coeff(m - 1, l, q)?
        };
        sum += term;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lah_base_cases_and_small_table() {
        assert_eq!(lah(0, 0).unwrap(), 1);
        assert_eq!(lah(3, 0).unwrap(), 0);
        assert_eq!(lah(2, 3).unwrap(), 0);
        assert_eq!(lah(5, 1).unwrap(), 120);
        assert_eq!(lah(3, 2).unwrap(), 6);
        assert_eq!(lah(4, 2).unwrap(), 36);
        assert_eq!(lah(5, 3).unwrap(), 120);
        assert_eq!(lah(6, 6).unwrap(), 1);
    }

    #[test]
    fn lah_recurrence_exhaustive() {
        for l in 0..=12u32 {
            for q in 1..=(l + 1) {
                let lhs = lah(l + 1, q).unwrap();
                let rhs = (l + q) as u128 * lah(l, q).unwrap() + lah(l, q - 1).unwrap();
                assert_eq!(lhs, rhs, "recurrence fails at l = {l}, q = {q}");
            }
        }
    }

    #[test]
    fn lah_overflow_boundary() {
        let v = lah(34, 1).unwrap();
        assert_eq!(v, (1..=34u128).product::<u128>());
        assert!(matches!(lah(35, 1), Err(Error::Overflow(_))));
    }

    #[test]
    fn psi_reference_points() {
        let cases = [
            (1, 0, 0, 1.0),
            (2, 0, 0, 2.0),
            (3, 2, 1, -3.809_523_809_523_809_5),
            (4, 5, 2, 0.122_857_534_622_240_5),
            (15, 10, 10, 279_688_855.805_494_75),
            (1, 3, 2, -0.114_285_714_285_714_29),
            (2, 10, 4, 0.006_461_165_701_978_732),
        ];
        for (m, l, q, want) in cases {
            assert_relative_eq!(psi_coeff(m, l, q).unwrap(), want, max_relative = 5e-12);
        }
    }

    #[test]
    fn psi_domain_errors() {
        assert!(psi_coeff(0, 1, 1).is_err());
        assert!(psi_coeff(2, 1, 2).is_err());
    }

    #[test]
    fn psi_vanishes_with_lah() {
        for l in 1..=6u32 {
            assert_eq!(psi_coeff(3, l, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn g_reference_points() {
        let t = SeriesTruncation::default();
        let cases = [
            (1, 1, 0.095_891_903_672_224_038),
            (1, 2, 1.899_724_528_772_852_9),
            (1, 3, -1.552_384_003_427_212_5),
            (2, 0, 1.0),
            (2, 1, 0.952_380_952_380_952_38),
            (2, 2, -0.704_684_101_588_126_36),
            (2, 3, 0.723_887_326_983_302_22),
            (4, 0, 8.0),
            (4, 1, 7.999_907_697_632_828_9),
            (4, 2, 3.001_119_166_201_949_9),
            (4, 3, 0.328_842_566_774_993_75),
            (32, 0, 2.848_130_895_159_583_2e41),
            (32, 1, 2.776_379_358_870_984_2e41),
            (32, 2, 2.094_527_137_045_657_2e41),
            (32, 3, -1.551_005_013_631_672_9e41),
        ];
        for (m, q, want) in cases {
            assert_relative_eq!(g_coeff(m, q, t).unwrap(), want, max_relative = 1e-9);
        }
    }

    #[test]
    fn g_order_one_column_zero_vanishes() {
        let v = g_coeff(1, 0, SeriesTruncation::default()).unwrap();
        assert!(v.abs() < 1e-14, "expected structural zero, got {v}");
    }

    #[test]
    fn g_domain_error_at_zero_order() {
        assert!(g_coeff(0, 0, SeriesTruncation::default()).is_err());
    }
}
