//! Adaptive quadrature used by the analytic NMSE expressions, the
//! distribution checks, and the reference Bessel evaluation.
//!
//! Finite intervals use adaptive Simpson with Richardson correction.
//! Semi-infinite ranges are covered by caller-supplied breakpoints near the
//! integrand's features followed by geometrically widening tail segments
//! that stop once two consecutive segments are negligible.

const MAX_DEPTH: u32 = 48;

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + adaptive(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
}

fn composite_estimate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let hi = lo + h;
        acc += simpson(f(lo), f(0.5 * (lo + hi)), f(hi), lo, hi);
    }
    acc
}

/// Integral of `f` over the finite interval `[a, b]`.
///
/// `rel_tol` is interpreted against a coarse composite estimate of the
/// integral's magnitude, so narrow peaks inside a wide interval are still
/// resolved by the adaptive refinement.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    const PANELS: usize = 64;
    let scale = composite_estimate(f, a, b, PANELS).abs();
    let eps = (rel_tol * scale.max(f64::MIN_POSITIVE)).max(1e-305);
    let panel_eps = eps / PANELS as f64;
    let h = (b - a) / PANELS as f64;
    let mut acc = 0.0;
    for i in 0..PANELS {
        let lo = a + i as f64 * h;
        let hi = if i == PANELS - 1 { b } else { lo + h };
        let flo = f(lo);
        let fhi = f(hi);
        let fmid = f(0.5 * (lo + hi));
        let whole = simpson(flo, fmid, fhi, lo, hi);
        acc += adaptive(f, lo, hi, flo, fmid, fhi, whole, panel_eps, MAX_DEPTH);
    }
    acc
}

/// Integral of `f` over `[breaks[0], inf)`.
///
/// The interval is split at the supplied ascending breakpoints, then
/// extended with segments of doubling width until two consecutive segments
/// each contribute less than `rel_tol` of the running total.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], rel_tol: f64) -> f64 {
    assert!(!breaks.is_empty(), "at least one starting point required");
    let seg_tol = rel_tol * 0.1;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate(f, w[0], w[1], seg_tol);
    }
    let mut lo = *breaks.last().unwrap();
    let mut width = (lo * 0.5).max(5.0);
    let mut quiet = 0;
    for _ in 0..60 {
        let hi = lo + width;
        let seg = integrate(f, lo, hi, seg_tol);
        total += seg;
        if seg.abs() <= rel_tol * total.abs().max(f64::MIN_POSITIVE) {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    total
}
