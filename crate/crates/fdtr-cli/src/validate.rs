//! Self-validation report: runs the cross-checks between the simulation,
//! quadrature, and closed-form paths at reduced trial counts and prints one
//! PASS/FAIL line per check with the measured and tolerated deviations.

use fdtr::analytic::{
    asym_intended_low, asym_unintended_high, asym_unintended_high_refined, nmse_intended_closed,
    nmse_intended_integral, nmse_unintended_closed, nmse_unintended_integral, ClosedFormParams,
};
use fdtr::channel::{NormalizationMode, PowerDelayProfile, SamplingGrid};
use fdtr::link::{build_spreading, full_chain_once, monte_carlo_nmse, Position, SystemConfig};
use fdtr::randdist::ProductSumParams;
use fdtr::specfun::{
    bessel_k_ref, bessel_k_series, gamma, gamma_lower, gamma_upper, SeriesTruncation,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::spec::Failure;

struct Report {
    failed: usize,
    total: usize,
}

impl Report {
    fn new() -> Self {
        Self {
            failed: 0,
            total: 0,
        }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.total += 1;
        if pass {
            println!("PASS {name}: {detail}");
        } else {
            self.failed += 1;
            println!("FAIL {name}: {detail}");
        }
    }

    fn info(&self, name: &str, detail: String) {
        println!("INFO {name}: {detail}");
    }
}

fn params(gamma: f64, u: u32, n_t: u32) -> ClosedFormParams {
    ClosedFormParams::new(gamma, u, n_t, SeriesTruncation::default())
        .expect("validation parameters are in range")
}

fn lib(err: fdtr::Error) -> Failure {
    Failure::from_lib(err)
}

/// Runs the validation suite; returns the process exit code (0 clean,
/// 1 with failed checks).
pub fn run(seed: u64, n_trials: usize) -> Result<i32, Failure> {
    println!("seed = {seed}");
    println!("trials = {n_trials}");
    let mut report = Report::new();
    let grid = SamplingGrid::default();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5AD0);
    let code = build_spreading(4, 8, &mut rng).map_err(lib)?;
    let dense = code.dense();
    let mut worst_diag = 0.0f64;
    let mut worst_off = 0.0f64;
    for a in 0..8 {
        for b in 0..8 {
            let dot: f64 = dense.iter().map(|row| row[a] * row[b]).sum();
            let err = if a == b { (dot - 1.0).abs() } else { dot.abs() };
            if a == b {
                worst_diag = worst_diag.max(err);
            } else {
                worst_off = worst_off.max(err);
            }
        }
    }
    report.check(
        "spreading_orthonormality",
        worst_diag == 0.0 && worst_off == 0.0,
        format!("max |S^T S - I|: diagonal {worst_diag:e}, off-diagonal {worst_off:e} (exact zero expected)"),
    );

    let noiseless = SystemConfig::new(
        grid,
        PowerDelayProfile::epa(),
        4,
        2,
        300.0,
        NormalizationMode::PerRealization,
    )
    .map_err(lib)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC11A);
    let outcome = full_chain_once(&noiseless, Position::Unintended, &mut rng).map_err(lib)?;
    report.check(
        "chain_noiseless_recovery",
        outcome.measured_nmse < 1e-18,
        format!(
            "measured NMSE {:e} through the full transform chain at 300 dB (tolerated 1e-18)",
            outcome.measured_nmse
        ),
    );

    let chain_cfg = SystemConfig::new(
        grid,
        PowerDelayProfile::epa(),
        2,
        2,
        10.0,
        NormalizationMode::PerRealization,
    )
    .map_err(lib)?;
    let chain_trials = 200usize;
    let mut diffs = Vec::with_capacity(chain_trials);
    for trial in 0..chain_trials {
        let s = (seed ^ 0xD1A6).wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let o = full_chain_once(&chain_cfg, Position::Intended, &mut rng).map_err(lib)?;
        diffs.push(o.measured_nmse - o.predicted_nmse);
    }
    let mean_diff = diffs.iter().sum::<f64>() / chain_trials as f64;
    let var = diffs
        .iter()
        .map(|d| (d - mean_diff) * (d - mean_diff))
        .sum::<f64>()
        / (chain_trials as f64 - 1.0);
    let tol = 4.0 * (var / chain_trials as f64).sqrt() + 1e-6;
    report.check(
        "chain_conditional_mean",
        mean_diff.abs() <= tol,
        format!(
            "|mean(measured - predicted)| = {:.3e} over {chain_trials} chains (tolerated {:.3e})",
            mean_diff.abs(),
            tol
        ),
    );

    let mc_cfg = SystemConfig::new(
        grid,
        PowerDelayProfile::uniform(2, 10.0).map_err(lib)?,
        2,
        2,
        10.0,
        NormalizationMode::InExpectation,
    )
    .map_err(lib)?;
    let est = monte_carlo_nmse(&mc_cfg, Position::Intended, n_trials, seed).map_err(lib)?;
    let p_10 = params(mc_cfg.gamma(), 2, 2);
    let integral = nmse_intended_integral(&p_10).map_err(lib)?;
    let dev = ((est.mean_nmse - integral) / integral).abs();
    let tol = (3.0 * est.ci95_halfwidth / est.mean_nmse).max(0.02);
    report.check(
        "mc_vs_integral_intended",
        dev <= tol,
        format!(
            "deviation {:.2}% (tolerated {:.2}%) with uniform profile, in-expectation, U=2, N_T=2, 10 dB",
            100.0 * dev,
            100.0 * tol
        ),
    );

    let mut worst = 0.0f64;
    for snr_db in [10.0, 20.0] {
        let p = params(10f64.powf(snr_db / 10.0), 2, 2);
        let c = nmse_intended_closed(&p).map_err(lib)?;
        let i = nmse_intended_integral(&p).map_err(lib)?;
        worst = worst.max(((c - i) / i).abs());
    }
    report.check(
        "closed_vs_integral_intended",
        worst < 0.05,
        format!(
            "worst deviation {:.2}% over 10 and 20 dB at U=2, N_T=2 (tolerated 5%)",
            100.0 * worst
        ),
    );

    let c = nmse_unintended_closed(&p_10).map_err(lib)?;
    let i = nmse_unintended_integral(&p_10).map_err(lib)?;
    let dev = ((c - i) / i).abs();
    report.check(
        "closed_vs_integral_unintended",
        dev < 0.10,
        format!(
            "deviation {:.2}% at U=2, N_T=2, 10 dB (tolerated 10%)",
            100.0 * dev
        ),
    );

    let identity = (gamma_lower(3.5, 2.0).map_err(lib)? + gamma_upper(3.5, 2.0).map_err(lib)?
        - gamma(3.5))
    .abs()
        / gamma(3.5);
    report.check(
        "gamma_identity",
        identity < 1e-12,
        format!("|lower + upper - gamma| / gamma = {identity:.2e} at a=3.5, t=2"),
    );

    let lhs = gamma_upper(-1.5, 1.7).map_err(lib)?;
    let rhs = -2.5 * gamma_upper(-2.5, 1.7).map_err(lib)? + 1.7f64.powf(-2.5) * (-1.7f64).exp();
    let res = ((lhs - rhs) / lhs).abs();
    report.check(
        "gamma_upper_recurrence",
        res < 1e-9,
        format!("residual {res:.2e} at a=-2.5, t=1.7 (tolerated 1e-9)"),
    );

    let series = bessel_k_series(3, 2.0, SeriesTruncation::default()).map_err(lib)?;
    let reference = bessel_k_ref(3, 2.0).map_err(lib)?;
    let err = ((series - reference) / reference).abs();
    report.check(
        "bessel_series_truncation",
        err < 1e-3,
        format!("relative error {err:.2e} at order 3, x=2, depth 10 (tolerated 1e-3)"),
    );

    let law = ProductSumParams::new(5, 0.6, 1.4).map_err(lib)?;
    let r_hi = 0.6 * 1.4 * (0.5 * 5.0 + 45.0);
    let panels = 4096usize;
    let step = r_hi / panels as f64;
    let pdf = |r: f64| -> Result<f64, Failure> {
        if r == 0.0 {
            Ok(0.0)
        } else {
            fdtr::randdist::pdf_abs_product_sum(&law, r).map_err(lib)
        }
    };
    let mut mass = 0.0;
    let mut f_lo = pdf(0.0)?;
    for i in 0..panels {
        let lo = i as f64 * step;
        let f_mid = pdf(lo + 0.5 * step)?;
        let f_hi = pdf(lo + step)?;
        mass += step / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
        f_lo = f_hi;
    }
    let mass_err = (mass - 1.0).abs();
    report.check(
        "density_normalization",
        mass_err < 1e-6,
        format!("|total mass - 1| = {mass_err:.2e} for M=5, sigma 0.6/1.4 (tolerated 1e-6)"),
    );

    let p_lim = params(1e4, 16, 2);
    let lim = 1e4 * nmse_intended_closed(&p_lim).map_err(lib)?;
    report.check(
        "high_snr_intended_limit",
        (0.2125..=0.2875).contains(&lim),
        format!("gamma * NMSE = {lim:.6} at U=16, N_T=2, 40 dB (tolerated [0.2125, 0.2875], limit 0.25)"),
    );

    let p_asym = params(1e3, 2, 2);
    let closed_30 = nmse_unintended_closed(&p_asym).map_err(lib)?;
    let plain = asym_unintended_high(&p_asym).map_err(lib)?;
    let refined = asym_unintended_high_refined(&p_asym).map_err(lib)?;
    report.info(
        "unintended_asymptote_variants",
        format!(
            "column sum from q=1: {plain:e}; from q=0 with truncated tail: {refined:e}; closed form: {closed_30:e} (U=2, N_T=2, 30 dB)"
        ),
    );
    let ratio = plain / closed_30;
    report.check(
        "high_snr_unintended_order",
        (0.5..=2.0).contains(&ratio),
        format!("asymptote/closed = {ratio:.4} (tolerated [0.5, 2])"),
    );
    let ratio_refined = refined / closed_30;
    report.check(
        "refined_unintended_asymptote",
        (ratio_refined - 1.0).abs() < 0.05,
        format!("refined/closed = {ratio_refined:.4} (tolerated within 5%)"),
    );

    let p_low = params(0.1, 2, 2);
    let low = asym_intended_low(&p_low).map_err(lib)?;
    let low_integral = nmse_intended_integral(&p_low).map_err(lib)?;
    report.info(
        "low_snr_intended_asymptote",
        format!(
            "finite sum {low:.6} vs integral {low_integral:.6} at -10 dB, U=2, N_T=2 (deviation {:.1}%)",
            100.0 * ((low - low_integral) / low_integral).abs()
        ),
    );

    for snr_db in [10.0, 20.0, 30.0] {
        let p = params(10f64.powf(snr_db / 10.0), 1, 1);
        let inten = nmse_intended_closed(&p).map_err(lib)?;
        let unint = nmse_unintended_closed(&p).map_err(lib)?;
        report.info(
            "single_pair_gap",
            format!(
                "intended {inten:.6}, unintended {unint:.6}, gap {:+.2} dB at U=1, N_T=1, {snr_db} dB",
                10.0 * (inten / unint).log10()
            ),
        );
        if snr_db == 30.0 {
            report.check(
                "single_pair_sign_at_30_db",
                unint < inten,
                format!("unintended {unint:.6} < intended {inten:.6} at U=1, N_T=1"),
            );
        }
    }

    let once = monte_carlo_nmse(&mc_cfg, Position::Intended, 500, seed).map_err(lib)?;
    let again = monte_carlo_nmse(&mc_cfg, Position::Intended, 500, seed).map_err(lib)?;
    report.check(
        "monte_carlo_determinism",
        once.mean_nmse.to_bits() == again.mean_nmse.to_bits()
            && once.ci95_halfwidth.to_bits() == again.ci95_halfwidth.to_bits(),
        format!(
            "two 500-trial runs: {} vs {} (bitwise identical expected)",
            once.mean_nmse, again.mean_nmse
        ),
    );

    println!(
        "validation: {} checks, {} failed",
        report.total, report.failed
    );
    Ok(if report.failed == 0 { 0 } else { 1 })
}
