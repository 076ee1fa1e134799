//! Tapped-delay-line channel model: power-delay profiles, their mapping onto
//! a sampling grid, Rayleigh-fading realizations per transmit antenna, and
//! channel frequency responses.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power-delay profile as (delay in ns, mean power in dB) pairs. Delays are
/// strictly increasing starting at zero; powers are non-positive with the
/// strongest tap at 0 dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PdpSerde", into = "PdpSerde")]
pub struct PowerDelayProfile {
    taps: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct TapRecord {
    delay_ns: f64,
    power_db: f64,
}

#[derive(Serialize, Deserialize)]
struct PdpSerde {
    taps: Vec<TapRecord>,
}

impl TryFrom<PdpSerde> for PowerDelayProfile {
    type Error = Error;

    fn try_from(value: PdpSerde) -> Result<Self> {
        Self::new(
            value
                .taps
                .into_iter()
                .map(|t| (t.delay_ns, t.power_db))
                .collect(),
        )
    }
}

impl From<PowerDelayProfile> for PdpSerde {
    fn from(value: PowerDelayProfile) -> Self {
        Self {
            taps: value
                .taps
                .into_iter()
                .map(|(delay_ns, power_db)| TapRecord { delay_ns, power_db })
                .collect(),
        }
    }
}

impl PowerDelayProfile {
    pub fn new(taps: Vec<(f64, f64)>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Config("power-delay profile has no taps".into()));
        }
        if taps[0].0 != 0.0 {
            return Err(Error::Config(format!(
                "first tap delay must be 0 ns, got {}",
                taps[0].0
            )));
        }
        for w in taps.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Config(format!(
                    "tap delays must be strictly increasing, got {} after {}",
                    w[1].0, w[0].0
                )));
            }
        }
        let mut max_power = f64::NEG_INFINITY;
        for &(delay, power) in &taps {
            if !delay.is_finite() || !power.is_finite() {
                return Err(Error::Config(format!(
                    "tap ({delay} ns, {power} dB) is not finite"
                )));
            }
            if power > 0.0 {
                return Err(Error::Config(format!(
                    "tap powers must be <= 0 dB, got {power}"
                )));
            }
            max_power = max_power.max(power);
        }
        if max_power != 0.0 {
            return Err(Error::Config(format!(
                "strongest tap must sit at 0 dB, got {max_power}"
            )));
        }
        Ok(Self { taps })
    }

    /// The Extended Pedestrian A profile.
    pub fn epa() -> Self {
        Self {
            taps: vec![
                (0.0, 0.0),
                (30.0, -1.0),
                (70.0, -2.0),
                (90.0, -3.0),
                (110.0, -8.0),
                (190.0, -17.2),
                (410.0, -20.8),
            ],
        }
    }

    /// A single tap at delay zero: frequency-flat fading.
    pub fn single_tap() -> Self {
        Self {
            taps: vec![(0.0, 0.0)],
        }
    }

    /// `n_taps` equal-power taps spaced `spacing_ns` apart starting at zero.
    pub fn uniform(n_taps: usize, spacing_ns: f64) -> Result<Self> {
        if n_taps == 0 {
            return Err(Error::Config("uniform profile needs at least one tap".into()));
        }
        if !(spacing_ns > 0.0) {
            return Err(Error::Config(format!(
                "uniform profile needs positive tap spacing, got {spacing_ns}"
            )));
        }
        Ok(Self {
            taps: (0..n_taps)
                .map(|i| (i as f64 * spacing_ns, 0.0))
                .collect(),
        })
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let parsed: PdpSerde = serde_json::from_str(&text)?;
        Self::try_from(parsed)
    }

    pub fn taps(&self) -> &[(f64, f64)] {
        &self.taps
    }
}

/// Discrete-time and subcarrier grid: sampling period, FFT size (a power of
/// two), and cyclic-prefix length in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub sample_period_ns: u32,
    pub q: usize,
    pub cp_length: usize,
}

impl SamplingGrid {
    pub fn new(sample_period_ns: u32, q: usize, cp_length: usize) -> Result<Self> {
        if sample_period_ns == 0 {
            return Err(Error::Config("sample period must be positive".into()));
        }
        if q < 2 || !q.is_power_of_two() {
            return Err(Error::Config(format!(
                "subcarrier count must be a power of two >= 2, got {q}"
            )));
        }
        Ok(Self {
            sample_period_ns,
            q,
            cp_length,
        })
    }
}

impl Default for SamplingGrid {
    fn default() -> Self {
        Self {
            sample_period_ns: 10,
            q: 256,
            cp_length: 64,
        }
    }
}

/// How realized impulse responses are normalized: rescaled so every drawn
/// response has exactly unit energy, or left with unit energy in expectation
/// only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    PerRealization,
    InExpectation,
}

/// Map a profile onto the sampling grid: delays round to the nearest sample
/// index, taps landing on the same index add their linear powers, and the
/// resulting variances are normalized to unit total. An index at or beyond
/// the FFT size is a configuration error.
pub fn map_pdp_to_taps(
    pdp: &PowerDelayProfile,
    grid: &SamplingGrid,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let ts = grid.sample_period_ns as f64;
    let mut indices: Vec<usize> = Vec::new();
    let mut powers: Vec<f64> = Vec::new();
    for &(delay, power_db) in pdp.taps() {
        let idx = (delay / ts).round() as usize;
        if idx >= grid.q {
            return Err(Error::Config(format!(
                "tap at {delay} ns maps to sample {idx}, beyond the {} available",
                grid.q
            )));
        }
        let linear = 10f64.powf(power_db / 10.0);
        match indices.last() {
            Some(&last) if last == idx => *powers.last_mut().unwrap() += linear,
            _ => {
                indices.push(idx);
                powers.push(linear);
            }
        }
    }
    let total: f64 = powers.iter().sum();
    for p in &mut powers {
        *p /= total;
    }
    Ok((indices, powers))
}

/// Realized channel impulse responses, one per transmit antenna.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub cirs: Vec<Vec<Complex64>>,
    pub mode: NormalizationMode,
}

impl ChannelRealization {
    pub fn n_antennas(&self) -> usize {
        self.cirs.len()
    }

    pub fn cir_length(&self) -> usize {
        self.cirs.first().map_or(0, Vec::len)
    }
}

/// Channel frequency response on the subcarrier grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cfr {
    pub bins: Vec<Complex64>,
}

impl Cfr {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Draw one multi-antenna Rayleigh realization of the profile on the grid.
pub fn realize<R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    grid: &SamplingGrid,
    n_antennas: usize,
    mode: NormalizationMode,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if n_antennas == 0 {
        return Err(Error::Config("need at least one transmit antenna".into()));
    }
    let (indices, variances) = map_pdp_to_taps(pdp, grid)?;
    let len = indices.last().unwrap() + 1;
    let mut cirs = Vec::with_capacity(n_antennas);
    for _ in 0..n_antennas {
        let mut cir = vec![Complex64::new(0.0, 0.0); len];
        for (&idx, &var) in indices.iter().zip(&variances) {
            let std = (var / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            cir[idx] = Complex64::new(std * re, std * im);
        }
        if mode == NormalizationMode::PerRealization {
            let energy: f64 = cir.iter().map(|h| h.norm_sqr()).sum();
            let scale = 1.0 / energy.sqrt();
            for h in &mut cir {
                *h *= scale;
            }
        }
        cirs.push(cir);
    }
    Ok(ChannelRealization { cirs, mode })
}

/// Two statistically independent realizations of the same profile, one for
/// the intended position and one for an unintended position.
pub fn realize_pair<R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    grid: &SamplingGrid,
    n_antennas: usize,
    mode: NormalizationMode,
    rng: &mut R,
) -> Result<(ChannelRealization, ChannelRealization)> {
    let intended = realize(pdp, grid, n_antennas, mode, rng)?;
    let other = realize(pdp, grid, n_antennas, mode, rng)?;
    Ok((intended, other))
}

/// Frequency response of each antenna's impulse response on the subcarrier
/// grid, as the unnormalized discrete Fourier transform
/// H_k = sum_l h_l exp(-j 2 pi k l / Q).
pub fn cfr(realization: &ChannelRealization, grid: &SamplingGrid) -> Vec<Cfr> {
    let q = grid.q;
    let roots: Vec<Complex64> = (0..q)
        .map(|m| {
            let phi = -2.0 * std::f64::consts::PI * m as f64 / q as f64;
            Complex64::new(phi.cos(), phi.sin())
        })
        .collect();
    realization
        .cirs
        .iter()
        .map(|cir| {
            let bins = (0..q)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (l, h) in cir.iter().enumerate() {
                        if h.norm_sqr() > 0.0 {
                            acc += h * roots[(k * l) % q];
                        }
                    }
                    acc
                })
                .collect();
            Cfr { bins }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma, gamma_lower};
    use approx::assert_relative_eq;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn epa_maps_exactly_onto_ten_ns_grid() {
        let (indices, variances) =
            map_pdp_to_taps(&PowerDelayProfile::epa(), &SamplingGrid::default()).unwrap();
        assert_eq!(indices, vec![0, 3, 7, 9, 11, 19, 41]);
        let frozen = [
            0.321_302_237_767_274_25,
            0.255_219_439_338_640_33,
            0.202_728_006_717_183_02,
            0.161_032_579_704_832_27,
            0.050_922_972_935_987_504,
            0.006_122_287_926_592_283_5,
            0.002_672_475_609_490_350_8,
        ];
        for (v, w) in variances.iter().zip(frozen) {
            assert_relative_eq!(*v, w, max_relative = 1e-12);
        }
        assert_relative_eq!(variances.iter().sum::<f64>(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn coarse_grid_sums_colliding_taps() {
        let grid = SamplingGrid::new(410, 256, 64).unwrap();
        let (indices, variances) = map_pdp_to_taps(&PowerDelayProfile::epa(), &grid).unwrap();
        assert_eq!(indices, vec![0, 1]);
        let head: f64 = [0.0, -1.0, -2.0, -3.0, -8.0, -17.2]
            .iter()
            .map(|db| 10f64.powf(db / 10.0))
            .sum();
        let tail = 10f64.powf(-2.08);
        assert_relative_eq!(variances[1], tail / (head + tail), max_relative = 1e-12);
        assert_relative_eq!(variances[0] + variances[1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn tap_beyond_grid_is_a_config_error() {
        let grid = SamplingGrid::new(10, 32, 8).unwrap();
        assert!(matches!(
            map_pdp_to_taps(&PowerDelayProfile::epa(), &grid),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn profile_validation() {
        assert!(PowerDelayProfile::new(vec![]).is_err());
        assert!(PowerDelayProfile::new(vec![(5.0, 0.0)]).is_err());
        assert!(PowerDelayProfile::new(vec![(0.0, 0.0), (10.0, 0.5)]).is_err());
        assert!(PowerDelayProfile::new(vec![(0.0, -1.0), (10.0, -2.0)]).is_err());
        assert!(PowerDelayProfile::new(vec![(0.0, 0.0), (10.0, -1.0), (10.0, -2.0)]).is_err());
        assert!(PowerDelayProfile::new(vec![(0.0, 0.0), (10.0, -1.0)]).is_ok());
        let uniform = PowerDelayProfile::uniform(4, 10.0).unwrap();
        assert_eq!(uniform.taps().len(), 4);
        let (indices, variances) =
            map_pdp_to_taps(&uniform, &SamplingGrid::default()).unwrap();
        assert_eq!(indices, vec![0, 1, 2, 3]);
        for v in variances {
            assert_relative_eq!(v, 0.25, max_relative = 1e-14);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SamplingGrid::new(0, 256, 64).is_err());
        assert!(SamplingGrid::new(10, 100, 64).is_err());
        assert!(SamplingGrid::new(10, 1, 0).is_err());
        assert!(SamplingGrid::new(10, 64, 0).is_ok());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let dir = std::env::temp_dir();
        let good = dir.join("pdp_roundtrip_test.json");
        let text = serde_json::to_string(&PowerDelayProfile::epa()).unwrap();
        std::fs::write(&good, text).unwrap();
        let loaded = PowerDelayProfile::from_json_file(&good).unwrap();
        assert_eq!(loaded, PowerDelayProfile::epa());
        std::fs::remove_file(&good).unwrap();

        let bad = dir.join("pdp_malformed_test.json");
        std::fs::write(&bad, "{ not json").unwrap();
        assert!(matches!(
            PowerDelayProfile::from_json_file(&bad),
            Err(Error::Parse(_))
        ));
        std::fs::write(&bad, r#"{"taps": [{"delay_ns": 5.0, "power_db": 0.0}]}"#).unwrap();
        assert!(matches!(
            PowerDelayProfile::from_json_file(&bad),
            Err(Error::Config(_))
        ));
        std::fs::remove_file(&bad).unwrap();
        assert!(matches!(
            PowerDelayProfile::from_json_file(&dir.join("does_not_exist_pdp.json")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn per_realization_energy_is_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = SamplingGrid::default();
        let real = realize(
            &PowerDelayProfile::epa(),
            &grid,
            4,
            NormalizationMode::PerRealization,
            &mut rng,
        )
        .unwrap();
        assert_eq!(real.n_antennas(), 4);
        assert_eq!(real.cir_length(), 42);
        for cir in &real.cirs {
            let energy: f64 = cir.iter().map(|h| h.norm_sqr()).sum();
            assert_relative_eq!(energy, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn in_expectation_energy_averages_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let grid = SamplingGrid::default();
        let mut acc = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let real = realize(
                &PowerDelayProfile::epa(),
                &grid,
                1,
                NormalizationMode::InExpectation,
                &mut rng,
            )
            .unwrap();
            acc += real.cirs[0].iter().map(|h| h.norm_sqr()).sum::<f64>();
        }
        assert_relative_eq!(acc / n as f64, 1.0, max_relative = 0.01);
    }

    #[test]
    fn cfr_satisfies_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grid = SamplingGrid::default();
        let real = realize(
            &PowerDelayProfile::epa(),
            &grid,
            2,
            NormalizationMode::PerRealization,
            &mut rng,
        )
        .unwrap();
        let responses = cfr(&real, &grid);
        for (cir, resp) in real.cirs.iter().zip(&responses) {
            let time_energy: f64 = cir.iter().map(|h| h.norm_sqr()).sum();
            let freq_energy: f64 =
                resp.bins.iter().map(|h| h.norm_sqr()).sum::<f64>() / grid.q as f64;
            assert_relative_eq!(freq_energy, time_energy, max_relative = 1e-9);
        }
    }

    #[test]
    fn cfr_bin_power_is_unit_in_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = SamplingGrid::default();
        let n = 4_000;
        let mut acc = [0.0; 3];
        for _ in 0..n {
            let real = realize(
                &PowerDelayProfile::epa(),
                &grid,
                1,
                NormalizationMode::InExpectation,
                &mut rng,
            )
            .unwrap();
            let resp = cfr(&real, &grid);
            for (slot, &k) in [0usize, 73, 200].iter().enumerate() {
                acc[slot] += resp[0].bins[k].norm_sqr();
            }
        }
        for mean in acc {
            assert_relative_eq!(mean / n as f64, 1.0, max_relative = 0.05);
        }
    }

    #[test]
    fn flat_profile_gives_constant_unit_magnitude_cfr() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let grid = SamplingGrid::default();
        let real = realize(
            &PowerDelayProfile::single_tap(),
            &grid,
            1,
            NormalizationMode::PerRealization,
            &mut rng,
        )
        .unwrap();
        let resp = cfr(&real, &grid);
        for bin in &resp[0].bins {
            assert_relative_eq!(bin.norm(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn paired_realizations_are_uncorrelated_and_seeded() {
        let grid = SamplingGrid::default();
        let pdp = PowerDelayProfile::epa();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut cross = Complex64::new(0.0, 0.0);
        let n = 4_000;
        for _ in 0..n {
            let (a, b) = realize_pair(
                &pdp,
                &grid,
                1,
                NormalizationMode::InExpectation,
                &mut rng,
            )
            .unwrap();
            cross += a.cirs[0][0] * b.cirs[0][0].conj();
        }
        let var0 = 0.321_302_237_767_274_25;
        assert!((cross / n as f64).norm() < 0.03 * var0);

        let mut r1 = ChaCha8Rng::seed_from_u64(77);
        let mut r2 = ChaCha8Rng::seed_from_u64(77);
        let (a1, b1) = realize_pair(&pdp, &grid, 2, NormalizationMode::InExpectation, &mut r1)
            .unwrap();
        let (a2, b2) = realize_pair(&pdp, &grid, 2, NormalizationMode::InExpectation, &mut r2)
            .unwrap();
        assert_eq!(a1.cirs, a2.cirs);
        assert_eq!(b1.cirs, b2.cirs);
        assert_ne!(a1.cirs, b1.cirs);
    }

    fn gamma_ks(mut stats: Vec<f64>, shape: u32) -> f64 {
        stats.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let n = stats.len() as f64;
        let norm = gamma(shape as f64);
        let mut d = 0.0_f64;
        for (i, &z) in stats.iter().enumerate() {
            let f = gamma_lower(shape as f64, z).unwrap() / norm;
            d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
        }
        d
    }

    fn matched_power_stat(pdp: &PowerDelayProfile, u: usize, n_t: usize, seed: u64, n: usize) -> Vec<f64> {
        let grid = SamplingGrid::default();
        let spacing = grid.q / u;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let real = realize(pdp, &grid, n_t, NormalizationMode::InExpectation, &mut rng)
                    .unwrap();
                let responses = cfr(&real, &grid);
                responses
                    .iter()
                    .map(|resp| {
                        (0..u).map(|block| resp.bins[block * spacing].norm_sqr()).sum::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matched_power_follows_gamma_law_exactly_for_flat_subgrids() {
        let d11 = gamma_ks(
            matched_power_stat(&PowerDelayProfile::epa(), 1, 1, 13, 20_000),
            1,
        );
        assert!(d11 < 0.015, "single-antenna flat stat KS = {d11:.4}");
        let uniform = PowerDelayProfile::uniform(2, 10.0).unwrap();
        let d22 = gamma_ks(matched_power_stat(&uniform, 2, 2, 14, 20_000), 4);
        assert!(d22 < 0.015, "uniform-profile stat KS = {d22:.4}");
    }

    #[test]
    fn matched_power_is_near_gamma_under_delay_spread() {
        let d22 = gamma_ks(
            matched_power_stat(&PowerDelayProfile::epa(), 2, 2, 15, 20_000),
            4,
        );
        assert!(
            d22 < 0.05,
            "delay-spread stat strays from the gamma law: KS = {d22:.4}"
        );
    }
}
