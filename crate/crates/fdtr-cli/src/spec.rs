//! Experiment specification: the JSON file format, its defaults, and the
//! merge with command-line flags (flags win over file values).

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fdtr::channel::{NormalizationMode, PowerDelayProfile, SamplingGrid};
use fdtr::link::{Position, SystemConfig};
use serde::{Deserialize, Serialize};

/// Fatal failures mapped onto process exit codes: 2 for configuration
/// problems, 3 for I/O problems.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
}

impl Failure {
    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    pub fn from_lib(err: fdtr::Error) -> Self {
        match err {
            fdtr::Error::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    SweepSnr,
    GridUNt,
    PdfCheck,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PositionArg {
    Intended,
    Unintended,
}

impl From<PositionArg> for Position {
    fn from(p: PositionArg) -> Self {
        match p {
            PositionArg::Intended => Position::Intended,
            PositionArg::Unintended => Position::Unintended,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    PerRealization,
    InExpectation,
}

impl From<NormalizationArg> for NormalizationMode {
    fn from(m: NormalizationArg) -> Self {
        match m {
            NormalizationArg::PerRealization => NormalizationMode::PerRealization,
            NormalizationArg::InExpectation => NormalizationMode::InExpectation,
        }
    }
}

/// Parameters of the density histogram check.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdfCheckSpec {
    pub m: u32,
    pub sigma1: f64,
    pub sigma2: f64,
    pub n_samples: usize,
    pub n_bins: usize,
}

impl Default for PdfCheckSpec {
    fn default() -> Self {
        Self {
            m: 5,
            sigma1: 0.6,
            sigma2: 1.4,
            n_samples: 100_000,
            n_bins: 80,
        }
    }
}

/// One experiment: link configuration, evaluation grids, trial budget, and
/// output destination. Every field has a default, so `{}` is a valid spec;
/// list fields left out fall back to per-subcommand defaults, while lists
/// present but empty are rejected before any computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub mode: Option<ExperimentMode>,
    pub config: SystemConfig,
    pub snr_grid: Option<Vec<f64>>,
    pub u_list: Option<Vec<usize>>,
    pub nt_list: Option<Vec<usize>>,
    pub position: Option<Position>,
    pub n_trials: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub pdf: PdfCheckSpec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let config = SystemConfig::new(
            SamplingGrid::default(),
            PowerDelayProfile::epa(),
            2,
            2,
            30.0,
            NormalizationMode::PerRealization,
        )
        .expect("default configuration is valid");
        Self {
            mode: None,
            config,
            snr_grid: None,
            u_list: None,
            nt_list: None,
            position: None,
            n_trials: 20_000,
            seed: 1,
            output_path: None,
            output_format: OutputFormat::Csv,
            pdf: PdfCheckSpec::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("cannot read spec {}: {e}", path.display())))?;
        let spec: Self = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("invalid spec {}: {e}", path.display())))?;
        spec.config
            .validate()
            .map_err(|e| Failure::Config(format!("spec {}: {e}", path.display())))?;
        Ok(spec)
    }

    pub fn set_pdp(&mut self, selector: &str) -> Result<(), Failure> {
        self.config.pdp = if selector == "epa" {
            PowerDelayProfile::epa()
        } else {
            PowerDelayProfile::from_json_file(Path::new(selector)).map_err(|e| match e {
                fdtr::Error::Io(io) => Failure::Io(format!("cannot read profile {selector}: {io}")),
                other => Failure::Config(format!("profile {selector}: {other}")),
            })?
        };
        Ok(())
    }
}

/// Takes a possibly absent list: `None` becomes the subcommand default,
/// while an explicitly empty list is a configuration error.
pub fn resolve_list<T: Clone>(
    field: &Option<Vec<T>>,
    default: &[T],
    name: &str,
) -> Result<Vec<T>, Failure> {
    match field {
        None => Ok(default.to_vec()),
        Some(v) if v.is_empty() => Err(Failure::Config(format!("{name} must be non-empty"))),
        Some(v) => Ok(v.clone()),
    }
}
