use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use volterra_core::asymptotics::{ConvexFunctional, LimsupConfig, Sequence};
use volterra_core::stochastic::{ClassifierConfig, ForcingKind, Statistic, TailFamily};
use volterra_core::{KernelSpec, Nonlinearity};

use crate::error::CliError;

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    Hash,
    PartialOrd,
    Ord,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Spectrum,
    Classify,
    VerifyGrowth2,
    VerifyGrowth3,
    VerifyPeriodic,
    VerifyErgodic,
    VerifyFluct,
    VerifyPhi,
    Envelope,
    Ensemble,
    VerifyNonlinear,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Spectrum => "spectrum",
            Mode::Classify => "classify",
            Mode::VerifyGrowth2 => "verify-growth2",
            Mode::VerifyGrowth3 => "verify-growth3",
            Mode::VerifyPeriodic => "verify-periodic",
            Mode::VerifyErgodic => "verify-ergodic",
            Mode::VerifyFluct => "verify-fluct",
            Mode::VerifyPhi => "verify-phi",
            Mode::Envelope => "envelope",
            Mode::Ensemble => "ensemble",
            Mode::VerifyNonlinear => "verify-nonlinear",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds of the declared checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative gap between the recursion and the resolvent representation.
    pub representation: f64,
    /// `|sum r(j) lambda^j - L|`.
    pub rho: f64,
    pub growth2: f64,
    pub growth3: f64,
    pub periodic: f64,
    pub ergodic: f64,
    /// Final dyadic block max of `|x - y|/a` for the linearisation check.
    pub nonlinear: f64,
    /// Tail residual of the nonlinear solution against the linear
    /// representation; polynomial scales converge only like `1/n`.
    pub nonlinear_representation: f64,
    pub limsup: LimsupConfig,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            representation: 1e-10,
            rho: 1e-8,
            growth2: 1e-6,
            growth3: 1e-4,
            periodic: 1e-3,
            ergodic: 1e-2,
            nonlinear: 1e-3,
            nonlinear_representation: 1e-2,
            limsup: LimsupConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// Directory for `report.json` and the series CSV files; nothing is
    /// written when absent.
    pub dir: Option<PathBuf>,
    pub write_series: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            dir: None,
            write_series: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    pub tail: TailFamily,
    pub k_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub paths: usize,
    pub statistic: Statistic,
    pub band: (f64, f64),
    #[serde(default = "default_pass_fraction")]
    pub min_pass_fraction: f64,
    /// Optional band for the ensemble median.
    #[serde(default)]
    pub median_band: Option<(f64, f64)>,
}

fn default_pass_fraction() -> f64 {
    0.9
}

fn default_kernel() -> KernelSpec {
    KernelSpec::Zero
}

/// One experiment, as read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May be left out of the file when given on the command line.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub forcing: Option<ForcingKind>,
    #[serde(default)]
    pub scaling: Option<Sequence>,
    #[serde(default)]
    pub nonlinearity: Option<Nonlinearity>,
    #[serde(default)]
    pub xi: f64,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub log_domain: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
    /// Spectrum mode: values of `lambda` at which to evaluate the multiplier.
    #[serde(default)]
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub period_hint: Option<usize>,
    #[serde(default)]
    pub phi: Option<ConvexFunctional>,
    #[serde(default)]
    pub envelope: Option<EnvelopeSection>,
    #[serde(default)]
    pub ensemble: Option<EnsembleSection>,
    /// Tail to classify in classify mode; defaults to the i.i.d. forcing's family.
    #[serde(default)]
    pub tail: Option<TailFamily>,
    #[serde(default)]
    pub classifier: Option<ClassifierConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serialisable")
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        self.mode.ok_or_else(|| {
            CliError::Usage("no mode given in the config or on the command line".into())
        })
    }
}
