//! TOML scenario files and the compiled-in benchmark scenarios.

use std::fs;
use std::path::{Path, PathBuf};

use ahosm::analysis::SamplingOptions;
use ahosm::simulator::DEFAULT_BLOWUP_GUARD;
use ahosm::{
    AdaptiveConfig, ChainConfig, ConfigError, GainFunction, Method, Signal, SignalTerm,
    SimulationSpec, Stabilizer, StateVector, UncertaintyModel,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Built-in scenarios as `(name, toml source)`.
pub const BUILTIN: [(&str, &str); 2] = [
    (
        "paper-order1",
        include_str!("../scenarios/paper-order1.toml"),
    ),
    (
        "paper-order3",
        include_str!("../scenarios/paper-order3.toml"),
    ),
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{origin}: {source}")]
    Invalid { origin: String, source: ConfigError },
    #[error("unknown built-in scenario {0:?} (available: paper-order1, paper-order3)")]
    UnknownBuiltin(String),
    #[error("{0}: scenario has no [adaptive] section")]
    MissingAdaptive(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub chain: ChainSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveSection>,
    pub uncertainty: UncertaintySection,
    pub simulation: SimulationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    /// Hong's recursive stabilizer; needs `r`, `p`, `kappa` and `gains`.
    Hong,
    /// First-order `u0 = -sgn(z1)`; takes no other keys.
    Sign,
}

/// Kept flat, not tagged, so unknown keys are reported at their own line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub kind: ChainKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<f64>>,
    /// Overrides the derived exponents; only useful for mutation checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
}

impl ChainSection {
    pub fn sign() -> Self {
        Self {
            kind: ChainKind::Sign,
            r: None,
            p: None,
            kappa: None,
            gains: None,
            betas: None,
        }
    }

    pub fn hong(r: usize, p: f64, kappa: f64, gains: Vec<f64>) -> Self {
        Self {
            kind: ChainKind::Hong,
            r: Some(r),
            p: Some(p),
            kappa: Some(kappa),
            gains: Some(gains),
            betas: None,
        }
    }

    fn check(&self) -> Result<(), String> {
        let present = [
            ("r", self.r.is_some()),
            ("p", self.p.is_some()),
            ("kappa", self.kappa.is_some()),
            ("gains", self.gains.is_some()),
            ("betas", self.betas.is_some()),
        ];
        match self.kind {
            ChainKind::Sign => match present.iter().find(|(_, set)| *set) {
                Some((key, _)) => Err(format!("chain kind \"sign\" takes no `{key}` key")),
                None => Ok(()),
            },
            ChainKind::Hong => match present[..4].iter().find(|(_, set)| !*set) {
                Some((key, _)) => Err(format!("chain kind \"hong\" requires `{key}`")),
                None => Ok(()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSection {
    pub epsilon: f64,
    pub k: f64,
    pub gain: GainFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySection {
    pub phi_bar: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    #[serde(default)]
    pub phi: Vec<SignalTerm>,
    #[serde(default)]
    pub gamma: Vec<SignalTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub z0: Vec<f64>,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "one")]
    pub record_stride: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_guard")]
    pub blowup_guard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub samples: usize,
}

fn one() -> usize {
    1
}

fn default_guard() -> f64 {
    DEFAULT_BLOWUP_GUARD
}

/// A parsed scenario together with a short name used for output files.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub file: ScenarioFile,
}

impl ScenarioFile {
    pub fn parse(source: &str, origin: &str) -> Result<Self, ScenarioError> {
        let parse_err = |message: String| ScenarioError::Parse {
            origin: origin.to_string(),
            message,
        };
        let file: Self = toml::from_str(source).map_err(|e| parse_err(e.to_string()))?;
        file.chain.check().map_err(parse_err)?;
        Ok(file)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario values are representable in TOML")
    }

    pub fn stabilizer(&self) -> Result<Stabilizer, ConfigError> {
        let c = &self.chain;
        match c.kind {
            ChainKind::Sign => Ok(Stabilizer::Sign),
            ChainKind::Hong => {
                let (Some(r), Some(p), Some(kappa), Some(gains)) = (c.r, c.p, c.kappa, &c.gains)
                else {
                    unreachable!("checked when parsed")
                };
                let cfg = ChainConfig::new(r, p, kappa, gains.clone())?;
                match &c.betas {
                    Some(b) => cfg.with_betas(b.clone()).map(Stabilizer::Hong),
                    None => Ok(Stabilizer::Hong(cfg)),
                }
            }
        }
    }

    pub fn adaptive_config(&self) -> Result<Option<AdaptiveConfig>, ConfigError> {
        self.adaptive
            .as_ref()
            .map(|a| AdaptiveConfig::new(a.epsilon, a.k, a.gain))
            .transpose()
    }

    pub fn uncertainty_model(&self) -> Result<UncertaintyModel, ConfigError> {
        let u = &self.uncertainty;
        UncertaintyModel::new(
            Signal(u.phi.clone()),
            Signal(u.gamma.clone()),
            u.phi_bar,
            u.gamma_min,
            u.gamma_max,
        )
    }

    /// Builds and validates the simulation described by the file.
    pub fn simulation_spec(&self) -> Result<SimulationSpec, ConfigError> {
        let s = &self.simulation;
        let spec = SimulationSpec {
            stabilizer: self.stabilizer()?,
            adaptive: self.adaptive_config()?,
            uncertainty: self.uncertainty_model()?,
            z0: StateVector::new(s.z0.clone())?,
            dt: s.dt,
            t_final: s.t_final,
            method: s.method,
            record_stride: s.record_stride,
            blowup_guard: s.blowup_guard,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sampling(&self) -> SamplingOptions {
        let mut opts = SamplingOptions {
            seed: self.simulation.seed,
            ..SamplingOptions::default()
        };
        if let Some(a) = &self.analysis {
            opts.samples = a.samples;
        }
        opts
    }
}

impl Scenario {
    /// Reads `arg` as a file path, falling back to a built-in name when no
    /// such file exists.
    pub fn load(arg: &str) -> Result<Self, ScenarioError> {
        let path = Path::new(arg);
        if !path.exists() {
            if let Some(src) = builtin_source(arg) {
                return Ok(Self {
                    name: arg.to_string(),
                    file: ScenarioFile::parse(src, arg)?,
                });
            }
        }
        let source = fs::read_to_string(path).map_err(|source| ScenarioError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_string());
        Ok(Self {
            name,
            file: ScenarioFile::parse(&source, arg)?,
        })
    }

    pub fn builtin(name: &str) -> Result<Self, ScenarioError> {
        let src =
            builtin_source(name).ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_string()))?;
        Ok(Self {
            name: name.to_string(),
            file: ScenarioFile::parse(src, name)?,
        })
    }

    pub fn simulation_spec(&self) -> Result<SimulationSpec, ScenarioError> {
        self.file
            .simulation_spec()
            .map_err(|source| self.invalid(source))
    }

    pub fn stabilizer(&self) -> Result<Stabilizer, ScenarioError> {
        self.file
            .stabilizer()
            .map_err(|source| self.invalid(source))
    }

    pub fn uncertainty_model(&self) -> Result<UncertaintyModel, ScenarioError> {
        self.file
            .uncertainty_model()
            .map_err(|source| self.invalid(source))
    }

    pub fn adaptive_config(&self) -> Result<AdaptiveConfig, ScenarioError> {
        self.file
            .adaptive_config()
            .map_err(|source| self.invalid(source))?
            .ok_or_else(|| ScenarioError::MissingAdaptive(self.name.clone()))
    }

    fn invalid(&self, source: ConfigError) -> ScenarioError {
        ScenarioError::Invalid {
            origin: self.name.clone(),
            source,
        }
    }
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
}
