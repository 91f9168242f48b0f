//! JSON run configuration.

use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;
use sha2::{Digest, Sha256};
use smallball::bounds::ConstantsMode;
use smallball::gauss::IncrementalVariance;
use smallball::mc::{FitMode, NormKind, DEFAULT_CONFIDENCE};
use smallball::simulate::{DistSpec, DriftSpec, ProcessKind, ProcessSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Bound,
    Estimate,
    Rate,
    Verify,
    Toeplitz,
    Feasibility,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Bound => "bound",
            Command::Estimate => "estimate",
            Command::Rate => "rate",
            Command::Verify => "verify",
            Command::Toeplitz => "toeplitz",
            Command::Feasibility => "feasibility",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedComponent {
    pub weight: f64,
    #[serde(rename = "H")]
    pub hurst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessConfig {
    Fbm {
        #[serde(rename = "H")]
        hurst: f64,
    },
    Brownian,
    /// `σ²(s,t) = Σ w_i |t−s|^{2H_i}`.
    MixedFbm {
        components: Vec<MixedComponent>,
    },
    IidSum {
        distribution: DistSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FitSource {
    /// Monte Carlo estimates inside the fit window.
    #[default]
    Estimate,
    /// Non-vacuous certificate totals.
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default)]
    pub source: FitSource,
    #[serde(default)]
    pub mode: FitMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToeplitzConfig {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_symbol_points")]
    pub symbol_points: usize,
}

impl Default for ToeplitzConfig {
    fn default() -> Self {
        Self {
            sizes: default_sizes(),
            symbol_points: default_symbol_points(),
        }
    }
}

fn default_sizes() -> Vec<usize> {
    vec![64, 256, 1024, 4096]
}

fn default_symbol_points() -> usize {
    4096
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityConfig {
    #[serde(rename = "H")]
    pub hurst: f64,
    pub beta: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub process: Option<ProcessConfig>,
    #[serde(default = "default_drift")]
    pub drift: DriftSpec,
    #[serde(default = "default_norm")]
    pub norm: NormKind,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub n_paths: Option<usize>,
    #[serde(default)]
    pub grid_steps: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub constants_mode: ConstantsMode,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub toeplitz: ToeplitzConfig,
    #[serde(default)]
    pub feasibility: Option<FeasibilityConfig>,
    /// Directory for artifacts; must exist. Not part of the digest.
    #[serde(default, skip_serializing)]
    pub out_dir: Option<String>,
}

fn default_drift() -> DriftSpec {
    DriftSpec::None
}

fn default_norm() -> NormKind {
    NormKind::Sup
}

fn default_horizon() -> f64 {
    1.0
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

/// `/a/0/b` from a deserialization path.
fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1")))
            }
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

fn schema(pointer: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn in_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Parse and validate a configuration document.
/// `ε` suite used when a command needs one and none is given.
pub const DEFAULT_EPSILON: [f64; 6] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: RunConfig =
        serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Config {
            pointer: pointer(e.path()),
            message: e.inner().to_string(),
        })?;
    de.end().map_err(|e| schema("", e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.process {
            Some(ProcessConfig::Fbm { hurst }) if !in_unit_interval(*hurst) => {
                return Err(schema("/process/H", "H must lie in (0,1)"));
            }
            Some(ProcessConfig::MixedFbm { components }) => {
                if components.is_empty() {
                    return Err(schema(
                        "/process/components",
                        "at least one component is required",
                    ));
                }
                for (i, c) in components.iter().enumerate() {
                    if !in_unit_interval(c.hurst) {
                        return Err(schema(
                            &format!("/process/components/{i}/H"),
                            "H must lie in (0,1)",
                        ));
                    }
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return Err(schema(
                            &format!("/process/components/{i}/weight"),
                            "weight must be positive",
                        ));
                    }
                }
            }
            Some(ProcessConfig::IidSum { distribution }) => {
                distribution
                    .validate()
                    .map_err(|e| schema("/process/distribution", e.to_string()))?;
            }
            _ => {}
        }
        match self.drift {
            DriftSpec::FbmDrift { hurst } if !in_unit_interval(hurst) => {
                return Err(schema("/drift/hurst", "H must lie in (0,1)"));
            }
            DriftSpec::Constant { level } if !level.is_finite() => {
                return Err(schema("/drift/level", "level must be finite"));
            }
            DriftSpec::BoundedWave {
                amplitude,
                frequency,
            } if !(amplitude.is_finite() && frequency.is_finite()) => {
                return Err(schema("/drift", "amplitude and frequency must be finite"));
            }
            _ => {}
        }
        if let NormKind::Holder { beta } = self.norm {
            if !in_unit_interval(beta) {
                return Err(schema("/norm/beta", "beta must lie in (0,1)"));
            }
        }
        for (i, e) in self.epsilon.iter().enumerate() {
            if !(*e > 0.0 && e.is_finite()) {
                return Err(schema(
                    &format!("/epsilon/{i}"),
                    "epsilon must be positive and finite",
                ));
            }
        }
        if self.epsilon.windows(2).any(|w| w[0] >= w[1]) {
            return Err(schema(
                "/epsilon",
                "epsilon values must be strictly increasing",
            ));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(schema("/horizon", "horizon must be positive"));
        }
        if !in_unit_interval(self.confidence) {
            return Err(schema("/confidence", "confidence must lie in (0,1)"));
        }
        if self.n_paths == Some(0) {
            return Err(schema("/n_paths", "n_paths must be positive"));
        }
        if self.grid_steps == Some(0) {
            return Err(schema("/grid_steps", "grid_steps must be positive"));
        }
        if self.toeplitz.sizes.contains(&0) {
            return Err(schema("/toeplitz/sizes", "sizes must be positive"));
        }
        if let Some(f) = &self.feasibility {
            if !(f.hurst.is_finite() && f.beta.is_finite() && f.theta.is_finite()) {
                return Err(schema("/feasibility", "parameters must be finite"));
            }
        }
        Ok(())
    }

    /// Simulation steps: explicit, else `2¹¹` for the Hölder norm and `2¹³` otherwise.
    pub fn steps(&self) -> usize {
        self.grid_steps.unwrap_or(match self.norm {
            NormKind::Holder { .. } => 1 << 11,
            _ => 1 << 13,
        })
    }

    pub fn paths(&self, command: Command) -> usize {
        self.n_paths.unwrap_or(match command {
            Command::Simulate => 1,
            _ => 100_000,
        })
    }

    pub fn require_process(&self) -> Result<&ProcessConfig, CliError> {
        self.process
            .as_ref()
            .ok_or_else(|| schema("/process", "a process is required for this command"))
    }

    /// Fills omitted defaults that depend on the command.
    pub fn fill_defaults(&mut self, command: Command) {
        self.command = Some(command);
        self.n_paths = Some(self.paths(command));
        self.grid_steps = Some(self.steps());
        let needs_epsilon = matches!(
            command,
            Command::Bound | Command::Estimate | Command::Rate | Command::Verify
        );
        if needs_epsilon && self.epsilon.is_empty() {
            self.epsilon = DEFAULT_EPSILON.to_vec();
        }
    }

    pub fn require_epsilon(&self) -> Result<&[f64], CliError> {
        if self.epsilon.is_empty() {
            return Err(schema(
                "/epsilon",
                "at least one epsilon is required for this command",
            ));
        }
        Ok(&self.epsilon)
    }

    pub fn process_spec(&self) -> Result<ProcessSpec, CliError> {
        let kind = match self.require_process()? {
            ProcessConfig::Fbm { hurst } => ProcessKind::Fbm { hurst: *hurst },
            ProcessConfig::Brownian => ProcessKind::Brownian,
            ProcessConfig::MixedFbm { components } => {
                ProcessKind::GaussianGeneric(IncrementalVariance::mixed_fbm(
                    components.iter().map(|c| (c.weight, c.hurst)).collect(),
                )?)
            }
            ProcessConfig::IidSum { distribution } => ProcessKind::IidSum(*distribution),
        };
        Ok(ProcessSpec::new(kind, self.drift))
    }

    /// SHA-256 of the canonical JSON form, without the output directory.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}
