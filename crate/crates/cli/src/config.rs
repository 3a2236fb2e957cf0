//! Run configuration: a JSON document naming one experiment, its base
//! parameters, up to three sweep axes, numerics and output settings.

use std::collections::BTreeMap;
use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

pub const MAX_SWEEP_AXES: usize = 3;

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct RunConfig {
    /// Label used for default output file names.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub experiment: Experiment,
    /// Swept parameters; each overrides the matching base parameter.
    #[serde(default)]
    pub sweep: BTreeMap<Axis, AxisValues>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "experiment", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    HeatExchange(HeatExchangeParams),
    Dephasing(DephasingParams),
    MeanForce(MeanForceParams),
    ScalingHe(ScalingHeParams),
    ScalingDeph(ScalingDephParams),
    CrossValidate(CrossValidateParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::HeatExchange(_) => "heat-exchange",
            Experiment::Dephasing(_) => "dephasing",
            Experiment::MeanForce(_) => "mean-force",
            Experiment::ScalingHe(_) => "scaling-he",
            Experiment::ScalingDeph(_) => "scaling-deph",
            Experiment::CrossValidate(_) => "cross-validate",
        }
    }

    fn allowed_axes(&self) -> &'static [Axis] {
        use Axis::*;
        match self {
            Experiment::HeatExchange(_) => &[Beta, T, G, Delta],
            Experiment::Dephasing(_) => &[Beta, T, G],
            Experiment::MeanForce(_) => &[Beta, G],
            Experiment::ScalingHe(_) => &[Beta, Delta, S, Alpha, OmegaC],
            Experiment::ScalingDeph(_) => &[Beta, T, S, Alpha, OmegaC],
            Experiment::CrossValidate(_) => &[],
        }
    }
}

/// Sweepable parameter names, in the order they vary (slowest first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Beta,
    T,
    G,
    Delta,
    S,
    Alpha,
    OmegaC,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Beta => "beta",
            Axis::T => "t",
            Axis::G => "g",
            Axis::Delta => "delta",
            Axis::S => "s",
            Axis::Alpha => "alpha",
            Axis::OmegaC => "omega_c",
        }
    }

    /// Whether every value on this axis must be strictly positive.
    fn positive(self) -> bool {
        !matches!(self, Axis::T | Axis::G | Axis::Delta | Axis::S)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum AxisValues {
    List(Vec<f64>),
    Generated(Generator),
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Linspace { from: f64, to: f64, count: usize },
    Geomspace { from: f64, to: f64, count: usize },
}

impl AxisValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisValues::List(v) => v.clone(),
            AxisValues::Generated(Generator::Linspace { from, to, count }) => match count {
                0 => vec![],
                1 => vec![*from],
                n => (0..*n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
            },
            AxisValues::Generated(Generator::Geomspace { from, to, count }) => {
                thermoq::closed_form::geomspace(*from, *to, *count)
            }
        }
    }
}

/// Time of measurement: a value, or the first instant of maximal swap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum TimeSpec {
    Value(f64),
    Keyword(TimeKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum TimeKeyword {
    Optimal,
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec::Keyword(TimeKeyword::Optimal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub omega: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    pub alpha: f64,
    pub s: f64,
    pub omega_c: f64,
}

/// Coupled-oscillator probe in vacuum, Fock-basis measurement.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HeatExchangeParams {
    pub omega_0: f64,
    /// Probe frequency; defaults to `omega_0 + 2·delta`, or resonance.
    #[serde(default)]
    pub omega_a: Option<f64>,
    /// Detuning `(omega_a − omega_0)/2`; alternative to `omega_a`.
    #[serde(default)]
    pub delta: Option<f64>,
    pub g: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub t: TimeSpec,
    /// Emit one row per measurement outcome.
    #[serde(default)]
    pub per_outcome: bool,
}

/// Qubit in `|+⟩` with σ_z coupling to explicit modes, σ_x measurement.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DephasingParams {
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub per_outcome: bool,
}

/// Spin-boson model at global equilibrium.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MeanForceParams {
    pub omega_q: f64,
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DetuningSpec {
    /// Same Δ at every temperature.
    Fixed(f64),
    /// Δ as a fraction of the effective coupling.
    CouplingFraction(f64),
}

impl Default for DetuningSpec {
    fn default() -> Self {
        DetuningSpec::Fixed(0.5)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScalingHeParams {
    pub spectral: SpectralSpec,
    #[serde(default)]
    pub detuning: DetuningSpec,
    /// Fail when the fitted slope misses `(1+s)/2` by more than this.
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScalingDephParams {
    pub spectral: SpectralSpec,
    pub t: f64,
    #[serde(default = "default_modes")]
    pub k_modes: usize,
    pub omega_max: f64,
    /// Fail when the fitted slope misses `1+s` by more than this.
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CrossValidateParams {
    pub seed: u64,
    pub draws: usize,
    #[serde(default)]
    pub tamper: TamperSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TamperSpec {
    #[default]
    None,
    FlipCorrelationSign,
    DropInverseProbability,
}

impl From<TamperSpec> for thermoq::Tamper {
    fn from(t: TamperSpec) -> Self {
        match t {
            TamperSpec::None => thermoq::Tamper::None,
            TamperSpec::FlipCorrelationSign => thermoq::Tamper::FlipCorrelationSign,
            TamperSpec::DropInverseProbability => thermoq::Tamper::DropInverseProbability,
        }
    }
}

fn default_slope_tolerance() -> Option<f64> {
    Some(0.1)
}

fn default_modes() -> usize {
    5000
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Fixed Fock cutoff for every mode; overrides `truncation_tail`.
    #[serde(default)]
    pub n_max: Option<usize>,
    /// Thermal tail weight left out by the automatic cutoff.
    #[serde(default = "Numerics::default_tail")]
    pub truncation_tail: f64,
    /// Largest automatic cutoff per mode.
    #[serde(default = "Numerics::default_max_cutoff")]
    pub max_cutoff: usize,
    /// Largest composite dimension a point may use.
    #[serde(default = "Numerics::default_max_dim")]
    pub max_dim: usize,
    /// Finite-difference step relative to β.
    #[serde(default = "Numerics::default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "Numerics::default_prob_floor")]
    pub prob_floor: f64,
}

impl Numerics {
    fn default_tail() -> f64 {
        1e-12
    }
    fn default_max_cutoff() -> usize {
        40
    }
    fn default_max_dim() -> usize {
        2048
    }
    fn default_fd_step() -> f64 {
        1e-4
    }
    fn default_prob_floor() -> f64 {
        thermoq::PROB_FLOOR
    }
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_max: None,
            truncation_tail: Self::default_tail(),
            max_cutoff: Self::default_max_cutoff(),
            max_dim: Self::default_max_dim(),
            fd_step: Self::default_fd_step(),
            prob_floor: Self::default_prob_floor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Result file; relative paths resolve against the output directory.
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// One sweep point: axis → value, in axis order.
pub type Point = Vec<(Axis, f64)>;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, UsageError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| UsageError(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String), UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Ok((Self::from_json(&text)?, text))
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        if self.sweep.len() > MAX_SWEEP_AXES {
            return Err(UsageError(format!(
                "at most {MAX_SWEEP_AXES} sweep axes are allowed, found {}",
                self.sweep.len()
            )));
        }
        let allowed = self.experiment.allowed_axes();
        for (axis, values) in &self.sweep {
            if !allowed.contains(axis) {
                return Err(UsageError(format!(
                    "axis '{}' cannot be swept in a {} experiment",
                    axis.name(),
                    self.experiment.kind()
                )));
            }
            let v = values.values();
            if v.is_empty() {
                return Err(UsageError(format!("axis '{}' has no values", axis.name())));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite() || (axis.positive() && **x <= 0.0)) {
                return Err(UsageError(format!("axis '{}' has invalid value {x}", axis.name())));
            }
            if *axis == Axis::T && v.iter().any(|x| *x < 0.0) {
                return Err(UsageError("axis 't' must be non-negative".into()));
            }
        }
        let n = &self.numerics;
        if !(n.truncation_tail > 0.0 && n.truncation_tail < 1.0) {
            return Err(UsageError("numerics.truncation_tail must lie in (0, 1)".into()));
        }
        if !(n.fd_step > 0.0 && n.fd_step <= 0.1) {
            return Err(UsageError("numerics.fd_step must lie in (0, 0.1]".into()));
        }
        if !(n.prob_floor > 0.0 && n.prob_floor < 1.0) {
            return Err(UsageError("numerics.prob_floor must lie in (0, 1)".into()));
        }
        if n.n_max == Some(0) || n.max_cutoff == 0 {
            return Err(UsageError("Fock cutoffs must be at least 1".into()));
        }
        match &self.experiment {
            Experiment::ScalingHe(_) | Experiment::ScalingDeph(_) => {
                let betas = self.sweep.get(&Axis::Beta).map(|v| v.values().len()).unwrap_or(0);
                if betas < 4 {
                    return Err(UsageError("scaling experiments need a 'beta' axis with at least 4 values".into()));
                }
            }
            Experiment::CrossValidate(p) if p.draws == 0 => {
                return Err(UsageError("draws must be at least 1".into()));
            }
            Experiment::Dephasing(p) if p.modes.is_empty() => {
                return Err(UsageError("dephasing needs at least one mode".into()));
            }
            Experiment::MeanForce(p) if p.modes.is_empty() => {
                return Err(UsageError("mean-force needs at least one mode".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// Cartesian product of the sweep axes, first axis slowest.
    pub fn points(&self) -> Vec<Point> {
        let mut points: Vec<Point> = vec![Vec::new()];
        for (axis, values) in &self.sweep {
            let values = values.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((*axis, v));
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.kind().to_string())
    }
}

pub fn lookup(point: &Point, axis: Axis) -> Option<f64> {
    point.iter().find(|(a, _)| *a == axis).map(|(_, v)| *v)
}

/// Hex SHA-256 of the raw config text.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON Schema of [`RunConfig`].
pub fn schema_json() -> String {
    serde_json::to_string_pretty(&schemars::schema_for!(RunConfig)).expect("schema serialises")
}
