use std::f64::consts::FRAC_PI_3;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::counting::Rule;
use crate::error::{Error, Result};
use crate::histories::EXACT_DECOHERENCE;
use crate::models::{QbmLattice, MAX_MEASUREMENTS, MAX_TRIALS};
use crate::statmech::MAX_ENUMERATION;

/// Largest `n_up + n_down` accepted for the microbranch apparatus.
pub const MAX_MICROBRANCHES: usize = 2048;
/// Largest `k_max` accepted for the continuity family.
pub const MAX_K: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SpinProtocol,
    FreshTrials,
    RealisticSpin,
    Continuity,
    Qbm,
    Planck,
    Boltzmann,
    DegenerateCount,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::SpinProtocol,
        Scenario::FreshTrials,
        Scenario::RealisticSpin,
        Scenario::Continuity,
        Scenario::Qbm,
        Scenario::Planck,
        Scenario::Boltzmann,
        Scenario::DegenerateCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SpinProtocol => "spin_protocol",
            Scenario::FreshTrials => "fresh_trials",
            Scenario::RealisticSpin => "realistic_spin",
            Scenario::Continuity => "continuity",
            Scenario::Qbm => "qbm",
            Scenario::Planck => "planck",
            Scenario::Boltzmann => "boltzmann",
            Scenario::DegenerateCount => "degenerate_count",
        }
    }

    /// Whether `rule` and `tau_sq` mean anything for this scenario.
    pub fn takes_rule(self) -> bool {
        !matches!(self, Scenario::Planck | Scenario::Boltzmann | Scenario::DegenerateCount)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_sq: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ExperimentConfig {
    /// Default parameters for `scenario`.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            params: empty_object(),
            rule: None,
            tau_sq: None,
            seed: 0,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = Some(rule);
        self
    }

    pub fn with_tau_sq(mut self, tau_sq: f64) -> Self {
        self.tau_sq = Some(tau_sq);
        self
    }

    /// Checks everything that can be checked without computing, and returns
    /// the config with defaults filled in next to its typed parameters.
    pub fn resolve(&self) -> Result<(ExperimentConfig, Params)> {
        let params = Params::parse(self.scenario, &self.params)?;
        params.validate()?;
        let mut resolved = self.clone();
        resolved.params = params.to_value();
        if self.scenario.takes_rule() {
            resolved.rule = Some(self.rule.unwrap_or(Rule::Naive));
        } else if self.rule.is_some() {
            return Err(Error::config("rule", format!("{} takes no counting rule", self.scenario.name())));
        }
        if let Some(t) = self.tau_sq {
            if !self.scenario.takes_rule() {
                return Err(Error::config("tau_sq", format!("{} takes no tau_sq", self.scenario.name())));
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config("tau_sq", format!("must be positive, got {t}")));
            }
            if resolved.rule != Some(Rule::EquiAmplitude) {
                return Err(Error::config("tau_sq", "only the equi_amplitude rule uses tau_sq"));
            }
        }
        Ok((resolved, params))
    }
}

/// Typed parameters of one scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    SpinProtocol(SpinProtocolParams),
    FreshTrials(FreshTrialsParams),
    RealisticSpin(RealisticSpinParams),
    Continuity(ContinuityParams),
    Qbm(QbmParams),
    Planck(PlanckParams),
    Boltzmann(BoltzmannParams),
    DegenerateCount(DegenerateCountParams),
}

fn parse_as<T: DeserializeOwned>(value: &Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { "params".to_string() } else { format!("params.{inner}") };
        Error::config(path, e.into_inner().to_string())
    })
}

impl Params {
    pub fn parse(scenario: Scenario, value: &Value) -> Result<Self> {
        Ok(match scenario {
            Scenario::SpinProtocol => Params::SpinProtocol(parse_as(value)?),
            Scenario::FreshTrials => Params::FreshTrials(parse_as(value)?),
            Scenario::RealisticSpin => Params::RealisticSpin(parse_as(value)?),
            Scenario::Continuity => Params::Continuity(parse_as(value)?),
            Scenario::Qbm => Params::Qbm(parse_as(value)?),
            Scenario::Planck => Params::Planck(parse_as(value)?),
            Scenario::Boltzmann => Params::Boltzmann(parse_as(value)?),
            Scenario::DegenerateCount => Params::DegenerateCount(parse_as(value)?),
        })
    }

    pub fn to_value(&self) -> Value {
        let v = match self {
            Params::SpinProtocol(p) => serde_json::to_value(p),
            Params::FreshTrials(p) => serde_json::to_value(p),
            Params::RealisticSpin(p) => serde_json::to_value(p),
            Params::Continuity(p) => serde_json::to_value(p),
            Params::Qbm(p) => serde_json::to_value(p),
            Params::Planck(p) => serde_json::to_value(p),
            Params::Boltzmann(p) => serde_json::to_value(p),
            Params::DegenerateCount(p) => serde_json::to_value(p),
        };
        v.expect("plain parameter structs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Params::SpinProtocol(p) => p.validate(),
            Params::FreshTrials(p) => p.validate(),
            Params::RealisticSpin(p) => p.validate(),
            Params::Continuity(p) => p.validate(),
            Params::Qbm(p) => p.validate(),
            Params::Planck(p) => p.validate(),
            Params::Boltzmann(p) => p.validate(),
            Params::DegenerateCount(p) => p.validate(),
        }
    }
}

fn require(ok: bool, field: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(format!("params.{field}"), message))
    }
}

fn finite(x: f64, field: &str) -> Result<()> {
    require(x.is_finite(), field, format!("must be finite, got {x}"))
}

fn positive(x: f64, field: &str) -> Result<()> {
    require(x > 0.0 && x.is_finite(), field, format!("must be positive, got {x}"))
}

/// Repeated measurement of `cos θ|↑> + sin θ|↓>` with a recording memory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinProtocolParams {
    pub theta: f64,
    pub measurements: usize,
    pub epsilon_dec: f64,
    /// Fail the run when the branches do not decohere within `epsilon_dec`.
    pub require_decoherence: bool,
}

impl Default for SpinProtocolParams {
    fn default() -> Self {
        Self { theta: FRAC_PI_3, measurements: 2, epsilon_dec: EXACT_DECOHERENCE, require_decoherence: false }
    }
}

impl SpinProtocolParams {
    fn validate(&self) -> Result<()> {
        finite(self.theta, "theta")?;
        require(
            (1..=MAX_MEASUREMENTS).contains(&self.measurements),
            "measurements",
            format!("must lie in 1..={MAX_MEASUREMENTS}"),
        )?;
        require(self.epsilon_dec >= 0.0 && self.epsilon_dec.is_finite(), "epsilon_dec", "must be non-negative")
    }
}

/// `trials` fresh spins with `|a|² = p_up` (normalized), each measured once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreshTrialsParams {
    pub p_up: f64,
    pub trials: usize,
    /// Closed range of up-frequencies whose total weight is reported.
    pub window: [f64; 2],
}

impl Default for FreshTrialsParams {
    fn default() -> Self {
        Self { p_up: 0.3, trials: 12, window: [0.15, 0.45] }
    }
}

impl FreshTrialsParams {
    fn validate(&self) -> Result<()> {
        require((0.0..=1.0).contains(&self.p_up), "p_up", "must lie in [0, 1]")?;
        require((1..=MAX_TRIALS).contains(&self.trials), "trials", format!("must lie in 1..={MAX_TRIALS}"))?;
        require(
            self.window[0].is_finite() && self.window[1].is_finite() && self.window[0] <= self.window[1],
            "window",
            "must be an ordered pair of finite numbers",
        )
    }
}

/// One measurement of `cos θ|↑> + sin θ|↓>` by an apparatus with many
/// orthogonal microrecords per outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RealisticSpinParams {
    pub theta: f64,
    pub n_up: usize,
    pub n_down: usize,
    /// Draw microbranch weights from the seeded generator instead of using
    /// equal ones.
    pub nonuniform: bool,
    /// When set, also build the clusters of weight `τ²(1 ± rho)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl Default for RealisticSpinParams {
    fn default() -> Self {
        Self { theta: FRAC_PI_3, n_up: 256, n_down: 256, nonuniform: false, rho: None }
    }
}

fn microbranches(n_up: usize, n_down: usize) -> Result<()> {
    require(n_up >= 1, "n_up", "must be at least 1")?;
    require(n_down >= 1, "n_down", "must be at least 1")?;
    require(
        n_up + n_down <= MAX_MICROBRANCHES,
        "n_down",
        format!("n_up + n_down must not exceed {MAX_MICROBRANCHES}"),
    )
}

impl RealisticSpinParams {
    fn validate(&self) -> Result<()> {
        finite(self.theta, "theta")?;
        microbranches(self.n_up, self.n_down)?;
        if let Some(rho) = self.rho {
            require(rho > 0.0 && rho < 1.0, "rho", "must lie in (0, 1)")?;
        }
        Ok(())
    }
}

/// The family `θ_k = π/(2k+1)`, `k = 1..=k_max`, and its limit `|↑>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuityParams {
    pub k_max: usize,
    pub n_up: usize,
    pub n_down: usize,
}

impl Default for ContinuityParams {
    fn default() -> Self {
        Self { k_max: 50, n_up: 3, n_down: 2 }
    }
}

impl ContinuityParams {
    fn validate(&self) -> Result<()> {
        require((1..=MAX_K).contains(&self.k_max), "k_max", format!("must lie in 1..={MAX_K}"))?;
        microbranches(self.n_up, self.n_down)
    }
}

/// Lattice particle with environment records; see [`QbmLattice`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QbmParams {
    pub cells: usize,
    pub env_levels: usize,
    pub hop: f64,
    pub steps: usize,
    pub record_strength: f64,
    pub dt: f64,
    pub epsilon_dec: f64,
    pub require_decoherence: bool,
}

impl Default for QbmParams {
    fn default() -> Self {
        let l = QbmLattice::default();
        Self {
            cells: l.cells,
            env_levels: l.env_levels,
            hop: l.hop,
            steps: l.steps,
            record_strength: l.record_strength,
            dt: l.dt,
            epsilon_dec: EXACT_DECOHERENCE,
            require_decoherence: false,
        }
    }
}

impl QbmParams {
    pub fn lattice(&self) -> QbmLattice {
        QbmLattice {
            cells: self.cells,
            env_levels: self.env_levels,
            hop: self.hop,
            steps: self.steps,
            record_strength: self.record_strength,
            dt: self.dt,
        }
    }

    fn validate(&self) -> Result<()> {
        require(self.epsilon_dec >= 0.0 && self.epsilon_dec.is_finite(), "epsilon_dec", "must be non-negative")?;
        self.lattice().validate().map_err(|e| Error::config("params", e.to_string()))
    }
}

/// Modes of `z[s]` oscillators with quantum energy `energies[s]` sharing
/// `total_energy`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanckParams {
    pub z: Vec<u64>,
    pub energies: Vec<f64>,
    pub total_energy: f64,
}

impl Default for PlanckParams {
    fn default() -> Self {
        Self { z: vec![10_000; 5], energies: vec![1.0, 2.0, 3.0, 4.0, 5.0], total_energy: 25_000.0 }
    }
}

impl PlanckParams {
    fn validate(&self) -> Result<()> {
        require(!self.z.is_empty(), "z", "needs at least one mode")?;
        require(
            self.z.len() == self.energies.len(),
            "energies",
            format!("has {} entries, z has {}", self.energies.len(), self.z.len()),
        )?;
        for (s, z) in self.z.iter().enumerate() {
            require(*z >= 1, &format!("z.{s}"), "must be at least 1")?;
        }
        for (s, e) in self.energies.iter().enumerate() {
            positive(*e, &format!("energies.{s}"))?;
        }
        positive(self.total_energy, "total_energy")
    }
}

/// Two phase-space volumes counted with a list of cell sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoltzmannParams {
    pub volumes: [f64; 2],
    pub eps: Vec<f64>,
    pub k_b: f64,
}

impl Default for BoltzmannParams {
    fn default() -> Self {
        Self {
            volumes: [std::f64::consts::SQRT_2, 1.0],
            eps: (0..14).map(|i| 1e-2 / f64::from(1u32 << i)).collect(),
            k_b: 1.0,
        }
    }
}

impl BoltzmannParams {
    fn validate(&self) -> Result<()> {
        positive(self.volumes[0], "volumes.0")?;
        positive(self.volumes[1], "volumes.1")?;
        require(!self.eps.is_empty(), "eps", "needs at least one cell size")?;
        for (i, e) in self.eps.iter().enumerate() {
            positive(*e, &format!("eps.{i}"))?;
        }
        positive(self.k_b, "k_b")
    }
}

/// Every `1 ≤ z ≤ z_max`, `0 ≤ n ≤ n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegenerateCountParams {
    pub z_max: u64,
    pub n_max: u64,
}

impl Default for DegenerateCountParams {
    fn default() -> Self {
        Self { z_max: 6, n_max: 6 }
    }
}

impl DegenerateCountParams {
    fn validate(&self) -> Result<()> {
        require(self.z_max >= 1, "z_max", "must be at least 1")?;
        let tuples = (self.z_max as f64).powf(self.n_max as f64);
        require(
            tuples <= MAX_ENUMERATION as f64,
            "n_max",
            format!("z_max^n_max = {tuples} exceeds {MAX_ENUMERATION}"),
        )
    }
}
