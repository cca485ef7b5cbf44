//! Experiment configs, the scenario catalog, single runs, parameter sweeps
//! and their JSON or CSV output.

mod catalog;
mod config;
mod results;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use catalog::{config_schema, list_scenarios, params_schema, ScenarioInfo};
pub use config::{
    BoltzmannParams, ContinuityParams, DegenerateCountParams, ExperimentConfig, FreshTrialsParams,
    OutputFormat, OutputSpec, Params, PlanckParams, QbmParams, RealisticSpinParams, Scenario,
    SpinProtocolParams, MAX_K, MAX_MICROBRANCHES,
};
pub use results::{
    BoltzmannResult, BranchRow, ContinuityResult, ContinuityRow, DegenerateCountResult,
    FreshTrialsResult, PartitionSummary, PlanckResult, QbmResult, RealisticSpinResult,
    ScenarioResult, SpinProtocolResult, CONTINUITY_CSV_HEADER, DEFAULT_TAU_SQ_FRACTION,
};

use crate::counting::{DEFAULT_NAIVE_THRESHOLD, ORTHOGONALITY_TOL, SNAP};
use crate::error::{Error, Result};
use crate::histories::{DEFAULT_PRUNE, EXACT_DECOHERENCE, MEDIUM_DECOHERENCE};
use crate::qcore::Tolerances;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit status for a failed run.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// The config was rejected before or while setting up the computation.
    Config,
    /// The computation itself failed or a required check did not hold.
    Numeric,
}

impl ErrorKind {
    pub fn of(err: &Error) -> Self {
        match err {
            Error::Config { .. } | Error::Json(_) | Error::Io(_) | Error::TauTooLarge { .. } => {
                ErrorKind::Config
            }
            _ => ErrorKind::Numeric,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Numeric => EXIT_NUMERIC,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: ErrorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(err: &Error) -> Self {
        let (path, message) = match err {
            Error::Config { path, message } => (Some(path.clone()), message.clone()),
            other => (None, other.to_string()),
        };
        Self { kind: ErrorKind::of(err), path, message }
    }
}

/// Numerical constants in force for every run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRecord {
    pub projector: f64,
    pub hermitian: f64,
    pub unitary: f64,
    pub prune: f64,
    pub naive_threshold: f64,
    pub snap: f64,
    pub orthogonality: f64,
    pub exact_decoherence: f64,
    pub medium_decoherence: f64,
    pub default_tau_sq_fraction: f64,
}

impl Default for ToleranceRecord {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            projector: t.projector,
            hermitian: t.hermitian,
            unitary: t.unitary,
            prune: DEFAULT_PRUNE,
            naive_threshold: DEFAULT_NAIVE_THRESHOLD,
            snap: SNAP,
            orthogonality: ORTHOGONALITY_TOL,
            exact_decoherence: EXACT_DECOHERENCE,
            medium_decoherence: MEDIUM_DECOHERENCE,
            default_tau_sq_fraction: DEFAULT_TAU_SQ_FRACTION,
        }
    }
}

/// Everything a run produced, next to the config that produced it. Exactly
/// one of `result` and `error` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub version: String,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<ScenarioResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub tolerances: ToleranceRecord,
    /// Seconds.
    pub wall_time: f64,
}

impl ResultEnvelope {
    fn failed(config: ExperimentConfig, err: &Error, wall_time: f64) -> Self {
        Self {
            version: VERSION.into(),
            config,
            result: None,
            error: Some(err.into()),
            tolerances: ToleranceRecord::default(),
            wall_time,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelopes always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The result table with its header; failed runs have none.
    pub fn to_csv(&self) -> Result<String> {
        match (&self.result, &self.error) {
            (Some(r), _) => Ok(r.to_csv()),
            (None, Some(e)) => Err(Error::Numeric(format!("no result to tabulate: {}", e.message))),
            (None, None) => Err(Error::Numeric("no result to tabulate".into())),
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => Ok(self.to_json() + "\n"),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

fn evaluate(config: &ExperimentConfig) -> Result<ResultEnvelope> {
    let start = Instant::now();
    let (resolved, params) = config.resolve()?;
    let result = results::execute(&resolved, &params)?;
    Ok(ResultEnvelope {
        version: VERSION.into(),
        config: resolved,
        result: Some(result),
        error: None,
        tolerances: ToleranceRecord::default(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Runs one experiment and, when `config.output.path` is set, writes the
/// envelope there in `config.output.format`.
pub fn run(config: &ExperimentConfig) -> Result<ResultEnvelope> {
    let envelope = evaluate(config)?;
    if let Some(path) = &config.output.path {
        write_output(path, &envelope.render(config.output.format)?)?;
    }
    Ok(envelope)
}

pub fn write_output(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::config("output.path", format!("{}: {e}", path.display())))
}

const TOP_LEVEL_PATHS: [&str; 3] = ["rule", "tau_sq", "seed"];

/// `rule`, `tau_sq`, `seed`, or `params.<name>` for a parameter of the
/// config's scenario.
pub fn check_param_path(scenario: Scenario, param_path: &str) -> Result<()> {
    if TOP_LEVEL_PATHS.contains(&param_path) {
        return Ok(());
    }
    let schema = params_schema(scenario);
    let known = param_path
        .strip_prefix("params.")
        .is_some_and(|name| schema["properties"].get(name).is_some());
    if known {
        Ok(())
    } else {
        Err(Error::config(param_path, format!("not a sweepable parameter of {}", scenario.name())))
    }
}

fn with_value(config: &ExperimentConfig, param_path: &str, value: &Value) -> Result<ExperimentConfig> {
    let mut tree = serde_json::to_value(config)?;
    match param_path.strip_prefix("params.") {
        Some(name) => {
            if !tree["params"].is_object() {
                return Err(Error::config("params", "must be an object"));
            }
            tree["params"][name] = value.clone();
        }
        None => tree[param_path] = value.clone(),
    }
    ExperimentConfig::from_json(&tree.to_string())
}

/// Runs `config` once per entry of `values`, with that value at
/// `param_path`. Points run in parallel and come back in input order; a
/// failed point carries its error in its envelope.
pub fn sweep(config: &ExperimentConfig, param_path: &str, values: &[Value]) -> Result<Vec<ResultEnvelope>> {
    check_param_path(config.scenario, param_path)?;
    Ok(values
        .par_iter()
        .map(|v| {
            let start = Instant::now();
            match with_value(config, param_path, v) {
                Ok(point) => evaluate(&point).unwrap_or_else(|e| {
                    ResultEnvelope::failed(point.clone(), &e, start.elapsed().as_secs_f64())
                }),
                Err(e) => ResultEnvelope::failed(config.clone(), &e, start.elapsed().as_secs_f64()),
            }
        })
        .collect())
}

/// One CSV table for a whole sweep: the point index and swept value lead
/// every row. Failed points contribute no rows.
pub fn sweep_csv(param_path: &str, values: &[Value], envelopes: &[ResultEnvelope]) -> String {
    let header = envelopes
        .iter()
        .find_map(|e| e.result.as_ref().map(|r| r.csv_header()))
        .unwrap_or("");
    let mut out = format!("point,{param_path},{header}\n");
    for (i, (v, e)) in values.iter().zip(envelopes).enumerate() {
        if let Some(r) = &e.result {
            let value = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            for line in r.csv_rows() {
                out.push_str(&format!("{i},{value},{line}\n"));
            }
        }
    }
    out
}

pub fn sweep_json(envelopes: &[ResultEnvelope]) -> String {
    serde_json::to_string_pretty(envelopes).expect("envelopes always serialize") + "\n"
}
