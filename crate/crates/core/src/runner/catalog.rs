use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Params, Scenario, MAX_K, MAX_MICROBRANCHES};
use crate::models::{MAX_MEASUREMENTS, MAX_TRIALS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub scenario: Scenario,
    /// The result of the underlying argument this scenario reproduces.
    pub reproduces: String,
    pub description: String,
    pub takes_rule: bool,
    pub params_schema: Value,
}

fn reproduces(s: Scenario) -> &'static str {
    match s {
        Scenario::SpinProtocol => "repeated measurement: records of successive measurements agree",
        Scenario::FreshTrials => "law of large numbers over independently prepared trials",
        Scenario::RealisticSpin => "Born-rule agreement of equi-amplitude counting",
        Scenario::Continuity => "discontinuity of branch counting along a convergent family of states",
        Scenario::Qbm => "decoherence of coarse-grained position histories",
        Scenario::Planck => "Planck's multiplicity and the Bose-Einstein equilibrium",
        Scenario::Boltzmann => "Boltzmann's cell counting is independent of the cell size",
        Scenario::DegenerateCount => "symmetric-subspace dimension equals Planck's multiplicity",
    }
}

fn description(s: Scenario) -> &'static str {
    match s {
        Scenario::SpinProtocol => "Everett protocol: a spin measured repeatedly by an apparatus with a memory",
        Scenario::FreshTrials => "M fresh spins measured once each, grouped by the number of up records",
        Scenario::RealisticSpin => "one spin measurement with n_up + n_down orthogonal microrecords",
        Scenario::Continuity => "states theta_k = pi/(2k+1), k = 1..k_max, and their limit |up>",
        Scenario::Qbm => "lattice particle whose position is recorded by fresh environment registers",
        Scenario::Planck => "equilibrium occupations of light-quantum modes and the integer optimum",
        Scenario::Boltzmann => "cell counts of two phase-space volumes at shrinking cell sizes",
        Scenario::DegenerateCount => "branch counting on totally degenerate multi-quantum states",
    }
}

fn number(default: f64, description: &str) -> Value {
    json!({ "type": "number", "default": default, "description": description })
}

fn integer(default: u64, min: u64, max: Option<u64>, description: &str) -> Value {
    let mut v = json!({ "type": "integer", "default": default, "minimum": min, "description": description });
    if let Some(max) = max {
        v["maximum"] = json!(max);
    }
    v
}

fn object(properties: Value) -> Value {
    json!({ "type": "object", "additionalProperties": false, "properties": properties })
}

/// JSON Schema of the `params` block; defaults are those of the typed
/// parameter structs.
pub fn params_schema(s: Scenario) -> Value {
    let d = Params::parse(s, &json!({})).expect("empty params take defaults").to_value();
    let micro = MAX_MICROBRANCHES as u64;
    match s {
        Scenario::SpinProtocol => object(json!({
            "theta": number(d["theta"].as_f64().unwrap(), "spin state cos(theta)|up> + sin(theta)|down>"),
            "measurements": integer(2, 1, Some(MAX_MEASUREMENTS as u64), "number of repeated measurements"),
            "epsilon_dec": { "type": "number", "minimum": 0, "default": d["epsilon_dec"], "description": "decoherence threshold" },
            "require_decoherence": { "type": "boolean", "default": false, "description": "fail with exit code 3 when not decoherent" }
        })),
        Scenario::FreshTrials => object(json!({
            "p_up": { "type": "number", "minimum": 0, "maximum": 1, "default": d["p_up"], "description": "|a|^2 of each normalized spin" },
            "trials": integer(12, 1, Some(MAX_TRIALS as u64), "number of fresh spins"),
            "window": { "type": "array", "items": { "type": "number" }, "minItems": 2, "maxItems": 2, "default": d["window"], "description": "closed range of up-frequencies" }
        })),
        Scenario::RealisticSpin => object(json!({
            "theta": number(d["theta"].as_f64().unwrap(), "spin state cos(theta)|up> + sin(theta)|down>"),
            "n_up": integer(256, 1, Some(micro - 1), "microrecords of up"),
            "n_down": integer(256, 1, Some(micro - 1), "microrecords of down; n_up + n_down at most the limit"),
            "nonuniform": { "type": "boolean", "default": false, "description": "draw microbranch weights from the seeded generator" },
            "rho": { "type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "description": "build clusters of weight tau^2 (1 +- rho)" }
        })),
        Scenario::Continuity => object(json!({
            "k_max": integer(50, 1, Some(MAX_K as u64), "last member of the family"),
            "n_up": integer(3, 1, Some(micro - 1), "microrecords of up"),
            "n_down": integer(2, 1, Some(micro - 1), "microrecords of down")
        })),
        Scenario::Qbm => object(json!({
            "cells": integer(d["cells"].as_u64().unwrap(), 2, None, "lattice sites"),
            "env_levels": integer(d["env_levels"].as_u64().unwrap(), 2, None, "levels of each environment register"),
            "hop": number(d["hop"].as_f64().unwrap(), "nearest-neighbour hopping amplitude"),
            "steps": integer(d["steps"].as_u64().unwrap(), 1, None, "time steps; cells * env_levels^steps at most 4096"),
            "record_strength": { "type": "number", "minimum": 0, "maximum": 1, "default": d["record_strength"], "description": "0 leaves no record, 1 a perfect one" },
            "dt": { "type": "number", "exclusiveMinimum": 0, "default": d["dt"], "description": "step length" },
            "epsilon_dec": { "type": "number", "minimum": 0, "default": d["epsilon_dec"], "description": "decoherence threshold" },
            "require_decoherence": { "type": "boolean", "default": false, "description": "fail with exit code 3 when not decoherent" }
        })),
        Scenario::Planck => object(json!({
            "z": { "type": "array", "items": { "type": "integer", "minimum": 1 }, "minItems": 1, "default": d["z"], "description": "oscillators per mode" },
            "energies": { "type": "array", "items": { "type": "number", "exclusiveMinimum": 0 }, "minItems": 1, "default": d["energies"], "description": "quantum energy per mode, same length as z" },
            "total_energy": { "type": "number", "exclusiveMinimum": 0, "default": d["total_energy"], "description": "energy shared by all modes" }
        })),
        Scenario::Boltzmann => object(json!({
            "volumes": { "type": "array", "items": { "type": "number", "exclusiveMinimum": 0 }, "minItems": 2, "maxItems": 2, "default": d["volumes"], "description": "volumes of the two macrostates" },
            "eps": { "type": "array", "items": { "type": "number", "exclusiveMinimum": 0 }, "minItems": 1, "default": d["eps"], "description": "cell sizes" },
            "k_b": { "type": "number", "exclusiveMinimum": 0, "default": d["k_b"], "description": "Boltzmann's constant" }
        })),
        Scenario::DegenerateCount => object(json!({
            "z_max": integer(6, 1, None, "largest oscillator count"),
            "n_max": integer(6, 0, None, "largest quantum count; z_max^n_max at most 1e7")
        })),
    }
}

/// Static catalog of the eight scenarios.
pub fn list_scenarios() -> Vec<ScenarioInfo> {
    Scenario::ALL
        .iter()
        .map(|&s| ScenarioInfo {
            scenario: s,
            reproduces: reproduces(s).into(),
            description: description(s).into(),
            takes_rule: s.takes_rule(),
            params_schema: params_schema(s),
        })
        .collect()
}

/// Schema of a whole experiment config, as shipped in `schema/`.
pub fn config_schema() -> Value {
    let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
    let branches: Vec<Value> = Scenario::ALL
        .iter()
        .map(|&s| {
            let mut then = json!({ "properties": { "params": params_schema(s) } });
            if !s.takes_rule() {
                then["properties"]["rule"] = json!(false);
                then["properties"]["tau_sq"] = json!(false);
            }
            json!({ "if": { "properties": { "scenario": { "const": s.name() } } }, "then": then })
        })
        .collect();
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "branchcount experiment config",
        "type": "object",
        "additionalProperties": false,
        "required": ["scenario"],
        "properties": {
            "scenario": { "enum": names },
            "params": { "type": "object", "default": {} },
            "rule": { "enum": ["naive", "equi_outcome", "equi_amplitude"], "default": "naive" },
            "tau_sq": { "type": "number", "exclusiveMinimum": 0, "description": "equi_amplitude only; defaults to 1e-4 of the initial squared norm" },
            "seed": { "type": "integer", "minimum": 0, "default": 0 },
            "output": {
                "type": "object",
                "additionalProperties": false,
                "properties": {
                    "format": { "enum": ["json", "csv"], "default": "json" },
                    "path": { "type": "string" }
                }
            }
        },
        "allOf": branches
    })
}
