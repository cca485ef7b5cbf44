use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::*;
use crate::counting::report::{csv_field, fmt_num, fmt_opt, undefined};
use crate::counting::{
    continuity_probe, count_equi_amplitude, count_equi_outcome_flat, count_naive, partition_by_group,
    ContinuityProbe, CountReport, Rule, Tau, CSV_HEADER,
};
use crate::error::{Error, Result};
use crate::histories::{decoherence_report, BranchSet, DecoherenceSummary, Grouping, HistoryLabel};
use crate::models::{
    continuity_angle, continuity_branches, continuity_distance, everett_protocol, fresh_spin_trials,
    frequency_window_weight, qbm_model, realistic_measurement, spin_grouping, up_count_grouping,
    RealisticApparatus, SpinState, DOWN, UP,
};
use crate::statmech::{
    boltzmann_table, dirac_table, equilibrium_occupancies, hill_climb, occupancy_table, BoltzmannRow,
    DiracRow, Equilibrium, HillClimb, LogW, MacroState, Mode, OccupancyRow, BOLTZMANN_CSV_HEADER,
    DIRAC_CSV_HEADER, OCCUPANCY_CSV_HEADER,
};

/// τ² used by the equi-amplitude rule when the config gives none, as a
/// fraction of `‖φ0‖²`.
pub const DEFAULT_TAU_SQ_FRACTION: f64 = 1e-4;

pub const CONTINUITY_CSV_HEADER: &str = "k,theta,distance,N_up,N_down,count_ratio,born_ratio,p_down,r_down";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioResult {
    SpinProtocol(SpinProtocolResult),
    FreshTrials(FreshTrialsResult),
    RealisticSpin(RealisticSpinResult),
    Continuity(ContinuityResult),
    Qbm(QbmResult),
    Planck(PlanckResult),
    Boltzmann(BoltzmannResult),
    DegenerateCount(DegenerateCountResult),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub label: HistoryLabel,
    /// Memory contents at the end, one symbol per measurement.
    pub records: Vec<String>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinProtocolResult {
    pub branches: Vec<BranchRow>,
    pub decoherence: DecoherenceSummary,
    pub counts: CountReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreshTrialsResult {
    pub counts: CountReport,
    pub window: [f64; 2],
    pub window_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub label: HistoryLabel,
    pub tau_sq: f64,
    pub rho: f64,
    pub clusters: usize,
    pub remainder_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealisticSpinResult {
    pub counts: CountReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<PartitionSummary>>,
}

/// One member of the continuity family; `k` is absent on the limit row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub k: Option<usize>,
    pub theta: f64,
    /// `‖φ_k − φ↑‖`.
    pub distance: f64,
    pub n_up: u64,
    pub n_down: u64,
    /// `N_↑ / N_↓`.
    #[serde(with = "undefined")]
    pub count_ratio: Option<f64>,
    /// `w_↓ / w_↑`.
    #[serde(with = "undefined")]
    pub born_ratio: Option<f64>,
    /// `N_↓ / N_tot`.
    #[serde(with = "undefined")]
    pub p_down: Option<f64>,
    /// `w_↓ / Σw`.
    #[serde(with = "undefined")]
    pub r_down: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityResult {
    pub table: Vec<ContinuityRow>,
    pub probe: ContinuityProbe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QbmResult {
    pub branches: usize,
    pub pruned_weight: f64,
    pub decoherence: DecoherenceSummary,
    /// Grouped by the site at the last time.
    pub counts: CountReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanckResult {
    pub table: Vec<OccupancyRow>,
    pub equilibrium: Equilibrium,
    /// From the rounded occupancies on the Stirling objective.
    pub hill_climb: HillClimb,
    /// Same start on the exact `ln W`.
    pub exact_hill_climb: HillClimb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoltzmannResult {
    pub rows: Vec<BoltzmannRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateCountResult {
    pub rows: Vec<DiracRow>,
}

fn opt_field(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

impl ScenarioResult {
    pub fn csv_header(&self) -> &'static str {
        match self {
            ScenarioResult::SpinProtocol(_)
            | ScenarioResult::FreshTrials(_)
            | ScenarioResult::RealisticSpin(_)
            | ScenarioResult::Qbm(_) => CSV_HEADER,
            ScenarioResult::Continuity(_) => CONTINUITY_CSV_HEADER,
            ScenarioResult::Planck(_) => OCCUPANCY_CSV_HEADER,
            ScenarioResult::Boltzmann(_) => BOLTZMANN_CSV_HEADER,
            ScenarioResult::DegenerateCount(_) => DIRAC_CSV_HEADER,
        }
    }

    pub fn csv_rows(&self) -> Vec<String> {
        match self {
            ScenarioResult::SpinProtocol(r) => r.counts.csv_rows(),
            ScenarioResult::FreshTrials(r) => r.counts.csv_rows(),
            ScenarioResult::RealisticSpin(r) => r.counts.csv_rows(),
            ScenarioResult::Qbm(r) => r.counts.csv_rows(),
            ScenarioResult::Continuity(r) => r
                .table
                .iter()
                .map(|row| {
                    format!(
                        "{},{},{},{},{},{},{},{},{}",
                        row.k.map(|k| k.to_string()).unwrap_or_else(|| "inf".into()),
                        fmt_num(row.theta),
                        fmt_num(row.distance),
                        row.n_up,
                        row.n_down,
                        fmt_opt(row.count_ratio),
                        fmt_opt(row.born_ratio),
                        fmt_opt(row.p_down),
                        fmt_opt(row.r_down),
                    )
                })
                .collect(),
            ScenarioResult::Planck(r) => r
                .table
                .iter()
                .map(|row| {
                    format!(
                        "{},{},{},{},{},{},{}",
                        row.mode,
                        row.z,
                        row.n,
                        csv_field(&row.w),
                        fmt_num(row.occupancy),
                        fmt_num(row.analytic_occupancy),
                        fmt_num(row.relative_error),
                    )
                })
                .collect(),
            ScenarioResult::Boltzmann(r) => r
                .rows
                .iter()
                .map(|row| {
                    format!(
                        "{},{},{},{},{}",
                        fmt_num(row.eps),
                        row.w1,
                        row.w2,
                        opt_field(row.ratio),
                        opt_field(row.entropy_diff),
                    )
                })
                .collect(),
            ScenarioResult::DegenerateCount(r) => r
                .rows
                .iter()
                .map(|row| {
                    format!(
                        "{},{},{},{},{},{}",
                        row.z,
                        row.n,
                        row.sym_subspace_dim,
                        row.planck_multiplicity,
                        row.branch_count,
                        fmt_num(row.rounding_error),
                    )
                })
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(self.csv_header());
        out.push('\n');
        for line in self.csv_rows() {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn count(rule: Rule, tau_sq: Option<f64>, bs: &BranchSet, g: &Grouping) -> Result<CountReport> {
    match rule {
        Rule::Naive => count_naive(bs, g, None),
        Rule::EquiOutcome => count_equi_outcome_flat(bs, g, None),
        Rule::EquiAmplitude => {
            let t = tau_sq.unwrap_or(DEFAULT_TAU_SQ_FRACTION * bs.initial_norm_sq());
            count_equi_amplitude(bs, g, Tau::from_sq(t)?)
        }
    }
}

fn check_decoherence(summary: &DecoherenceSummary, required: bool) -> Result<()> {
    if required && !summary.decoherent {
        return Err(Error::Numeric(format!(
            "decoherence check failed: max off-diagonal ratio {:e} exceeds {:e}",
            summary.max_offdiag_ratio, summary.epsilon_dec
        )));
    }
    Ok(())
}

/// Runs a resolved config; `config.rule` is already filled in.
pub(crate) fn execute(config: &ExperimentConfig, params: &Params) -> Result<ScenarioResult> {
    let rule = config.rule.unwrap_or(Rule::Naive);
    let tau_sq = config.tau_sq;
    Ok(match params {
        Params::SpinProtocol(p) => {
            let spin = SpinState::from_angle(p.theta)?;
            let protocol = everett_protocol(spin, p.measurements)?;
            let decoherence = decoherence_report(&protocol.branches, p.epsilon_dec)?.summary();
            check_decoherence(&decoherence, p.require_decoherence)?;
            let branches = protocol
                .branches
                .entries()
                .iter()
                .enumerate()
                .map(|(i, b)| BranchRow { label: b.label.clone(), records: protocol.records(i), weight: b.weight })
                .collect();
            let counts = count(rule, tau_sq, &protocol.branches, &Grouping::singletons(&protocol.branches))?;
            ScenarioResult::SpinProtocol(SpinProtocolResult { branches, decoherence, counts })
        }
        Params::FreshTrials(p) => {
            let spin = SpinState::real(p.p_up.sqrt(), (1.0 - p.p_up).sqrt())?;
            let bs = fresh_spin_trials(spin, p.trials)?;
            let counts = count(rule, tau_sq, &bs, &up_count_grouping(&bs)?)?;
            let window_weight = frequency_window_weight(&bs, p.window[0], p.window[1])?;
            ScenarioResult::FreshTrials(FreshTrialsResult { counts, window: p.window, window_weight })
        }
        Params::RealisticSpin(p) => {
            let app = if p.nonuniform {
                RealisticApparatus::random(p.n_up, p.n_down, &mut ChaCha8Rng::seed_from_u64(config.seed))
            } else {
                RealisticApparatus::uniform(p.n_up, p.n_down)
            };
            let bs = realistic_measurement(SpinState::from_angle(p.theta)?, &app)?;
            let g = spin_grouping(&bs)?;
            let counts = count(rule, tau_sq, &bs, &g)?;
            let partitions = match p.rho {
                Some(rho) => {
                    let t = tau_sq.unwrap_or(DEFAULT_TAU_SQ_FRACTION * bs.initial_norm_sq());
                    let parts = partition_by_group(&bs, &g, Tau::from_sq(t)?, rho)?;
                    Some(
                        parts
                            .into_iter()
                            .map(|(label, part)| PartitionSummary {
                                label,
                                tau_sq: part.tau_sq,
                                rho: part.rho,
                                clusters: part.len(),
                                remainder_weight: part.remainder.map(|c| c.weight),
                            })
                            .collect(),
                    )
                }
                None => None,
            };
            ScenarioResult::RealisticSpin(RealisticSpinResult { counts, partitions })
        }
        Params::Continuity(p) => {
            let app = RealisticApparatus::uniform(p.n_up, p.n_down);
            let tau = match rule {
                Rule::EquiAmplitude => {
                    let norm_sq = SpinState::up().norm_sq();
                    Some(Tau::from_sq(tau_sq.unwrap_or(DEFAULT_TAU_SQ_FRACTION * norm_sq))?)
                }
                _ => None,
            };
            let probe = continuity_probe(rule, |pt| continuity_branches(pt, &app), spin_grouping, p.k_max, tau, None)?;
            let row = |k: Option<usize>, theta: f64, distance: f64, report: &CountReport| {
                let down = report.row(DOWN);
                ContinuityRow {
                    k,
                    theta,
                    distance,
                    n_up: report.count(UP).unwrap_or(0),
                    n_down: report.count(DOWN).unwrap_or(0),
                    count_ratio: report.ratio(UP, DOWN).and_then(|r| r.count_ratio),
                    born_ratio: report.ratio(DOWN, UP).and_then(|r| r.born_ratio),
                    p_down: down.and_then(|d| d.count_prob),
                    r_down: down.and_then(|d| d.born_prob),
                }
            };
            let mut table = probe
                .rows
                .iter()
                .map(|r| Ok(row(Some(r.k), continuity_angle(r.k), continuity_distance(r.k)?, &r.report)))
                .collect::<Result<Vec<_>>>()?;
            table.push(row(None, 0.0, 0.0, &probe.limit));
            ScenarioResult::Continuity(ContinuityResult { table, probe })
        }
        Params::Qbm(p) => {
            let run = qbm_model(&p.lattice())?;
            let decoherence = decoherence_report(&run.branches, p.epsilon_dec)?.summary();
            check_decoherence(&decoherence, p.require_decoherence)?;
            let g = run.position_grouping(p.steps - 1)?;
            let counts = count(rule, tau_sq, &run.branches, &g)?;
            ScenarioResult::Qbm(QbmResult {
                branches: run.branches.len(),
                pruned_weight: run.branches.pruned_weight(),
                decoherence,
                counts,
            })
        }
        Params::Planck(p) => {
            let modes = p
                .z
                .iter()
                .zip(&p.energies)
                .map(|(z, e)| Mode::new(*z, *e))
                .collect::<Result<Vec<_>>>()?;
            let equilibrium = equilibrium_occupancies(&modes, p.total_energy)?;
            let start = equilibrium.rounded();
            let hill_climb_stirling = hill_climb(&modes, &start, equilibrium.beta, LogW::Stirling)?;
            let exact_hill_climb = hill_climb(&modes, &start, equilibrium.beta, LogW::Exact)?;
            ScenarioResult::Planck(PlanckResult {
                table: occupancy_table(&equilibrium),
                equilibrium,
                hill_climb: hill_climb_stirling,
                exact_hill_climb,
            })
        }
        Params::Boltzmann(p) => {
            let m1 = MacroState::new(p.volumes[0])?;
            let m2 = MacroState::new(p.volumes[1])?;
            ScenarioResult::Boltzmann(BoltzmannResult { rows: boltzmann_table(&m1, &m2, &p.eps, p.k_b)? })
        }
        Params::DegenerateCount(p) => {
            ScenarioResult::DegenerateCount(DegenerateCountResult { rows: dirac_table(p.z_max, p.n_max)? })
        }
    })
}
