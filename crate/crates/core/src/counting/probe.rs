use serde::{Deserialize, Serialize};

use super::report::{CountReport, Rule};
use super::rules::{count_equi_amplitude, count_equi_outcome_flat, count_naive, Tau};
use crate::error::{Error, Result};
use crate::histories::{BranchSet, Grouping};

/// Member `k` of a family of states, or the state the family converges to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbePoint {
    Member(usize),
    Limit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub k: usize,
    pub report: CountReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityProbe {
    pub rule: Rule,
    pub rows: Vec<ProbeRow>,
    pub limit: CountReport,
}

/// Applies one counting rule to the states `k = 1..=k_max` of a family and to
/// its limit.
pub fn continuity_probe<F, G>(
    rule: Rule,
    model: F,
    grouping: G,
    k_max: usize,
    tau: Option<Tau>,
    threshold: Option<f64>,
) -> Result<ContinuityProbe>
where
    F: Fn(ProbePoint) -> Result<BranchSet>,
    G: Fn(&BranchSet) -> Result<Grouping>,
{
    if rule == Rule::EquiAmplitude && tau.is_none() {
        return Err(Error::invalid("the equi-amplitude rule needs tau"));
    }
    let evaluate = |point| -> Result<CountReport> {
        let bs = model(point)?;
        let g = grouping(&bs)?;
        match rule {
            Rule::Naive => count_naive(&bs, &g, threshold),
            Rule::EquiOutcome => count_equi_outcome_flat(&bs, &g, threshold),
            Rule::EquiAmplitude => count_equi_amplitude(&bs, &g, tau.expect("checked above")),
        }
    };
    let rows = (1..=k_max)
        .map(|k| Ok(ProbeRow { k, report: evaluate(ProbePoint::Member(k))? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ContinuityProbe { rule, rows, limit: evaluate(ProbePoint::Limit)? })
}
