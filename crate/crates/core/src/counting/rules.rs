use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::report::{ratio, weight_sum, CountReport, Rule};
use crate::error::{Error, Result};
use crate::histories::{Branch, BranchSet, Grouping, HistoryLabel};

/// Relative slack when deciding whether a weight is an exact multiple of τ².
/// Keeps `0.36 / 0.01` (which evaluates just below 36) from flooring to 35.
pub const SNAP: f64 = 1e-9;

/// Relative threshold of the naive rule, in units of `‖φ_0‖²`.
pub const DEFAULT_NAIVE_THRESHOLD: f64 = 1e-12;

/// Fixed Hilbert-norm unit of a fine-grained branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tau {
    value: f64,
}

impl Tau {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {value}")));
        }
        Ok(Self { value })
    }

    pub fn from_sq(tau_sq: f64) -> Result<Self> {
        if !(tau_sq > 0.0 && tau_sq.is_finite()) {
            return Err(Error::invalid(format!("tau² must be positive, got {tau_sq}")));
        }
        Self::new(tau_sq.sqrt())
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn sq(&self) -> f64 {
        self.value * self.value
    }

    /// τ must stay well below the state norm: `τ ≤ ‖φ_0‖ / 10`, with a
    /// rounding allowance so that `τ² = 0.01` passes at unit norm.
    pub fn check_against(&self, norm: f64) -> Result<()> {
        if self.value > norm / 10.0 * (1.0 + SNAP) {
            return Err(Error::TauTooLarge { tau: self.value, norm });
        }
        Ok(())
    }
}

/// `floor(x)`, except that values within [`SNAP`] of an integer land on it.
pub fn snapped_floor(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r.max(0.0) as u64
    } else {
        x.floor().max(0.0) as u64
    }
}

fn group_weights(bs: &BranchSet, grouping: &Grouping) -> Result<Vec<(String, Vec<f64>)>> {
    let assignment = grouping.assign(bs)?;
    Ok(grouping
        .groups()
        .iter()
        .zip(assignment)
        .map(|(g, idx)| (g.label.to_string(), idx.iter().map(|&i| bs.entries()[i].weight).collect()))
        .collect())
}

/// Counts the fine branches in each group whose weight exceeds `threshold`
/// (default `1e-12 ‖φ_0‖²`).
pub fn count_naive(bs: &BranchSet, grouping: &Grouping, threshold: Option<f64>) -> Result<CountReport> {
    let threshold = threshold.unwrap_or(DEFAULT_NAIVE_THRESHOLD * bs.initial_norm_sq());
    if !(threshold >= 0.0) {
        return Err(Error::invalid("naive threshold must be non-negative"));
    }
    let rows = group_weights(bs, grouping)?
        .into_iter()
        .map(|(label, ws)| {
            let n = ws.iter().filter(|&&w| w > threshold).count() as u64;
            (label, n, weight_sum(ws.iter().copied()), None)
        })
        .collect();
    Ok(CountReport::assemble(Rule::Naive, None, Some(threshold), rows))
}

/// `N_β = floor(w_β / τ²)` with the remainder kept as the rounding error.
pub fn count_equi_amplitude(bs: &BranchSet, grouping: &Grouping, tau: Tau) -> Result<CountReport> {
    tau.check_against(bs.initial_norm_sq().sqrt())?;
    count_with_unit(bs, grouping, tau.sq())
}

/// Equi-amplitude counting without the `τ ≪ ‖φ_0‖` guard. Used where the
/// fine-graining deliberately goes down to single dimensions.
pub fn count_with_unit(bs: &BranchSet, grouping: &Grouping, tau_sq: f64) -> Result<CountReport> {
    if !(tau_sq > 0.0 && tau_sq.is_finite()) {
        return Err(Error::invalid("tau² must be positive"));
    }
    let rows = group_weights(bs, grouping)?
        .into_iter()
        .map(|(label, ws)| {
            let w = weight_sum(ws.iter().copied());
            let n = snapped_floor(w / tau_sq);
            let err = (w - n as f64 * tau_sq).clamp(0.0, tau_sq);
            (label, n, w, Some(err))
        })
        .collect();
    Ok(CountReport::assemble(Rule::EquiAmplitude, Some(tau_sq), None, rows))
}

/// One outcome of an experiment, with the experiments performed afterwards
/// inside its branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub label: String,
    /// Squared amplitude conditional on the parent outcome.
    pub weight: f64,
    #[serde(default)]
    pub children: Vec<Outcome>,
}

impl Outcome {
    pub fn leaf(label: impl Into<String>, weight: f64) -> Self {
        Self { label: label.into(), weight, children: Vec::new() }
    }

    pub fn with_children(label: impl Into<String>, weight: f64, children: Vec<Outcome>) -> Self {
        Self { label: label.into(), weight, children }
    }
}

/// Branching tree of experiments: the root experiment's outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTree {
    pub outcomes: Vec<Outcome>,
}

/// A root-to-leaf path with its Born weight and equi-outcome probability
/// `1 / denominator`.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub path: Vec<String>,
    pub born_weight: f64,
    /// Zero when some outcome on the path has zero amplitude.
    pub denominator: u64,
}

impl OutcomeTree {
    pub fn new(outcomes: Vec<Outcome>) -> Result<Self> {
        fn check(o: &[Outcome]) -> Result<()> {
            for x in o {
                if !(x.weight >= 0.0 && x.weight.is_finite()) {
                    return Err(Error::invalid(format!("outcome `{}` has invalid weight", x.label)));
                }
                check(&x.children)?;
            }
            Ok(())
        }
        if outcomes.is_empty() {
            return Err(Error::invalid("outcome tree has no outcomes"));
        }
        check(&outcomes)?;
        Ok(Self { outcomes })
    }

    pub fn depth(&self) -> usize {
        fn depth(o: &[Outcome]) -> usize {
            o.iter().map(|x| 1 + depth(&x.children)).max().unwrap_or(0)
        }
        depth(&self.outcomes)
    }

    pub fn leaves(&self) -> Vec<Leaf> {
        fn walk(o: &[Outcome], prefix: &mut Vec<String>, born: f64, den: u64, out: &mut Vec<Leaf>) {
            let live = o.iter().filter(|x| x.weight > 0.0).count() as u64;
            for x in o {
                prefix.push(x.label.clone());
                let d = if x.weight > 0.0 { den * live } else { 0 };
                if x.children.is_empty() {
                    out.push(Leaf { path: prefix.clone(), born_weight: born * x.weight, denominator: d });
                } else {
                    walk(&x.children, prefix, born * x.weight, d, out);
                }
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.outcomes, &mut Vec::new(), 1.0, 1, &mut out);
        out
    }

    /// Leaves as a weight-only branch set. Paths shorter than the tree are
    /// padded with `-` (no experiment at that time).
    pub fn to_branch_set(&self) -> Result<BranchSet> {
        let depth = self.depth();
        let entries = self
            .leaves()
            .into_iter()
            .filter(|l| l.born_weight > 0.0)
            .map(|l| {
                let mut cells = l.path;
                cells.resize(depth, "-".into());
                Branch::weight_only(HistoryLabel::new(cells), l.born_weight)
            })
            .collect();
        let total: f64 = self.outcomes.iter().map(|o| o.weight).sum();
        BranchSet::new((1..=depth).map(|t| t as f64).collect(), entries, total)
    }
}

/// Equal probability for every non-zero outcome of each experiment, multiplied
/// down the tree. Probabilities are reported as integer counts over the least
/// common denominator, so ratios stay exact.
pub fn count_equi_outcome(tree: &OutcomeTree) -> Result<CountReport> {
    let leaves = tree.leaves();
    let lcd = leaves
        .iter()
        .filter(|l| l.denominator > 0)
        .fold(1u64, |acc, l| acc.lcm(&l.denominator));
    let rows = leaves
        .into_iter()
        .map(|l| {
            let n = if l.denominator > 0 { lcd / l.denominator } else { 0 };
            (l.path.join(","), n, l.born_weight, None)
        })
        .collect();
    Ok(CountReport::assemble(Rule::EquiOutcome, None, None, rows))
}

/// Equi-outcome rule for a single experiment whose outcomes are the groups;
/// a group is an outcome with non-zero amplitude when its weight clears the
/// naive threshold.
pub fn count_equi_outcome_flat(
    bs: &BranchSet,
    grouping: &Grouping,
    threshold: Option<f64>,
) -> Result<CountReport> {
    let threshold = threshold.unwrap_or(DEFAULT_NAIVE_THRESHOLD * bs.initial_norm_sq());
    let outcomes = group_weights(bs, grouping)?
        .into_iter()
        .map(|(label, ws)| {
            let w = weight_sum(ws.iter().copied());
            Outcome::leaf(label, if w > threshold { w } else { 0.0 })
        })
        .collect();
    let mut report = count_equi_outcome(&OutcomeTree::new(outcomes)?)?;
    // born weights are the untruncated sums
    let weights: Vec<f64> = group_weights(bs, grouping)?.iter().map(|(_, ws)| weight_sum(ws.iter().copied())).collect();
    let rows = report
        .rows
        .drain(..)
        .zip(weights)
        .map(|(r, w)| (r.label, r.count, w, None))
        .collect();
    report = CountReport::assemble(Rule::EquiOutcome, None, Some(threshold), rows);
    Ok(report)
}

/// Ratio of `amplitude^p` between two coarse histories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRatio {
    pub numerator: String,
    pub denominator: String,
    #[serde(with = "super::report::undefined")]
    pub value: Option<f64>,
}

/// `(√w_β)^p / (√w_β')^p` for every ordered pair; `p = 2` gives Born ratios.
pub fn lp_ratio(weights: &[(String, f64)], p: f64) -> Result<Vec<LpRatio>> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p must be at least 1, got {p}")));
    }
    if let Some((l, _)) = weights.iter().find(|(_, w)| !(*w >= 0.0)) {
        return Err(Error::invalid(format!("weight of `{l}` must be non-negative")));
    }
    let powered: Vec<f64> = weights.iter().map(|(_, w)| w.sqrt().powf(p)).collect();
    let mut out = Vec::new();
    for (i, (a, _)) in weights.iter().enumerate() {
        for (j, (b, _)) in weights.iter().enumerate() {
            if i != j {
                out.push(LpRatio {
                    numerator: a.clone(),
                    denominator: b.clone(),
                    value: ratio(powered[i], powered[j]),
                });
            }
        }
    }
    Ok(out)
}
