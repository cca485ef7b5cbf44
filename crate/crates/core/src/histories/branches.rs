use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HistoryLabel, HistorySpace};
use crate::error::{Error, Result};
use crate::qcore::{StateVector, C64};

/// Relative pruning threshold used when none is given.
pub const DEFAULT_PRUNE: f64 = 1e-14;

/// Weight tolerance between a stored weight and its vector's squared norm.
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Branch {
    pub label: HistoryLabel,
    /// Absent only for models that are too large to carry vectors.
    pub vector: Option<StateVector>,
    pub weight: f64,
}

impl Branch {
    pub fn from_vector(label: HistoryLabel, vector: StateVector) -> Self {
        let weight = vector.norm_sqr();
        Self { label, vector: Some(vector), weight }
    }

    pub fn weight_only(label: HistoryLabel, weight: f64) -> Self {
        Self { label, vector: None, weight }
    }
}

/// History-labelled branch vectors produced from one initial state.
#[derive(Clone, Debug)]
pub struct BranchSet {
    times: Vec<f64>,
    entries: Vec<Branch>,
    initial_norm_sq: f64,
    pruned_weight: f64,
}

impl BranchSet {
    pub fn new(times: Vec<f64>, entries: Vec<Branch>, initial_norm_sq: f64) -> Result<Self> {
        Self::with_pruned(times, entries, initial_norm_sq, 0.0)
    }

    pub fn with_pruned(
        times: Vec<f64>,
        entries: Vec<Branch>,
        initial_norm_sq: f64,
        pruned_weight: f64,
    ) -> Result<Self> {
        if !(initial_norm_sq >= 0.0 && initial_norm_sq.is_finite()) {
            return Err(Error::invalid("initial squared norm must be finite and non-negative"));
        }
        let mut total = 0.0;
        for b in &entries {
            if !(b.weight >= 0.0 && b.weight.is_finite()) {
                return Err(Error::invalid(format!("branch {} has invalid weight", b.label)));
            }
            if let Some(v) = &b.vector {
                let w = v.norm_sqr();
                if (w - b.weight).abs() > WEIGHT_TOL * w.max(1.0) {
                    return Err(Error::invalid(format!(
                        "branch {} weight {} differs from squared norm {}",
                        b.label, b.weight, w
                    )));
                }
            }
            total += b.weight;
        }
        let mut seen = HashMap::with_capacity(entries.len());
        for (i, b) in entries.iter().enumerate() {
            if seen.insert(&b.label, i).is_some() {
                return Err(Error::invalid(format!("duplicate branch label {}", b.label)));
            }
        }
        // Non-decoherent sets may exceed the initial norm; only grossly
        // inconsistent inputs are rejected here.
        if !total.is_finite() {
            return Err(Error::invalid("branch weights do not sum to a finite value"));
        }
        Ok(Self { times, entries, initial_norm_sq, pruned_weight })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn entries(&self) -> &[Branch] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn initial_norm_sq(&self) -> f64 {
        self.initial_norm_sq
    }

    pub fn pruned_weight(&self) -> f64 {
        self.pruned_weight
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, b| acc + b.weight)
    }

    pub fn has_vectors(&self) -> bool {
        self.entries.iter().all(|b| b.vector.is_some())
    }

    pub fn get(&self, label: &HistoryLabel) -> Option<&Branch> {
        self.entries.iter().find(|b| &b.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &HistoryLabel> {
        self.entries.iter().map(|b| &b.label)
    }

    pub(crate) fn vectors(&self) -> Result<Vec<&StateVector>> {
        self.entries.iter().map(|b| b.vector.as_ref().ok_or(Error::MissingVectors)).collect()
    }

    pub fn to_record(&self, include_vectors: bool) -> BranchSetRecord {
        BranchSetRecord {
            times: self.times.clone(),
            labels: self.entries.iter().map(|b| b.label.clone()).collect(),
            weights: self.entries.iter().map(|b| b.weight).collect(),
            initial_norm_sq: self.initial_norm_sq,
            pruned_weight: self.pruned_weight,
            vectors: include_vectors.then(|| {
                self.entries
                    .iter()
                    .map(|b| {
                        b.vector
                            .as_ref()
                            .map(|v| v.amplitudes().iter().map(|z| [z.re, z.im]).collect())
                    })
                    .collect()
            }),
        }
    }
}

/// Serialized form of a [`BranchSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSetRecord {
    pub times: Vec<f64>,
    pub labels: Vec<HistoryLabel>,
    pub weights: Vec<f64>,
    pub initial_norm_sq: f64,
    pub pruned_weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Option<Vec<[f64; 2]>>>>,
}

impl BranchSetRecord {
    pub fn into_branch_set(self) -> Result<BranchSet> {
        if self.labels.len() != self.weights.len() {
            return Err(Error::invalid("labels and weights differ in length"));
        }
        let vectors = match self.vectors {
            Some(v) if v.len() != self.labels.len() => {
                return Err(Error::invalid("labels and vectors differ in length"))
            }
            Some(v) => v,
            None => vec![None; self.labels.len()],
        };
        let entries = self
            .labels
            .into_iter()
            .zip(self.weights)
            .zip(vectors)
            .map(|((label, weight), vector)| {
                let vector = vector.map(|amps| {
                    StateVector::flat(amps.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                });
                Branch { label, vector, weight }
            })
            .collect();
        BranchSet::with_pruned(self.times, entries, self.initial_norm_sq, self.pruned_weight)
    }
}

/// Schrödinger-picture branch `C_α(t_n)|φ;0>`: evolve, project, repeat.
pub fn chain_apply(
    hs: &HistorySpace,
    label: &HistoryLabel,
    phi0: &StateVector,
) -> Result<StateVector> {
    let cells = hs.resolve(label)?;
    let mut state = phi0.clone();
    for (k, cell) in cells.into_iter().enumerate() {
        state = hs.step(k).apply(&state)?;
        state = hs.family(k).projector(cell).apply(&state)?;
    }
    Ok(state)
}

/// Depth-first expansion of every history whose branch weight stays above
/// `prune_below`. Dead prefixes are not expanded; their weight is accumulated
/// in `pruned_weight`.
pub fn enumerate_branches(
    hs: &HistorySpace,
    phi0: &StateVector,
    prune_below: f64,
) -> Result<BranchSet> {
    if phi0.dim() != hs.dim() {
        return Err(Error::DimensionMismatch { expected: hs.dim(), got: phi0.dim() });
    }
    if !(prune_below >= 0.0) {
        return Err(Error::invalid("prune threshold must be non-negative"));
    }
    let first = hs.step(0).apply(phi0)?;
    let family = hs.family(0);
    let partials: Vec<Result<Expansion>> = (0..family.len())
        .into_par_iter()
        .map(|cell| {
            let mut out = Expansion::default();
            let projected = family.projector(cell).apply(&first)?;
            expand(hs, 0, vec![cell], projected, prune_below, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut entries = Vec::new();
    let mut pruned = 0.0;
    for p in partials {
        let p = p?;
        entries.extend(p.entries);
        pruned += p.pruned;
    }
    BranchSet::with_pruned(hs.times().to_vec(), entries, phi0.norm_sqr(), pruned)
}

/// Default threshold: `1e-14 ‖φ_0‖²`.
pub fn default_prune(phi0: &StateVector) -> f64 {
    DEFAULT_PRUNE * phi0.norm_sqr()
}

#[derive(Default)]
struct Expansion {
    entries: Vec<Branch>,
    pruned: f64,
}

fn expand(
    hs: &HistorySpace,
    k: usize,
    path: Vec<usize>,
    state: StateVector,
    prune_below: f64,
    out: &mut Expansion,
) -> Result<()> {
    let w = state.norm_sqr();
    if w <= prune_below {
        out.pruned += w;
        return Ok(());
    }
    if k + 1 == hs.len() {
        let label = HistoryLabel::new(
            path.iter().enumerate().map(|(t, &c)| hs.family(t).labels()[c].clone()),
        );
        out.entries.push(Branch { label, vector: Some(state), weight: w });
        return Ok(());
    }
    let evolved = hs.step(k + 1).apply(&state)?;
    let family = hs.family(k + 1);
    for cell in 0..family.len() {
        let projected = family.projector(cell).apply(&evolved)?;
        let mut next = path.clone();
        next.push(cell);
        expand(hs, k + 1, next, projected, prune_below, out)?;
    }
    Ok(())
}

/// A coarse history and the fine histories it contains.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    pub label: HistoryLabel,
    pub members: Vec<HistoryLabel>,
}

/// Disjoint groups of fine history labels. Groups may name fine labels that
/// were pruned from a branch set; such members simply contribute nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct Grouping {
    groups: Vec<Group>,
}

impl Grouping {
    pub fn new(groups: Vec<Group>) -> Result<Self> {
        let mut owner: HashMap<&HistoryLabel, usize> = HashMap::new();
        for (i, g) in groups.iter().enumerate() {
            if groups[..i].iter().any(|h| h.label == g.label) {
                return Err(Error::NotAPartition(format!("coarse label {} repeated", g.label)));
            }
            for m in &g.members {
                if owner.insert(m, i).is_some() {
                    return Err(Error::NotAPartition(format!("{m} belongs to two groups")));
                }
            }
        }
        Ok(Self { groups })
    }

    /// Groups the labels of `bs` by `key`. Coarse labels appear in `order`;
    /// a key outside `order` is an error, and coarse labels with no members
    /// are kept as empty groups.
    pub fn classify<F>(bs: &BranchSet, order: &[HistoryLabel], key: F) -> Result<Self>
    where
        F: Fn(&HistoryLabel) -> HistoryLabel,
    {
        let mut groups: Vec<Group> =
            order.iter().map(|l| Group { label: l.clone(), members: Vec::new() }).collect();
        for label in bs.labels() {
            let k = key(label);
            let g = groups
                .iter_mut()
                .find(|g| g.label == k)
                .ok_or_else(|| Error::UnknownLabel(k.to_string()))?;
            g.members.push(label.clone());
        }
        Self::new(groups)
    }

    /// Groups by the cell at one time index, coarse-graining every other time.
    pub fn by_cell(bs: &BranchSet, time_index: usize, cells: &[&str]) -> Result<Self> {
        let order: Vec<HistoryLabel> = cells.iter().map(|c| HistoryLabel::new([*c])).collect();
        Self::classify(bs, &order, |l| {
            HistoryLabel::new([l.cell(time_index).unwrap_or_default().to_string()])
        })
    }

    /// Every branch in its own group.
    pub fn singletons(bs: &BranchSet) -> Self {
        Self {
            groups: bs
                .labels()
                .map(|l| Group { label: l.clone(), members: vec![l.clone()] })
                .collect(),
        }
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Indices into `bs.entries()` for each group; every branch of `bs` must
    /// be covered.
    pub fn assign(&self, bs: &BranchSet) -> Result<Vec<Vec<usize>>> {
        let index: HashMap<&HistoryLabel, usize> =
            bs.entries().iter().enumerate().map(|(i, b)| (&b.label, i)).collect();
        let mut covered = vec![false; bs.len()];
        let out = self
            .groups
            .iter()
            .map(|g| {
                g.members
                    .iter()
                    .filter_map(|m| index.get(m).copied())
                    .inspect(|&i| covered[i] = true)
                    .collect()
            })
            .collect();
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::NotAPartition(format!(
                "branch {} is in no group",
                bs.entries()[i].label
            )));
        }
        Ok(out)
    }
}

/// Sums member branch vectors into coarse branches. The coarse weight is the
/// squared norm of the sum, so interference between members shows up as a
/// difference from the summed member weights.
pub fn coarse_grain_history(bs: &BranchSet, grouping: &Grouping) -> Result<BranchSet> {
    let vectors = bs.vectors()?;
    let assignment = grouping.assign(bs)?;
    let template = vectors
        .first()
        .map(|v| StateVector::zeros(v.dims()))
        .ok_or_else(|| Error::invalid("cannot coarse-grain an empty branch set"))?;
    let mut entries = Vec::with_capacity(grouping.len());
    for (group, members) in grouping.groups().iter().zip(assignment) {
        let mut sum = template.clone();
        for i in members {
            sum.add_assign(vectors[i])?;
        }
        entries.push(Branch::from_vector(group.label.clone(), sum));
    }
    BranchSet::with_pruned(bs.times().to_vec(), entries, bs.initial_norm_sq(), bs.pruned_weight())
}
