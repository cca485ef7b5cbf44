use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Operator, ProjectorFamily, Propagator, StateVector, Tolerances};

/// One cell label per time, `<α_1, …, α_n>`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HistoryLabel {
    cells: Vec<String>,
}

impl HistoryLabel {
    pub fn new<S: Into<String>>(cells: impl IntoIterator<Item = S>) -> Self {
        Self { cells: cells.into_iter().map(Into::into).collect() }
    }

    pub fn cells(&self) -> &[String] {
        &self.cells
    }

    pub fn cell(&self, time_index: usize) -> Option<&str> {
        self.cells.get(time_index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl fmt::Display for HistoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cells.join(","))
    }
}

/// How the state moves between projection times.
#[derive(Clone, Debug)]
pub enum Dynamics {
    /// Time-independent Hamiltonian; interval `k` evolves by `exp(-iH(t_k - t_{k-1})/ħ)`
    /// with `t_0 = 0`.
    Hamiltonian { h: Operator, hbar: f64 },
    /// Explicit unitary for each interval, for models whose couplings switch on
    /// at particular steps.
    Steps(Vec<Operator>),
}

/// Times, a projector family per time, and the dynamics linking them.
#[derive(Clone, Debug)]
pub struct HistorySpace {
    times: Vec<f64>,
    families: Vec<ProjectorFamily>,
    dynamics: Dynamics,
    steps: Vec<Operator>,
}

impl HistorySpace {
    pub fn new(
        times: Vec<f64>,
        families: Vec<ProjectorFamily>,
        h: Operator,
        hbar: f64,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_layout(&times, &families)?;
        check_dim(families[0].dim(), h.dim())?;
        let propagator = Propagator::new(&h, hbar, tol)?;
        let mut prev = 0.0;
        let steps = times
            .iter()
            .map(|&t| {
                let u = propagator.unitary(t - prev);
                prev = t;
                u
            })
            .collect();
        Ok(Self { times, families, dynamics: Dynamics::Hamiltonian { h, hbar }, steps })
    }

    pub fn with_steps(
        times: Vec<f64>,
        families: Vec<ProjectorFamily>,
        steps: Vec<Operator>,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_layout(&times, &families)?;
        if steps.len() != times.len() {
            return Err(Error::invalid(format!(
                "{} step operators for {} times",
                steps.len(),
                times.len()
            )));
        }
        for u in &steps {
            check_dim(families[0].dim(), u.dim())?;
            let deviation = u.unitary_deviation();
            if deviation > tol.unitary {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(Self { times, families, dynamics: Dynamics::Steps(steps.clone()), steps })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn family(&self, time_index: usize) -> &ProjectorFamily {
        &self.families[time_index]
    }

    pub fn families(&self) -> &[ProjectorFamily] {
        &self.families
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    /// Unitary carrying the state from `t_{k-1}` to `t_k`.
    pub fn step(&self, time_index: usize) -> &Operator {
        &self.steps[time_index]
    }

    pub fn dim(&self) -> usize {
        self.families[0].dim()
    }

    pub fn dims(&self) -> &[usize] {
        self.families[0].dims()
    }

    /// `|φ; t_n>` with no projections.
    pub fn evolve_to_end(&self, phi0: &StateVector) -> Result<StateVector> {
        let mut state = phi0.clone();
        for u in &self.steps {
            state = u.apply(&state)?;
        }
        Ok(state)
    }

    /// Cell indices of `label` in each family; errors on unknown cells.
    pub fn resolve(&self, label: &HistoryLabel) -> Result<Vec<usize>> {
        if label.len() != self.len() {
            return Err(Error::invalid(format!(
                "history label has {} cells, space has {} times",
                label.len(),
                self.len()
            )));
        }
        label
            .cells()
            .iter()
            .zip(&self.families)
            .map(|(cell, fam)| fam.index_of(cell).ok_or_else(|| Error::UnknownLabel(cell.clone())))
            .collect()
    }

    /// Every label of the space, lexicographic in per-family cell order.
    pub fn all_labels(&self) -> Vec<HistoryLabel> {
        let mut out = vec![Vec::<String>::new()];
        for fam in &self.families {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    fam.labels().iter().map(move |cell| {
                        let mut next = prefix.clone();
                        next.push(cell.clone());
                        next
                    })
                })
                .collect();
        }
        out.into_iter().map(HistoryLabel::new).collect()
    }
}

fn check_layout(times: &[f64], families: &[ProjectorFamily]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("history space needs at least one time"));
    }
    if times.len() != families.len() {
        return Err(Error::invalid(format!(
            "{} times but {} projector families",
            times.len(),
            families.len()
        )));
    }
    if times.iter().any(|t| !t.is_finite()) || times[0] < 0.0 {
        return Err(Error::invalid("times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("times must be strictly increasing"));
    }
    let d = families[0].dim();
    for f in families {
        check_dim(d, f.dim())?;
    }
    Ok(())
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
