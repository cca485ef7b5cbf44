use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{enumerate_branches, BranchSet, HistoryLabel, HistorySpace};
use crate::error::{Error, Result};
use crate::qcore::{StateVector, C64};

/// Threshold for medium decoherence in models with an environment.
pub const MEDIUM_DECOHERENCE: f64 = 1e-6;
/// Threshold for models whose records are orthogonal by construction.
pub const EXACT_DECOHERENCE: f64 = 1e-12;

/// Gram matrix of the branch vectors and its worst normalized off-diagonal
/// entry.
#[derive(Clone, Debug)]
pub struct DecoherenceReport {
    pub gram: DMatrix<C64>,
    pub labels: Vec<HistoryLabel>,
    pub max_offdiag_ratio: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub epsilon_dec: f64,
}

impl DecoherenceReport {
    pub fn is_decoherent(&self) -> bool {
        self.max_offdiag_ratio <= self.epsilon_dec
    }

    pub fn summary(&self) -> DecoherenceSummary {
        DecoherenceSummary {
            branches: self.labels.len(),
            max_offdiag_ratio: self.max_offdiag_ratio,
            epsilon_dec: self.epsilon_dec,
            decoherent: self.is_decoherent(),
            worst_pair: self
                .worst_pair
                .map(|(i, j)| [self.labels[i].clone(), self.labels[j].clone()]),
        }
    }
}

/// Serializable digest of a [`DecoherenceReport`] (the Gram matrix itself is
/// left out).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceSummary {
    pub branches: usize,
    pub max_offdiag_ratio: f64,
    pub epsilon_dec: f64,
    pub decoherent: bool,
    pub worst_pair: Option<[HistoryLabel; 2]>,
}

/// `D_ij = <branch_i|branch_j>` over all pairs; decoherent iff the largest
/// `|D_ij| / sqrt(D_ii D_jj)` is at most `epsilon_dec`.
pub fn decoherence_report(bs: &BranchSet, epsilon_dec: f64) -> Result<DecoherenceReport> {
    if !(epsilon_dec >= 0.0) {
        return Err(Error::invalid("epsilon_dec must be non-negative"));
    }
    let vectors = bs.vectors()?;
    let n = vectors.len();
    let mut gram = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let d = vectors[i].inner(vectors[j])?;
            gram[(i, j)] = d;
            gram[(j, i)] = d.conj();
        }
        gram[(i, i)].im = 0.0;
    }
    let mut worst = 0.0;
    let mut worst_pair = None;
    for i in 0..n {
        for j in i + 1..n {
            let scale = (gram[(i, i)].re * gram[(j, j)].re).sqrt();
            let ratio = if scale > 0.0 { gram[(i, j)].norm() / scale } else { 0.0 };
            if ratio > worst {
                worst = ratio;
                worst_pair = Some((i, j));
            }
        }
    }
    Ok(DecoherenceReport {
        gram,
        labels: bs.labels().cloned().collect(),
        max_offdiag_ratio: worst,
        worst_pair,
        epsilon_dec,
    })
}

/// `‖φ;t_n - Σ_{accepted} branch‖ / ‖φ;t_n‖`: how much of the final state is
/// not accounted for by the histories the rule accepts.
pub fn quasiclassical_residual<F>(hs: &HistorySpace, phi0: &StateVector, accept: F) -> Result<f64>
where
    F: Fn(&HistoryLabel) -> bool,
{
    let final_state = hs.evolve_to_end(phi0)?;
    let scale = final_state.norm();
    if scale == 0.0 {
        return Err(Error::invalid("final state has zero norm"));
    }
    let branches = enumerate_branches(hs, phi0, 0.0)?;
    let mut rule_bound = StateVector::zeros(final_state.dims());
    for b in branches.entries().iter().filter(|b| accept(&b.label)) {
        rule_bound.add_assign(b.vector.as_ref().ok_or(Error::MissingVectors)?)?;
    }
    Ok(final_state.distance(&rule_bound)? / scale)
}
