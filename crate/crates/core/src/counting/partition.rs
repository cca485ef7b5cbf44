use serde::{Deserialize, Serialize};

use super::rules::{Tau, SNAP};
use crate::error::{Error, Result};
use crate::histories::{Branch, BranchSet, Grouping, HistoryLabel};

/// Orthogonality tolerance on `|<u|v>| / (‖u‖ ‖v‖)` between microbranches.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Default slack ρ on cluster weights.
pub const DEFAULT_RHO: f64 = 0.01;

/// Microbranches merged into one fine-grained branch of weight close to τ².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub member_indices: Vec<usize>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub tau_sq: f64,
    pub rho: f64,
    pub clusters: Vec<Cluster>,
    /// Leftover microbranches whose total stays below τ².
    pub remainder: Option<Cluster>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Greedy clustering of microbranches, in input order, into groups of weight
/// within `[τ²(1-ρ), τ²(1+ρ)]`.
///
/// A cluster is closed as soon as the running total of all weights seen so far
/// reaches the next multiple of τ². Each cluster then differs from τ² by less
/// than the heaviest microbranch, and the number of closed clusters is
/// `floor(Σw / τ²)`.
pub fn constructive_partition(micro: &[&Branch], tau: Tau, rho: f64) -> Result<Partition> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("slack rho must lie in (0, 1), got {rho}")));
    }
    let tau_sq = tau.sq();
    let limit = rho * tau_sq;
    for (index, b) in micro.iter().enumerate() {
        if b.weight > limit {
            return Err(Error::MicrobranchTooHeavy { index, weight: b.weight, limit });
        }
    }
    check_orthogonal(micro)?;

    let mut clusters = Vec::new();
    let mut current = Cluster { member_indices: Vec::new(), weight: 0.0 };
    let mut cumulative = 0.0;
    let mut boundary = tau_sq;
    for (i, b) in micro.iter().enumerate() {
        cumulative += b.weight;
        current.member_indices.push(i);
        current.weight += b.weight;
        if cumulative >= boundary * (1.0 - SNAP) {
            clusters.push(std::mem::replace(
                &mut current,
                Cluster { member_indices: Vec::new(), weight: 0.0 },
            ));
            boundary += tau_sq;
        }
    }
    let remainder = (!current.member_indices.is_empty()).then_some(current);
    Ok(Partition { tau_sq, rho, clusters, remainder })
}

fn check_orthogonal(micro: &[&Branch]) -> Result<()> {
    let vectors: Vec<_> = micro.iter().filter_map(|b| b.vector.as_ref().map(|v| (v, v.norm()))).collect();
    if vectors.len() != micro.len() {
        // weight-only microbranches are orthogonal by the model's construction
        return Ok(());
    }
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let (u, nu) = vectors[i];
            let (v, nv) = vectors[j];
            let scale = nu * nv;
            if scale > 0.0 && u.inner(v)?.norm() > ORTHOGONALITY_TOL * scale {
                return Err(Error::NotOrthogonal(i, j));
            }
        }
    }
    Ok(())
}

/// Runs [`constructive_partition`] separately inside each coarse group.
pub fn partition_by_group(
    bs: &BranchSet,
    grouping: &Grouping,
    tau: Tau,
    rho: f64,
) -> Result<Vec<(HistoryLabel, Partition)>> {
    let assignment = grouping.assign(bs)?;
    grouping
        .groups()
        .iter()
        .zip(assignment)
        .map(|(g, idx)| {
            let members: Vec<&Branch> = idx.iter().map(|&i| &bs.entries()[i]).collect();
            Ok((g.label.clone(), constructive_partition(&members, tau, rho)?))
        })
        .collect()
}
