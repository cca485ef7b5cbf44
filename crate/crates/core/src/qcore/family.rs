use super::{dims_product, Operator, Tolerances, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Exhaustive, mutually orthogonal projectors keyed by cell label. Cells keep
/// the order in which they were supplied.
#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    labels: Vec<String>,
    projectors: Vec<Operator>,
}

/// Worst-case violations of the three family invariants.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FamilyDeviation {
    pub idempotence: f64,
    pub orthogonality: f64,
    pub completeness: f64,
}

impl FamilyDeviation {
    pub fn max(&self) -> f64 {
        self.idempotence.max(self.orthogonality).max(self.completeness)
    }
}

impl ProjectorFamily {
    /// Wraps arbitrary projectors after checking idempotence, pairwise
    /// orthogonality and completeness against `tol.projector`.
    pub fn from_operators(cells: Vec<(String, Operator)>, tol: &Tolerances) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidFamily("family has no cells".into()));
        }
        let (labels, projectors): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
        check_unique(&labels)?;
        let d = projectors[0].dim();
        if let Some(p) = projectors.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
        }
        let family = Self { labels, projectors };
        let dev = family.deviation();
        if dev.max() > tol.projector {
            return Err(Error::InvalidFamily(format!(
                "idempotence {:e}, orthogonality {:e}, completeness {:e}",
                dev.idempotence, dev.orthogonality, dev.completeness
            )));
        }
        Ok(family)
    }

    /// Single cell holding the identity.
    pub fn trivial(dims: &[usize], label: &str) -> Self {
        Self { labels: vec![label.to_string()], projectors: vec![Operator::identity(dims)] }
    }

    pub fn deviation(&self) -> FamilyDeviation {
        let mut dev = FamilyDeviation::default();
        let dims = self.projectors[0].dims().to_vec();
        let mut sum = Operator::zeros(&dims);
        for (i, p) in self.projectors.iter().enumerate() {
            let sq = p.compose(p).expect("same space");
            dev.idempotence = dev.idempotence.max(sq.max_abs_diff(p).expect("same space"));
            for q in &self.projectors[i + 1..] {
                let pq = p.compose(q).expect("same space");
                dev.orthogonality = dev.orthogonality.max(pq.max_abs());
            }
            sum = sum.add(p).expect("same space");
        }
        dev.completeness = sum.max_abs_diff(&Operator::identity(&dims)).expect("same space");
        dev
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn dims(&self) -> &[usize] {
        self.projectors[0].dims()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, label: &str) -> Option<&Operator> {
        self.index_of(label).map(|i| &self.projectors[i])
    }

    pub fn projector(&self, index: usize) -> &Operator {
        &self.projectors[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Operator)> {
        self.labels.iter().map(String::as_str).zip(self.projectors.iter())
    }
}

fn check_unique(labels: &[String]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::InvalidFamily(format!("duplicate cell label `{l}`")));
        }
    }
    Ok(())
}

/// Diagonal 0/1 projectors from a partition of the basis indices.
pub fn make_projector_family<S: AsRef<str>>(
    dims: &[usize],
    partition: &[(S, Vec<usize>)],
) -> Result<ProjectorFamily> {
    let d = dims_product(dims);
    if partition.is_empty() {
        return Err(Error::InvalidFamily("partition has no cells".into()));
    }
    let mut owner: Vec<Option<usize>> = vec![None; d];
    for (cell, (label, indices)) in partition.iter().enumerate() {
        for &i in indices {
            if i >= d {
                return Err(Error::invalid(format!(
                    "cell `{}` references basis index {i} outside dimension {d}",
                    label.as_ref()
                )));
            }
            if owner[i].replace(cell).is_some() {
                return Err(Error::Overlap { label: label.as_ref().to_string(), index: i });
            }
        }
    }
    if let Some(index) = owner.iter().position(Option::is_none) {
        return Err(Error::NotExhaustive { index });
    }
    let labels: Vec<String> = partition.iter().map(|(l, _)| l.as_ref().to_string()).collect();
    check_unique(&labels)?;
    let projectors = (0..partition.len())
        .map(|cell| {
            let diag: Vec<C64> =
                owner.iter().map(|o| if *o == Some(cell) { ONE } else { ZERO }).collect();
            Operator::diagonal(dims, &diag)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectorFamily { labels, projectors })
}

/// Sums fine projectors into coarse cells: `P_β = Σ_{α ∈ β} P_α`.
pub fn coarsen_family<S: AsRef<str>, T: AsRef<str>>(
    family: &ProjectorFamily,
    grouping: &[(S, Vec<T>)],
) -> Result<ProjectorFamily> {
    let mut used = vec![false; family.len()];
    let mut labels = Vec::with_capacity(grouping.len());
    let mut projectors = Vec::with_capacity(grouping.len());
    for (coarse, members) in grouping {
        let mut sum = Operator::zeros(family.dims());
        for m in members {
            let i = family
                .index_of(m.as_ref())
                .ok_or_else(|| Error::UnknownLabel(m.as_ref().to_string()))?;
            if std::mem::replace(&mut used[i], true) {
                return Err(Error::NotAPartition(format!(
                    "cell `{}` appears in more than one group",
                    m.as_ref()
                )));
            }
            sum = sum.add(&family.projectors[i])?;
        }
        labels.push(coarse.as_ref().to_string());
        projectors.push(sum);
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(Error::NotAPartition(format!("cell `{}` is not grouped", family.labels[i])));
    }
    check_unique(&labels)?;
    Ok(ProjectorFamily { labels, projectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_family_sums_to_identity() {
        let f = make_projector_family(&[2], &[("up", vec![0]), ("down", vec![1])]).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.deviation().max(), 0.0);
        assert_eq!(f.get("up").unwrap().trace(), ONE);
    }

    #[test]
    fn single_cell_family_is_identity() {
        let f = make_projector_family(&[4], &[("all", vec![0, 1, 2, 3])]).unwrap();
        assert_eq!(f.projector(0), &Operator::identity(&[4]));
    }

    #[test]
    fn overlap_is_reported_with_label() {
        let err = make_projector_family(&[4], &[("a", vec![0, 1]), ("b", vec![1, 2])]).unwrap_err();
        match err {
            Error::Overlap { label, index } => {
                assert_eq!(label, "b");
                assert_eq!(index, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gap_is_reported() {
        let err = make_projector_family(&[3], &[("a", vec![0]), ("b", vec![2])]).unwrap_err();
        assert!(matches!(err, Error::NotExhaustive { index: 1 }));
    }

    #[test]
    fn coarsening_sums_ranks() {
        let fine = make_projector_family(
            &[4],
            &[("0", vec![0]), ("1", vec![1]), ("2", vec![2]), ("3", vec![3])],
        )
        .unwrap();
        let coarse =
            coarsen_family(&fine, &[("lo", vec!["0", "1"]), ("hi", vec!["2", "3"])]).unwrap();
        assert_eq!(coarse.len(), 2);
        // rank of a projector is its trace
        for (_, p) in coarse.iter() {
            assert!((p.trace() - C64::new(2.0, 0.0)).norm() < 1e-15);
        }
        assert_eq!(coarse.deviation().max(), 0.0);

        let all = coarsen_family(&fine, &[("all", vec!["0", "1", "2", "3"])]).unwrap();
        assert_eq!(all.projector(0), &Operator::identity(&[4]));

        let same = coarsen_family(
            &fine,
            &[("0", vec!["0"]), ("1", vec!["1"]), ("2", vec!["2"]), ("3", vec!["3"])],
        )
        .unwrap();
        for i in 0..4 {
            assert_eq!(same.projector(i), fine.projector(i));
        }
    }

    #[test]
    fn coarsening_requires_partition() {
        let fine = make_projector_family(&[2], &[("u", vec![0]), ("d", vec![1])]).unwrap();
        assert!(matches!(
            coarsen_family(&fine, &[("x", vec!["u"])]),
            Err(Error::NotAPartition(_))
        ));
        assert!(matches!(
            coarsen_family(&fine, &[("x", vec!["u", "d"]), ("y", vec!["d"])]),
            Err(Error::NotAPartition(_))
        ));
        assert!(matches!(coarsen_family(&fine, &[("x", vec!["q"])]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn from_operators_rejects_non_projector() {
        let half = Operator::identity(&[2]).scaled(C64::new(0.5, 0.0));
        let tol = Tolerances::default();
        assert!(ProjectorFamily::from_operators(vec![("h".into(), half.clone()), ("g".into(), half)], &tol)
            .is_err());
    }
}
