//! Branch-counting rules compared against Born weights: naive non-zero
//! counting, the equi-outcome rule, and equi-amplitude counting in both its
//! analytic (`floor(w/τ²)`) and constructive (clustering) forms.
//!
//! Coarse weights are the sums of member branch weights. Under decoherence they
//! equal the squared norm of the summed branch vector, which
//! [`crate::histories::coarse_grain_history`] computes when interference is in
//! question.
//!
//! For two coarse histories the analytic count satisfies
//! `|N_β/N_tot - w_β/Σw| < ε/(1-ε)` with `ε = τ²/Σw`, inside the `2ε` bound
//! quoted throughout. With `G` groups the upper side grows to roughly
//! `(G-1)·ε·w_β/Σw`.

mod partition;
mod probe;
pub(crate) mod report;
mod rules;

pub use partition::{
    constructive_partition, partition_by_group, Cluster, Partition, DEFAULT_RHO, ORTHOGONALITY_TOL,
};
pub use probe::{continuity_probe, ContinuityProbe, ProbePoint, ProbeRow};
pub use report::{CountReport, CountRow, RatioEntry, Rule, CSV_HEADER};
pub use rules::{
    count_equi_amplitude, count_equi_outcome, count_equi_outcome_flat, count_naive,
    count_with_unit, lp_ratio, snapped_floor, Leaf, LpRatio, Outcome, OutcomeTree, Tau,
    DEFAULT_NAIVE_THRESHOLD, SNAP,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histories::{Branch, BranchSet, Grouping, HistoryLabel};
    use crate::qcore::StateVector;

    fn weights(ws: &[(&str, f64)]) -> BranchSet {
        let entries = ws.iter().map(|(l, w)| Branch::weight_only(HistoryLabel::new([*l]), *w)).collect();
        BranchSet::new(vec![1.0], entries, ws.iter().map(|(_, w)| w).sum()).unwrap()
    }

    fn by_label(bs: &BranchSet) -> Grouping {
        Grouping::singletons(bs)
    }

    #[test]
    fn exact_multiples_count_exactly() {
        let bs = weights(&[("up", 0.64), ("down", 0.36)]);
        let rep = count_equi_amplitude(&bs, &by_label(&bs), Tau::from_sq(0.01).unwrap()).unwrap();
        assert_eq!(rep.count("up"), Some(64));
        assert_eq!(rep.count("down"), Some(36));
        let r = rep.ratio("up", "down").unwrap();
        assert_eq!(r.counts, [64, 36]);
        assert!((r.count_ratio.unwrap() - 16.0 / 9.0).abs() < 1e-15);
        assert!((r.born_ratio.unwrap() - 16.0 / 9.0).abs() < 1e-15);
        for row in &rep.rows {
            let err = row.rounding_error.unwrap();
            assert!((0.0..=0.01).contains(&err));
            assert!((row.count as f64 * 0.01 - row.weight).abs() <= 0.01);
        }
    }

    #[test]
    fn symmetric_weights_give_equal_counts() {
        let bs = weights(&[("a", 0.5), ("b", 0.5)]);
        for tau_sq in [1e-3, 3.7e-3, 7e-5] {
            let rep = count_equi_amplitude(&bs, &by_label(&bs), Tau::from_sq(tau_sq).unwrap()).unwrap();
            assert_eq!(rep.count("a"), rep.count("b"));
        }
    }

    #[test]
    fn tau_must_be_small() {
        let bs = weights(&[("a", 0.5), ("b", 0.5)]);
        let err = count_equi_amplitude(&bs, &by_label(&bs), Tau::new(0.1001).unwrap());
        assert!(matches!(err, Err(crate::Error::TauTooLarge { .. })));
        assert!(count_equi_amplitude(&bs, &by_label(&bs), Tau::new(0.1).unwrap()).is_ok());
    }

    #[test]
    fn zero_denominators_are_undefined() {
        let bs = weights(&[("a", 1.0), ("b", 0.0)]);
        let rep = count_naive(&bs, &by_label(&bs), None).unwrap();
        assert_eq!(rep.count("b"), Some(0));
        let r = rep.ratio("a", "b").unwrap();
        assert_eq!(r.count_ratio, None);
        assert_eq!(r.born_ratio, None);
        let json = serde_json::to_value(r).unwrap();
        assert_eq!(json["count_ratio"], "undefined");
        let back: RatioEntry = serde_json::from_value(json).unwrap();
        assert_eq!(&back, r);
    }

    #[test]
    fn equi_outcome_single_measurement_is_even() {
        let tree = OutcomeTree::new(vec![Outcome::leaf("up", 0.9), Outcome::leaf("down", 0.1)]).unwrap();
        let rep = count_equi_outcome(&tree).unwrap();
        assert_eq!(rep.row("up").unwrap().count_prob, Some(0.5));
        assert_eq!(rep.row("down").unwrap().count_prob, Some(0.5));
    }

    #[test]
    fn lp_ratio_matches_born_at_two() {
        let ws = vec![("up".to_string(), 0.64), ("down".to_string(), 0.36)];
        let born = lp_ratio(&ws, 2.0).unwrap();
        assert!((born[0].value.unwrap() - 0.64 / 0.36).abs() < 1e-15);
        let l1 = lp_ratio(&ws, 1.0).unwrap();
        assert!((l1[0].value.unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(lp_ratio(&ws, 0.5).is_err());
    }

    #[test]
    fn constructive_partition_exact_division() {
        let tau = Tau::from_sq(1.0).unwrap();
        let micro: Vec<Branch> = (0..100)
            .map(|i| {
                let mut amps = vec![0.0; 100];
                amps[i] = 0.1f64.sqrt();
                Branch::from_vector(HistoryLabel::new([i.to_string()]), StateVector::from_real(&amps))
            })
            .collect();
        let refs: Vec<&Branch> = micro.iter().collect();
        let p = constructive_partition(&refs, tau, 0.1).unwrap();
        assert_eq!(p.len(), 10);
        assert!(p.clusters.iter().all(|c| c.member_indices.len() == 10));
        assert!(p.remainder.is_none());
    }

    #[test]
    fn constructive_partition_rejects_heavy_microbranch() {
        let tau = Tau::from_sq(1.0).unwrap();
        let heavy = Branch::weight_only(HistoryLabel::new(["h"]), 0.5);
        let light = Branch::weight_only(HistoryLabel::new(["l"]), 0.001);
        let err = constructive_partition(&[&light, &heavy], tau, 0.01).unwrap_err();
        assert!(matches!(err, crate::Error::MicrobranchTooHeavy { index: 1, .. }));
    }

    #[test]
    fn constructive_partition_rejects_overlapping_vectors() {
        let tau = Tau::from_sq(1.0).unwrap();
        let a = Branch::from_vector(HistoryLabel::new(["a"]), StateVector::from_real(&[0.05, 0.0]));
        let b = Branch::from_vector(HistoryLabel::new(["b"]), StateVector::from_real(&[0.03, 0.04]));
        assert!(matches!(
            constructive_partition(&[&a, &b], tau, 0.01),
            Err(crate::Error::NotOrthogonal(0, 1))
        ));
    }

    #[test]
    fn snapped_floor_handles_representation_error() {
        assert_eq!(snapped_floor(0.36 / 0.01), 36);
        assert_eq!(snapped_floor(35.5), 35);
        assert_eq!(snapped_floor(0.0), 0);
    }
}
