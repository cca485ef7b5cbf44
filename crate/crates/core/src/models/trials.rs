use super::{SpinState, C64, DOWN, UP};
use crate::error::{Error, Result};
use crate::histories::{Branch, BranchSet, Grouping, HistoryLabel};
use crate::qcore::StateVector;

/// Largest number of fresh trials enumerated branch by branch.
pub const MAX_TRIALS: usize = 20;

/// Branch vectors are attached up to this many trials; above it the branch
/// set carries weights only.
pub const MAX_TRIALS_WITH_VECTORS: usize = 8;

/// `M` independently prepared copies of `spin`, each measured once. Trial `t`
/// is read at time `t`; every record sequence is one branch, listed with `↑`
/// before `↓` at each trial. The branch vector lives on the M-fold record
/// register (one qubit per trial), which after measurement carries the same
/// amplitudes as the spins themselves.
pub fn fresh_spin_trials(spin: SpinState, trials: usize) -> Result<BranchSet> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is needed"));
    }
    if trials > MAX_TRIALS {
        return Err(Error::TooLarge(format!("{trials} trials exceed the limit of {MAX_TRIALS}")));
    }
    let (a, b) = (spin.a(), spin.b());
    let count = 1usize << trials;
    let with_vectors = trials <= MAX_TRIALS_WITH_VECTORS;
    let dims = vec![2; trials];
    let entries = (0..count)
        .map(|bits| {
            let downs = bits.count_ones() as i32;
            let cells = (0..trials).map(|t| if bits >> (trials - 1 - t) & 1 == 0 { UP } else { DOWN });
            let label = HistoryLabel::new(cells);
            if with_vectors {
                let mut v = vec![C64::new(0.0, 0.0); count];
                v[bits] = a.powi(trials as i32 - downs) * b.powi(downs);
                Ok(Branch::from_vector(label, StateVector::new(v, dims.clone())?))
            } else {
                let w = spin.weight_up().powi(trials as i32 - downs) * spin.weight_down().powi(downs);
                Ok(Branch::weight_only(label, w))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let times = (1..=trials).map(|t| t as f64).collect();
    BranchSet::new(times, entries, spin.norm_sq().powi(trials as i32))
}

/// Groups record sequences by their number of `up` records; coarse label `j`
/// for `j = 0..=M`.
pub fn up_count_grouping(bs: &BranchSet) -> Result<Grouping> {
    let m = bs.times().len();
    let order: Vec<HistoryLabel> = (0..=m).map(|j| HistoryLabel::new([j.to_string()])).collect();
    Grouping::classify(bs, &order, |l| {
        HistoryLabel::new([l.cells().iter().filter(|c| *c == UP).count().to_string()])
    })
}

/// Summed weight of the branches whose fraction of `up` records lies in
/// `[lo, hi]`.
pub fn frequency_window_weight(bs: &BranchSet, lo: f64, hi: f64) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::invalid(format!("empty frequency window [{lo}, {hi}]")));
    }
    let m = bs.times().len() as f64;
    Ok(bs
        .entries()
        .iter()
        .filter(|b| {
            let f = b.label.cells().iter().filter(|c| *c == UP).count() as f64 / m;
            (lo..=hi).contains(&f)
        })
        .map(|b| b.weight)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_fair_trials_give_four_quarters() {
        let bs = fresh_spin_trials(SpinState::real(1.0, 1.0).unwrap(), 2).unwrap();
        assert_eq!(bs.len(), 4);
        assert!((bs.initial_norm_sq() - 4.0).abs() < 1e-15);
        for b in bs.entries() {
            assert!((b.weight / bs.initial_norm_sq() - 0.25).abs() < 1e-15);
        }
        let labels: Vec<String> = bs.labels().map(|l| l.to_string()).collect();
        assert_eq!(labels, ["up,up", "up,down", "down,up", "down,down"]);
    }

    #[test]
    fn too_many_trials_are_rejected() {
        assert!(matches!(
            fresh_spin_trials(SpinState::up(), MAX_TRIALS + 1),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn weight_only_above_vector_limit() {
        let bs = fresh_spin_trials(SpinState::up(), MAX_TRIALS_WITH_VECTORS + 1).unwrap();
        assert!(!bs.has_vectors());
        let bs = fresh_spin_trials(SpinState::up(), MAX_TRIALS_WITH_VECTORS).unwrap();
        assert!(bs.has_vectors());
    }
}
