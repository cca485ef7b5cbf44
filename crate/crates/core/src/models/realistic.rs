use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{continuity_family, SpinState, C64, DOWN, UP};
use crate::counting::ProbePoint;
use crate::error::{Error, Result};
use crate::histories::{Branch, BranchSet, Grouping, HistoryLabel};
use crate::qcore::StateVector;

/// Apparatus producing `n_up` orthogonal records of spin-up and `n_down` of
/// spin-down on a single run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealisticApparatus {
    pub n_up: usize,
    pub n_down: usize,
    /// Relative microbranch weights; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down_weights: Option<Vec<f64>>,
}

impl RealisticApparatus {
    pub fn uniform(n_up: usize, n_down: usize) -> Self {
        Self { n_up, n_down, up_weights: None, down_weights: None }
    }

    /// Relative weights drawn uniformly from `[0.5, 1.5)`.
    pub fn random<R: Rng + ?Sized>(n_up: usize, n_down: usize, rng: &mut R) -> Self {
        let mut draw = |n| (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
        Self { n_up, n_down, up_weights: Some(draw(n_up)), down_weights: Some(draw(n_down)) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_up == 0 || self.n_down == 0 {
            return Err(Error::invalid("n_up and n_down must be positive"));
        }
        for (name, n, ws) in
            [("up_weights", self.n_up, &self.up_weights), ("down_weights", self.n_down, &self.down_weights)]
        {
            if let Some(ws) = ws {
                if ws.len() != n {
                    return Err(Error::invalid(format!("{name} has {} entries, expected {n}", ws.len())));
                }
                if ws.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                    return Err(Error::invalid(format!("{name} must be positive")));
                }
            }
        }
        Ok(())
    }
}

fn normalized(n: usize, weights: &Option<Vec<f64>>) -> Vec<f64> {
    match weights {
        Some(ws) => {
            let total: f64 = ws.iter().sum();
            ws.iter().map(|w| w / total).collect()
        }
        None => vec![1.0 / n as f64; n],
    }
}

/// Microbranch label, e.g. `up:3` (1-based).
fn micro_label(outcome: &str, k: usize) -> HistoryLabel {
    HistoryLabel::new([format!("{outcome}:{k}")])
}

/// One run of the microbranch apparatus on `a|↑> + b|↓>`: spin ⊗ apparatus,
/// apparatus basis `Φ_0, Φ_↑^1..Φ_↑^{n_up}, Φ_↓^1..Φ_↓^{n_down}`. Branch
/// `up:k` is `a √u_k |↑>|Φ_↑^k>`; zero-weight branches are left out.
pub fn realistic_measurement(spin: SpinState, app: &RealisticApparatus) -> Result<BranchSet> {
    app.validate()?;
    let up = normalized(app.n_up, &app.up_weights);
    let down = normalized(app.n_down, &app.down_weights);
    let d_app = 1 + app.n_up + app.n_down;
    let dims = vec![2, d_app];
    let mut entries = Vec::with_capacity(app.n_up + app.n_down);
    let mut push = |amp: C64, spin_index: usize, app_index: usize, label| -> Result<()> {
        if amp.norm_sqr() > 0.0 {
            let mut v = vec![C64::new(0.0, 0.0); 2 * d_app];
            v[spin_index * d_app + app_index] = amp;
            entries.push(Branch::from_vector(label, StateVector::new(v, dims.clone())?));
        }
        Ok(())
    };
    for (k, u) in up.iter().enumerate() {
        push(spin.a() * u.sqrt(), 0, 1 + k, micro_label(UP, k + 1))?;
    }
    for (k, u) in down.iter().enumerate() {
        push(spin.b() * u.sqrt(), 1, 1 + app.n_up + k, micro_label(DOWN, k + 1))?;
    }
    BranchSet::new(vec![1.0], entries, spin.norm_sq())
}

/// Groups microbranches `up:k` / `down:k` into the coarse outcomes `up`, `down`.
pub fn spin_grouping(bs: &BranchSet) -> Result<Grouping> {
    let order = [HistoryLabel::new([UP]), HistoryLabel::new([DOWN])];
    Grouping::classify(bs, &order, |l| {
        let cell = l.cell(0).unwrap_or_default();
        HistoryLabel::new([cell.split(':').next().unwrap_or_default()])
    })
}

/// The microbranch apparatus applied to the continuity family, with `|↑>`
/// as the limit.
pub fn continuity_branches(point: ProbePoint, app: &RealisticApparatus) -> Result<BranchSet> {
    let spin = match point {
        ProbePoint::Member(k) => continuity_family(k)?,
        ProbePoint::Limit => SpinState::up(),
    };
    realistic_measurement(spin, app)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn eigenstate_gives_only_up_branches() {
        let bs = realistic_measurement(SpinState::up(), &RealisticApparatus::uniform(3, 2)).unwrap();
        assert_eq!(bs.len(), 3);
        assert!((bs.total_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonuniform_weights_are_normalized_per_outcome() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let app = RealisticApparatus::random(4, 5, &mut rng);
        let spin = SpinState::from_angle(0.3).unwrap();
        let bs = realistic_measurement(spin, &app).unwrap();
        let g = spin_grouping(&bs).unwrap();
        let idx = g.assign(&bs).unwrap();
        let w = |i: usize| idx[i].iter().map(|&j| bs.entries()[j].weight).sum::<f64>();
        assert!((w(0) - spin.weight_up()).abs() < 1e-14);
        assert!((w(1) - spin.weight_down()).abs() < 1e-14);
    }

    #[test]
    fn bad_weight_lists_are_rejected() {
        let mut app = RealisticApparatus::uniform(2, 2);
        app.up_weights = Some(vec![1.0]);
        assert!(realistic_measurement(SpinState::up(), &app).is_err());
        app.up_weights = Some(vec![1.0, -1.0]);
        assert!(realistic_measurement(SpinState::up(), &app).is_err());
        assert!(realistic_measurement(SpinState::up(), &RealisticApparatus::uniform(0, 2)).is_err());
    }
}
