//! Concrete scenarios that produce history spaces and branch sets: Everett's
//! repeated-measurement protocol, independent fresh trials, the microbranch
//! apparatus, the θ_k continuity family, a lattice toy of quantum Brownian
//! motion and the two-measurement outcome tree.

mod everett;
mod qbm;
mod realistic;
mod trials;
mod wallace;

pub use everett::{everett_protocol, memory_record, EverettProtocol, MAX_MEASUREMENTS};
pub use qbm::{dephased_position_weights, qbm_model, QbmLattice, QbmRun, MAX_QBM_DIM};
pub use realistic::{
    continuity_branches, realistic_measurement, spin_grouping, RealisticApparatus,
};
pub use trials::{
    fresh_spin_trials, frequency_window_weight, up_count_grouping, MAX_TRIALS, MAX_TRIALS_WITH_VECTORS,
};
pub use wallace::{wallace_tree, wallace_tree_unbranched};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Complex, StateVector};

type C64 = Complex<f64>;

/// Cell labels of a z-spin record.
pub const UP: &str = "up";
pub const DOWN: &str = "down";

/// `a|↑> + b|↓>`, not necessarily normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    a: C64,
    b: C64,
}

impl SpinState {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let finite = [a.re, a.im, b.re, b.im].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("spin amplitudes must be finite"));
        }
        if a.norm_sqr() + b.norm_sqr() == 0.0 {
            return Err(Error::invalid("spin state (0, 0) has no branches"));
        }
        Ok(Self { a, b })
    }

    pub fn real(a: f64, b: f64) -> Result<Self> {
        Self::new(C64::new(a, 0.0), C64::new(b, 0.0))
    }

    /// `cos θ |↑> + sin θ |↓>`.
    pub fn from_angle(theta: f64) -> Result<Self> {
        Self::real(theta.cos(), theta.sin())
    }

    pub fn up() -> Self {
        Self { a: C64::new(1.0, 0.0), b: C64::new(0.0, 0.0) }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn weight_up(&self) -> f64 {
        self.a.norm_sqr()
    }

    pub fn weight_down(&self) -> f64 {
        self.b.norm_sqr()
    }

    pub fn norm_sq(&self) -> f64 {
        self.weight_up() + self.weight_down()
    }

    pub fn to_state(&self) -> StateVector {
        StateVector::flat(vec![self.a, self.b])
    }

    pub fn distance(&self, other: &SpinState) -> f64 {
        ((self.a - other.a).norm_sqr() + (self.b - other.b).norm_sqr()).sqrt()
    }
}

/// `θ_k = π/(2k+1)`.
pub fn continuity_angle(k: usize) -> f64 {
    std::f64::consts::PI / (2 * k + 1) as f64
}

/// `cos θ_k |↑> + i sin θ_k |↓>`, converging to `|↑>` as `k → ∞`.
pub fn continuity_family(k: usize) -> Result<SpinState> {
    if k == 0 {
        return Err(Error::invalid("the continuity family starts at k = 1"));
    }
    let theta = continuity_angle(k);
    SpinState::new(C64::new(theta.cos(), 0.0), C64::new(0.0, theta.sin()))
}

/// `‖φ_k − φ↑‖` for the continuity family.
pub fn continuity_distance(k: usize) -> Result<f64> {
    Ok(continuity_family(k)?.distance(&SpinState::up()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_member_is_pi_over_three() {
        let s = continuity_family(1).unwrap();
        assert!((s.a().re - 0.5).abs() < 1e-15);
        assert_eq!(s.a().im, 0.0);
        assert_eq!(s.b().re, 0.0);
        assert!((s.b().im - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(continuity_family(0).is_err());
    }

    #[test]
    fn family_approaches_spin_up_monotonically() {
        let up = SpinState::up();
        let d: Vec<f64> = (1..=101).map(|k| continuity_family(k).unwrap().distance(&up)).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        assert!(continuity_family(100_000).unwrap().distance(&up) < 1e-4);
    }

    #[test]
    fn zero_spin_is_rejected() {
        assert!(SpinState::real(0.0, 0.0).is_err());
        assert!(SpinState::real(f64::NAN, 1.0).is_err());
    }
}
