use serde::{Deserialize, Serialize};

use crate::counting::snapped_floor;
use crate::error::{Error, Result};

/// A macrostate reduced to the Liouville volume of its region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    volume: f64,
}

impl MacroState {
    pub fn new(volume: f64) -> Result<Self> {
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::invalid(format!("volume must be positive, got {volume}")));
        }
        Ok(Self { volume })
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoltzmannCount {
    pub w: u64,
    /// Set when the cell is larger than the region, so no cell fits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Number of whole cells of extension `eps` in the region: `floor(V/ε)`.
pub fn boltzmann_count(m: &MacroState, eps: f64) -> Result<BoltzmannCount> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("cell size must be positive, got {eps}")));
    }
    let cells = m.volume / eps;
    if cells >= u64::MAX as f64 {
        return Err(Error::TooLarge(format!("{cells} cells overflow the counter")));
    }
    let warning = (eps > m.volume)
        .then(|| format!("cell size {eps} exceeds the volume {}; no cell fits", m.volume));
    Ok(BoltzmannCount { w: snapped_floor(cells), warning })
}

/// `k_B ln(W1/W2)`.
pub fn entropy_diff(w1: u64, w2: u64, k_b: f64) -> Result<f64> {
    if w1 == 0 || w2 == 0 {
        return Err(Error::invalid("entropy needs at least one microstate"));
    }
    if !(k_b > 0.0 && k_b.is_finite()) {
        return Err(Error::invalid("k_B must be positive"));
    }
    Ok(k_b * ((w1 as f64).ln() - (w2 as f64).ln()))
}

/// One cell size applied to two macrostates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoltzmannRow {
    pub eps: f64,
    pub w1: u64,
    pub w2: u64,
    /// `W1/W2`, absent when `W2 = 0`.
    pub ratio: Option<f64>,
    /// `k_B ln(W1/W2)`, absent when either count is zero.
    pub entropy_diff: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub const BOLTZMANN_CSV_HEADER: &str = "eps,W1,W2,ratio,entropy_diff";

/// Counts both macrostates at every cell size in `eps`.
pub fn boltzmann_table(m1: &MacroState, m2: &MacroState, eps: &[f64], k_b: f64) -> Result<Vec<BoltzmannRow>> {
    eps.iter()
        .map(|&e| {
            let c1 = boltzmann_count(m1, e)?;
            let c2 = boltzmann_count(m2, e)?;
            let entropy = if c1.w > 0 && c2.w > 0 { Some(entropy_diff(c1.w, c2.w, k_b)?) } else { None };
            Ok(BoltzmannRow {
                eps: e,
                w1: c1.w,
                w2: c2.w,
                ratio: (c2.w > 0).then(|| c1.w as f64 / c2.w as f64),
                entropy_diff: entropy,
                warnings: c1.warning.into_iter().chain(c2.warning).collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division() {
        let eps = 0.1;
        let a = boltzmann_count(&MacroState::new(2.0).unwrap(), eps).unwrap();
        let b = boltzmann_count(&MacroState::new(1.0).unwrap(), eps).unwrap();
        assert_eq!((a.w, b.w), (20, 10));
        assert_eq!(a.w as f64 / b.w as f64, 2.0);
    }

    #[test]
    fn single_and_empty_cells() {
        let m = MacroState::new(0.7).unwrap();
        assert_eq!(boltzmann_count(&m, 0.7).unwrap().w, 1);
        let big = boltzmann_count(&m, 0.8).unwrap();
        assert_eq!(big.w, 0);
        assert!(big.warning.is_some());
    }

    #[test]
    fn entropy_is_antisymmetric() {
        assert_eq!(entropy_diff(7, 7, 1.0).unwrap(), 0.0);
        assert_eq!(entropy_diff(30, 7, 2.0).unwrap(), -entropy_diff(7, 30, 2.0).unwrap());
        assert!(entropy_diff(0, 1, 1.0).is_err());
        let w2 = 1_000_000_000u64;
        let w1 = (std::f64::consts::E * w2 as f64).round() as u64;
        assert!((entropy_diff(w1, w2, 1.38).unwrap() - 1.38).abs() < 1e-9);
    }
}
