use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::planck::{format_big, planck_multiplicity, ModeSpec};
use crate::error::{Error, Result};

/// Relative width at which the bisections stop.
const BISECTION_TOL: f64 = 1e-15;
const MAX_ITER: usize = 400;

/// Oscillator count and quantum energy of one mode; occupations are solved for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub z: u64,
    pub energy_per_quantum: f64,
}

impl Mode {
    pub fn new(z: u64, energy_per_quantum: f64) -> Result<Self> {
        ModeSpec::new(z, 0, energy_per_quantum)?;
        Ok(Self { z, energy_per_quantum })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub modes: Vec<Mode>,
    pub total_energy: f64,
    /// Lagrange multiplier of the energy constraint.
    pub beta: f64,
    pub occupancies: Vec<f64>,
    /// `z / (e^{βhν} − 1)` at the solved β.
    pub analytic: Vec<f64>,
}

impl Equilibrium {
    pub fn energy(&self) -> f64 {
        self.modes.iter().zip(&self.occupancies).map(|(m, n)| m.energy_per_quantum * n).sum()
    }

    pub fn max_relative_error(&self) -> f64 {
        self.occupancies
            .iter()
            .zip(&self.analytic)
            .map(|(n, a)| ((n - a) / a).abs())
            .fold(0.0, f64::max)
    }

    /// Occupancies rounded to the nearest integer.
    pub fn rounded(&self) -> Vec<u64> {
        self.occupancies.iter().map(|n| n.round() as u64).collect()
    }
}

/// Stirling form of `ln W` with the `−1`s of the exact count dropped:
/// `(z+n) ln(z+n) − z ln z − n ln n`. Its gain per quantum is `ln(1 + z/n)`.
fn stirling_gain(z: f64, n: f64) -> f64 {
    (z / n).ln_1p()
}

/// Solves `ln(1 + z/n) = βε` for `n` by bisection; the left side falls from
/// `+∞` at `n = 0` to `0` as `n → ∞`.
fn occupancy_at(mode: &Mode, beta: f64) -> f64 {
    let z = mode.z as f64;
    let target = beta * mode.energy_per_quantum;
    let (mut lo, mut hi) = (0.0, z.max(1.0));
    while stirling_gain(z, hi) > target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if stirling_gain(z, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_TOL * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn energy_at(modes: &[Mode], beta: f64) -> f64 {
    modes.iter().map(|m| m.energy_per_quantum * occupancy_at(m, beta)).sum()
}

/// Maximizes `Σ_s ln W_s` over real `n_s ≥ 0` with `Σ_s n_s hν_s = E`, using
/// the Stirling form of `ln W_s`. The multiplier β is bracketed by doubling
/// and bisected; only the decrease of the total energy with β is used.
pub fn equilibrium_occupancies(modes: &[Mode], total_energy: f64) -> Result<Equilibrium> {
    if !(total_energy > 0.0 && total_energy.is_finite()) {
        return Err(Error::invalid(format!("total energy must be positive, got {total_energy}")));
    }
    if modes.is_empty() {
        return Err(Error::invalid("no modes given"));
    }
    for m in modes {
        Mode::new(m.z, m.energy_per_quantum)?;
    }
    let (mut lo, mut hi) = (1.0, 1.0);
    while energy_at(modes, lo) < total_energy {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Numeric("cannot bracket beta from below".into()));
        }
    }
    while energy_at(modes, hi) > total_energy {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numeric("cannot bracket beta from above".into()));
        }
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if energy_at(modes, mid) > total_energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_TOL * hi {
            break;
        }
    }
    let beta = 0.5 * (lo + hi);
    let occupancies = modes.par_iter().map(|m| occupancy_at(m, beta)).collect();
    let analytic =
        modes.iter().map(|m| m.z as f64 / (beta * m.energy_per_quantum).exp_m1()).collect();
    Ok(Equilibrium { modes: modes.to_vec(), total_energy, beta, occupancies, analytic })
}

/// Which form of `ln W_s` a discrete search maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogW {
    /// The smoothed form the continuous maximizer uses.
    Stirling,
    /// `ln C(z+n−1, n)`, the exact count.
    Exact,
}

impl LogW {
    /// `ln W(n+1) − ln W(n)`.
    fn gain(self, z: u64, n: u64) -> f64 {
        let (z, n) = (z as f64, n as f64);
        match self {
            // (z+n+1)ln(z+n+1) − (z+n)ln(z+n) − (n+1)ln(n+1) + n ln n
            LogW::Stirling => {
                let grow = |x: f64| if x == 0.0 { 0.0 } else { (x + 1.0).ln() + x * (1.0 / x).ln_1p() };
                grow(z + n) - grow(n)
            }
            LogW::Exact => ((z + n) / (n + 1.0)).ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HillClimb {
    pub start: Vec<u64>,
    pub end: Vec<u64>,
    /// Improving ±1 moves available at the starting point.
    pub improving_moves_at_start: usize,
    /// Moves taken before no ±1 move improved.
    pub moves_taken: usize,
}

/// Greedy integer ascent on `Σ_s ln W_s(n_s) − β Σ_s hν_s n_s` by single-quantum
/// moves, from `start`.
pub fn hill_climb(modes: &[Mode], start: &[u64], beta: f64, objective: LogW) -> Result<HillClimb> {
    if modes.len() != start.len() {
        return Err(Error::DimensionMismatch { expected: modes.len(), got: start.len() });
    }
    let delta = |m: &Mode, n: u64, up: bool| -> Option<f64> {
        if up {
            Some(objective.gain(m.z, n) - beta * m.energy_per_quantum)
        } else if n > 0 {
            Some(beta * m.energy_per_quantum - objective.gain(m.z, n - 1))
        } else {
            None
        }
    };
    let improving = |n: &[u64]| -> Vec<(usize, bool, f64)> {
        let mut out = Vec::new();
        for (s, m) in modes.iter().enumerate() {
            for up in [true, false] {
                if let Some(d) = delta(m, n[s], up) {
                    if d > 0.0 {
                        out.push((s, up, d));
                    }
                }
            }
        }
        out
    };
    let mut n = start.to_vec();
    let improving_moves_at_start = improving(&n).len();
    let mut moves_taken = 0;
    while let Some(&(s, up, _)) =
        improving(&n).iter().max_by(|a, b| a.2.total_cmp(&b.2))
    {
        if up {
            n[s] += 1;
        } else {
            n[s] -= 1;
        }
        moves_taken += 1;
    }
    Ok(HillClimb { start: start.to_vec(), end: n, improving_moves_at_start, moves_taken })
}

/// One line of the occupancy table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyRow {
    pub mode: usize,
    pub z: u64,
    /// Rounded occupation used for `W`.
    pub n: u64,
    /// `W_s` at the rounded occupation, exact when short.
    #[serde(rename = "W")]
    pub w: String,
    pub occupancy: f64,
    pub analytic_occupancy: f64,
    pub relative_error: f64,
}

pub const OCCUPANCY_CSV_HEADER: &str = "mode,z,n,W,occupancy,analytic_occupancy,relative_error";

pub fn occupancy_table(eq: &Equilibrium) -> Vec<OccupancyRow> {
    eq.modes
        .iter()
        .enumerate()
        .map(|(s, m)| {
            let n = eq.occupancies[s].round() as u64;
            let a = eq.analytic[s];
            OccupancyRow {
                mode: s,
                z: m.z,
                n,
                w: format_big(&planck_multiplicity(m.z, n)),
                occupancy: eq.occupancies[s],
                analytic_occupancy: a,
                relative_error: ((eq.occupancies[s] - a) / a).abs(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_takes_all_the_energy() {
        let eq = equilibrium_occupancies(&[Mode::new(1000, 2.5).unwrap()], 1234.5).unwrap();
        assert!((eq.occupancies[0] - 1234.5 / 2.5).abs() < 1e-9 * 493.8);
    }

    #[test]
    fn nonpositive_energy_is_rejected() {
        let m = [Mode::new(10, 1.0).unwrap()];
        assert!(equilibrium_occupancies(&m, 0.0).is_err());
        assert!(equilibrium_occupancies(&m, -1.0).is_err());
    }

    #[test]
    fn exact_gain_matches_multiplicity_ratio() {
        let (z, n) = (7u64, 5u64);
        let ratio = |a: u64, b: u64| {
            let pa = planck_multiplicity(z, a);
            let pb = planck_multiplicity(z, b);
            (pa.to_string().parse::<f64>().unwrap() / pb.to_string().parse::<f64>().unwrap()).ln()
        };
        assert!((LogW::Exact.gain(z, n) - ratio(n + 1, n)).abs() < 1e-12);
    }
}
