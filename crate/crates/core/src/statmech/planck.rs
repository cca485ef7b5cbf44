use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::counting::{count_with_unit, CountReport};
use crate::error::{Error, Result};
use crate::histories::{Branch, BranchSet, Grouping, Group, HistoryLabel};

/// Largest `z^n` that [`sym_subspace_dim`] will enumerate.
pub const MAX_ENUMERATION: u64 = 10_000_000;

/// `z` one-particle states ("oscillators") holding `n` quanta of energy
/// `energy_per_quantum` each.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub z: u64,
    pub n: u64,
    pub energy_per_quantum: f64,
}

impl ModeSpec {
    pub fn new(z: u64, n: u64, energy_per_quantum: f64) -> Result<Self> {
        if z == 0 {
            return Err(Error::invalid("a mode needs at least one oscillator"));
        }
        if !(energy_per_quantum > 0.0 && energy_per_quantum.is_finite()) {
            return Err(Error::invalid("energy per quantum must be positive"));
        }
        Ok(Self { z, n, energy_per_quantum })
    }

    pub fn multiplicity(&self) -> BigUint {
        planck_multiplicity(self.z, self.n)
    }
}

/// `(z+n−1)! / ((z−1)! n!)`, exactly. Zero oscillators hold nothing: the
/// count is 1 for `n = 0` and 0 otherwise.
pub fn planck_multiplicity(z: u64, n: u64) -> BigUint {
    if z == 0 {
        return BigUint::from(u8::from(n == 0));
    }
    // C(z−1+n, n) built up one factor at a time; each partial product is
    // itself a binomial coefficient, so the division is exact
    let mut acc = BigUint::from(1u8);
    for i in 1..=n {
        acc *= z - 1 + i;
        acc /= i;
    }
    acc
}

/// Number of non-decreasing index tuples among all `z^n` tuples, i.e. the
/// dimension of the symmetric subspace of `n` particles on `z` states.
pub fn sym_subspace_dim(z: u64, n: u64) -> Result<u64> {
    let total = (z as f64).powf(n as f64);
    if total > MAX_ENUMERATION as f64 {
        return Err(Error::TooLarge(format!("{z}^{n} tuples exceed {MAX_ENUMERATION}")));
    }
    Ok(sorted_tuples(z, n).len() as u64)
}

/// Every sorted tuple, found by running through all `z^n` tuples.
fn sorted_tuples(z: u64, n: u64) -> Vec<Vec<u64>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    if z == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut t = vec![0u64; n as usize];
    loop {
        if t.windows(2).all(|w| w[0] <= w[1]) {
            out.push(t.clone());
        }
        let mut i = t.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < z {
                break;
            }
            t[i] = 0;
        }
    }
}

/// Equi-amplitude counting on a totally degenerate state over the symmetric
/// subspace: one unit-weight branch per multiset (labelled by its one-based
/// occupied states, e.g. `1,1,2`), all in one coarse history, with τ² equal to
/// one branch's weight. The count equals the multiplicity and the remainder
/// is exactly zero.
pub fn degenerate_branch_count(z: u64, n: u64) -> Result<CountReport> {
    if z == 0 {
        return Err(Error::invalid("a mode needs at least one oscillator"));
    }
    let dim = sym_subspace_dim(z, n)?;
    let entries: Vec<Branch> = sorted_tuples(z, n)
        .into_iter()
        .map(|t| {
            let cell = t.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
            Branch::weight_only(HistoryLabel::new([cell]), 1.0)
        })
        .collect();
    debug_assert_eq!(entries.len() as u64, dim);
    let bs = BranchSet::new(vec![1.0], entries, dim as f64)?;
    let members = bs.labels().cloned().collect();
    let label = HistoryLabel::new([format!("z={z},n={n}")]);
    let grouping = Grouping::new(vec![Group { label, members }])?;
    count_with_unit(&bs, &grouping, 1.0)
}

/// Both counts of `n` quanta on `z` oscillators side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracRow {
    pub z: u64,
    pub n: u64,
    pub sym_subspace_dim: u64,
    /// Decimal string of the multiplicity.
    pub planck_multiplicity: String,
    pub branch_count: u64,
    pub rounding_error: f64,
}

pub const DIRAC_CSV_HEADER: &str = "z,n,sym_subspace_dim,planck_multiplicity,branch_count,rounding_error";

/// Rows for `1 ≤ z ≤ z_max`, `0 ≤ n ≤ n_max`.
pub fn dirac_table(z_max: u64, n_max: u64) -> Result<Vec<DiracRow>> {
    let mut rows = Vec::new();
    for z in 1..=z_max {
        for n in 0..=n_max {
            let report = degenerate_branch_count(z, n)?;
            rows.push(DiracRow {
                z,
                n,
                sym_subspace_dim: sym_subspace_dim(z, n)?,
                planck_multiplicity: planck_multiplicity(z, n).to_str_radix(10),
                branch_count: report.total_count,
                rounding_error: report.rows[0].rounding_error.unwrap_or(0.0),
            });
        }
    }
    Ok(rows)
}

/// Exact below 30 digits, otherwise `d.dddddddde+k` from the leading digits.
pub fn format_big(x: &BigUint) -> String {
    let digits = x.to_str_radix(10);
    if digits.len() <= 30 {
        return digits;
    }
    format!("{}.{}e+{}", &digits[..1], &digits[1..10], digits.len() - 1)
}
