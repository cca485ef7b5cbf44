use super::{SpinState, C64, DOWN, UP};
use crate::error::{Error, Result};
use crate::histories::{default_prune, enumerate_branches, BranchSet, HistorySpace};
use crate::qcore::{make_projector_family, permutation_generator, StateVector, Tolerances};

/// Largest protocol length built as a dense generator (space dimension
/// `6·(2^{M+1} − 1)`).
pub const MAX_MEASUREMENTS: usize = 6;

const READY: usize = 0;
const BLANK: &str = "blank";

/// Spin ⊗ display ⊗ memory, evolved through `measurements` protocol cycles.
#[derive(Clone, Debug)]
pub struct EverettProtocol {
    pub measurements: usize,
    pub space: HistorySpace,
    pub initial: StateVector,
    pub branches: BranchSet,
}

impl EverettProtocol {
    /// Memory register contents of every basis state a branch vector
    /// occupies, read off its nonzero amplitudes.
    pub fn records(&self, branch_index: usize) -> Vec<String> {
        let b = &self.branches.entries()[branch_index];
        let Some(v) = &b.vector else { return Vec::new() };
        let mem = memory_dim(self.measurements);
        let threshold = 1e-12 * v.norm_sqr();
        let mut out: Vec<String> = (0..v.dim())
            .filter(|&i| v.amplitude(i).norm_sqr() > threshold)
            .map(|i| memory_record(i % mem))
            .collect();
        out.dedup();
        out
    }
}

fn memory_dim(m: usize) -> usize {
    (1 << (m + 1)) - 1
}

/// Memory basis index of a record sequence; shorter sequences come first,
/// and within a length `↑` sorts before `↓`. Bit value 0 is `↑`.
fn memory_index(len: usize, bits: usize) -> usize {
    (1 << len) - 1 + bits
}

fn memory_bits(index: usize) -> (usize, usize) {
    let len = (usize::BITS - 1 - (index + 1).leading_zeros()) as usize;
    (len, index + 1 - (1 << len))
}

/// Human-readable record for memory index `index`, e.g. `"↑↓"`; `""` for the
/// empty memory.
pub fn memory_record(index: usize) -> String {
    let (len, bits) = memory_bits(index);
    (0..len).map(|i| if bits >> (len - 1 - i) & 1 == 0 { '↑' } else { '↓' }).collect()
}

/// Cycle permutation on spin(2) ⊗ display(3) ⊗ memory: measure, record, reset.
fn cycle_permutation(m: usize) -> Vec<usize> {
    let mem = memory_dim(m);
    let idx = |s: usize, d: usize, k: usize| (s * 3 + d) * mem + k;
    let dim = 6 * mem;

    // measure (and reset): |σ>|Φ_0> <-> |σ>|Φ_σ>, with Φ_↑ = 1 and Φ_↓ = 2
    let mut measure: Vec<usize> = (0..dim).collect();
    for s in 0..2 {
        for k in 0..mem {
            measure[idx(s, READY, k)] = idx(s, 1 + s, k);
            measure[idx(s, 1 + s, k)] = idx(s, READY, k);
        }
    }

    // record: for display Φ_σ, memory s -> sσ while there is room; the
    // remaining domain (full memories) is paired in order with the unused
    // codomain (memories not ending in σ)
    let mut record: Vec<usize> = (0..dim).collect();
    for bit in 0..2 {
        let mut map = vec![usize::MAX; mem];
        let mut hit = vec![false; mem];
        for k in 0..mem {
            let (len, bits) = memory_bits(k);
            if len < m {
                let t = memory_index(len + 1, bits << 1 | bit);
                map[k] = t;
                hit[t] = true;
            }
        }
        let free: Vec<usize> = (0..mem).filter(|&k| !hit[k]).collect();
        let unmapped: Vec<usize> = (0..mem).filter(|&k| map[k] == usize::MAX).collect();
        for (k, t) in unmapped.into_iter().zip(free) {
            map[k] = t;
        }
        for s in 0..2 {
            for k in 0..mem {
                record[idx(s, 1 + bit, k)] = idx(s, 1 + bit, map[k]);
            }
        }
    }

    // U = measure ∘ record ∘ measure, as maps on basis indices
    (0..dim).map(|i| measure[record[measure[i]]]).collect()
}

/// Everett's protocol of repeated measurements of one spin. Dynamics is a
/// time-independent Hamiltonian whose unit-time propagator is the full cycle;
/// history `k` reads the `k`-th memory symbol at `t = k`.
pub fn everett_protocol(spin: SpinState, measurements: usize) -> Result<EverettProtocol> {
    if measurements == 0 {
        return Err(Error::invalid("at least one measurement is needed"));
    }
    if measurements > MAX_MEASUREMENTS {
        return Err(Error::TooLarge(format!(
            "{measurements} measurements exceed the limit of {MAX_MEASUREMENTS}"
        )));
    }
    let m = measurements;
    let mem = memory_dim(m);
    let dims = vec![2, 3, mem];
    let h = permutation_generator(&dims, &cycle_permutation(m))?;

    let mut families = Vec::with_capacity(m);
    for slot in 0..m {
        let mut cells: [(&str, Vec<usize>); 3] =
            [(UP, Vec::new()), (DOWN, Vec::new()), (BLANK, Vec::new())];
        for i in 0..6 * mem {
            let (len, bits) = memory_bits(i % mem);
            let cell = if len <= slot { 2 } else { bits >> (len - 1 - slot) & 1 };
            cells[cell].1.push(i);
        }
        families.push(make_projector_family(&dims, &cells)?);
    }
    let times = (1..=m).map(|k| k as f64).collect();
    let space = HistorySpace::new(times, families, h, 1.0, &Tolerances::default())?;

    let zero = C64::new(0.0, 0.0);
    let mut amps = vec![zero; 6 * mem];
    // |σ>|Φ_0>|Ψ_∅>
    amps[0] = spin.a();
    amps[3 * mem] = spin.b();
    let initial = StateVector::new(amps, dims)?;
    let branches = enumerate_branches(&space, &initial, default_prune(&initial))?;
    Ok(EverettProtocol { measurements: m, space, initial, branches })
}
