use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::C64;
use crate::error::{Error, Result};
use crate::histories::{default_prune, enumerate_branches, BranchSet, Grouping, HistorySpace};
use crate::qcore::{make_projector_family, Operator, Propagator, StateVector, Tolerances};

/// Largest total dimension `L · E^n` accepted.
pub const MAX_QBM_DIM: usize = 4096;

/// A particle hopping on `cells` sites; after every step a fresh environment
/// register of `env_levels` levels scatters off it and keeps a record of the
/// site with amplitude `√record_strength`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QbmLattice {
    pub cells: usize,
    pub env_levels: usize,
    pub hop: f64,
    pub steps: usize,
    pub record_strength: f64,
    pub dt: f64,
}

impl Default for QbmLattice {
    fn default() -> Self {
        Self { cells: 5, env_levels: 6, hop: 0.2, steps: 2, record_strength: 1.0, dt: 1.0 }
    }
}

impl QbmLattice {
    pub fn validate(&self) -> Result<()> {
        if self.cells < 2 {
            return Err(Error::invalid("cells must be at least 2"));
        }
        if self.env_levels < 2 {
            return Err(Error::invalid("env_levels must be at least 2"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be at least 1"));
        }
        if !self.hop.is_finite() {
            return Err(Error::invalid("hop must be finite"));
        }
        if !(0.0..=1.0).contains(&self.record_strength) {
            return Err(Error::invalid("record_strength must lie in [0, 1]"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be positive"));
        }
        let dim = (self.env_levels as f64).powi(self.steps as i32) * self.cells as f64;
        if dim > MAX_QBM_DIM as f64 {
            return Err(Error::TooLarge(format!("dimension {dim} exceeds {MAX_QBM_DIM}")));
        }
        Ok(())
    }

    pub fn cell_labels(&self) -> Vec<String> {
        (0..self.cells).map(|x| format!("x{x}")).collect()
    }

    /// Site the particle starts on.
    pub fn start(&self) -> usize {
        self.cells / 2
    }

    /// Open-chain kinetic term `-hop Σ (|x><x+1| + h.c.)`.
    pub fn system_hamiltonian(&self) -> Operator {
        let l = self.cells;
        let mut h = DMatrix::from_element(l, l, C64::new(0.0, 0.0));
        for x in 0..l - 1 {
            h[(x, x + 1)] = C64::new(-self.hop, 0.0);
            h[(x + 1, x)] = C64::new(-self.hop, 0.0);
        }
        Operator::new(h, vec![l]).expect("square by construction")
    }

    fn system_step(&self) -> Result<Operator> {
        let p = Propagator::new(&self.system_hamiltonian(), 1.0, &Tolerances::default())?;
        Ok(p.unitary(self.dt))
    }

    /// Environment level that records site `x`; distinct sites get distinct
    /// levels when `env_levels > cells`.
    fn record_level(&self, x: usize) -> usize {
        1 + x % (self.env_levels - 1)
    }
}

#[derive(Clone, Debug)]
pub struct QbmRun {
    pub lattice: QbmLattice,
    pub space: HistorySpace,
    pub initial: StateVector,
    pub branches: BranchSet,
}

impl QbmRun {
    /// Groups position histories by the site occupied at `time_index`.
    pub fn position_grouping(&self, time_index: usize) -> Result<Grouping> {
        let labels = self.lattice.cell_labels();
        let cells: Vec<&str> = labels.iter().map(String::as_str).collect();
        Grouping::by_cell(&self.branches, time_index, &cells)
    }
}

/// Record of step `k`: on register `k`, rotates `|0>` towards `|j_x>` by the
/// angle whose sine is `√s`, for the current site `x`.
fn record_operator(cfg: &QbmLattice, k: usize, dims: &[usize]) -> Result<Operator> {
    let e = cfg.env_levels;
    let env_dim = e.pow(cfg.steps as u32);
    let stride = e.pow((cfg.steps - 1 - k) as u32);
    let d = cfg.cells * env_dim;
    let (c, s) = ((1.0 - cfg.record_strength).sqrt(), cfg.record_strength.sqrt());
    let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for i in 0..d {
        let x = i / env_dim;
        let r = (i / stride) % e;
        let j = cfg.record_level(x);
        let base = i - r * stride;
        if r == 0 {
            m[(i, i)] = C64::new(c, 0.0);
            m[(base + j * stride, i)] = C64::new(s, 0.0);
        } else if r == j {
            m[(base, i)] = C64::new(-s, 0.0);
            m[(i, i)] = C64::new(c, 0.0);
        } else {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    Operator::new(m, dims.to_vec())
}

/// Position histories of the lattice particle over `steps` steps of length
/// `dt`, starting on the centre site with every register in `|0>`.
pub fn qbm_model(cfg: &QbmLattice) -> Result<QbmRun> {
    cfg.validate()?;
    let env_dims = vec![cfg.env_levels; cfg.steps];
    let env_dim: usize = env_dims.iter().product();
    let mut dims = vec![cfg.cells];
    dims.extend(&env_dims);

    let free = cfg.system_step()?.kron(&Operator::identity(&env_dims));
    let steps = (0..cfg.steps)
        .map(|k| record_operator(cfg, k, &dims)?.compose(&free))
        .collect::<Result<Vec<_>>>()?;

    let labels = cfg.cell_labels();
    let partition: Vec<(&str, Vec<usize>)> = labels
        .iter()
        .enumerate()
        .map(|(x, l)| (l.as_str(), (x * env_dim..(x + 1) * env_dim).collect()))
        .collect();
    let family = make_projector_family(&dims, &partition)?;
    let times = (1..=cfg.steps).map(|k| k as f64 * cfg.dt).collect();
    let space =
        HistorySpace::with_steps(times, vec![family; cfg.steps], steps, &Tolerances::default())?;

    let initial = StateVector::basis(&dims, cfg.start() * env_dim)?;
    let branches = enumerate_branches(&space, &initial, default_prune(&initial))?;
    Ok(QbmRun { lattice: cfg.clone(), space, initial, branches })
}

/// Site distribution after `steps` steps of the system alone, with the
/// position measured (dephased) after every step:
/// `p_k(y) = Σ_x p_{k-1}(x) |<y|U|x>|²`.
pub fn dephased_position_weights(cfg: &QbmLattice) -> Result<Vec<f64>> {
    cfg.validate()?;
    let u = cfg.system_step()?;
    let mut p = vec![0.0; cfg.cells];
    p[cfg.start()] = 1.0;
    for _ in 0..cfg.steps {
        p = (0..cfg.cells)
            .map(|y| (0..cfg.cells).map(|x| p[x] * u.matrix()[(y, x)].norm_sqr()).sum())
            .collect();
    }
    Ok(p)
}
