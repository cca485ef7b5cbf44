//! Dense finite-dimensional complex linear algebra: state vectors, operators,
//! unitary evolution and projector families on tensor-product spaces.

mod family;
mod operator;
mod state;

pub use family::{coarsen_family, make_projector_family, ProjectorFamily};
pub use operator::{evolve, evolve_with, permutation_generator, Operator, Propagator};
pub use state::{tensor, StateVector};

pub use nalgebra::Complex;

use serde::{Deserialize, Serialize};

pub type C64 = nalgebra::Complex<f64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical tolerances shared by every operation. One record per run, so the
/// values that were in force can be echoed next to the results.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Idempotence, orthogonality and completeness of projector families.
    pub projector: f64,
    /// Max entry of `H - H^dagger` accepted for a generator.
    pub hermitian: f64,
    /// Norm preservation under evolution, and unitarity of explicit step operators.
    pub unitary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { projector: 1e-12, hermitian: 1e-10, unitary: 1e-10 }
    }
}

pub(crate) fn dims_product(dims: &[usize]) -> usize {
    dims.iter().product()
}
