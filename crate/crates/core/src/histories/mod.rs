//! History spaces, chain operators, branch enumeration, the decoherence
//! functional, and coarse-graining of histories.
//!
//! Decoherence is evaluated on the Gram matrix of final-time branch vectors.
//! For chain operators built as products of projectors this is the same as
//! requiring orthogonality whenever two histories differ at any time.

mod branches;
mod decoherence;
mod space;

pub use branches::{
    chain_apply, coarse_grain_history, default_prune, enumerate_branches, Branch, BranchSet,
    BranchSetRecord, Group, Grouping, DEFAULT_PRUNE,
};
pub use decoherence::{
    decoherence_report, quasiclassical_residual, DecoherenceReport, DecoherenceSummary,
    EXACT_DECOHERENCE, MEDIUM_DECOHERENCE,
};
pub use space::{Dynamics, HistoryLabel, HistorySpace};
