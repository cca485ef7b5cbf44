//! Boltzmann's cell counting for classical macrostates and the quantum
//! combinatorics of light quanta: Planck's multiplicity, the symmetric
//! subspace it counts, and the equilibrium that maximizes it.

mod boltzmann;
mod equilibrium;
mod planck;

pub use boltzmann::{
    boltzmann_count, boltzmann_table, entropy_diff, BoltzmannCount, BoltzmannRow, MacroState,
    BOLTZMANN_CSV_HEADER,
};
pub use equilibrium::{
    equilibrium_occupancies, hill_climb, occupancy_table, Equilibrium, HillClimb, LogW, Mode,
    OccupancyRow, OCCUPANCY_CSV_HEADER,
};
pub use planck::{
    degenerate_branch_count, dirac_table, format_big, planck_multiplicity, sym_subspace_dim,
    DiracRow, ModeSpec, DIRAC_CSV_HEADER, MAX_ENUMERATION,
};
