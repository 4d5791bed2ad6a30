//! Variational (Gibbs-Bogoliubov) mean-field treatment of the spin-1/2
//! Ising-Heisenberg model on the triangulated kagome lattice.
//!
//! Each Heisenberg trimer (`a` sites) is solved exactly in an effective
//! Ising field produced by the monomers (`b` sites) and vice versa. The
//! crate computes self-consistent sublattice magnetizations, the variational
//! free energy, susceptibility, internal energy and specific heat, the
//! pairwise thermal concurrence of a trimer, critical and threshold
//! temperatures, and the zero-temperature phase diagram.
//!
//! Units are relative: `k_B = 1` and unit gyromagnetic factor. The trimer
//! basis is the product basis `|s1 s2 s3>` ordered by binary index with
//! `|1>` the spin-up state (`S^z = +1/2`).

pub mod entanglement;
pub mod error;
pub mod mean_field;
pub mod numeric;
pub mod observables;
pub mod phase;
pub mod sweep;
pub mod trimer;

pub use entanglement::{
    concurrence_at, concurrence_wootters, concurrence_xstate, reduced_density_matrix,
    ConcurrenceMethod, ConcurrenceResult, XState,
};
pub use error::{Error, Result};
pub use mean_field::{
    effective_fields, equilibrium, free_energy_per_site, map_m_a, map_m_b, select_equilibrium,
    solve_self_consistent, Equilibrium, SelfConsistentState, SolverConfig,
};
pub use observables::{
    internal_energy, specific_heat, specific_heat_second_derivative, susceptibility,
    zero_field_susceptibility, Derivative,
};
pub use phase::{
    concurrence_threshold, critical_temperature_linearized, critical_temperature_onset,
    detect_plateaus, saturation_field, zero_temperature_phase, CriticalMethod, CriticalResult,
    PhaseLabel, PhaseTag, Plateau, ZeroTemperaturePhase,
};
pub use trimer::{
    build_trimer_hamiltonian, monomer_free_energy, monomer_partition, thermal_density_matrix,
    trimer_eigenvectors, trimer_energies, trimer_free_energy, trimer_partition, EffectiveFields,
    LogPartition, ModelParams, TrimerSpectrum,
};

/// Version string written into emitted file headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
