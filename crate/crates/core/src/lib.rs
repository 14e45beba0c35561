//! Wave-mixing dynamics of a cyclic (Δ-type) three-level system in which a
//! second-order three-wave-mixing (TWM) signal and a third-order
//! four-wave-mixing (FWM) signal are generated simultaneously.
//!
//! The crate has three layers:
//!
//! - [`model`] — physical parameters, derived decoherence rates, the
//!   perturbative steady-state coherences, and the probe absorption
//!   coefficient α(Δp) = κ12·Re(Γ31/2λ).
//! - [`propagation`] — the constant complex 3×3 coupling matrix for the
//!   slowly-varying amplitudes (Ωp, Ωt, Ωf), integrated over the effective
//!   distance Z both by fixed-step RK4 and in closed form (matrix
//!   exponential), plus conversion efficiencies.
//! - [`oracle`] — an independent Lindblad master-equation implementation
//!   (interaction Hamiltonian, dissipators, vectorized Liouvillian, steady
//!   state) used to validate the perturbative coherences, with [`analysis`]
//!   extracting spectra, transparency windows, and the oscillation
//!   signatures that distinguish the weak- and strong-control regimes.
//!
//! Units: all rates and Rabi frequencies are in units of γ13; distance is
//! the dimensionless Z = κ12·z, i.e. in units of 1/κ12. Both normalization
//! constants default to 1 and stay configurable.

pub use nalgebra;
pub use num_complex;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub mod analysis;
pub mod error;
mod linalg;
pub mod model;
pub mod oracle;
pub mod propagation;

pub use error::{Error, Result};
pub use model::{
    coherence_first_order, coherence_second_order, coherence_third_order, coherences,
    derive_rates, probe_absorption, CoherenceSet, DerivedRates, FieldVector, SystemParams,
};
pub use propagation::{
    build_coupling_matrix, default_z_max, effective_step, efficiencies, integrate_rk4,
    integrate_rk4_strided, propagate_closed_form, CouplingMatrix, Efficiencies,
    PropagationTrace, Propagator, TraceSample,
};
pub use oracle::{
    hamiltonian_interaction, lindblad_rhs, steady_state, validate_perturbation, DensityMatrix,
    DriveSet, PerturbationReport,
};
pub use analysis::{
    absorption_spectrum, default_delta_grid, find_extrema, interleaving_check,
    peak_efficiencies, synchrony_check, transparency_window, AbsorptionSpectrum, ExtremaReport,
    Extremum, InterleavingReport, Peak, PeakEfficiencies, SynchronyReport, TransparencyWindow,
};
