//! Simulation and optimization of one-qubit control under random telegraph
//! noise.
//!
//! A single qubit is driven along x by a bounded control field while its
//! energy splitting is perturbed by telegraph noise that switches between
//! `+delta` and `-delta` with correlation time `tau_c`. The crate provides:
//!
//! - exact closed-form SU(2) propagators and Bloch-sphere utilities ([`su2`]),
//! - reproducible telegraph-noise trajectory sampling ([`rtn`]),
//! - the analytic pi, CORPSE, and SCORPSE sequences plus a bounded
//!   uniform-grid control representation and a JSON pulse file format
//!   ([`pulse`]),
//! - Monte Carlo state and gate fidelities with exact per-trajectory
//!   evolution and deterministic reductions ([`evolve`]),
//! - noise-averaged GRAPE: projected gradient ascent with analytic gradients,
//!   multi-start, and operation-time search ([`grape`]).
//!
//! All quantities are dimensionless with `hbar = a_max = 1`: times in units of
//! `hbar/a_max`, energies in units of `a_max`.

pub mod error;
pub mod evolve;
pub mod grape;
pub mod pulse;
pub mod rtn;
mod stats;
pub mod su2;

pub use error::{Error, Result};
pub use evolve::{
    bit_flip_endpoints, evolve_trajectory, fidelity_sweep, gate_fidelity,
    gate_fidelity_bloch_oracle, gate_fidelity_with_states, interval_unitary, state_fidelity,
    EvolutionRecord, FidelityEstimate, FidelityKind, SweepRow,
};
pub use grape::{
    ascent_step, forward_backward, gradient_gate, gradient_state, optimize, optimize_time,
    AscentIteration, ConvergenceStatus, GrapeConfig, GrapeRun, GrapeTarget, GridResolution, Init,
    TimeSearch,
};
pub use pulse::{
    corpse, load_pulse, pi_pulse, pulse_from_json, pulse_to_json, save_pulse, scorpse, ControlGrid,
    ControlPulse, Pulse, PulseSequence, Segment,
};
pub use rtn::{
    child_rng, jump_times_from_uniforms, sample_batch, sample_trajectory, NoiseTrajectory,
    RtnParams,
};
pub use su2::{
    bloch_to_density, conjugate, density_to_bloch, overlap, pauli, propagator_step, Axis,
    BlochVector, Operator2,
};
