//! Time integration of the incompressible Hall MHD system with electron
//! inertia, and the successive-approximation scheme for local existence.

mod energy;
mod initial;
mod integrator;
mod picard;
mod rhs;
mod run;
mod state;

pub use energy::{energy_functional, EnergyRecord};
pub(crate) use energy::modified_hs_sq;
pub use initial::{initial_data, InitialKind, InitialSpec};
pub use integrator::{step, step_with, Integrator, Scheme, StepDiagnostics, StepOptions, StepWarning};
pub use rhs::{helmholtz_invert, rhs, rhs_terms, RhsTerms};
pub use state::{PhysParams, SolverState};
pub use run::{
    checkpoint_name, energy_balance, hall_neutrality, load_checkpoints, run, run_with, CheckpointEntry,
    EnergyBalance, EnergySample, HaltInfo, RunOptions, RunOutput, CHECKPOINT_INDEX,
};
pub use picard::{
    contraction_ratios, low_pass_constant, picard_mesh, picard_solve, picard_solve_with, PicardIterate, PicardOptions,
};
