//! Dyadic frequency localisation on the periodic lattice.

mod bank;
mod besov;
mod bony;
mod commutator;

pub use bank::{
    bump, chi_profile, phi_profile, transition, BandInfo, BankInfo, FilterBank, ANNULUS_INNER,
    ANNULUS_OUTER, BALL_RADIUS,
};
pub use besov::{
    besov_from_band_norms, besov_norm, besov_norm_with, lq_combine, sobolev_besov_equivalence,
    BesovSpec, VectorNorm,
};
pub use bony::{
    bony_decompose, bony_from_samples, paraproduct, paraproduct_with, remainder, remainder_with,
    BandSamples, BonyTerms,
};
pub use commutator::{
    commutator_advective, commutator_advective_all, commutator_advective_with, commutator_cross,
    commutator_cross_with, commutator_scalar, commutator_split_all, CommutatorSplit,
};
