//! Pseudo-spectral solver for the incompressible two-fluid (Hall, electron
//! inertia) MHD system on the periodic box, with a Littlewood-Paley / Besov
//! diagnostic stack for continuation criteria and a harness that checks the
//! harmonic-analysis inequalities behind them.

pub mod error;
pub mod lab;
pub mod littlewood_paley;
pub mod monitor;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
