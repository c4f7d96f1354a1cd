//! Perturbative phase-space solver for electrons coupled to a phonon bath
//! under an electric field and a thermal gradient.

pub mod collision;
pub mod config;
pub mod damping;
pub mod error;
pub mod gauge;
pub mod observables;
pub mod phase_space;
pub mod output;
pub mod phonon;
pub mod run;
pub mod self_energy;
pub mod solver;
pub mod spectral;
pub mod stencil;
pub mod units;
pub mod validation;

pub use error::{QbeError, Result};
