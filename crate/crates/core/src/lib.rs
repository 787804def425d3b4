//! Ground-state fidelity, fidelity susceptibility and bond-bond correlations
//! of the Kitaev honeycomb model in the vortex-free sector.
//!
//! The model reduces to free Majorana fermions with dispersion
//! `E_q = sqrt(ε_q² + Δ_q²)`, `ε_q = Jx cos qx + Jy cos qy + Jz`,
//! `Δ_q = Jx sin qx + Jy sin qy`, on an `L x L` momentum grid (`L` odd).

pub mod correlation;
pub mod error;
pub mod fidelity;
pub mod fit;
pub mod model;
pub mod reduce;
pub mod scaling;

pub use error::{Error, Result};
