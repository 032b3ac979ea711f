//! Simulation of ancilla-free 1→2 phase-covariant telecloning of qudits.
//!
//! The crate is layered bottom-up:
//!
//! - [`qudit`]: dense state vectors and density matrices over qudit
//!   registers (tensor product, partial trace, fidelity, entropy).
//! - [`cloning`]: the local ancilla-free phase-covariant cloner and the
//!   closed-form fidelities it is compared against.
//! - [`telecloning`]: the shared channel, generalized Bell measurement,
//!   receiver corrections, and the closed-form telecloned fidelity.
//! - [`analysis`]: entropy/fidelity sweeps and a numerical maximizer.
//! - [`verify`]: the property suite behind `teleclone verify`.

pub mod analysis;
pub mod cloning;
pub mod error;
pub mod qudit;
pub mod telecloning;
pub mod verify;

pub use error::{Error, Result};
pub use qudit::{QuditDim, Tolerances};
