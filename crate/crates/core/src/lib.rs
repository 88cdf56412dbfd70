//! Dissipative phase transitions of the parametrically amplified open
//! quantum Rabi model with one- and two-photon decay.
//!
//! The crate covers the thermodynamic-limit mean-field picture
//! ([`meanfield`]), truncated-Fock operators ([`ops`]), exact Lindblad
//! steady states ([`lindblad`]), adiabatic branch decomposition
//! ([`adiabatic`]), the semiclassical Langevin description ([`langevin`])
//! and finite-size scaling ([`scaling`]). The `rabi-dpt` binary is a thin
//! wrapper over [`cli`].

pub mod adiabatic;
pub mod cli;
pub mod error;
pub mod io;
pub mod lindblad;
pub mod linalg;
pub mod meanfield;
pub mod langevin;
pub mod ops;
pub mod params;
pub mod quad;
pub mod roots;
pub mod scaling;

pub use error::{Error, Result};
pub use params::{Branch, ModelParams, RawRates};
