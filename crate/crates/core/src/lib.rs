//! Bohmian mechanics of two entangled spin-1/2 rigid rotors.
//!
//! The pair state `cos(ϑ/2)|↑↓⟩ + e^{iφ} sin(ϑ/2)|↓↑⟩` is realized as a guiding
//! wave on the six Euler angles of two rigid rotors. This crate evaluates the
//! resulting momentum field, builds quantum-equilibrium ensembles, and
//! compares ensemble statistics with closed-form results and with the
//! standard spin correlators.

pub mod bell;
pub mod dynamics;
pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod momenta;
pub mod oracles;
pub mod reduce;
pub mod rotor;
pub mod selftest;

pub use error::{BohmError, Result};
pub use momenta::{
    momentum_from_gradient, momentum_pair, principal_axis, quantum_potential, quantum_potential_direct,
    relative_angles, ConfigurationReport, MomentumPair, Vec3,
};
pub use rotor::{
    density, guiding_wave, phase_gradient, EulerTriple, PairConfiguration, PairStateParams, PhaseGradient,
    PhysicalConstants,
};
