//! Simulation of quantum systems coupled sequentially to a chain of fresh
//! environments, where the interaction parameters (time, temperature, energy
//! levels) vary randomly from step to step.
//!
//! The library is organized around the reduced dynamics operator (RDO): a
//! small contraction matrix acting on the doubled (GNS) space of the system
//! that encodes one full interaction step. Random sequences of RDOs are
//! multiplied and ergodically averaged to find asymptotic states, and the
//! asymptotic energy and entropy production rates are read off from flux
//! observables.
//!
//! Module map:
//! - [`linalg`]: small dense complex matrices, non-normal eigendecomposition,
//!   Riesz projections, thermal partial traces and the vector/observable
//!   correspondence on the doubled space.
//! - [`dist`]: scalar parameter laws with exact moments and quadrature rules.
//! - [`rdo`]: model-agnostic RDO layer (invariant functionals, rank-one plus
//!   remainder splitting, spectral gate, expectations of random RDOs).
//! - [`spin_spin`]: the exactly solvable two-qubit model.
//! - [`spin_fermion`]: the perturbative qubit + thermal fermion bath model.
//! - [`ergodic`]: seeded random-product trajectories and Cesàro estimators.
//! - [`thermo`]: energy/entropy production rates and the second-law identity.
//! - [`validate`]: the numbered acceptance checks used by the CLI and CI.

pub mod dist;
pub mod ergodic;
mod error;
pub mod linalg;
pub mod rdo;
pub mod spin_fermion;
pub mod spin_spin;
pub mod thermo;
pub mod validate;

pub use error::{Error, Result};
pub use linalg::{CVector, ComplexMatrix, EigenSystem};
