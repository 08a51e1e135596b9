//! Upper-bounded, sliced and selective Jaynes–Cummings ladders on truncated
//! Fock spaces: model construction, closed and open dynamics, engineered
//! atomic reservoirs and photon-statistics diagnostics.
//!
//! Layouts are `atom ⊗ field` with the atom index varying slowest. All rates
//! are dimensionless multiples of a reference rate chosen per scenario.

pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod models;
pub mod observables;
pub mod operators;
pub mod reservoir;
pub mod scenario;

pub use error::{Error, Result};
