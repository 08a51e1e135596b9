//! Time evolution and steady states.

pub mod evolve;
pub mod integrator;
pub mod liouvillian;

pub use evolve::{evolve_density, evolve_state, lindblad_rhs, LindbladTerm, TimeGrid, Trajectory};
pub use integrator::{integrate, IntegratorConfig, Method};
pub use liouvillian::{liouvillian_matrix, steady_state, LiouvillianMatrix};
