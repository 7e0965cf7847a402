//! High-order flux-reconstruction (FR) solver for nonlinear hyperbolic
//! conservation laws on 1D and 2D structured meshes.
//!
//! Shocks are stabilized with a component-wise artificial viscosity derived
//! from a time-reversibility defect: each solution state is advanced by one
//! upwind-biased forward Euler sub-step and then pulled back by a
//! downwind-biased backward sub-step; the pointwise mismatch between the
//! original and recovered states drives a per-variable, element-wise constant
//! viscosity on a parabolic regularization of the system.
//!
//! The crate is generic over the scalar type through [`real::Real`]
//! (`f32` or `f64`); the command-line driver and the shipped presets use the
//! `f64` aliases exported at the crate root.

pub mod basis;
pub mod config;
pub mod error;
pub mod field;
pub mod mesh;
pub mod oracles;
pub mod output;
pub mod problems;
pub mod real;
pub mod riemann;
pub mod runner;
pub mod spatial;
pub mod system;
pub mod timeint;
pub mod trvisc;

pub use error::SolverError;
pub use real::Real;

/// Default scalar used by the driver and presets.
pub type Scalar = f64;

pub type Mesh = mesh::MeshTopology<Scalar>;
pub type Operators = basis::OperatorSet<Scalar>;
pub type System = system::SystemSpec<Scalar>;
pub type Field = field::NodalField<Scalar>;
pub type Viscosity = field::ViscosityField<Scalar>;
pub type Config = config::RunConfig<Scalar>;
