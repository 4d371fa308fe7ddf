//! Binary point-vortex crystals in the plane, on the flat annulus and on the
//! flat torus.
//!
//! The crate evaluates balance residuals, infers rigid motions, measures
//! Jacobian rank, refines near-crystals, integrates the dynamics, generates
//! the classical families and emits the helicoid-limit data.

pub mod balance;
pub mod catalog;
pub mod config;
pub mod error;
pub mod jacobian;
pub mod kernels;
mod linalg;
pub mod mesh;
pub mod solver;
pub mod surface;
pub mod symmetry;

pub use error::{Error, Result};
pub use kernels::{GeometryKind, Kernel, WirtingerPair};
pub use balance::{BalanceReport, ClassKind, CrystalClass};
pub use config::{Motion, Vortex, VortexConfig};
