//! Spectral variational solver for 2D self-generated-magnetic-field
//! (Chern-Simons-Schrodinger / average-field-Pauli) ground states.
//!
//! The crate computes constrained minimizers of the average-field-Pauli and
//! average-field-Hartree energy functionals on the unit L2 sphere, the Townes
//! soliton and the constants derived from it, critical-coupling estimates,
//! and the collapse scaling laws near the critical attraction strength.

pub mod corpus;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod minimizer;
pub mod runner;
pub mod townes;

pub use energy::{EnergyBreakdown, HartreeParams, PhysicsParams};
pub use error::{Error, Result};
pub use experiments::{FitResult, GStarEstimate, SweepPoint};
pub use grid::{gradient, inner, integrate, laplacian, ComplexField, Grid, RealField, VectorField};
pub use kernel::KernelConfig;
pub use minimizer::{BlowupMode, InitKind, MinimizeResult, SolveStatus, SolverConfig};
pub use townes::{RadialProfile, TownesConstants};
