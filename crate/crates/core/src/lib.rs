//! Kinetostatic-compliance folding of peptide chains.
//!
//! A chain is a tree of rigid links joined by dihedral joints. Atomic forces
//! from electrostatics, van der Waals contacts and surface-area solvation are
//! collapsed into joint torques, and every joint turns in proportion to its
//! torque until the chain settles.

pub mod chain;
pub mod error;
pub mod forcefield;
pub mod geometry;
pub mod kcm;
pub mod pdbio;
pub mod solvation;
pub mod spatial;
pub mod topology;

pub use chain::{build_chain, BuildOptions, Chain, Conformation, Geometry, Kinematics, TemplateLibrary};
pub use error::{Error, Result};
pub use forcefield::{Dielectric, EnergyBreakdown};
pub use kcm::{fold, Evaluator, FieldConfig, SolvationMode, StepConfig, Trajectory};
pub use pdbio::ForceFieldParams;
