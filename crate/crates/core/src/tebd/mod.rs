//! Matrix product states and second-order TEBD.
//!
//! States are stored in right-canonical form with the Schmidt values of every
//! bond kept alongside the tensors, so each two-site update can be done
//! without ever dividing by small singular values. Gates act on even bonds
//! with half steps and odd bonds with full steps (Strang splitting); half
//! steps that meet between two samples are fused into one full step.

mod evolve;
mod mps;
mod observables;

pub use evolve::{gate, tebd_evolve, EvolutionConfig, GateSet, TimeSeries, UNITARITY_TOLERANCE};
pub use mps::{init_vacuum, MpsState};
pub use observables::{measure, ObservableSpec};
