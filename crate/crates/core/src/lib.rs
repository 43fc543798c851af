//! Numerical toolkit for studying how two closed sets meet at a common point.
//!
//! The crate estimates transversality-type constants of a set pair from
//! projection oracles alone, runs alternating projections with rate fitting,
//! and cross-checks the estimates against the exact identities that tie the
//! constants together in Euclidean space.

pub mod altproj;
pub mod error;
pub mod estimators;
pub mod normals;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod search;
pub mod sets;
pub mod vector;
pub mod verify;

pub use error::{Error, Result};
pub use vector::{RealVector, Tolerances};
