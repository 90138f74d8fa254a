//! Topological spectroscopy of Lorenz attractors: delay embedding,
//! Vietoris-Rips persistence, representative selection, Hodge and SUSY
//! Laplacians, compiled controlled evolution on a statevector simulator,
//! and spectral estimation of Betti numbers and gaps.

pub mod complex;
pub mod config;
pub mod dynamics;
pub mod embedding;
pub mod error;
pub mod fivepoint;
pub mod hodge;
pub mod io;
pub mod linalg;
pub mod persistence;
pub mod probe;
pub mod qcompile;
pub mod selection;
pub mod spectro;
pub mod sweep;
pub mod susy;
pub mod topograph;

pub use error::{Error, Result};
