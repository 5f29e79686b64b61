//! Channel simulation toolkit: flat and type-class simulation protocols,
//! capacity and tradeoff optimizers, quantum rate computations, entanglement
//! spread calculus and Schur-Weyl block machinery.
//!
//! All entropic quantities are in bits.

pub mod classical;
pub mod crst;
pub mod error;
pub mod flat;
pub mod io;
pub mod qrates;
pub mod quantum;
pub mod rng;
pub mod schur;
pub mod spread;
pub mod types;

mod optim;

pub use error::{Error, Result};
