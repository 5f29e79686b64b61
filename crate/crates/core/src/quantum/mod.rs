//! Finite-dimensional quantum states and channels.

pub mod channel;
pub mod linalg;
pub mod state;

pub use channel::{channel_output_state, QuantumChannel};
pub use linalg::{CMat, CVec};
pub use state::{
    purify, quantum_mutual_information, von_neumann_entropy, DensityMatrix, PureState, TripartitePureState,
    MAX_DENSE_DIM,
};
