//! Classical reverse Shannon: type-class protocols, capacity, and rate regions.

pub mod capacity;
pub mod protocol;
pub mod region;
pub mod wyner;

pub use capacity::{capacity, max_output_entropy, CapacityResult, MaxEntropyResult};
pub use protocol::{
    crst_feedback_simulate, crst_monte_carlo, crst_twostage_simulate, Backend, MonteCarloSummary, ProtocolSpec,
    SimulationTranscript,
};
pub use region::{
    feedback_region_check, tradeoff_csv, tradeoff_curve, RatePoint, SimulationKind, TradeoffCurve, TradeoffPoint,
};
pub use wyner::{constrained_wyner, default_w_size, wyner_common_information, WynerResult};
