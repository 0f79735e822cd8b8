//! Correlation clustering with ModifiedPivot.
//!
//! The crate provides the static algorithms ([`run_pivot`],
//! [`run_modified_pivot`]), a replay of the bad-triangle charging scheme over
//! recorded executions ([`charge`]), exact and lower-bound oracles
//! ([`oracle`]), and a fully dynamic engine that maintains the ModifiedPivot
//! clustering under label flips ([`dynamic`]).
//!
//! Parameter- and charge-carrying types are generic over [`Scalar`]
//! (`f32` or `f64`); the aliases at the crate root fix the scalar to `f64`.

pub mod charge;
pub mod dynamic;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod ostree;
pub mod params;
pub mod pivot;
pub mod scalar;
pub mod tape;

pub use charge::{
    charge_events, classify_mistakes, compute_charges, estimate_pair_width, verify_charge_dominance, ChargeEvent,
    ChargeLine, Dominance, IterationAudit,
};
pub use dynamic::{Discovery, EliminatorState, SetPointers, UpdateStats};
pub use error::{Error, Result};
pub use graph::{clustering_cost, BadTriangle, ClusterId, Clustering, Graph, Vertex};
pub use io::Flip;
pub use oracle::{brute_force_opt, triangle_packing_lower_bound, OptResult};
pub use pivot::{
    pivot_sets_at, run_modified_pivot, run_pivot, ExecutionTrace, IterationRecord, PivotSets, RemainingView,
};
pub use scalar::Scalar;
pub use tape::{make_tape, RandomTape, Rank};

pub type Params = params::Params<f64>;
pub type ParamsF32 = params::Params<f32>;
pub type ChargeVector = charge::ChargeVector<f64>;
pub type ChargeVectorF32 = charge::ChargeVector<f32>;
pub type MistakeReport = charge::MistakeReport<f64>;
pub type WidthEstimate = charge::WidthEstimate<f64>;
pub type DynamicState = dynamic::DynamicState<f64>;
pub type DynamicStateF32 = dynamic::DynamicState<f32>;
