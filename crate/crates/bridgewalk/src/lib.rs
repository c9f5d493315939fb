//! Exact enumeration of weighted self-avoiding walks, bridges and
//! half-space walks on Cayley graphs of finitely generated groups.
//!
//! The crate enumerates walks under a generalized step-length budget,
//! aggregates their weights by class into exact-length histograms, and
//! derives finite-scale estimates and certified one-sided bounds for the
//! weighted connective and bridge constants. On top of the raw aggregates
//! it provides the span decomposition of half-space walks, the surgery that
//! rebuilds a half-space walk into a longer bridge, distinct-part partition
//! counting, and property suites that check every finitely testable
//! inequality of the underlying theory (supermultiplicativity, height
//! propagation, continuity sandwiches, truncation exactness).

pub mod exact;
pub mod group;
pub mod weight;
pub mod length;
pub mod height;
pub mod walk;
pub mod enumerate;
pub mod oracle;
pub mod surgery;
pub mod partitions;
pub mod estimate;
pub mod verify;

pub use exact::{Int, Rat};
pub use group::{canonical_key, Group, GroupElement, GroupSpec, HomomorphismSpec};
pub use height::{
    check_holder, classify_walk, make_height, span, structural_constants, HeightSpec,
    HeightStructure, StructuralConstants, WalkClass,
};
pub use length::{LengthDefault, LengthFunction, LengthSpec};
pub use walk::Walk;
pub use weight::{PowerLawShape, WeightFunction, WeightSpec};

pub use enumerate::{
    certify_truncation_exactness, enumerate_aggregate, enumerate_with_sink, neighbor_table,
    AggClass, AggregateTable, EnumConfig, EnumError, ValueMode, WalkSink, WalkView,
};
pub use oracle::oracle_enumerate;
pub use surgery::{decompose, surgery_step, SpanDecomposition, SurgeryError, SurgeryOutcome};

/// Version tag baked into cache keys so stale payloads are never reused
/// across code changes.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
