//! Derived sets, Cantor–Bendixson levels and constructors of center sequences
//! with prescribed finite rank.

pub mod centers;
pub mod construct;
pub mod derived;
pub mod orbits;
pub mod sup_metric;

pub use centers::{fmt_real, CenterRecord, Cluster, RankBound, StratifiedCenters};
pub use construct::{
    construct_cluster_sequence, construct_rank_sequence, rank_population, AnchorParams,
    AnchorSource, DEFAULT_POPULATION_CAP,
};
pub use derived::{accumulation_mask, cb_stratify, derived_set_approx};
pub use orbits::{orbit_disjointness_check, OrbitApproach, OrbitReport};
pub use sup_metric::{harmonic_sequence, shifted_sequence, sup_metric_distance, SequencePair, SupInterval};
