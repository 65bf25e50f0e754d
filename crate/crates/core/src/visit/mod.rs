//! First-visit races between shrinking balls: hit times, winners per scale,
//! decisiveness classes, `C_n` membership and witness searches.

pub mod classify;
pub mod collapse;
pub mod export;
pub mod hits;
pub mod witness;

pub use classify::{classify_point, ClassificationReport};
pub use collapse::collapse_diagnostic;
pub use hits::{decide, hit_time, winner_at_scale, winner_trace, HitOutcome, ScaleRow, Winner, WinnerTrace};
pub use witness::{
    boundary_witness_search, cn_membership, open_witness_search, recheck_open_witness,
    BoundaryWitness, BoundaryWitnessParams, OpenWitness, OpenWitnessParams,
};
