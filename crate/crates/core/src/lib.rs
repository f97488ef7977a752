//! Beta-GOS species sampling sequences.
//!
//! A Beta-GOS sequence is a non-exchangeable species sampling sequence whose
//! predictive weights are products of independent Beta reinforcements. This
//! crate provides forward simulation, exact moment analytics for the block
//! count of the induced partition, a collapsed Gibbs sampler for a
//! hierarchical Normal model, synthetic data generators, and an array-CGH
//! aberration calling pipeline with region-level q-values.

pub mod cgh;
pub mod error;
pub mod generators;
pub mod inference;
pub mod moments;
pub mod rng;
pub mod schedule;
pub mod sequence;

pub use error::{Error, Result};
pub use rng::{Seeder, StreamRng};
pub use schedule::BetaSchedule;
pub use sequence::{
    partition_of, predictive_weights, sample_pairing, sample_weights, simulate_sequence,
    LatentWeights, NormalBase, PairingLabels, Partition, PredictiveWeights, SequenceSample,
};
