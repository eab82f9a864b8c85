//! Coordinate weights, regularity, critical index, determining
//! restrictions and the recursive regular/determined decomposition.

mod decompose;
mod determining;
mod experiment;
mod weights;

pub use decompose::{
    decompose, Branching, Classification, DecomposeConfig, DecompositionNode, DecompositionTree,
    LeafMasses,
};
pub use determining::{compact, determining_test, minus_probability, DeterminingResult, Evaluation, Outcome};
pub use experiment::{
    restriction_experiment, ExperimentConfig, ExperimentMode, ExperimentResult, StructureConstants,
};
pub use weights::{
    critical_index, is_regular, sigma_decay_check, tail_norm_check, weight_profile, TailNormCheck,
    WeightProfile,
};
