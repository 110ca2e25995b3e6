//! Sentence satisfaction, sentence probabilities, and empirical checks of
//! the local-probability and mixing hypotheses.

mod local;
mod probability;
mod satisfy;

pub use local::{
    ball_pair_center, check_bounded_local_probability, covariance_with_stderr, estimate_mixing,
    set_distance, CovarianceTable, LocalFrequencies, MixingReport, MixingRow, Site,
    MAX_FREQUENCY_BITS, MAX_MIXING_BITS,
};
pub use probability::{
    estimate_probabilities, estimate_probability, exact_probabilities, exact_probability, Method,
    ProbabilityEstimate,
};
pub use satisfy::{satisfies, CompiledSentence};
