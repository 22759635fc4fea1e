//! Generating models, seeded samplers and coefficients of difficulty.

pub mod difficulty;
pub mod model;
pub mod sampling;
pub mod scenarios;
pub mod spec;

pub use difficulty::{coefficient_of_difficulty, inflate, inflated_sample_size, Difficulty};
pub use model::{DesignSampler, ModelParts, ModelResolution, RegressionModel};
pub use sampling::{
    check_error_moments, draw_error, sample_dataset, sample_dataset_stream, sample_rows,
    stream_rng, MomentReport, Provenance, SampledDataset,
};
pub use scenarios::{
    bernoulli_scenario, builtin_scenarios, builtin_spec, builtin_specs, exponential_scenario,
    poisson_scenario, PAPER_LAMBDAS,
};
pub use spec::{
    bell, AdditiveSpec, DesignSpec, ErrorLaw, RegressionSpec, ResponseKind, ScaleSpec, ScenarioSpec,
};
