//! Exact sampling and learning for Boolean Markov random fields restricted to
//! the satisfying assignments of a constraint set.
//!
//! The sampler is partial rejection sampling: draw every variable from its
//! marginal, then repeatedly redraw only the variables of the constraints that
//! are currently violated. When no assignment violates two constraints that
//! share a variable (the *extremal* condition, see [`cnf::check_extremal`]),
//! the accepted assignment is an exact draw from the constrained distribution.
//!
//! Crate layout:
//!
//! * [`cnf`] constraint sets, DIMACS I/O, dependency graphs, extremality.
//! * [`tensor`] the arithmetic clause-satisfaction pipeline over assignment batches.
//! * [`mrf`] single-variable-form model parameters and the pairwise transform.
//! * [`sampler`] the batched partial-rejection sampler plus the Moser–Tardos
//!   and Gibbs baselines.
//! * [`oracle`] brute-force enumeration: exact distribution, partition
//!   function, gradient and expected resample counts.
//! * [`learn`] contrastive-divergence training.
//! * [`problems`] benchmark instance generators.
//! * [`metrics`] validity, MAP@10, gradient error, resample statistics.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod assignment;
pub mod cnf;
pub mod error;
pub mod learn;
pub mod metrics;
pub mod mrf;
pub mod oracle;
pub mod problems;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod tensor;

pub use cnf::{
    build_dependency_graph, check_extremal, gamma, parse_dimacs, violated_constraints, Clause,
    ConstraintSet, DependencyGraph, Literal,
};
pub use error::{Error, Result};
pub use mrf::{marginals, pairwise_to_single, potential, FactorSpec, MarginalVector, ModelParams};
pub use sampler::{
    gibbs_sample, moser_tardos_sample, nelson_sample, AssignmentBatch, SamplerConfig, SamplerKind,
    SamplerStats,
};
pub use scalar::Scalar;
pub use tensor::{encode_tensors, resample_mask, satisfaction_pass, ClauseTensors};

pub type ModelParams64 = mrf::ModelParams<f64>;
pub type ModelParams32 = mrf::ModelParams<f32>;
pub type MarginalVector64 = mrf::MarginalVector<f64>;
pub type FactorSpec64 = mrf::FactorSpec<f64>;
pub type ExactDistribution64 = oracle::ExactDistribution<f64>;
pub type ExactDistribution32 = oracle::ExactDistribution<f32>;
pub type ResampleExpectation64 = oracle::ResampleExpectation<f64>;
pub type TrainOutcome64 = learn::TrainOutcome<f64>;
pub type MetricReport64 = metrics::MetricReport<f64>;
