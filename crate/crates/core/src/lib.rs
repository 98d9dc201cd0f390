//! Classification of the current hidden state of a hidden Markov model from
//! the present observation and `l` preceding ones.
//!
//! * [`model`]: the model, stationary distributions, simulation.
//! * [`posterior`]: windowed posteriors, the Bayes rule with memory and its
//!   exact or Monte Carlo risk, anchored conditionals.
//! * [`bounds`]: constants and exponential bounds on how fast the risk
//!   forgets the distant past.
//! * [`kernel`]: kernel classification rules with memory.

pub mod bounds;
pub mod error;
pub mod kernel;
pub mod model;
pub mod posterior;
pub mod seed;

pub use bounds::{BoundConstants, Integration, RiskGapBounds};
pub use error::{Error, Result};
pub use kernel::{KernelClassifier, KernelKind, KernelSpec, Provenance, TrainingSequence};
pub use model::{
    simulate, stationary_distribution, validate_assumption_a, ClassLabel, EmissionModel, HiddenMarkovModel,
    LabeledSequence, ModelSpec, Observation, ObservationSpace, TransitionMatrix,
};
pub use posterior::{
    bayes_classify, bayes_risk_exact, bayes_risk_monte_carlo, posterior_window, ObservationWindow, PosteriorVector,
    RiskEstimate, RiskMethod,
};
pub use seed::derive_seed;
