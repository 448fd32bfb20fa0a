use thiserror::Error;

use crate::network::{NeuronId, Violation};
use crate::train::Step;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spike order violation: {left_last} precedes {right_first} after appending")]
    OrderViolation { left_last: Step, right_first: Step },

    #[error("spike train is not sorted at index {index}")]
    UnsortedTrain { index: usize },

    #[error("spike at step {step} lies outside the horizon {horizon}")]
    OutOfHorizon { step: Step, horizon: Step },

    #[error("invalid network: {}", join_violations(.0))]
    InvalidNetwork(Vec<Violation>),

    #[error("neuron {neuron} exceeded its spike budget at step {step}")]
    SpikeBudgetExceeded { neuron: NeuronId, step: Step },

    #[error("neuron {neuron} uses a reset model the pass cannot preserve")]
    UnsupportedModel { neuron: NeuronId },

    #[error("unsupported network: {0}")]
    Unsupported(String),

    #[error("expected {expected} input trains, got {actual}")]
    InputCount { expected: usize, actual: usize },

    #[error("value {value} outside the domain {domain}")]
    DomainError { value: f64, domain: &'static str },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
