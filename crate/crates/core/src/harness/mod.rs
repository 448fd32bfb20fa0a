//! Seeded differential checking of the network passes.
//!
//! Each trial draws a network and an input sample from its own seed, runs the
//! original and the transformed network, decodes the transformed outputs, and
//! compares spike trains for exact equality. Trials are independent; reports
//! collect them by index, so parallel execution does not change the output.

mod check;
mod gen;
mod report;

pub use check::{
    causality_holds, check_causality, check_m2s, check_s2m, discrepancy, epsilon_transfer, EpsilonCase,
    EpsilonConfig, InputSource, Reference,
};
pub use gen::{
    random_features, random_inputs, random_network, sample_budget, BudgetPolicy, GenConfig, NeuronKind,
};
pub use report::{AuditSummary, BudgetRecord, EquivalenceReport, FailureRecord, TrialAccounting};
