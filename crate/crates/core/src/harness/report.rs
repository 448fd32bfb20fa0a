use serde::{Deserialize, Serialize};

use super::gen::GenConfig;
use crate::network::NeuronId;
use crate::train::{SpikeTrain, Step};
use crate::transform::Direction;

/// One output whose decoded transformed train differs from the original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub trial_seed: u64,
    pub output: usize,
    pub neuron: NeuronId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_divergent_step: Option<Step>,
    pub discrepancy: f64,
    pub expected: SpikeTrain,
    pub actual: SpikeTrain,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRecord {
    pub trial: usize,
    pub trial_seed: u64,
    /// `original` or `transformed`.
    pub network: String,
    pub neuron: NeuronId,
    pub step: Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialAccounting {
    pub trial: usize,
    pub trial_seed: u64,
    pub neurons: usize,
    pub budget: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<u64>,
    pub transformed_neurons: usize,
    pub layers: usize,
    pub transformed_layers: usize,
    pub max_weight: f64,
    pub transformed_max_weight: f64,
    pub weight_bound: f64,
    pub truncated: bool,
    pub output_spikes: usize,
    pub causal: bool,
}

/// Per-check counts of trials passing each structural audit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    /// m2s: at most `N * n` neurons. s2m: exactly `eta(N) * n` neurons.
    pub count_bound_ok: usize,
    /// s2m only: `eta(N) <= min(N, (6/pi^2) N + sqrt(N))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_bound_ok: Option<usize>,
    pub layers_preserved: usize,
    pub weight_bound_ok: usize,
    pub causal: usize,
    pub truncated: usize,
    /// Trials whose original outputs spiked at least once.
    pub active: usize,
    pub output_spikes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub pass: Direction,
    pub seed: u64,
    pub trials: usize,
    pub exact_matches: usize,
    pub failed_trials: usize,
    pub negative_control: bool,
    pub audit: AuditSummary,
    pub failures: Vec<FailureRecord>,
    pub budget_violations: Vec<BudgetRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub accounting: Vec<TrialAccounting>,
}

impl EquivalenceReport {
    pub(crate) fn new(pass: Direction, cfg: &GenConfig) -> Self {
        EquivalenceReport {
            pass,
            seed: cfg.seed,
            trials: cfg.trials,
            exact_matches: 0,
            failed_trials: 0,
            negative_control: cfg.reset != crate::network::ResetModel::Offset,
            audit: AuditSummary::default(),
            failures: Vec::new(),
            budget_violations: Vec::new(),
            accounting: Vec::new(),
        }
    }

    /// Every trial matched exactly and no budget was overrun.
    pub fn is_clean(&self) -> bool {
        self.failed_trials == 0 && self.budget_violations.is_empty() && self.exact_matches == self.trials
    }

    /// All structural audits passed in every trial.
    pub fn audits_pass(&self) -> bool {
        let a = &self.audit;
        let eta_ok = self.pass == Direction::M2s || a.eta_bound_ok == Some(self.trials);
        a.count_bound_ok == self.trials && a.layers_preserved == self.trials && a.weight_bound_ok == self.trials && eta_ok
    }

    /// Structured text: summary fields first, then `[[failures]]` and
    /// `[[budget_violations]]` records, then per-trial accounting if requested.
    pub fn render(&self, per_trial: bool) -> String {
        let mut view = self.clone();
        if !per_trial {
            view.accounting.clear();
        }
        toml::to_string(&view).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_summary_then_records() {
        let mut r = EquivalenceReport::new(Direction::M2s, &GenConfig { seed: 7, trials: 2, ..GenConfig::default() });
        r.exact_matches = 1;
        r.failed_trials = 1;
        r.failures.push(FailureRecord {
            trial: 1,
            trial_seed: 99,
            output: 0,
            neuron: "L0N0".into(),
            first_divergent_step: Some(4),
            discrepancy: f64::INFINITY,
            expected: SpikeTrain::new(vec![4, 9]).unwrap(),
            actual: SpikeTrain::single(9),
            note: None,
        });
        let text = r.render(false);
        assert!(text.starts_with("pass = \"m2s\"\nseed = 7\n"), "{text}");
        assert!(text.contains("[[failures]]"));
        assert!(text.contains("discrepancy = inf"));
        assert!(text.contains("expected = [4, 9]") || text.contains("expected = [\n"));
        assert!(!r.is_clean());
    }
}
