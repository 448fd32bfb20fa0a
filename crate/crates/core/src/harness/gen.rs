//! Seeded generation of layered networks and Bernoulli input trains.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkSpec, NeuronId, NeuronSpec, ResetModel, Source, SpikeLimit, Synapse};
use crate::train::{SpikeTrain, Step};

const NETWORK_STREAM: u64 = 0x6e65_7477_6f72_6b00;
const INPUT_STREAM: u64 = 0x696e_7075_7473_0000;
const BUDGET_STREAM: u64 = 0x6275_6467_6574_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeuronKind {
    Single,
    Multi,
}

/// What to do when a sampled drive makes a neuron overrun its spike budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetPolicy {
    /// Drop the tail of the input until every neuron stays within budget.
    Truncate,
    /// Keep the input and record the overrun.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub trials: usize,
    /// Inclusive range for the number of layers.
    pub layers: (u32, u32),
    pub neurons_per_layer: (usize, usize),
    pub d_in: usize,
    /// Outputs are taken from the last layer, at most this many.
    pub d_out: usize,
    pub weight_bound: f64,
    /// Weight sampling interval; `[-B, B]` when unset.
    pub weight_range: Option<(f64, f64)>,
    /// Inclusive delay range in steps; the minimum must be at least 1.
    pub delays: (Step, Step),
    /// Leak factors, one picked per network.
    pub leaks: Vec<f64>,
    pub threshold: f64,
    /// Threshold multipliers are drawn from `1..=max_multiplier`.
    pub max_multiplier: u32,
    /// Inclusive spike-budget range.
    pub budget: (u32, u32),
    pub horizon: Step,
    /// Per-step spike probability of every input channel.
    pub input_density: f64,
    /// Probability of a synapse from each eligible lower-layer source.
    pub connect_prob: f64,
    /// Probability of a synapse between two distinct neurons of one layer.
    pub lateral_prob: f64,
    pub kind: NeuronKind,
    pub budget_policy: BudgetPolicy,
    /// Reset model used when simulating both sides of a check.
    pub reset: ResetModel,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            trials: 100,
            layers: (1, 3),
            neurons_per_layer: (1, 8),
            d_in: 3,
            d_out: 2,
            weight_bound: 2.0,
            weight_range: None,
            delays: (1, 3),
            leaks: vec![1.0, 0.9],
            threshold: 1.0,
            max_multiplier: 2,
            budget: (1, 8),
            horizon: 200,
            input_density: 0.05,
            connect_prob: 0.5,
            lateral_prob: 0.1,
            kind: NeuronKind::Multi,
            budget_policy: BudgetPolicy::Truncate,
            reset: ResetModel::Offset,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl GenConfig {
    /// Single-neuron, constant-drive setup for the reset-model counterexample.
    pub fn negative_control(seed: u64, leak: f64) -> Self {
        GenConfig {
            seed,
            trials: 20,
            layers: (1, 1),
            neurons_per_layer: (1, 1),
            d_in: 1,
            d_out: 1,
            weight_range: Some((0.3, 0.5)),
            delays: (1, 1),
            leaks: vec![leak],
            max_multiplier: 1,
            budget: (8, 8),
            horizon: 60,
            input_density: 1.0,
            lateral_prob: 0.0,
            reset: ResetModel::Decaying,
            ..GenConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &'static str| Err(Error::DomainError { value: f64::NAN, domain: what });
        if self.layers.0 == 0 || self.layers.0 > self.layers.1 {
            return bad("layers: 1 <= min <= max");
        }
        if self.neurons_per_layer.0 == 0 || self.neurons_per_layer.0 > self.neurons_per_layer.1 {
            return bad("neurons_per_layer: 1 <= min <= max");
        }
        if self.delays.0 == 0 || self.delays.0 > self.delays.1 {
            return bad("delays: 1 <= min <= max");
        }
        if self.budget.0 == 0 || self.budget.0 > self.budget.1 {
            return bad("budget: 1 <= min <= max");
        }
        if !(self.weight_bound > 0.0) {
            return bad("weight bound > 0");
        }
        if let Some((lo, hi)) = self.weight_range {
            if !(lo <= hi && lo.abs() <= self.weight_bound && hi.abs() <= self.weight_bound) {
                return bad("weight range inside [-B, B]");
            }
        }
        if self.leaks.is_empty() || self.leaks.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            return bad("leaks in (0, 1]");
        }
        if !(self.threshold > 0.0) || self.max_multiplier == 0 || self.horizon == 0 {
            return bad("positive threshold, multiplier, horizon");
        }
        for p in [self.input_density, self.connect_prob, self.lateral_prob] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities in [0, 1]");
            }
        }
        Ok(())
    }

    /// Seed of trial `index`, derived from the master seed.
    pub fn trial_seed(&self, index: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(index as u64))
    }

    /// This configuration reseeded for one trial.
    pub fn for_trial(&self, index: usize) -> GenConfig {
        GenConfig { seed: self.trial_seed(index), ..self.clone() }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ stream)
    }
}

/// Spike budget drawn for this seed.
pub fn sample_budget(cfg: &GenConfig) -> u32 {
    cfg.rng(BUDGET_STREAM).gen_range(cfg.budget.0..=cfg.budget.1)
}

/// A layered network with uniform weights and delays, deterministic in `cfg.seed`.
pub fn random_network(cfg: &GenConfig) -> NetworkSpec {
    let mut rng = cfg.rng(NETWORK_STREAM);
    let limit = match cfg.kind {
        NeuronKind::Single => SpikeLimit::Single,
        NeuronKind::Multi => SpikeLimit::Multi(sample_budget(cfg)),
    };
    let leak = *cfg.leaks.choose(&mut rng).expect("at least one leak");
    let (w_lo, w_hi) = cfg.weight_range.unwrap_or((-cfg.weight_bound, cfg.weight_bound));
    let layers = rng.gen_range(cfg.layers.0..=cfg.layers.1);

    let mut neurons = Vec::new();
    let mut by_layer: Vec<Vec<NeuronId>> = Vec::new();
    for l in 0..layers {
        let count = rng.gen_range(cfg.neurons_per_layer.0..=cfg.neurons_per_layer.1);
        let ids: Vec<NeuronId> = (0..count).map(|i| NeuronId(format!("L{l}N{i}"))).collect();
        for id in &ids {
            let multiplier = rng.gen_range(1..=cfg.max_multiplier);
            neurons.push(
                NeuronSpec::new(id.clone(), l, limit).with_threshold(cfg.threshold, multiplier).with_leak(leak),
            );
        }
        by_layer.push(ids);
    }

    let mut synapses = Vec::new();
    let mut edge = |rng: &mut ChaCha8Rng, pre: Source, post: &NeuronId| {
        let weight = if w_lo == w_hi { w_lo } else { rng.gen_range(w_lo..=w_hi) };
        let delay = rng.gen_range(cfg.delays.0..=cfg.delays.1);
        synapses.push(Synapse::new(pre, post.clone(), weight, delay));
    };
    for (l, ids) in by_layer.iter().enumerate() {
        // feed-forward candidates: all inputs for the first layer, the previous
        // layer plus skip connections otherwise
        let mut sources: Vec<Source> = Vec::new();
        if l == 0 {
            sources.extend((0..cfg.d_in).map(Source::input));
        } else {
            sources.extend(by_layer[l - 1].iter().cloned().map(Source::Neuron));
        }
        for post in ids {
            let mut wired = false;
            for src in &sources {
                if rng.gen_bool(cfg.connect_prob) {
                    edge(&mut rng, src.clone(), post);
                    wired = true;
                }
            }
            if !wired && !sources.is_empty() {
                let src = sources[rng.gen_range(0..sources.len())].clone();
                edge(&mut rng, src, post);
            }
            for other in ids.iter().filter(|o| *o != post) {
                if rng.gen_bool(cfg.lateral_prob) {
                    edge(&mut rng, Source::Neuron(other.clone()), post);
                }
            }
        }
    }

    let last = by_layer.last().expect("at least one layer");
    let d_out = cfg.d_out.min(last.len());
    NetworkSpec {
        d_in: cfg.d_in,
        d_out,
        weight_bound: cfg.weight_bound,
        dt: 1e-3,
        horizon: cfg.horizon,
        neurons,
        synapses,
        output_neurons: last[..d_out].to_vec(),
        output_groups: None,
    }
}

/// Independent Bernoulli trains, one per input channel, over `[0, horizon]`.
pub fn random_inputs(cfg: &GenConfig) -> Vec<SpikeTrain> {
    let mut rng = cfg.rng(INPUT_STREAM);
    (0..cfg.d_in)
        .map(|_| {
            let steps = (0..=cfg.horizon).filter(|_| rng.gen_bool(cfg.input_density)).collect();
            SpikeTrain::new(steps).expect("steps are generated in order")
        })
        .collect()
}

/// Uniform feature vectors in `[0, 1]^d_in`, for encoder-driven inputs.
pub fn random_features(cfg: &GenConfig, samples: usize) -> Vec<Vec<f64>> {
    let mut rng = cfg.rng(INPUT_STREAM ^ 0xfeed);
    (0..samples).map(|_| (0..cfg.d_in).map(|_| rng.gen_range(0.0..=1.0)).collect()).collect()
}
