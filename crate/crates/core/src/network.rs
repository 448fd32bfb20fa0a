//! Network description: neurons, synapses, outputs, and structural validation.
//!
//! The JSON layout of [`NetworkSpec`] is the on-disk network file format.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::train::Step;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NeuronId(pub String);

impl NeuronId {
    pub fn new(id: impl Into<String>) -> Self {
        NeuronId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NeuronId {
    fn from(s: &str) -> Self {
        NeuronId(s.to_owned())
    }
}

/// How many spikes a neuron may emit over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpikeLimit {
    Single,
    Multi(u32),
}

impl SpikeLimit {
    pub fn budget(self) -> u32 {
        match self {
            SpikeLimit::Single => 1,
            SpikeLimit::Multi(n) => n,
        }
    }

    pub fn is_single(self) -> bool {
        matches!(self, SpikeLimit::Single)
    }
}

/// Reset mechanism applied after a spike.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetModel {
    /// Each spike adds a persistent `-k*theta` offset; the raw membrane is untouched and
    /// the effective threshold climbs a ladder of rungs `k*theta, 2*k*theta, ...`.
    #[default]
    Offset,
    /// The reset is subtracted from the membrane state and leaks away with it.
    Decaying,
}

impl ResetModel {
    fn is_offset(&self) -> bool {
        *self == ResetModel::Offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronSpec {
    pub id: NeuronId,
    pub layer: u32,
    pub threshold_base: f64,
    /// Effective first threshold is `threshold_multiplier * threshold_base`.
    pub threshold_multiplier: u32,
    pub leak: f64,
    pub spike_limit: SpikeLimit,
    #[serde(default, skip_serializing_if = "ResetModel::is_offset")]
    pub reset: ResetModel,
}

impl NeuronSpec {
    pub fn new(id: impl Into<NeuronId>, layer: u32, spike_limit: SpikeLimit) -> Self {
        NeuronSpec {
            id: id.into(),
            layer,
            threshold_base: 1.0,
            threshold_multiplier: 1,
            leak: 1.0,
            spike_limit,
            reset: ResetModel::Offset,
        }
    }

    pub fn with_threshold(mut self, base: f64, multiplier: u32) -> Self {
        self.threshold_base = base;
        self.threshold_multiplier = multiplier;
        self
    }

    pub fn with_leak(mut self, leak: f64) -> Self {
        self.leak = leak;
        self
    }
}

/// Presynaptic endpoint: an external input channel or a neuron.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Input { input: usize },
    Neuron(NeuronId),
}

impl Source {
    pub fn input(channel: usize) -> Self {
        Source::Input { input: channel }
    }

    pub fn neuron(id: impl Into<NeuronId>) -> Self {
        Source::Neuron(id.into())
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Input { input } => write!(f, "input {input}"),
            Source::Neuron(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: Source,
    pub post: NeuronId,
    pub weight: f64,
    pub delay_steps: Step,
}

impl Synapse {
    pub fn new(pre: Source, post: impl Into<NeuronId>, weight: f64, delay_steps: Step) -> Self {
        Synapse { pre, post: post.into(), weight, delay_steps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub d_in: usize,
    pub d_out: usize,
    #[serde(rename = "B")]
    pub weight_bound: f64,
    pub dt: f64,
    pub horizon: Step,
    pub neurons: Vec<NeuronSpec>,
    pub synapses: Vec<Synapse>,
    pub output_neurons: Vec<NeuronId>,
    /// Present after a multi-to-single pass: one group of replica ids per
    /// original output, merged in order by the decoder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_groups: Option<Vec<Vec<NeuronId>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Autapse(NeuronId),
    WeightBound { pre: Source, post: NeuronId, weight: String },
    NonFiniteWeight { pre: Source, post: NeuronId },
    UnknownNeuron(NeuronId),
    UnknownInput(usize),
    DuplicateNeuron(NeuronId),
    NotLayered { pre: NeuronId, post: NeuronId },
    ZeroDelayCycle(Vec<NeuronId>),
    BadNeuron { id: NeuronId, reason: &'static str },
    BadNetwork(&'static str),
    DuplicateOutput(NeuronId),
    OutputCount { expected: usize, actual: usize },
    OutputGroups(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Autapse(id) => write!(f, "autapse at {id}"),
            Violation::WeightBound { pre, post, weight } => {
                write!(f, "weight bound exceeded on {pre} -> {post} (weight {weight})")
            }
            Violation::NonFiniteWeight { pre, post } => write!(f, "non-finite weight on {pre} -> {post}"),
            Violation::UnknownNeuron(id) => write!(f, "unknown neuron {id}"),
            Violation::UnknownInput(ch) => write!(f, "unknown input channel {ch}"),
            Violation::DuplicateNeuron(id) => write!(f, "duplicate neuron id {id}"),
            Violation::NotLayered { pre, post } => {
                write!(f, "synapse {pre} -> {post} goes from a higher to a lower layer")
            }
            Violation::ZeroDelayCycle(ids) => {
                let ids: Vec<_> = ids.iter().map(NeuronId::as_str).collect();
                write!(f, "zero-delay cycle through {}", ids.join(", "))
            }
            Violation::BadNeuron { id, reason } => write!(f, "neuron {id}: {reason}"),
            Violation::BadNetwork(reason) => f.write_str(reason),
            Violation::DuplicateOutput(id) => write!(f, "output neuron {id} listed twice"),
            Violation::OutputCount { expected, actual } => {
                write!(f, "expected {expected} outputs, found {actual}")
            }
            Violation::OutputGroups(reason) => write!(f, "output groups: {reason}"),
        }
    }
}

impl NetworkSpec {
    pub fn index_of(&self) -> HashMap<&NeuronId, usize> {
        self.neurons.iter().enumerate().map(|(i, n)| (&n.id, i)).collect()
    }

    pub fn neuron(&self, id: &NeuronId) -> Option<&NeuronSpec> {
        self.neurons.iter().find(|n| &n.id == id)
    }

    /// Number of distinct layers occupied by neurons.
    pub fn layer_count(&self) -> usize {
        self.neurons.iter().map(|n| n.layer).collect::<BTreeSet<_>>().len()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.synapses.iter().map(|s| s.weight.abs()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let v = validate_network(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(v))
        }
    }

    /// Neuron indices in an order where every zero-delay edge points forward.
    /// Ties keep declaration order.
    pub fn update_order(&self) -> Result<Vec<usize>> {
        let index = self.index_of();
        zero_delay_order(self, &index).map_err(|cycle| Error::InvalidNetwork(vec![cycle]))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }
}

/// Returns every structural violation; an empty list means the network is valid.
pub fn validate_network(net: &NetworkSpec) -> Vec<Violation> {
    let mut out = Vec::new();

    if !(net.weight_bound > 0.0) {
        out.push(Violation::BadNetwork("weight bound B must be positive"));
    }
    if !(net.dt > 0.0) || !net.dt.is_finite() {
        out.push(Violation::BadNetwork("dt must be positive"));
    }
    if net.horizon == 0 {
        out.push(Violation::BadNetwork("horizon must be positive"));
    }

    let mut index: HashMap<&NeuronId, usize> = HashMap::new();
    for (i, n) in net.neurons.iter().enumerate() {
        if index.insert(&n.id, i).is_some() {
            out.push(Violation::DuplicateNeuron(n.id.clone()));
        }
        let bad = |reason| Violation::BadNeuron { id: n.id.clone(), reason };
        if !(n.threshold_base > 0.0) || !n.threshold_base.is_finite() {
            out.push(bad("threshold must be positive"));
        } else if crate::potential::quantize(n.threshold_base) < 1 {
            out.push(bad("threshold below potential resolution"));
        }
        if n.threshold_multiplier == 0 {
            out.push(bad("threshold multiplier must be at least 1"));
        }
        if !(n.leak > 0.0 && n.leak <= 1.0) {
            out.push(bad("leak must lie in (0, 1]"));
        }
        if n.spike_limit == SpikeLimit::Multi(0) {
            out.push(bad("spike budget must be at least 1"));
        }
    }

    for s in &net.synapses {
        match &s.pre {
            Source::Input { input } => {
                if *input >= net.d_in {
                    out.push(Violation::UnknownInput(*input));
                }
            }
            Source::Neuron(pre) => {
                if pre == &s.post {
                    out.push(Violation::Autapse(pre.clone()));
                }
                match (index.get(pre), index.get(&s.post)) {
                    (None, _) => out.push(Violation::UnknownNeuron(pre.clone())),
                    (Some(&a), Some(&b)) if net.neurons[a].layer > net.neurons[b].layer => {
                        out.push(Violation::NotLayered { pre: pre.clone(), post: s.post.clone() })
                    }
                    _ => {}
                }
            }
        }
        if !index.contains_key(&s.post) {
            out.push(Violation::UnknownNeuron(s.post.clone()));
        }
        if !s.weight.is_finite() {
            out.push(Violation::NonFiniteWeight { pre: s.pre.clone(), post: s.post.clone() });
        } else if s.weight.abs() > net.weight_bound {
            out.push(Violation::WeightBound {
                pre: s.pre.clone(),
                post: s.post.clone(),
                weight: s.weight.to_string(),
            });
        }
    }

    let mut seen = BTreeSet::new();
    for id in &net.output_neurons {
        if !index.contains_key(id) {
            out.push(Violation::UnknownNeuron(id.clone()));
        }
        if !seen.insert(id) {
            out.push(Violation::DuplicateOutput(id.clone()));
        }
    }
    match &net.output_groups {
        None => {
            if net.output_neurons.len() != net.d_out {
                out.push(Violation::OutputCount { expected: net.d_out, actual: net.output_neurons.len() });
            }
        }
        Some(groups) => {
            if groups.len() != net.d_out {
                out.push(Violation::OutputCount { expected: net.d_out, actual: groups.len() });
            }
            if !groups.iter().flatten().eq(net.output_neurons.iter()) {
                out.push(Violation::OutputGroups("groups must partition output_neurons in order"));
            }
        }
    }

    // Only meaningful once every endpoint resolves.
    if out.iter().all(|v| !matches!(v, Violation::UnknownNeuron(_) | Violation::DuplicateNeuron(_))) {
        if let Err(cycle) = zero_delay_order(net, &index) {
            out.push(cycle);
        }
    }
    out
}

fn zero_delay_order(
    net: &NetworkSpec,
    index: &HashMap<&NeuronId, usize>,
) -> std::result::Result<Vec<usize>, Violation> {
    let n = net.neurons.len();
    let mut indegree = vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in net.synapses.iter().filter(|s| s.delay_steps == 0) {
        if let (Source::Neuron(pre), Some(&b)) = (&s.pre, index.get(&s.post)) {
            if let Some(&a) = index.get(pre) {
                succ[a].push(b);
                indegree[b] += 1;
            }
        }
    }
    // Kahn's algorithm, always releasing the lowest declared index first.
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert(j);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        let stuck = (0..n).filter(|&i| indegree[i] > 0).map(|i| net.neurons[i].id.clone()).collect();
        Err(Violation::ZeroDelayCycle(stuck))
    }
}
