//! Network passes between multi-spike and single-spike neurons.
//!
//! * [`multi_to_single`] replaces a neuron with budget `N` by `N` single-spike
//!   replicas with thresholds `k * theta`, `k = 1..=N`. Replica `k` fires at
//!   the `k`-th rung crossing of the shared membrane, so together they emit
//!   the original train. Outputs are recovered by [`merge_adapter`].
//! * [`single_to_multi`] replaces a single-spike neuron by multi-spike
//!   neurons `j = 1..=N` with thresholds `j * theta`, keeping only square-free
//!   `j`, and scales their outgoing weights by the Möbius value of `j`. Neuron
//!   `j` fires at every `j`-th crossing; the weighted spikes cancel except the
//!   first. Outputs are recovered by [`first_spike_filter`].
//!
//! Replicas copy the original's incoming and outgoing synapses (weights,
//! delays, lateral edges), layer, leak, and threshold base.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkSpec, NeuronId, NeuronSpec, ResetModel, Source, SpikeLimit, Synapse};
use crate::ntheory::mobius_alpha;
use crate::sim::SimResult;
use crate::train::{append_trains, SpikeTrain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    M2s,
    S2m,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::M2s => "m2s",
            Direction::S2m => "s2m",
        }
    }
}

/// How the transformed network's outputs map back to the original outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputDecoding {
    /// One replica group per original output, appended in order.
    Merge { groups: Vec<Vec<NeuronId>> },
    /// One designated neuron per original output. Where `filter` is set the
    /// neuron heads a population and only its first spike counts.
    FirstSpike { designated: Vec<NeuronId>, filter: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassOutput {
    pub direction: Direction,
    #[serde(skip)]
    pub network: NetworkSpec,
    /// Original neuron id to its replacement ids (itself when copied through).
    pub neuron_map: BTreeMap<NeuronId, Vec<NeuronId>>,
    pub decoding: OutputDecoding,
}

impl PassOutput {
    /// Maps a simulation of the transformed network to one train per original output.
    pub fn decode(&self, result: &SimResult) -> Result<Vec<SpikeTrain>> {
        match &self.decoding {
            OutputDecoding::Merge { groups } => {
                let index = self.network.index_of();
                let grouped: Vec<Vec<SpikeTrain>> = groups
                    .iter()
                    .map(|g| g.iter().map(|id| result.outputs[index[id]].clone()).collect())
                    .collect();
                merge_adapter(&grouped)
            }
            OutputDecoding::FirstSpike { designated, filter } => {
                let trains = result.trains_of(&self.network, designated);
                Ok(trains
                    .into_iter()
                    .zip(filter)
                    .map(|(t, &f)| if f { first_spike(&t) } else { t })
                    .collect())
            }
        }
    }

    /// Sidecar mapping document.
    pub fn map_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pass map serializes")
    }
}

fn ensure_passable(net: &NetworkSpec) -> Result<()> {
    net.validate()?;
    if net.output_groups.is_some() {
        return Err(Error::Unsupported("network already carries output groups".into()));
    }
    Ok(())
}

/// Rewrites synapses through `replace`: every (pre replica, post replica)
/// pair gets the original weight times the pre replica's factor.
fn rewire(net: &NetworkSpec, replace: &HashMap<NeuronId, Vec<(NeuronId, f64)>>) -> Vec<Synapse> {
    let mut out = Vec::new();
    for syn in &net.synapses {
        let pres: Vec<(Source, f64)> = match &syn.pre {
            Source::Input { .. } => vec![(syn.pre.clone(), 1.0)],
            Source::Neuron(id) => replace[id].iter().map(|(r, f)| (Source::Neuron(r.clone()), *f)).collect(),
        };
        for (pre, factor) in &pres {
            for (post, _) in &replace[&syn.post] {
                let weight = if *factor == 0.0 { 0.0 } else { syn.weight * factor };
                out.push(Synapse { pre: pre.clone(), post: post.clone(), weight, delay_steps: syn.delay_steps });
            }
        }
    }
    out
}

fn assemble(
    net: &NetworkSpec,
    direction: Direction,
    neurons: Vec<NeuronSpec>,
    replace: HashMap<NeuronId, Vec<(NeuronId, f64)>>,
    output_neurons: Vec<NeuronId>,
    output_groups: Option<Vec<Vec<NeuronId>>>,
    decoding: OutputDecoding,
) -> Result<PassOutput> {
    let synapses = rewire(net, &replace);
    let network = NetworkSpec {
        d_in: net.d_in,
        d_out: net.d_out,
        weight_bound: net.weight_bound,
        dt: net.dt,
        horizon: net.horizon,
        neurons,
        synapses,
        output_neurons,
        output_groups,
    };
    network.validate()?;
    let neuron_map = replace.into_iter().map(|(k, v)| (k, v.into_iter().map(|(id, _)| id).collect())).collect();
    Ok(PassOutput { direction, network, neuron_map, decoding })
}

/// Replaces every multi-spike neuron by single-spike replicas, one per unit of
/// its spike budget. Single-spike neurons are copied through.
pub fn multi_to_single(net: &NetworkSpec) -> Result<PassOutput> {
    ensure_passable(net)?;
    let mut neurons = Vec::new();
    let mut replace: HashMap<NeuronId, Vec<(NeuronId, f64)>> = HashMap::new();
    for n in &net.neurons {
        let ids = match n.spike_limit {
            SpikeLimit::Single => {
                neurons.push(n.clone());
                vec![(n.id.clone(), 1.0)]
            }
            SpikeLimit::Multi(budget) => {
                if n.reset != ResetModel::Offset {
                    return Err(Error::UnsupportedModel { neuron: n.id.clone() });
                }
                (1..=budget)
                    .map(|k| {
                        let id = NeuronId(format!("{}/k{k}", n.id));
                        neurons.push(NeuronSpec {
                            id: id.clone(),
                            threshold_multiplier: n.threshold_multiplier * k,
                            spike_limit: SpikeLimit::Single,
                            ..n.clone()
                        });
                        (id, 1.0)
                    })
                    .collect()
            }
        };
        replace.insert(n.id.clone(), ids);
    }
    let groups: Vec<Vec<NeuronId>> =
        net.output_neurons.iter().map(|o| replace[o].iter().map(|(id, _)| id.clone()).collect()).collect();
    let flat: Vec<NeuronId> = groups.iter().flatten().cloned().collect();
    assemble(
        net,
        Direction::M2s,
        neurons,
        replace,
        flat,
        Some(groups.clone()),
        OutputDecoding::Merge { groups },
    )
}

/// Replaces every single-spike neuron by the square-free population of
/// multi-spike neurons with budget `budget`. With `prune` off all indices
/// `1..=budget` are kept and the zero-weight ones emit silent synapses.
pub fn single_to_multi_with(net: &NetworkSpec, budget: u32, prune: bool) -> Result<PassOutput> {
    if budget == 0 {
        return Err(Error::DomainError { value: 0.0, domain: "spike budget >= 1" });
    }
    ensure_passable(net)?;
    let alpha = mobius_alpha(budget as usize);
    let mut neurons = Vec::new();
    let mut replace: HashMap<NeuronId, Vec<(NeuronId, f64)>> = HashMap::new();
    for n in &net.neurons {
        let ids = match n.spike_limit {
            SpikeLimit::Multi(_) => {
                neurons.push(n.clone());
                vec![(n.id.clone(), 1.0)]
            }
            SpikeLimit::Single => {
                if n.reset != ResetModel::Offset {
                    return Err(Error::UnsupportedModel { neuron: n.id.clone() });
                }
                (1..=budget)
                    .filter(|&j| !prune || alpha.get(j as usize) != 0)
                    .map(|j| {
                        let id = NeuronId(format!("{}/p{j}", n.id));
                        neurons.push(NeuronSpec {
                            id: id.clone(),
                            threshold_multiplier: n.threshold_multiplier * j,
                            spike_limit: SpikeLimit::Multi(budget),
                            ..n.clone()
                        });
                        (id, f64::from(alpha.get(j as usize)))
                    })
                    .collect()
            }
        };
        replace.insert(n.id.clone(), ids);
    }
    let designated: Vec<NeuronId> = net.output_neurons.iter().map(|o| replace[o][0].0.clone()).collect();
    let filter: Vec<bool> = net
        .output_neurons
        .iter()
        .map(|o| net.neuron(o).is_some_and(|n| n.spike_limit.is_single()))
        .collect();
    assemble(
        net,
        Direction::S2m,
        neurons,
        replace,
        designated.clone(),
        None,
        OutputDecoding::FirstSpike { designated, filter },
    )
}

pub fn single_to_multi(net: &NetworkSpec, budget: u32) -> Result<PassOutput> {
    single_to_multi_with(net, budget, true)
}

/// Appends each group's trains in order.
pub fn merge_adapter(groups: &[Vec<SpikeTrain>]) -> Result<Vec<SpikeTrain>> {
    groups
        .iter()
        .map(|g| g.iter().try_fold(SpikeTrain::empty(), |acc, t| append_trains(&acc, t)))
        .collect()
}

fn first_spike(train: &SpikeTrain) -> SpikeTrain {
    train.first().map_or_else(SpikeTrain::empty, SpikeTrain::single)
}

/// Keeps only the first spike of every train.
pub fn first_spike_filter(trains: &[SpikeTrain]) -> Vec<SpikeTrain> {
    trains.iter().map(first_spike).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntheory::eta;
    use crate::sim::simulate;

    fn t(steps: &[u32]) -> SpikeTrain {
        SpikeTrain::new(steps.to_vec()).unwrap()
    }

    fn driven(limit: SpikeLimit, weight: f64, horizon: u32) -> (NetworkSpec, Vec<SpikeTrain>) {
        let net = NetworkSpec {
            d_in: 1,
            d_out: 1,
            weight_bound: 2.0,
            dt: 1.0,
            horizon,
            neurons: vec![NeuronSpec::new("n", 0, limit)],
            synapses: vec![Synapse::new(Source::input(0), "n", weight, 0)],
            output_neurons: vec!["n".into()],
            output_groups: None,
        };
        (net, vec![SpikeTrain::new((1..=horizon).collect()).unwrap()])
    }

    #[test]
    fn merge_examples() {
        assert_eq!(merge_adapter(&[vec![t(&[3]), t(&[5]), t(&[8])]]).unwrap(), vec![t(&[3, 5, 8])]);
        assert_eq!(merge_adapter(&[vec![t(&[3]), t(&[]), t(&[])]]).unwrap(), vec![t(&[3])]);
        assert_eq!(merge_adapter(&[vec![t(&[]), t(&[]), t(&[])]]).unwrap(), vec![t(&[])]);
        assert!(matches!(merge_adapter(&[vec![t(&[5]), t(&[3])]]), Err(Error::OrderViolation { .. })));
    }

    #[test]
    fn first_spike_examples() {
        assert_eq!(first_spike_filter(&[t(&[3, 5, 8]), t(&[]), t(&[0, 0, 4])]), vec![t(&[3]), t(&[]), t(&[0])]);
    }

    #[test]
    fn replicas_split_the_train() {
        let (net, input) = driven(SpikeLimit::Multi(3), 0.4, 9);
        let original = simulate(&net, &input, false).unwrap();
        assert_eq!(original.outputs[0], t(&[3, 5, 8]));

        let pass = multi_to_single(&net).unwrap();
        let r = simulate(&pass.network, &input, false).unwrap();
        assert_eq!(r.outputs, vec![t(&[3]), t(&[5]), t(&[8])]);
        assert_eq!(pass.decode(&r).unwrap(), vec![t(&[3, 5, 8])]);
        let multipliers: Vec<u32> = pass.network.neurons.iter().map(|n| n.threshold_multiplier).collect();
        assert_eq!(multipliers, vec![1, 2, 3]);
    }

    #[test]
    fn silence_survives_both_passes() {
        let (net, _) = driven(SpikeLimit::Multi(4), 0.4, 9);
        let quiet = vec![SpikeTrain::empty()];
        let pass = multi_to_single(&net).unwrap();
        let r = simulate(&pass.network, &quiet, false).unwrap();
        assert_eq!(pass.decode(&r).unwrap(), vec![t(&[])]);
    }

    #[test]
    fn m2s_counts() {
        let mut net = NetworkSpec {
            d_in: 1,
            d_out: 1,
            weight_bound: 2.0,
            dt: 1.0,
            horizon: 10,
            neurons: (0..4).map(|i| NeuronSpec::new(format!("n{i}").as_str(), i / 2, SpikeLimit::Multi(6))).collect(),
            synapses: vec![],
            output_neurons: vec!["n3".into()],
            output_groups: None,
        };
        net.synapses.push(Synapse::new(Source::input(0), "n0", 1.0, 1));
        net.synapses.push(Synapse::new(Source::neuron("n0"), "n1", 1.0, 1));
        net.synapses.push(Synapse::new(Source::neuron("n1"), "n2", -1.5, 2));
        net.synapses.push(Synapse::new(Source::neuron("n2"), "n3", 1.0, 1));
        let pass = multi_to_single(&net).unwrap();
        assert!(pass.network.neurons.len() <= 24);
        assert_eq!(pass.network.layer_count(), net.layer_count());
        assert_eq!(pass.network.output_neurons.len(), 6);
        // every edge becomes a 6x6 bundle with the same weight and delay
        assert_eq!(pass.network.synapses.len(), 6 + 3 * 36);
        assert_eq!(pass.network.max_abs_weight(), 1.5);
    }

    #[test]
    fn s2m_population_for_six() {
        let (net, _) = driven(SpikeLimit::Single, 0.4, 9);
        let mut net = net;
        net.neurons.push(NeuronSpec::new("m", 1, SpikeLimit::Single));
        net.synapses.push(Synapse::new(Source::neuron("n"), "m", 1.0, 1));
        net.output_neurons = vec!["m".into()];
        let pass = single_to_multi(&net, 6).unwrap();
        let pop = &pass.neuron_map[&NeuronId::from("n")];
        assert_eq!(pop.len() as u64, eta(6));
        let mults: Vec<u32> =
            pop.iter().map(|id| pass.network.neuron(id).unwrap().threshold_multiplier).collect();
        assert_eq!(mults, vec![1, 2, 3, 5, 6]);
        let out_weights: Vec<f64> = pass
            .network
            .synapses
            .iter()
            .filter(|s| matches!(&s.pre, Source::Neuron(id) if pop.contains(id)) && s.post == NeuronId::from("m/p1"))
            .map(|s| s.weight)
            .collect();
        assert_eq!(out_weights, vec![1.0, -1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn s2m_identity_for_budget_one() {
        let (net, input) = driven(SpikeLimit::Single, 0.4, 9);
        let pass = single_to_multi(&net, 1).unwrap();
        assert_eq!(pass.network.neurons.len(), 1);
        assert_eq!(pass.network.neurons[0].spike_limit, SpikeLimit::Multi(1));
        assert_eq!(pass.network.neurons[0].threshold_multiplier, 1);
        // input drives three crossings, which overruns a budget of one
        assert!(matches!(simulate(&pass.network, &input, false), Err(Error::SpikeBudgetExceeded { .. })));
    }

    #[test]
    fn s2m_downstream_trace_is_identical() {
        let (mut net, input) = driven(SpikeLimit::Single, 0.4, 20);
        net.neurons.push(NeuronSpec::new("out", 1, SpikeLimit::Single).with_threshold(5.0, 1));
        net.synapses.push(Synapse::new(Source::neuron("n"), "out", 1.3, 2));
        net.output_neurons = vec!["out".into()];
        let original = simulate(&net, &input, true).unwrap();
        // raw membrane of n crosses 8 rungs by step 20
        let pass = single_to_multi(&net, 8).unwrap();
        let r = simulate(&pass.network, &input, true).unwrap();
        let idx = pass.network.index_of()[&NeuronId::from("out/p1")];
        assert_eq!(r.traces.as_ref().unwrap()[idx], original.traces.as_ref().unwrap()[1]);
        assert_eq!(pass.decode(&r).unwrap(), original.output_trains(&net));

        let unpruned = single_to_multi_with(&net, 8, false).unwrap();
        assert_eq!(unpruned.network.neurons.len(), 16);
        let r = simulate(&unpruned.network, &input, true).unwrap();
        let idx = unpruned.network.index_of()[&NeuronId::from("out/p1")];
        assert_eq!(r.traces.as_ref().unwrap()[idx], original.traces.as_ref().unwrap()[1]);
    }

    #[test]
    fn rejects_decaying_neurons() {
        let (mut net, _) = driven(SpikeLimit::Multi(3), 0.4, 9);
        net.neurons[0].reset = ResetModel::Decaying;
        assert!(matches!(multi_to_single(&net), Err(Error::UnsupportedModel { .. })));
    }

    #[test]
    fn rejects_grouped_networks() {
        let (net, _) = driven(SpikeLimit::Multi(2), 0.4, 9);
        let once = multi_to_single(&net).unwrap();
        assert!(matches!(multi_to_single(&once.network), Err(Error::Unsupported(_))));
    }
}
