//! Discrete-time integrate-and-fire simulation.
//!
//! Every neuron integrates a raw membrane `v(t) = leak * v(t-1) + I(t)` with
//! `v(-1) = 0`, where `I(t)` sums `weight * (presynaptic spikes emitted at
//! t - delay)` over incoming synapses. Under the offset reset a spike never
//! touches `v`; instead the `c`-th spike requires `v >= c * k * theta`, so the
//! neuron walks up a ladder of rungs and may emit several spikes in one step.
//! Single-spike neurons stop after their first emission.
//!
//! Within a step, neurons are updated in an order where zero-delay synapses
//! point forward, so their spikes reach the target in the same step.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::network::{NetworkSpec, NeuronId, ResetModel, Source, SpikeLimit};
use crate::potential::{apply_leak, quantize, to_real};
use crate::train::{SpikeTrain, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub record_traces: bool,
    /// Replace every neuron's declared reset model.
    pub reset_override: Option<ResetModel>,
    /// With spiking disabled neurons integrate but never emit.
    pub spiking: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { record_traces: false, reset_override: None, spiking: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Output train of every neuron, in declaration order.
    pub outputs: Vec<SpikeTrain>,
    pub spike_counts: Vec<usize>,
    /// Membrane value after integration at each step, per neuron.
    pub traces: Option<Vec<Vec<f64>>>,
    /// Rung crossings of the raw membrane under the offset reset: where the
    /// neuron would spike if its limit allowed. Equals `outputs` under the
    /// decaying reset.
    pub ladder: Vec<SpikeTrain>,
}

impl SimResult {
    /// Trains of the listed neurons.
    pub fn trains_of(&self, net: &NetworkSpec, ids: &[NeuronId]) -> Vec<SpikeTrain> {
        let index = net.index_of();
        ids.iter().map(|id| self.outputs[index[id]].clone()).collect()
    }

    /// Trains of `net.output_neurons`.
    pub fn output_trains(&self, net: &NetworkSpec) -> Vec<SpikeTrain> {
        self.trains_of(net, &net.output_neurons)
    }
}

pub fn simulate(net: &NetworkSpec, inputs: &[SpikeTrain], record_traces: bool) -> Result<SimResult> {
    simulate_with(net, inputs, &SimOptions { record_traces, ..SimOptions::default() })
}

/// Runs every neuron with a reset that is subtracted from the membrane and then
/// leaks. For leak < 1 the offset shrinks over time, so spike trains diverge
/// from [`simulate`] after the first spike.
pub fn simulate_decaying_reset(net: &NetworkSpec, inputs: &[SpikeTrain]) -> Result<SimResult> {
    let opts = SimOptions { reset_override: Some(ResetModel::Decaying), ..SimOptions::default() };
    simulate_with(net, inputs, &opts)
}

struct Cell {
    leak: i64,
    /// `k * theta`, the rung spacing.
    step_threshold: i64,
    limit: SpikeLimit,
    reset: ResetModel,
    incoming: Vec<(usize, usize, i64)>,
}

pub fn simulate_with(net: &NetworkSpec, inputs: &[SpikeTrain], opts: &SimOptions) -> Result<SimResult> {
    net.validate()?;
    if inputs.len() != net.d_in {
        return Err(Error::InputCount { expected: net.d_in, actual: inputs.len() });
    }
    for train in inputs {
        train.check_horizon(net.horizon)?;
    }
    let order = net.update_order()?;
    let index = net.index_of();
    let n = net.neurons.len();
    let d_in = net.d_in;
    let steps = net.horizon as usize + 1;

    let mut cells: Vec<Cell> = net
        .neurons
        .iter()
        .map(|spec| Cell {
            leak: quantize(spec.leak),
            step_threshold: quantize(spec.threshold_base).saturating_mul(spec.threshold_multiplier as i64),
            limit: spec.spike_limit,
            reset: opts.reset_override.unwrap_or(spec.reset),
            incoming: Vec::new(),
        })
        .collect();
    for syn in &net.synapses {
        let src = match &syn.pre {
            Source::Input { input } => *input,
            Source::Neuron(id) => d_in + index[id],
        };
        cells[index[&syn.post]].incoming.push((src, syn.delay_steps as usize, quantize(syn.weight)));
    }

    // Spike counts per source per step; inputs first, then neurons.
    let mut counts = vec![vec![0u32; steps]; d_in + n];
    for (ch, train) in inputs.iter().enumerate() {
        for &s in train.steps() {
            counts[ch][s as usize] += 1;
        }
    }

    let mut membrane = vec![0i64; n];
    let mut rungs = vec![0i64; n];
    let mut emitted = vec![0u32; n];
    let mut outputs: Vec<Vec<Step>> = vec![Vec::new(); n];
    let mut ladder: Vec<Vec<Step>> = vec![Vec::new(); n];
    let mut traces = opts.record_traces.then(|| vec![Vec::with_capacity(steps); n]);

    for t in 0..steps {
        let step = t as Step;
        for &i in &order {
            let cell = &cells[i];
            let mut current = 0i64;
            for &(src, delay, w) in &cell.incoming {
                if t >= delay {
                    let c = counts[src][t - delay];
                    if c > 0 {
                        current = current.saturating_add(w.saturating_mul(c as i64));
                    }
                }
            }
            let v = apply_leak(membrane[i], cell.leak).saturating_add(current);
            membrane[i] = v;
            let may_emit = |emitted: u32| match cell.limit {
                SpikeLimit::Single => emitted == 0,
                SpikeLimit::Multi(budget) => emitted < budget,
            };
            let over_budget = |i: usize| Error::SpikeBudgetExceeded { neuron: net.neurons[i].id.clone(), step };

            let mut fired = 0u32;
            match cell.reset {
                ResetModel::Offset => {
                    loop {
                        let next = (rungs[i] + 1).saturating_mul(cell.step_threshold);
                        if v < next {
                            break;
                        }
                        rungs[i] += 1;
                        ladder[i].push(step);
                        if !opts.spiking {
                            continue;
                        }
                        if may_emit(emitted[i]) {
                            emitted[i] += 1;
                            fired += 1;
                        } else if !cell.limit.is_single() {
                            return Err(over_budget(i));
                        }
                    }
                }
                ResetModel::Decaying => {
                    while opts.spiking && membrane[i] >= cell.step_threshold {
                        if may_emit(emitted[i]) {
                            emitted[i] += 1;
                            fired += 1;
                            ladder[i].push(step);
                            membrane[i] -= cell.step_threshold;
                        } else if cell.limit.is_single() {
                            break;
                        } else {
                            return Err(over_budget(i));
                        }
                    }
                }
            }
            if let Some(tr) = traces.as_mut() {
                // the raw membrane for the offset model, the reset state otherwise
                let recorded = if cell.reset == ResetModel::Offset { v } else { membrane[i] };
                tr[i].push(to_real(recorded));
            }
            if fired > 0 {
                counts[d_in + i][t] = fired;
                outputs[i].extend(std::iter::repeat_n(step, fired as usize));
            }
        }
    }

    let outputs: Vec<SpikeTrain> = outputs.into_iter().map(SpikeTrain::from_sorted).collect();
    Ok(SimResult {
        spike_counts: outputs.iter().map(SpikeTrain::len).collect(),
        outputs,
        traces,
        ladder: ladder.into_iter().map(SpikeTrain::from_sorted).collect(),
    })
}

/// Tabular trace export: `step neuron_id v spiked_count_this_step`, tab separated.
pub fn traces_table(net: &NetworkSpec, result: &SimResult) -> Option<String> {
    let traces = result.traces.as_ref()?;
    let mut out = String::from("step\tneuron_id\tv\tspiked_count_this_step\n");
    let steps = net.horizon as usize + 1;
    let mut cursor = vec![0usize; net.neurons.len()];
    for t in 0..steps {
        for (i, neuron) in net.neurons.iter().enumerate() {
            let train = result.outputs[i].steps();
            let mut spiked = 0;
            while cursor[i] < train.len() && train[cursor[i]] as usize == t {
                cursor[i] += 1;
                spiked += 1;
            }
            let _ = writeln!(out, "{t}\t{}\t{}\t{spiked}", neuron.id, traces[i][t]);
        }
    }
    Some(out)
}
