//! Exact transformations between networks of multi-spike and single-spike
//! integrate-and-fire neurons, with a discrete-time simulator to check them.
//!
//! A neuron allowed `N` spikes can be replaced by `N` single-spike replicas
//! with stepped thresholds, and a single-spike neuron by a population of
//! multi-spike neurons whose Möbius-weighted outputs cancel every spike but
//! the first. Both passes preserve output spike trains exactly; the
//! [`harness`] verifies this by differential simulation.

pub mod codecs;
pub mod error;
pub mod harness;
pub mod network;
pub mod ntheory;
pub mod potential;
pub mod sim;
pub mod train;
pub mod transform;

pub use error::{Error, Result};
pub use network::{validate_network, NetworkSpec, NeuronId, NeuronSpec, ResetModel, Source, SpikeLimit, Synapse};
pub use sim::{simulate, simulate_decaying_reset, simulate_with, SimOptions, SimResult};
pub use train::{append_trains, min_spike_time, SpikeTrain, Step};
pub use transform::{
    first_spike_filter, merge_adapter, multi_to_single, single_to_multi, single_to_multi_with, Direction,
    OutputDecoding, PassOutput,
};
