use spikeshift::harness::{random_inputs, random_network, GenConfig, NeuronKind};
use spikeshift::validate_network;

fn sweep(kind: NeuronKind, lateral_prob: f64) {
    let base = GenConfig { seed: 0x5eed, trials: 10_000, kind, lateral_prob, ..GenConfig::default() };
    for i in 0..base.trials {
        let cfg = base.for_trial(i);
        let net = random_network(&cfg);
        let violations = validate_network(&net);
        assert!(violations.is_empty(), "trial {i}: {violations:?}");
        assert_eq!(random_inputs(&cfg).len(), net.d_in);
    }
}

#[test]
fn ten_thousand_multi_networks_validate() {
    sweep(NeuronKind::Multi, 0.1);
}

#[test]
fn ten_thousand_single_networks_validate() {
    sweep(NeuronKind::Single, 0.3);
}

#[test]
fn no_lateral_edges_means_feed_forward() {
    let base = GenConfig { seed: 3, trials: 500, lateral_prob: 0.0, ..GenConfig::default() };
    for i in 0..base.trials {
        let net = random_network(&base.for_trial(i));
        for syn in &net.synapses {
            if let spikeshift::Source::Neuron(pre) = &syn.pre {
                let pre_layer = net.neuron(pre).unwrap().layer;
                let post_layer = net.neuron(&syn.post).unwrap().layer;
                assert!(pre_layer < post_layer, "{pre} -> {}", syn.post);
            }
        }
    }
}
