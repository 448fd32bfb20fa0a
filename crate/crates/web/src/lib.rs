//! WebAssembly bindings for the browser demo in `www/`. Every export returns a
//! JSON document that the page plots on a canvas.

use serde_json::{json, Value};
use spikeshift::ntheory::{eta_table, mobius_alpha, square_free_density};
use spikeshift::{
    multi_to_single, simulate_with, single_to_multi_with, Error, NetworkSpec, NeuronSpec, ResetModel, SimOptions,
    SimResult, Source, SpikeLimit, SpikeTrain, Step, Synapse,
};
use wasm_bindgen::prelude::*;

fn one_neuron(weight: f64, leak: f64, limit: SpikeLimit, horizon: Step) -> NetworkSpec {
    NetworkSpec {
        d_in: 1,
        d_out: 1,
        weight_bound: weight.abs().max(1.0),
        dt: 1e-3,
        horizon,
        neurons: vec![NeuronSpec::new("n", 0, limit).with_leak(leak)],
        synapses: vec![Synapse::new(Source::input(0), "n", weight, 0)],
        output_neurons: vec!["n".into()],
        output_groups: None,
    }
}

fn periodic(period: Step, horizon: Step) -> Result<Vec<SpikeTrain>, String> {
    if period == 0 {
        return Err("period must be at least 1".into());
    }
    Ok(vec![SpikeTrain::new((1..=horizon).step_by(period as usize).collect()).map_err(|e| e.to_string())?])
}

/// Simulates, cutting the drive before the first budget overrun.
fn run_within_budget(
    net: &NetworkSpec,
    inputs: &[SpikeTrain],
    opts: &SimOptions,
) -> Result<(SimResult, Option<Step>), String> {
    let mut inputs = inputs.to_vec();
    let mut cut = None;
    loop {
        match simulate_with(net, &inputs, opts) {
            Ok(r) => return Ok((r, cut)),
            Err(Error::SpikeBudgetExceeded { step, .. }) if cut.map_or(true, |c| step < c) => {
                inputs = inputs.iter().map(|t| t.truncated_before(step)).collect();
                cut = Some(step);
            }
            Err(e) => return Err(e.to_string()),
        }
    }
}

pub fn neuron_trace_value(weight: f64, leak: f64, period: Step, horizon: Step) -> Result<Value, String> {
    let net = one_neuron(weight, leak, SpikeLimit::Multi(u32::MAX), horizon);
    let inputs = periodic(period, horizon)?;
    let mut opts = SimOptions { record_traces: true, ..SimOptions::default() };
    let ladder = simulate_with(&net, &inputs, &opts).map_err(|e| e.to_string())?;
    opts.reset_override = Some(ResetModel::Decaying);
    let decaying = simulate_with(&net, &inputs, &opts).map_err(|e| e.to_string())?;
    let side = |r: &SimResult| json!({ "v": r.traces.as_ref().unwrap()[0], "spikes": r.outputs[0] });
    Ok(json!({
        "horizon": horizon,
        "input": inputs[0],
        "ladder": side(&ladder),
        "decaying": side(&decaying),
    }))
}

pub fn population_value(
    direction: &str,
    ns: u32,
    weight: f64,
    leak: f64,
    period: Step,
    horizon: Step,
) -> Result<Value, String> {
    if ns == 0 || ns > 64 {
        return Err("N must be between 1 and 64".into());
    }
    let inputs = periodic(period, horizon)?;
    let opts = SimOptions::default();
    let (original, pass) = match direction {
        "m2s" => {
            let net = one_neuron(weight, leak, SpikeLimit::Multi(ns), horizon);
            (net.clone(), multi_to_single(&net).map_err(|e| e.to_string())?)
        }
        "s2m" => {
            let net = one_neuron(weight, leak, SpikeLimit::Single, horizon);
            (net.clone(), single_to_multi_with(&net, ns, false).map_err(|e| e.to_string())?)
        }
        other => return Err(format!("unknown direction {other:?}")),
    };
    // the transformed side bounds the drive for s2m, the original for m2s
    let (_, cut) = run_within_budget(&pass.network, &inputs, &opts)?;
    let (_, cut_orig) = run_within_budget(&original, &inputs, &opts)?;
    let cut = cut.into_iter().chain(cut_orig).min();
    let inputs: Vec<SpikeTrain> = match cut {
        Some(c) => inputs.iter().map(|t| t.truncated_before(c)).collect(),
        None => inputs,
    };
    let orig = simulate_with(&original, &inputs, &opts).map_err(|e| e.to_string())?;
    let trans = simulate_with(&pass.network, &inputs, &opts).map_err(|e| e.to_string())?;
    let decoded = pass.decode(&trans).map_err(|e| e.to_string())?;

    let alpha = mobius_alpha(ns as usize);
    let mut net_effect = vec![0i64; horizon as usize + 1];
    let units: Vec<Value> = pass
        .network
        .neurons
        .iter()
        .zip(&trans.outputs)
        .map(|(n, train)| {
            let k = n.threshold_multiplier;
            let factor = if direction == "s2m" { i64::from(alpha.get(k as usize)) } else { 1 };
            for &s in train.steps() {
                net_effect[s as usize] += factor;
            }
            json!({ "id": n.id, "multiplier": k, "factor": factor, "spikes": train })
        })
        .collect();
    Ok(json!({
        "direction": direction,
        "horizon": horizon,
        "input": inputs[0],
        "cut": cut,
        "original": orig.outputs[0],
        "units": units,
        "net_effect": net_effect,
        "decoded": decoded[0],
        "equal": decoded[0] == orig.outputs[0],
    }))
}

pub fn square_free_value(n: u32) -> Result<Value, String> {
    if !(1..=2_000_000).contains(&n) {
        return Err("N must be between 1 and 2000000".into());
    }
    let n = n as usize;
    let table = eta_table(n);
    let points = 400.min(n);
    let ks: Vec<usize> = (1..=points).map(|i| (i * n).div_ceil(points)).collect();
    let ratio: Vec<f64> = ks.iter().map(|&k| table[k] as f64 / k as f64).collect();
    let bound: Vec<f64> = ks.iter().map(|&k| (square_free_density() + 1.0 / (k as f64).sqrt()).min(1.0)).collect();
    let shown = mobius_alpha(n.min(120));
    Ok(json!({
        "n": n,
        "eta": table[n],
        "density": square_free_density(),
        "k": ks,
        "ratio": ratio,
        "bound": bound,
        "alpha": shown.values(),
    }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Raw membrane of one neuron under periodic drive, with the ladder reset and
/// with the decaying reset.
#[wasm_bindgen]
pub fn neuron_trace(weight: f64, leak: f64, period: u32, horizon: u32) -> Result<String, JsError> {
    to_js(neuron_trace_value(weight, leak, period, horizon))
}

/// One neuron and its replacement population under periodic drive.
#[wasm_bindgen]
pub fn population(
    direction: &str,
    ns: u32,
    weight: f64,
    leak: f64,
    period: u32,
    horizon: u32,
) -> Result<String, JsError> {
    to_js(population_value(direction, ns, weight, leak, period, horizon))
}

/// Square-free density up to `n` against its bound, and the first weight factors.
#[wasm_bindgen]
pub fn square_free(n: u32) -> Result<String, JsError> {
    to_js(square_free_value(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_shapes() {
        let v = neuron_trace_value(0.4, 1.0, 1, 14).unwrap();
        assert_eq!(v["ladder"]["v"].as_array().unwrap().len(), 15);
        assert_eq!(v["ladder"]["spikes"], json!([3, 5, 8, 10, 13]));
        assert_eq!(v["ladder"]["spikes"], v["decaying"]["spikes"]);
        let leaky = neuron_trace_value(0.4, 0.9, 1, 40).unwrap();
        assert_ne!(leaky["ladder"]["spikes"], leaky["decaying"]["spikes"]);
        assert!(neuron_trace_value(0.4, 1.0, 0, 10).is_err());
    }

    #[test]
    fn populations_decode_to_the_original() {
        for dir in ["m2s", "s2m"] {
            for ns in 1..=8 {
                let v = population_value(dir, ns, 0.45, 0.95, 1, 60).unwrap();
                assert_eq!(v["equal"], json!(true), "{dir} {ns}");
            }
        }
        let v = population_value("s2m", 6, 0.5, 1.0, 1, 40).unwrap();
        assert_eq!(v["units"].as_array().unwrap().len(), 6);
        // all crossings but the first cancel downstream
        let effect: Vec<i64> = serde_json::from_value(v["net_effect"].clone()).unwrap();
        assert_eq!(effect.iter().filter(|&&e| e != 0).count(), 1);
        assert!(population_value("x", 3, 0.5, 1.0, 1, 10).is_err());
    }

    #[test]
    fn square_free_curve() {
        let v = square_free_value(1000).unwrap();
        assert_eq!(v["eta"], json!(608));
        assert_eq!(v["k"].as_array().unwrap().len(), 400);
        assert_eq!(v["alpha"].as_array().unwrap()[..6], [1, -1, -1, 0, -1, 1]);
        assert!(square_free_value(0).is_err());
    }
}
