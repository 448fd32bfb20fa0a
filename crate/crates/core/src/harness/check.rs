//! Differential equivalence checks between a network and its transform.

use serde::{Deserialize, Serialize};

use super::gen::{random_features, random_inputs, random_network, sample_budget, BudgetPolicy, GenConfig, NeuronKind};
use super::report::{AuditSummary, BudgetRecord, EquivalenceReport, FailureRecord, TrialAccounting};
use crate::codecs::{lp_error, Decoder, Encoder};
use crate::error::{Error, Result};
use crate::network::NetworkSpec;
use crate::ntheory::{eta, square_free_density};
use crate::sim::{simulate_with, SimOptions};
use crate::train::{min_spike_time, SpikeTrain, Step};
use crate::transform::{multi_to_single, single_to_multi, Direction, PassOutput};

/// True when every non-empty output starts strictly after the earliest input
/// spike. Silent outputs satisfy it vacuously.
pub fn causality_holds(inputs: &[SpikeTrain], outputs: &[SpikeTrain]) -> bool {
    match (min_spike_time(inputs), min_spike_time(outputs)) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(i), Some(o)) => o > i,
    }
}

/// Simulates `net` and checks its output neurons against [`causality_holds`].
pub fn check_causality(net: &NetworkSpec, inputs: &[SpikeTrain]) -> Result<bool> {
    if net.synapses.iter().any(|s| s.delay_steps == 0) {
        return Err(Error::Unsupported("causality check needs every delay >= 1".into()));
    }
    let r = simulate_with(net, inputs, &SimOptions::default())?;
    Ok(causality_holds(inputs, &r.output_trains(net)))
}

/// `+inf` when spike counts differ, otherwise the largest step difference.
pub fn discrepancy(expected: &SpikeTrain, actual: &SpikeTrain) -> f64 {
    if expected.len() != actual.len() {
        return f64::INFINITY;
    }
    expected.steps().iter().zip(actual.steps()).map(|(&a, &b)| a.abs_diff(b) as f64).fold(0.0, f64::max)
}

fn first_divergence(expected: &SpikeTrain, actual: &SpikeTrain) -> Option<Step> {
    let (e, a) = (expected.steps(), actual.steps());
    match e.iter().zip(a).position(|(x, y)| x != y) {
        Some(i) => Some(e[i].min(a[i])),
        None if e.len() != a.len() => e.get(a.len()).or(a.get(e.len())).copied(),
        None => None,
    }
}

fn sim_options(cfg: &GenConfig) -> SimOptions {
    SimOptions { reset_override: Some(cfg.reset), ..SimOptions::default() }
}

/// Earliest step at which a neuron of `net` passes its spike budget under
/// `inputs`. Multi-spike neurons report through the simulator; single-spike
/// neurons are measured against `single_budget` on their raw rung crossings,
/// when given.
fn budget_overrun(
    net: &NetworkSpec,
    inputs: &[SpikeTrain],
    opts: &SimOptions,
    single_budget: Option<u32>,
) -> Result<Option<Step>> {
    let result = match simulate_with(net, inputs, opts) {
        Ok(r) => r,
        Err(Error::SpikeBudgetExceeded { step, .. }) => return Ok(Some(step)),
        Err(e) => return Err(e),
    };
    let Some(budget) = single_budget else { return Ok(None) };
    Ok(net
        .neurons
        .iter()
        .zip(&result.ladder)
        .filter(|(n, _)| n.spike_limit.is_single())
        .filter_map(|(_, ladder)| ladder.steps().get(budget as usize).copied())
        .min())
}

/// Shortens `inputs` until `probe` reports no budget overrun. The first cut is
/// at the overrun step; if the overrun persists the latest remaining input
/// step is dropped, which terminates because silent input never spikes.
fn fit_to_budget<F>(inputs: &[SpikeTrain], probe: F) -> Result<(Vec<SpikeTrain>, bool)>
where
    F: Fn(&[SpikeTrain]) -> Result<Option<Step>>,
{
    let mut current = inputs.to_vec();
    let mut cut: Option<Step> = None;
    loop {
        let Some(overrun) = probe(&current)? else {
            return Ok((current, cut.is_some()));
        };
        let next = match cut {
            Some(c) if overrun >= c => match current.iter().filter_map(SpikeTrain::last).max() {
                Some(latest) => latest,
                None => return Err(Error::Unsupported("budget overrun without input".into())),
            },
            _ => overrun,
        };
        cut = Some(next);
        current = current.iter().map(|t| t.truncated_before(next)).collect();
    }
}

enum Outcome {
    Match,
    Mismatch(Vec<FailureRecord>),
    Budget(BudgetRecord),
}

struct TrialResult {
    outcome: Outcome,
    accounting: TrialAccounting,
}

fn apply_pass(net: &NetworkSpec, direction: Direction, budget: u32) -> Result<PassOutput> {
    match direction {
        Direction::M2s => multi_to_single(net),
        Direction::S2m => single_to_multi(net, budget),
    }
}

fn run_trial(cfg: &GenConfig, direction: Direction, index: usize) -> Result<TrialResult> {
    let tcfg = cfg.for_trial(index);
    let net = random_network(&tcfg);
    let budget = sample_budget(&tcfg);
    let single_budget = (direction == Direction::S2m).then_some(budget);

    let raw = random_inputs(&tcfg);
    let (inputs, truncated) = match cfg.budget_policy {
        BudgetPolicy::Truncate => {
            fit_to_budget(&raw, |inp| budget_overrun(&net, inp, &sim_options(cfg), single_budget))?
        }
        BudgetPolicy::Report => (raw, false),
    };

    let pass = apply_pass(&net, direction, budget)?;
    let n = net.neurons.len();
    let eta_ns = (direction == Direction::S2m).then(|| eta(budget as usize));
    let mut accounting = TrialAccounting {
        trial: index,
        trial_seed: tcfg.seed,
        neurons: n,
        budget,
        eta: eta_ns,
        transformed_neurons: pass.network.neurons.len(),
        layers: net.layer_count(),
        transformed_layers: pass.network.layer_count(),
        max_weight: net.max_abs_weight(),
        transformed_max_weight: pass.network.max_abs_weight(),
        weight_bound: net.weight_bound,
        truncated,
        output_spikes: 0,
        causal: true,
    };

    let budget_record = |side: &str, e: Error| match e {
        Error::SpikeBudgetExceeded { neuron, step } => Ok(BudgetRecord {
            trial: index,
            trial_seed: tcfg.seed,
            network: side.to_owned(),
            neuron,
            step,
        }),
        other => Err(other),
    };

    let original = match simulate_with(&net, &inputs, &sim_options(cfg)) {
        Ok(r) => r,
        Err(e) => return Ok(TrialResult { outcome: Outcome::Budget(budget_record("original", e)?), accounting }),
    };
    let expected = original.output_trains(&net);
    accounting.output_spikes = expected.iter().map(SpikeTrain::len).sum();
    accounting.causal = causality_holds(&inputs, &expected);

    let transformed = match simulate_with(&pass.network, &inputs, &sim_options(cfg)) {
        Ok(r) => r,
        Err(e) => return Ok(TrialResult { outcome: Outcome::Budget(budget_record("transformed", e)?), accounting }),
    };

    let failure = |output: usize, actual: SpikeTrain, note: Option<String>| FailureRecord {
        trial: index,
        trial_seed: tcfg.seed,
        output,
        neuron: net.output_neurons[output].clone(),
        first_divergent_step: first_divergence(&expected[output], &actual),
        discrepancy: discrepancy(&expected[output], &actual),
        expected: expected[output].clone(),
        actual,
        note,
    };
    let decoded = match pass.decode(&transformed) {
        Ok(d) => d,
        Err(e) => {
            let records = vec![failure(0, SpikeTrain::empty(), Some(e.to_string()))];
            return Ok(TrialResult { outcome: Outcome::Mismatch(records), accounting });
        }
    };
    let records: Vec<FailureRecord> = decoded
        .into_iter()
        .enumerate()
        .filter(|(k, actual)| *actual != expected[*k])
        .map(|(k, actual)| failure(k, actual, None))
        .collect();
    let outcome = if records.is_empty() { Outcome::Match } else { Outcome::Mismatch(records) };
    Ok(TrialResult { outcome, accounting })
}

fn audit(direction: Direction, accounting: &[TrialAccounting]) -> AuditSummary {
    let mut a = AuditSummary { eta_bound_ok: (direction == Direction::S2m).then_some(0), ..AuditSummary::default() };
    for t in accounting {
        let bound_ok = match direction {
            Direction::M2s => t.transformed_neurons <= t.budget as usize * t.neurons,
            Direction::S2m => {
                let eta = t.eta.unwrap_or(0);
                let ns = t.budget as f64;
                let eta_ok = eta <= t.budget as u64 && (eta as f64) < square_free_density() * ns + ns.sqrt();
                a.eta_bound_ok = a.eta_bound_ok.map(|c| c + usize::from(eta_ok));
                // homogeneous single-spike networks: every neuron becomes eta(N) neurons
                t.transformed_neurons == eta as usize * t.neurons
            }
        };
        a.count_bound_ok += usize::from(bound_ok);
        a.layers_preserved += usize::from(t.layers == t.transformed_layers);
        a.weight_bound_ok +=
            usize::from(t.transformed_max_weight <= t.max_weight && t.transformed_max_weight <= t.weight_bound);
        a.causal += usize::from(t.causal);
        a.truncated += usize::from(t.truncated);
        a.active += usize::from(t.output_spikes > 0);
        a.output_spikes += t.output_spikes;
    }
    a
}

fn run_check(cfg: &GenConfig, direction: Direction) -> Result<EquivalenceReport> {
    cfg.validate()?;
    let run = |i: usize| run_trial(cfg, direction, i);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<TrialResult>> = {
        use rayon::prelude::*;
        (0..cfg.trials).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<TrialResult>> = (0..cfg.trials).map(run).collect();

    let mut report = EquivalenceReport::new(direction, cfg);
    let mut accounting = Vec::with_capacity(cfg.trials);
    for r in results {
        let r = r?;
        match r.outcome {
            Outcome::Match => report.exact_matches += 1,
            Outcome::Mismatch(records) => {
                report.failed_trials += 1;
                report.failures.extend(records);
            }
            Outcome::Budget(b) => report.budget_violations.push(b),
        }
        accounting.push(r.accounting);
    }
    report.audit = audit(direction, &accounting);
    report.accounting = accounting;
    Ok(report)
}

/// Multi-spike networks against their single-spike replica networks.
pub fn check_m2s(cfg: &GenConfig) -> Result<EquivalenceReport> {
    let cfg = GenConfig { kind: NeuronKind::Multi, ..cfg.clone() };
    run_check(&cfg, Direction::M2s)
}

/// Single-spike networks against their multi-spike population networks.
pub fn check_s2m(cfg: &GenConfig) -> Result<EquivalenceReport> {
    let cfg = GenConfig { kind: NeuronKind::Single, ..cfg.clone() };
    run_check(&cfg, Direction::S2m)
}

/// Where the sample inputs of an approximation-error comparison come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSource {
    /// Bernoulli trains at the configured density.
    Bernoulli,
    /// Uniform features in `[0, 1]` passed through an encoder. Latency coding
    /// uses half the horizon as `t_max`; rate coding scales features by the
    /// configured input density.
    Encoded(Encoder),
}

/// Target function used as the reference `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// The original network itself.
    Original,
    /// A copy of the original with every weight shifted by a uniform amount in
    /// `[-jitter, jitter]`, clamped to the weight bound.
    Perturbed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonConfig {
    pub gen: GenConfig,
    pub direction: Direction,
    pub decoder: Decoder,
    pub ps: Vec<f64>,
    /// Inputs drawn per (network, reference) pair.
    pub samples: usize,
    pub source: InputSource,
    pub reference: Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCase {
    pub trial: usize,
    pub p: f64,
    /// Distance between the decoded reference and the decoded original.
    pub original: f64,
    /// Distance between the decoded reference and the decoded transform.
    pub transformed: f64,
    /// Spikes emitted by the original's outputs over all samples.
    pub output_spikes: usize,
}

fn perturbed(net: &NetworkSpec, jitter: f64, seed: u64) -> NetworkSpec {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x7065_7274);
    let mut f = net.clone();
    for s in &mut f.synapses {
        let shift = if jitter > 0.0 { rng.gen_range(-jitter..=jitter) } else { 0.0 };
        s.weight = (s.weight + shift).clamp(-net.weight_bound, net.weight_bound);
    }
    f
}

fn sample_inputs(cfg: &EpsilonConfig, tcfg: &GenConfig) -> Result<Vec<Vec<SpikeTrain>>> {
    match cfg.source {
        InputSource::Bernoulli => Ok((0..cfg.samples)
            .map(|s| random_inputs(&GenConfig { seed: tcfg.trial_seed(s), ..tcfg.clone() }))
            .collect()),
        InputSource::Encoded(enc) => random_features(tcfg, cfg.samples)
            .into_iter()
            .map(|x| match enc {
                Encoder::Latency => enc.encode(&x, tcfg.horizon / 2),
                Encoder::Rate => {
                    let rates: Vec<f64> = x.iter().map(|v| v * tcfg.input_density).collect();
                    enc.encode(&rates, tcfg.horizon)
                }
            })
            .collect(),
    }
}

/// Approximation error of the original and of its transform against a common
/// reference, for each trial and each `p`.
pub fn epsilon_transfer(cfg: &EpsilonConfig) -> Result<Vec<EpsilonCase>> {
    let gen = GenConfig {
        kind: match cfg.direction {
            Direction::M2s => NeuronKind::Multi,
            Direction::S2m => NeuronKind::Single,
        },
        ..cfg.gen.clone()
    };
    gen.validate()?;
    let run = |i: usize| epsilon_trial(cfg, &gen, i);
    #[cfg(feature = "parallel")]
    let per_trial: Vec<Result<Vec<EpsilonCase>>> = {
        use rayon::prelude::*;
        (0..gen.trials).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_trial: Vec<Result<Vec<EpsilonCase>>> = (0..gen.trials).map(run).collect();
    let mut out = Vec::new();
    for cases in per_trial {
        out.extend(cases?);
    }
    Ok(out)
}

fn epsilon_trial(cfg: &EpsilonConfig, gen: &GenConfig, index: usize) -> Result<Vec<EpsilonCase>> {
    let tcfg = gen.for_trial(index);
    let net = random_network(&tcfg);
    let budget = sample_budget(&tcfg);
    let reference = match cfg.reference {
        Reference::Original => net.clone(),
        Reference::Perturbed(jitter) => perturbed(&net, jitter, tcfg.seed),
    };
    let single_budget = (cfg.direction == Direction::S2m).then_some(budget);
    let pass = apply_pass(&net, cfg.direction, budget)?;
    let opts = sim_options(gen);

    let (mut dec_ref, mut dec_orig, mut dec_trans) = (Vec::new(), Vec::new(), Vec::new());
    let mut output_spikes = 0;
    for raw in sample_inputs(cfg, &tcfg)? {
        let (inputs, _) = fit_to_budget(&raw, |inp| {
            let a = budget_overrun(&net, inp, &opts, single_budget)?;
            let b = budget_overrun(&reference, inp, &opts, None)?;
            Ok(a.into_iter().chain(b).min())
        })?;
        let r = simulate_with(&reference, &inputs, &opts)?.output_trains(&reference);
        let o = simulate_with(&net, &inputs, &opts)?.output_trains(&net);
        let t = pass.decode(&simulate_with(&pass.network, &inputs, &opts)?)?;
        output_spikes += o.iter().map(SpikeTrain::len).sum::<usize>();
        dec_ref.push(cfg.decoder.decode(&r, net.dt));
        dec_orig.push(cfg.decoder.decode(&o, net.dt));
        dec_trans.push(cfg.decoder.decode(&t, net.dt));
    }
    cfg.ps
        .iter()
        .map(|&p| {
            Ok(EpsilonCase {
                trial: index,
                p,
                original: lp_error(&dec_ref, &dec_orig, p)?,
                transformed: lp_error(&dec_ref, &dec_trans, p)?,
                output_spikes,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(steps: &[Step]) -> SpikeTrain {
        SpikeTrain::new(steps.to_vec()).unwrap()
    }

    #[test]
    fn causality_examples() {
        assert!(causality_holds(&[t(&[2, 6])], &[t(&[3])]));
        assert!(!causality_holds(&[t(&[2])], &[t(&[2, 9])]));
        assert!(causality_holds(&[t(&[2])], &[t(&[]), t(&[])]));
        assert!(!causality_holds(&[t(&[])], &[t(&[1])]));
    }

    #[test]
    fn discrepancy_metric() {
        assert_eq!(discrepancy(&t(&[1, 5]), &t(&[1, 5])), 0.0);
        assert_eq!(discrepancy(&t(&[1, 5]), &t(&[2, 9])), 4.0);
        assert_eq!(discrepancy(&t(&[1]), &t(&[1, 2])), f64::INFINITY);
        assert_eq!(first_divergence(&t(&[1, 5]), &t(&[1, 7])), Some(5));
        assert_eq!(first_divergence(&t(&[1]), &t(&[1, 2])), Some(2));
        assert_eq!(first_divergence(&t(&[4]), &t(&[4])), None);
    }

    #[test]
    fn fitting_keeps_a_prefix() {
        let inputs = vec![t(&[1, 3, 5, 7]), t(&[2, 8])];
        // pretend every spike at or after step 5 overruns at step 6
        let (fit, cut) = fit_to_budget(&inputs, |inp| {
            Ok(inp.iter().filter_map(SpikeTrain::last).max().filter(|&s| s >= 5).map(|_| 6))
        })
        .unwrap();
        assert!(cut);
        assert_eq!(fit, vec![t(&[1, 3]), t(&[2])]);
    }

    #[test]
    fn small_checks_pass() {
        let cfg = GenConfig { seed: 5, trials: 40, ..GenConfig::default() };
        let m = check_m2s(&cfg).unwrap();
        assert_eq!(m.exact_matches, 40, "{:?}", m.failures.first());
        let s = check_s2m(&cfg).unwrap();
        assert_eq!(s.exact_matches, 40, "{:?}", s.failures.first());
        assert_eq!(s.audit.count_bound_ok, 40);
    }

    #[test]
    fn report_policy_surfaces_overruns() {
        let cfg = GenConfig {
            seed: 9,
            trials: 30,
            budget: (1, 1),
            input_density: 0.3,
            budget_policy: BudgetPolicy::Report,
            ..GenConfig::default()
        };
        let m = check_m2s(&cfg).unwrap();
        assert!(!m.budget_violations.is_empty());
        assert_eq!(m.exact_matches + m.failed_trials + m.budget_violations.len(), 30);
        assert!(m.failures.is_empty());
    }

    #[test]
    fn negative_control_diverges_only_with_leak() {
        let leaky = check_m2s(&GenConfig::negative_control(1, 0.9)).unwrap();
        assert!(leaky.failed_trials > 0);
        let plain = check_m2s(&GenConfig::negative_control(1, 1.0)).unwrap();
        assert_eq!(plain.exact_matches, plain.trials);
    }

    #[test]
    fn epsilon_with_self_reference_is_zero() {
        let cfg = EpsilonConfig {
            gen: GenConfig { seed: 2, trials: 5, ..GenConfig::default() },
            direction: Direction::M2s,
            decoder: Decoder::Count,
            ps: vec![1.0, f64::INFINITY],
            samples: 3,
            source: InputSource::Bernoulli,
            reference: Reference::Original,
        };
        for case in epsilon_transfer(&cfg).unwrap() {
            assert_eq!((case.original, case.transformed), (0.0, 0.0));
        }
    }
}
