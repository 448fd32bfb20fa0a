use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use spikeshift::codecs::{Decoder, Encoder};
use spikeshift::harness::{check_m2s, check_s2m, GenConfig};
use spikeshift::ntheory::{check_eta_bounds, divisor_matrix, mobius_alpha, solve_alpha_substitution};
use spikeshift::sim::traces_table;
use spikeshift::{
    multi_to_single, simulate_with, single_to_multi_with, NetworkSpec, ResetModel, SimOptions, SpikeLimit,
    SpikeTrain, Step,
};

mod records;

#[derive(Parser)]
#[command(name = "spikeshift", version, about = "Multi-spike / single-spike network transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pass {
    M2s,
    S2m,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodeArg {
    Latency,
    Rate,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecodeArg {
    Latency,
    Count,
    FirstSpike,
}

#[derive(Subcommand)]
enum Command {
    /// Print the weight factors for order N and check them against the divisor matrix.
    Mobius {
        #[arg(long)]
        n: usize,
    },
    /// Print the square-free count up to N and the slack of each bound.
    Eta {
        #[arg(long)]
        n: usize,
    },
    /// Rewrite a network file with one of the two passes.
    Transform {
        #[arg(long, value_enum)]
        direction: Pass,
        /// Spike budget of the population neurons (s2m). For m2s, if given,
        /// every multi-spike neuron must have this budget.
        #[arg(long)]
        ns: Option<u32>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar mapping file; defaults to `<out>.map.json`.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Keep population neurons whose weight factor is zero (s2m).
        #[arg(long)]
        no_prune: bool,
    },
    /// Run a network on spike-train inputs, or on encoded feature vectors.
    Simulate {
        #[arg(long)]
        net: PathBuf,
        /// One spike train per line, one line per input channel.
        #[arg(long, conflicts_with = "data", required_unless_present = "data")]
        inputs: Option<PathBuf>,
        /// One feature vector per line, values in [0, 1].
        #[arg(long, requires = "encode")]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        encode: Option<EncodeArg>,
        /// Encoding window in steps: t_max for latency coding (default
        /// horizon / 2), the horizon for rate coding (default horizon).
        #[arg(long)]
        window: Option<Step>,
        #[arg(long, value_enum)]
        decode: Option<DecodeArg>,
        /// Write membrane traces as a tab-separated table.
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Subtract the threshold from a leaking membrane on every spike.
        #[arg(long)]
        decaying_reset: bool,
        /// Write results here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Differential check of a pass over seeded random networks.
    Verify {
        #[arg(long, value_enum)]
        pass: Pass,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Fixed spike budget; drawn from 1..=8 per trial when absent.
        #[arg(long)]
        ns: Option<u32>,
        /// Single neurons under constant drive with the decaying reset (m2s).
        /// Succeeds iff mismatches occur.
        #[arg(long)]
        negative_control: bool,
        /// Leak factor for every network (0.9 under --negative-control).
        #[arg(long)]
        leak: Option<f64>,
        #[arg(long)]
        report: PathBuf,
        /// Append per-trial accounting records to the report.
        #[arg(long)]
        per_trial: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mobius { n } => mobius(n).map(|()| true),
        Command::Eta { n } => eta(n).map(|()| true),
        Command::Transform { direction, ns, input, out, map, no_prune } => {
            transform(direction, ns, &input, &out, map, no_prune).map(|()| true)
        }
        Command::Simulate { net, inputs, data, encode, window, decode, traces, decaying_reset, out } => {
            let args = SimArgs { inputs, data, encode, window, decode, traces, decaying_reset, out };
            simulate(&net, args).map(|()| true)
        }
        Command::Verify { pass, seed, trials, ns, negative_control, leak, report, per_trial } => {
            verify(pass, seed, trials, ns, negative_control, leak, &report, per_trial)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn mobius(n: usize) -> Result<()> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let alpha = mobius_alpha(n);
    let residual = divisor_matrix(n)
        .mul_vec(&alpha.as_i64())
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - i64::from(i == 0)).abs())
        .max()
        .unwrap_or(0);
    println!("n = {n}");
    println!("alpha = [{}]", join(alpha.values()));
    println!("nonzero = {}", alpha.nonzeros());
    println!("residual = {residual}");
    println!("substitution_agrees = {}", solve_alpha_substitution(n) == alpha);
    Ok(())
}

fn eta(n: usize) -> Result<()> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let r = check_eta_bounds(n);
    let verdict = |ok: bool| if ok { "ok" } else { "VIOLATED" };
    println!("n = {n}");
    println!("eta = {}", r.eta);
    println!("density = {:.6}", r.eta as f64 / n as f64);
    println!("eta <= n: slack {} ({})", r.trivial_slack, verdict(r.trivial_holds));
    println!("eta < 6/pi^2 n + sqrt(n): slack {:.6} ({})", r.loose_slack, verdict(r.loose_holds));
    match (r.tight_slack, r.tight_holds) {
        (Some(s), Some(ok)) => println!("eta < 6/pi^2 n + sqrt(n)/2: slack {s:.6} ({})", verdict(ok)),
        _ => println!("eta < 6/pi^2 n + sqrt(n)/2: not applicable below 8"),
    }
    Ok(())
}

fn read_network(path: &Path) -> Result<NetworkSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NetworkSpec::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn transform(
    direction: Pass,
    ns: Option<u32>,
    input: &Path,
    out: &Path,
    map: Option<PathBuf>,
    no_prune: bool,
) -> Result<()> {
    let net = read_network(input)?;
    let pass = match direction {
        Pass::M2s => {
            if let Some(ns) = ns {
                if let Some(n) = net.neurons.iter().find(|n| matches!(n.spike_limit, SpikeLimit::Multi(b) if b != ns)) {
                    bail!("neuron {} has budget {}, not {ns}", n.id, n.spike_limit.budget());
                }
            }
            if no_prune {
                bail!("--no-prune only applies to s2m");
            }
            multi_to_single(&net)?
        }
        Pass::S2m => {
            let Some(ns) = ns else { bail!("s2m needs --ns") };
            if ns == 0 {
                bail!("--ns must be at least 1");
            }
            single_to_multi_with(&net, ns, !no_prune)?
        }
    };
    let map = map.unwrap_or_else(|| {
        let mut name = out.as_os_str().to_owned();
        name.push(".map.json");
        PathBuf::from(name)
    });
    fs::write(out, pass.network.to_json() + "\n").with_context(|| format!("writing {}", out.display()))?;
    fs::write(&map, pass.map_json() + "\n").with_context(|| format!("writing {}", map.display()))?;
    println!(
        "{}: {} neurons -> {} neurons, map in {}",
        input.display(),
        net.neurons.len(),
        pass.network.neurons.len(),
        map.display()
    );
    Ok(())
}

struct SimArgs {
    inputs: Option<PathBuf>,
    data: Option<PathBuf>,
    encode: Option<EncodeArg>,
    window: Option<Step>,
    decode: Option<DecodeArg>,
    traces: Option<PathBuf>,
    decaying_reset: bool,
    out: Option<PathBuf>,
}

fn simulate(net_path: &Path, args: SimArgs) -> Result<()> {
    let net = read_network(net_path)?;
    let samples: Vec<Vec<SpikeTrain>> = match (&args.inputs, &args.data) {
        (Some(path), _) => {
            let trains = records::read::<Step>(path)?
                .into_iter()
                .map(SpikeTrain::new)
                .collect::<spikeshift::Result<Vec<_>>>()?;
            vec![trains]
        }
        (None, Some(path)) => {
            let encoder = match args.encode.expect("clap requires --encode with --data") {
                EncodeArg::Latency => Encoder::Latency,
                EncodeArg::Rate => Encoder::Rate,
            };
            let window = args.window.unwrap_or(match encoder {
                Encoder::Latency => net.horizon / 2,
                Encoder::Rate => net.horizon,
            });
            records::read::<f64>(path)?
                .iter()
                .enumerate()
                .map(|(i, x)| encoder.encode(x, window).with_context(|| format!("record {i}")))
                .collect::<Result<_>>()?
        }
        (None, None) => bail!("one of --inputs or --data is required"),
    };
    if args.traces.is_some() && samples.len() != 1 {
        bail!("--traces needs exactly one input record, got {}", samples.len());
    }
    let decoder = args.decode.map(|d| match d {
        DecodeArg::Latency => Decoder::Latency,
        DecodeArg::Count => Decoder::Count,
        DecodeArg::FirstSpike => Decoder::FirstSpike,
    });
    let opts = SimOptions {
        record_traces: args.traces.is_some(),
        reset_override: args.decaying_reset.then_some(ResetModel::Decaying),
        ..SimOptions::default()
    };

    let mut lines = String::new();
    for (i, inputs) in samples.iter().enumerate() {
        let result = simulate_with(&net, inputs, &opts).with_context(|| format!("record {i}"))?;
        let outputs = result.output_trains(&net);
        let mut line = json!({ "outputs": outputs });
        if let Some(d) = decoder {
            line["decoded"] = json!(d.decode(&outputs, net.dt));
        }
        lines.push_str(&line.to_string());
        lines.push('\n');
        if let (Some(path), Some(table)) = (&args.traces, traces_table(&net, &result)) {
            fs::write(path, table).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    match &args.out {
        Some(path) => fs::write(path, lines).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{lines}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn verify(
    pass: Pass,
    seed: u64,
    trials: usize,
    ns: Option<u32>,
    negative_control: bool,
    leak: Option<f64>,
    report_path: &Path,
    per_trial: bool,
) -> Result<bool> {
    let mut cfg = if negative_control {
        if matches!(pass, Pass::S2m) {
            bail!("--negative-control applies to m2s");
        }
        GenConfig::negative_control(seed, leak.unwrap_or(0.9))
    } else {
        let mut cfg = GenConfig { seed, ..GenConfig::default() };
        if let Some(leak) = leak {
            cfg.leaks = vec![leak];
        }
        cfg
    };
    cfg.trials = trials;
    if let Some(ns) = ns {
        cfg.budget = (ns, ns);
    }
    let report = match pass {
        Pass::M2s => check_m2s(&cfg)?,
        Pass::S2m => check_s2m(&cfg)?,
    };
    fs::write(report_path, report.render(per_trial)).with_context(|| format!("writing {}", report_path.display()))?;
    println!(
        "{} seed {}: {}/{} exact, {} failed, {} budget violations, {} active",
        report.pass.as_str(),
        seed,
        report.exact_matches,
        report.trials,
        report.failed_trials,
        report.budget_violations.len(),
        report.audit.active,
    );
    let ok = if negative_control {
        report.failed_trials > 0
    } else {
        report.is_clean() && report.audits_pass()
    };
    Ok(ok)
}
