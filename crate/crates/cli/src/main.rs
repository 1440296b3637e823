mod commands;
mod error;
mod manifest;
mod options;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::commands::Outcome;
use crate::error::{CliError, CliResult};
use crate::manifest::{digest_inputs, digest_outputs, RunManifest, MANIFEST_NAME};
use crate::options::{merged, parse_assignment, Axis, TestKind};

#[derive(Parser)]
#[command(name = "casc", version, about = "Dynamic covariate-assisted spectral clustering")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML file of key = value settings for the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Number of groups, or `auto`.
    #[arg(long, global = true)]
    k: Option<String>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    kernel_order: Option<usize>,
    #[arg(long, global = true)]
    quantile: Option<f64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(short, long, global = true)]
    verbose: bool,
    /// Extra `key=value` settings; applied after the config file.
    #[arg(long = "set", global = true, value_parser = parse_assignment)]
    set: Vec<(String, toml::Value)>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over network size or churn.
    Simulate {
        #[arg(long)]
        axis: Option<Axis>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
    },
    /// Build the return network and cluster it.
    Cluster {
        #[arg(long)]
        returns: Option<PathBuf>,
        #[arg(long)]
        attributes: Option<PathBuf>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        step: Option<usize>,
    },
    /// Group connection tables and group centrality.
    Analyze {
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long)]
        memberships: Option<PathBuf>,
        #[arg(long)]
        attributes: Option<PathBuf>,
        #[arg(long)]
        test: Option<TestKind>,
    },
    /// Contrarian strategy per group.
    Backtest {
        #[arg(long)]
        returns: Option<PathBuf>,
        #[arg(long)]
        memberships: Option<PathBuf>,
        #[arg(long)]
        from: Option<NaiveDate>,
        #[arg(long)]
        to: Option<NaiveDate>,
        #[arg(long)]
        test: Option<TestKind>,
    },
    /// Evaluate the uniform misclustering bound.
    Bound,
    /// Re-run a recorded command and check its outputs byte for byte.
    Replay { manifest: PathBuf },
}

/// Builder for the override list.
#[derive(Default)]
struct Overrides(Vec<(String, toml::Value)>);

impl Overrides {
    fn put<V: Serialize>(&mut self, key: &str, v: Option<V>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key.to_string(), toml::Value::try_from(v).expect("flag values serialize")));
        }
        self
    }

    fn path(&mut self, key: &str, p: Option<PathBuf>) -> &mut Self {
        self.put(key, p.map(|p| p.display().to_string()))
    }
}

fn seed_of(config: &serde_json::Value) -> Option<u64> {
    config.get("seed").and_then(|s| s.as_u64())
}

fn record<T: Serialize>(name: &str, opts: &T, out: &Path, started: Instant, outcome: Outcome) -> CliResult<RunManifest> {
    let config = serde_json::to_value(opts).map_err(casc_core::Error::from)?;
    let manifest = RunManifest {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: seed_of(&config),
        config,
        inputs: digest_inputs(&outcome.inputs)?,
        outputs: digest_outputs(out, &outcome.outputs)?,
        wall_time_secs: started.elapsed().as_secs_f64(),
        summary: outcome.summary,
    };
    manifest.write(out)?;
    Ok(manifest)
}

fn execute(name: &str, config: serde_json::Value, out: &Path) -> CliResult<(serde_json::Value, Outcome)> {
    fn decode<T: DeserializeOwned>(v: serde_json::Value) -> CliResult<T> {
        serde_json::from_value(v).map_err(|e| CliError::Usage(format!("manifest config: {e}")))
    }
    let outcome = match name {
        "simulate" => commands::simulate(&decode(config.clone())?, out)?,
        "cluster" => commands::cluster(&decode(config.clone())?, out)?,
        "analyze" => commands::analyze(&decode(config.clone())?, out)?,
        "backtest" => commands::backtest(&decode(config.clone())?, out)?,
        "bound" => commands::bound(&decode(config.clone())?, out)?,
        other => return Err(CliError::Usage(format!("unknown command {other:?} in manifest"))),
    };
    Ok((config, outcome))
}

fn run(cli: Cli) -> CliResult<()> {
    let g = cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let started = Instant::now();
    let mut ov = Overrides(g.set);
    ov.put("seed", g.seed);
    let cfg = g.config.as_deref();
    let out = g.out_dir.as_path();
    match cli.command {
        Command::Simulate { axis, reps, values } => {
            ov.put("k", g.k.map(|k| k.parse::<usize>()).transpose().map_err(|_| CliError::Usage("simulate needs a numeric --k".into()))?)
                .put("eps", g.eps)
                .put("kernel_order", g.kernel_order)
                .put("axis", axis)
                .put("reps", reps)
                .put("values", values);
            let opts: options::SimulateOptions = merged(cfg, ov.0)?;
            let outcome = commands::simulate(&opts, out)?;
            record("simulate", &opts, out, started, outcome)?;
        }
        Command::Cluster { returns, attributes, window, step } => {
            ov.put("k", g.k).put("eps", g.eps).put("kernel_order", g.kernel_order).path("returns", returns).path("attributes", attributes).put("window", window).put("step", step);
            if g.verbose {
                ov.put("diagnostics", Some(true));
            }
            let opts: options::ClusterOptions = merged(cfg, ov.0)?;
            let outcome = commands::cluster(&opts, out)?;
            record("cluster", &opts, out, started, outcome)?;
        }
        Command::Analyze { network, memberships, attributes, test } => {
            ov.path("network", network).path("memberships", memberships).path("attributes", attributes).put("test", test);
            let opts: options::AnalyzeOptions = merged(cfg, ov.0)?;
            let outcome = commands::analyze(&opts, out)?;
            record("analyze", &opts, out, started, outcome)?;
        }
        Command::Backtest { returns, memberships, from, to, test } => {
            ov.put("quantile", g.quantile).path("returns", returns).path("memberships", memberships).put("from", from).put("to", to).put("test", test);
            let opts: options::BacktestOptions = merged(cfg, ov.0)?;
            let outcome = commands::backtest(&opts, out)?;
            record("backtest", &opts, out, started, outcome)?;
        }
        Command::Bound => {
            ov.put("eps", g.eps).put("kernel_order", g.kernel_order.map(|l| l as u32));
            let opts: options::BoundOptions = merged(cfg, ov.0)?;
            let outcome = commands::bound(&opts, out)?;
            record("bound", &opts, out, started, outcome)?;
        }
        Command::Replay { manifest } => {
            let recorded = RunManifest::read(&manifest)?;
            let current = digest_inputs(&recorded.inputs.iter().map(|d| PathBuf::from(&d.path)).collect::<Vec<_>>())?;
            if current != recorded.inputs {
                return Err(CliError::Core(casc_core::Error::Config("inputs changed since the recorded run".into())));
            }
            let (config, outcome) = execute(&recorded.command, recorded.config.clone(), out)?;
            let produced = digest_outputs(out, &outcome.outputs)?;
            let fresh = RunManifest {
                command: recorded.command.clone(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: seed_of(&config),
                config,
                inputs: current,
                outputs: produced.clone(),
                wall_time_secs: started.elapsed().as_secs_f64(),
                summary: outcome.summary,
            };
            if out.join(MANIFEST_NAME) != manifest {
                fresh.write(out)?;
            }
            if produced != recorded.outputs {
                let differing: Vec<&str> = recorded
                    .outputs
                    .iter()
                    .filter(|r| !produced.contains(r))
                    .map(|r| r.path.as_str())
                    .collect();
                return Err(CliError::Replay(format!("outputs differ: {}", differing.join(", "))));
            }
            println!("replayed {}: {} outputs identical", recorded.command, produced.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
