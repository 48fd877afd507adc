//! Command-line front end for the multiplayer bandit experiments.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dpe_core::harness::{
    check_lemmas, emit_plot, parse_config, run_experiment, run_sweep, summary_path, write_trace, Config,
    Experiment, LemmaCheckConfig,
};

#[derive(Parser)]
#[command(name = "dpe", version, about = "Decentralized multiplayer bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of a configuration and write the trace CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output path of the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a configuration at several horizons into one trace.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numeric checks of the concentration lemmas, as JSON.
    CheckLemmas {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truncation: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        cs: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a trace CSV as an SVG regret plot.
    EmitPlot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Slope of the reference line; defaults to the run summary's constant.
        #[arg(long)]
        reference: Option<f64>,
    },
}

/// A failure reported as `error:<kind>: <detail>` on one line.
struct Failure {
    kind: &'static str,
    detail: String,
}

fn fail(kind: &'static str, detail: impl ToString) -> Failure {
    Failure { kind, detail: detail.to_string().replace('\n', " ") }
}

fn load_config(path: &Path) -> Result<Config, Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail("io", format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| fail("config", e))
}

fn write_outputs(out: &Path, experiments: &[Experiment]) -> Result<(), Failure> {
    let io = |e: std::io::Error| fail("io", format!("{}: {e}", out.display()));
    let file = fs::File::create(out).map_err(io)?;
    write_trace(BufWriter::new(file), experiments.iter().flat_map(|e| e.rows())).map_err(|e| fail("io", e))?;
    let summaries: Vec<_> = experiments.iter().map(|e| &e.summary).collect();
    let json = match summaries.as_slice() {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    }
    .map_err(|e| fail("io", e))?;
    fs::write(summary_path(out), json + "\n").map_err(io)?;
    for exp in experiments {
        if let Some((seed, f)) = exp.faults().next() {
            return Err(fail("protocol", format!("seed {seed}: {f}")));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out } => {
            let config = load_config(&config)?;
            let out = out.unwrap_or_else(|| config.output_path.clone());
            write_outputs(&out, &[run_experiment(&config)])
        }
        Command::Sweep { config, horizons, out } => {
            let config = load_config(&config)?;
            if horizons.contains(&0) {
                return Err(fail("args", "horizons must be positive"));
            }
            let out = out.unwrap_or_else(|| config.output_path.clone());
            write_outputs(&out, &run_sweep(&config, &horizons))
        }
        Command::CheckLemmas { out, truncation, trials, horizon, cs, deltas, seed } => {
            let d = LemmaCheckConfig::default();
            let cfg = LemmaCheckConfig {
                truncation: truncation.unwrap_or(d.truncation),
                trials: trials.unwrap_or(d.trials),
                horizon: horizon.unwrap_or(d.horizon),
                cs: cs.unwrap_or(d.cs),
                deltas: deltas.unwrap_or(d.deltas),
                seed: seed.unwrap_or(d.seed),
                ..d
            };
            let report = check_lemmas(&cfg).map_err(|e| fail("lemma", e))?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| fail("io", e))?;
            fs::write(&out, json + "\n").map_err(|e| fail("io", format!("{}: {e}", out.display())))?;
            if report.all_pass {
                Ok(())
            } else {
                let failed = report.checks.iter().filter(|c| !c.pass()).count();
                Err(fail("check", format!("{failed} lemma checks failed, see {}", out.display())))
            }
        }
        Command::EmitPlot { input, out, reference } => {
            let svg = emit_plot(&input, reference).map_err(|e| fail("trace", e))?;
            fs::write(&out, svg).map_err(|e| fail("io", format!("{}: {e}", out.display())))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error:{}: {}", f.kind, f.detail);
            ExitCode::FAILURE
        }
    }
}
