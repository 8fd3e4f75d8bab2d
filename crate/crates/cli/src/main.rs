mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pepsgad::Error;

use report::RunReport;

#[derive(Parser)]
#[command(name = "pepsgad", version, about = "Gadget parent Hamiltonians for PEPS: checks, sweeps and comparisons")]
struct Cli {
    /// Scenario config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set orders.n=3` or `--set epsilons=[0.02,0.01]`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Output directory for report.json, sweep.csv and timings.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasi-injectivity, generator conditions, Δ̃ independence and the parent property.
    Verify,
    /// Gap, fidelity and residual norms over the configured ε values.
    Sweep,
    /// Global against local effective spectra.
    Compare,
    /// Walkthrough of one builtin scenario.
    Demo {
        /// double-semion, toric-code or trivial; overrides `model`.
        scenario: Option<String>,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut sets = cli.sets.clone();
    let name = match &cli.command {
        Command::Verify => "verify",
        Command::Sweep => "sweep",
        Command::Compare => "compare",
        Command::Demo { scenario } => {
            if let Some(s) = scenario {
                sets.push(format!("model={s}"));
            }
            "demo"
        }
    };
    let cfg = match config::load(cli.config.as_deref(), &sets, cli.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = cli.out.clone().or_else(|| cfg.output.dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    let mut rep = RunReport { command: name.into(), scenario: serde_json::to_value(&cfg).expect("config serializes"), ..Default::default() };

    let result = match cli.command {
        Command::Verify => run::verify(&mut rep, &cfg).map(|_| None),
        Command::Sweep => run::sweep(&mut rep, &cfg).map(Some),
        Command::Compare => run::compare(&mut rep, &cfg).map(|_| None),
        Command::Demo { .. } => run::demo(&mut rep, &cfg).map(|_| None),
    };
    let (csv, code) = match result {
        Ok(csv) => {
            let code = if rep.pass() { 0 } else { EXIT_FAIL };
            (csv, code)
        }
        Err(e) => {
            let code = match &e {
                Error::Resource(_) => EXIT_RESOURCE,
                Error::InvalidSpec(_) | Error::InvalidArgument(_) | Error::Json(_) => EXIT_CONFIG,
                _ => EXIT_FAIL,
            };
            if code == EXIT_CONFIG {
                eprintln!("config error: {e}");
                return ExitCode::from(code);
            }
            rep.aborted = Some(e.to_string());
            (None, code)
        }
    };
    if let Err(e) = report::write_outputs(&out, &rep, csv.as_deref()) {
        eprintln!("cannot write {}: {e}", out.display());
        return ExitCode::from(EXIT_FAIL);
    }
    for c in &rep.checks {
        let target = c.target.map(|t| format!("{t} ± ")).unwrap_or_default();
        println!("{} {:<40} {:.3e} {} {}{:.3e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.comparison, target, c.threshold);
    }
    if let Some(a) = &rep.aborted {
        println!("ABORTED {a}");
    }
    println!("{} -> {}", if rep.pass() { "pass" } else { "fail" }, out.join("report.json").display());
    ExitCode::from(code)
}
