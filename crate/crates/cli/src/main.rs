use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spectral_lab_cli::output::format_value;
use spectral_lab_cli::{catalog, execute, load, CliError, Options, RunReport};

#[derive(Parser)]
#[command(name = "spectral-lab", version, about = "Run spectral distribution experiments")]
struct Cli {
    /// Directory receiving results.csv and summary.json.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for concurrent cells.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Drops sizes above this bound.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { config: PathBuf },
    /// Run a bundled scenario.
    Reproduce { id: String },
    /// List bundled scenarios.
    ListScenarios,
}

fn report(r: &RunReport) {
    for rec in &r.records {
        println!(
            "{:<24} n={:<6} {:<13} {:<24} {}",
            rec.id,
            rec.n,
            rec.metric,
            format_value(rec.value),
            rec.verdict
        );
    }
    for c in &r.summary.checks {
        if let Some(t) = &c.trend {
            println!("{:<24} trend {} {}", c.label, t.kind, if t.ok { "pass" } else { "fail" });
        }
    }
    println!("{}: {}", r.summary.scenario, if r.passed() { "PASS" } else { "FAIL" });
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = Options {
        seed: cli.seed,
        workers: cli.workers,
        nmax: cli.nmax,
    };
    let result = match &cli.command {
        Command::ListScenarios => {
            for e in catalog::entries() {
                println!("{:<18} [{}] {}", e.id, e.anchor, e.description);
            }
            return ExitCode::SUCCESS;
        }
        Command::Run { config } => load(config).and_then(|s| execute(s, &options, &cli.out)),
        Command::Reproduce { id } => catalog::scenario(id).and_then(|s| execute(s, &options, &cli.out)),
    };
    match result {
        Ok(r) => {
            report(&r);
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ (CliError::Config(_) | CliError::Io { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
