mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "rydqc",
    version,
    about = "Circular Rydberg array simulations with CSV/JSON outputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config with flat keys or a `[<subcommand>]` table
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output directory; nothing is written outside it
    #[arg(long, global = true, default_value = "rydqc-out")]
    out: PathBuf,
    /// Monte-Carlo sample count
    #[arg(long, global = true)]
    samples: Option<u64>,
}

#[derive(Args, Default)]
struct SequenceArgs {
    /// built-in sequence 1, 2 or 3
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), conflicts_with = "sequence_file")]
    builtin: Option<u8>,
    /// pulse file with `time_fraction axis angle_degrees` lines
    #[arg(long)]
    sequence_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Pair interaction coefficients against separation
    Interactions,
    /// Trap-depth mismatch against lattice wavelength and its zeros
    MagicLattice,
    /// Ponderomotive Rabi frequency and its position sensitivity
    Rabi,
    /// Circular-state lifetimes in a suppressed-LDOS environment
    Lifetime,
    /// Decoupling-condition report for a pulse sequence
    CheckSequence {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long)]
        n_periods: Option<u32>,
    },
    /// Storage error of a decoupled spin chain against time
    DdStorage {
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// CZ error of a decoupled gate against gate window
    DdGate {
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Storage error with thermal atomic motion
    DdMotion {
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Ancilla blockade measurement error budget
    MeasureBudget,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Interactions => "interactions",
            Command::MagicLattice => "magic-lattice",
            Command::Rabi => "rabi",
            Command::Lifetime => "lifetime",
            Command::CheckSequence { .. } => "check-sequence",
            Command::DdStorage { .. } => "dd-storage",
            Command::DdGate { .. } => "dd-gate",
            Command::DdMotion { .. } => "dd-motion",
            Command::MeasureBudget => "measure-budget",
        }
    }

    fn sequence_args(&self) -> Option<&SequenceArgs> {
        match self {
            Command::CheckSequence { seq, .. }
            | Command::DdStorage { seq }
            | Command::DdGate { seq }
            | Command::DdMotion { seq } => Some(seq),
            _ => None,
        }
    }
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut cfg = config::validate_config(cli.command.name(), &text)?;
    if let Some(s) = cli.seed {
        cfg.set("seed", json!(s));
    }
    if let Some(n) = cli.samples {
        cfg.set("samples", json!(n));
    }
    if let Some(a) = cli.command.sequence_args() {
        if let Some(k) = a.builtin {
            cfg.set("sequence", json!(k.to_string()));
            cfg.set("sequence_file", json!(""));
        }
        if let Some(p) = &a.sequence_file {
            cfg.set("sequence_file", json!(p.to_string_lossy()));
        }
    }
    if let Command::CheckSequence {
        n_periods: Some(n), ..
    } = cli.command
    {
        cfg.set("n_periods", json!(n));
    }
    let (table, results, units) = commands::run(&mut cfg)?;
    for p in output::write_outputs(&cli.out, &cfg, &table, results, units)? {
        println!("wrote {}", p.display());
    }
    if cfg.command == "check-sequence" {
        for r in &table.rows {
            println!("condition {}: {} (residual {})", r[0], r[1], r[2]);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
