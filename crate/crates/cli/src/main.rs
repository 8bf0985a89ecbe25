use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qkdmask::harness::{
    aggregate_records, analyze_records, emit_analysis, emit_dump, emit_results, parse_dump, read_spec, read_text,
    replay_trial, run_records, write_text, ExperimentSpec, HarnessError, OutputFormat,
};

#[derive(Parser)]
#[command(name = "qkdmask", version, about = "Masked-basis QKD experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SpecArgs {
    /// Experiment spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the spec's trial count.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of a spec and emit the aggregate table.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output file; defaults to the spec's output path, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or records; defaults to the spec's output format.
        #[arg(long)]
        format: Option<OutputFormat>,
        /// Also write every session as JSON lines, keys included.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Re-run one trial and print its public transcript in wire format.
    Replay {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        trial: usize,
        #[arg(long, default_value_t = 0)]
        cell: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate Eve's information per cell from a session dump.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(args: &SpecArgs) -> Result<ExperimentSpec, HarnessError> {
    let mut spec = read_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    spec.validate()?;
    Ok(spec)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), HarnessError> {
    match out {
        Some(path) => write_text(path, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| HarnessError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { spec, out, format, dump } => {
            let spec = load(&spec)?;
            let records = run_records(&spec, dump.is_some())?;
            if let Some(path) = &dump {
                write_text(path, &emit_dump(&records))?;
            }
            let stats = aggregate_records(&records);
            let format = format.unwrap_or(spec.output.format);
            let out = out.or(spec.output.path.clone());
            emit(&emit_results(&stats, format), out.as_deref())
        }
        Command::Replay { spec, trial, cell, out } => {
            let spec = load(&spec)?;
            let outcome = replay_trial(&spec, cell, trial)?;
            emit(&outcome.transcript.to_wire(), out.as_deref())
        }
        Command::Analyze { input, out } => {
            let records = parse_dump(&read_text(&input)?)?;
            emit(&emit_analysis(&analyze_records(&records)), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Io { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
