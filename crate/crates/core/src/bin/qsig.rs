use clap::{Parser, Subcommand};
use qsig::cli::{self, CliError, EmitFormat, Objective};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qsig",
    about = "Dynamic queue equilibria and optimal public signaling"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate throughput or makespan at one belief.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated rational coordinates, e.g. "2/5,3/5".
        #[arg(long)]
        belief: String,
        /// "throughput" or "makespan".
        #[arg(long)]
        objective: String,
    },
    /// Sweep the objective over the belief segment (two scenarios).
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        objective: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// "csv" or "svg".
        #[arg(long, default_value = "csv")]
        emit: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a (1 − eps)-optimal signaling scheme.
    Fptas {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        eps: String,
        /// Scheme document output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-read the emitted scheme and re-check it exactly.
        #[arg(long)]
        verify: bool,
    },
    /// Bracket the optimal throughput additively via the dual.
    Dual {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        eps: String,
    },
    /// Check that full information minimizes the expected makespan
    /// against randomly sampled schemes.
    MakespanCheck {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a scheme document against its instance.
    VerifyScheme {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_or_print(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Evaluate {
            instance,
            belief,
            objective,
        } => {
            let objective: Objective = objective.parse()?;
            let report = cli::cmd_evaluate(&read(&instance)?, &belief, objective)?;
            print!("{report}");
            Ok(())
        }
        Command::Sweep {
            instance,
            objective,
            samples,
            emit,
            out,
        } => {
            let objective: Objective = objective.parse()?;
            let emit: EmitFormat = emit.parse()?;
            let content = cli::cmd_sweep(&read(&instance)?, objective, samples, emit)?;
            write_or_print(out.as_ref(), &content)
        }
        Command::Fptas {
            instance,
            eps,
            out,
            verify,
        } => {
            let text = read(&instance)?;
            let (report, doc) = cli::cmd_fptas(&text, &eps)?;
            print!("{report}");
            write_or_print(out.as_ref(), &doc)?;
            if verify {
                let doc_text = match out.as_ref() {
                    Some(path) => read(path)?,
                    None => doc,
                };
                let check = cli::cmd_verify_scheme(&text, &doc_text)?;
                print!("{check}");
            }
            Ok(())
        }
        Command::Dual { instance, eps } => {
            let report = cli::cmd_dual(&read(&instance)?, &eps)?;
            print!("{report}");
            Ok(())
        }
        Command::MakespanCheck {
            instance,
            trials,
            seed,
        } => {
            let report = cli::cmd_makespan_check(&read(&instance)?, trials, seed)?;
            print!("{report}");
            Ok(())
        }
        Command::VerifyScheme { instance, scheme } => {
            let report = cli::cmd_verify_scheme(&read(&instance)?, &read(&scheme)?)?;
            print!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            // keep help/version on stdout with success, real usage errors fail as input errors
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
