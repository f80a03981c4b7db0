use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fueter_lab::{calibrate::calibrate, list_experiments, run, CliError, ConstantsFile};

#[derive(Parser)]
#[command(name = "fueter-lab", version, about = "Fueter operator and bubbling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a TOML config.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiments with one-line descriptions.
    List,
    /// Recompute the constants file used as defaults.
    Calibrate {
        #[arg(long, default_value = "configs/constants.toml")]
        out: PathBuf,
        /// Compare with the existing file instead of writing it; exit 1 on a difference.
        #[arg(long)]
        check: bool,
    },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::List => {
            for e in list_experiments() {
                println!("{:<20} {}", e.name, e.description);
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out } => match run(&config, out.as_deref()) {
            Ok(s) => {
                for c in &s.checks {
                    println!("{} {}: {} (expected {})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.expected);
                }
                println!("report written to {}", s.out_dir.join("report.json").display());
                ExitCode::from(s.status.code() as u8)
            }
            Err(e) => fail(e),
        },
        Command::Calibrate { out, check } => {
            let fresh = match calibrate() {
                Ok(f) => f,
                Err(e) => return fail(e),
            };
            let text = fresh.to_text();
            if check {
                let current = match ConstantsFile::load(&out) {
                    Ok(f) => f,
                    Err(e) => return fail(e),
                };
                if current == fresh {
                    println!("{} is up to date", out.display());
                    return ExitCode::SUCCESS;
                }
                println!("{} differs from a fresh calibration:\n{text}", out.display());
                return ExitCode::from(1);
            }
            if let Err(e) = std::fs::write(&out, &text) {
                eprintln!("error: {}: {e}", out.display());
                return ExitCode::from(2);
            }
            print!("{text}");
            ExitCode::SUCCESS
        }
    }
}
