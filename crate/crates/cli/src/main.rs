use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pss_cli::commands::{self, write_stdout, RuleTable};
use pss_cli::CliError;
use pss_core::StabilizerKind;

/// Power system stabilizer simulator.
#[derive(Debug, Parser)]
#[command(name = "pss-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write its trace CSV.
    Run {
        /// Scenario file (TOML).
        config: PathBuf,
        /// Controller to use instead of the one in the file.
        #[arg(long, value_parser = parse_kind)]
        controller: Option<StabilizerKind>,
        /// Trace CSV; multi-generator runs add `.g<index>` before the extension.
        #[arg(short, long, default_value = "trace.csv")]
        output: PathBuf,
    },
    /// Run every controller on one scenario and rank them.
    Compare {
        config: PathBuf,
        /// Directory for the five traces, report.csv and report.txt.
        #[arg(short, long, default_value = "compare-out")]
        output: PathBuf,
        /// Exit with status 5 if the expected controller ordering is not reproduced.
        #[arg(long)]
        assert_ordering: bool,
    },
    /// Print a fuzzy rule base.
    DumpRules {
        #[arg(value_enum)]
        which: RuleTable,
    },
    /// Print the reference scenario as an annotated config file.
    DumpConfigTemplate,
}

fn parse_kind(s: &str) -> Result<StabilizerKind, String> {
    s.parse::<StabilizerKind>().map_err(|e| e.to_string())
}

fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Run {
            config,
            controller,
            output,
        } => commands::run(&config, controller, &output),
        Command::Compare {
            config,
            output,
            assert_ordering,
        } => match commands::compare(&config, &output, assert_ordering) {
            Ok(outcome) => Ok(outcome.text),
            Err(CliError::Ordering { report, violations }) => {
                // The report is still useful when the ordering check fails.
                let _ = write_stdout(&report);
                Err(CliError::Ordering {
                    report: String::new(),
                    violations,
                })
            }
            Err(e) => Err(e),
        },
        Command::DumpRules { which } => Ok(commands::dump_rules(which)),
        Command::DumpConfigTemplate => Ok(commands::dump_config_template()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(text) => match write_stdout(&text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write to stdout: {e}");
                ExitCode::from(4)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
