//! The `zerosum` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};

use crate::config::load_config;
use crate::report::{render_report, to_json, Command, Format, RunReport};
use crate::run::run_command;

/// Exit status for configuration and usage errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliCommand {
    /// Nash equilibrium by damped best-response iteration.
    Nash,
    /// Maximin and minimax of each group-1 player against the alien.
    Maximin,
    /// Symmetric maximin fixed point and the Nash profile built from it.
    Fixedpoint,
    /// Both directions of the maximin/Nash equivalence.
    Verify,
    /// Two-alien Cournot case where the equivalence breaks.
    Counterexample,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Nash => Command::Nash,
            CliCommand::Maximin => Command::Maximin,
            CliCommand::Fixedpoint => Command::Fixedpoint,
            CliCommand::Verify => Command::Verify,
            CliCommand::Counterexample => Command::Counterexample,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliFormat {
    Json,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "zerosum", version, about = "Zero-sum games with one alien player")]
struct Args {
    #[arg(value_enum)]
    command: CliCommand,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: CliFormat,
    /// Directory that receives the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

/// Writes `<cmd>-<unix millis>.json` and `<cmd>-latest.json`; returns the first path.
pub fn write_report(dir: &Path, report: &RunReport) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let millis = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let name = report.command.name();
    let json = to_json(report);
    let path = dir.join(format!("{name}-{millis}.json"));
    std::fs::write(&path, &json)?;
    std::fs::write(dir.join(format!("{name}-latest.json")), &json)?;
    Ok(path)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        if let Err(e) = cfg.validate() {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    }
    let report = match run_command(args.command.into(), &cfg) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let format = match args.format {
        CliFormat::Json => Format::Json,
        CliFormat::Table => Format::Table,
    };
    let _ = write!(stdout, "{}", render_report(&report, format));
    if let Some(dir) = &args.out {
        match write_report(dir, &report) {
            Ok(path) => {
                let _ = writeln!(stderr, "report written to {}", path.display());
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write report to {}: {e}", dir.display());
                return EXIT_USAGE;
            }
        }
    }
    report.verdict.exit_code()
}
