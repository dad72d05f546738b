//! The `verify` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::verifier::{run_suites_with, Evaluators, Execution, ModeSelect, Report, SampleConfig, Suite};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Identity1,
    Identity2,
    Dilcher,
    /// Product expansion and telescoping lemmas.
    Lemmas,
    Cauchy,
    /// q-Rice summand and residue checks (plus the cross-mode check in `both` mode).
    Qrice,
    All,
}

impl Command {
    pub fn suites(self, mode: ModeSelect) -> Vec<Suite> {
        match self {
            Command::Identity1 => vec![Suite::Identity1],
            Command::Identity2 => vec![Suite::Identity2],
            Command::Dilcher => vec![Suite::Dilcher],
            Command::Lemmas => vec![Suite::ProductLemma, Suite::Telescoping],
            Command::Cauchy => vec![Suite::Cauchy],
            Command::Qrice if mode == ModeSelect::Both => vec![Suite::QriceConsistency, Suite::CrossMode],
            Command::Qrice => vec![Suite::QriceConsistency],
            Command::All => vec![Suite::All],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Series,
    Both,
}

impl From<ModeArg> for ModeSelect {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => ModeSelect::Exact,
            ModeArg::Series => ModeSelect::Series,
            ModeArg::Both => ModeSelect::Both,
        }
    }
}

/// Exact verification of the two identities and their q-Rice proof steps.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
pub struct Cli {
    /// Suite to run.
    #[arg(value_enum)]
    pub command: Command,

    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub n_max: u32,

    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub m_max: u32,

    /// Series truncation order Q (series are exact modulo q^(Q+1)).
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    pub trunc: u32,

    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub trials: u32,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Largest denominator of sampled rationals.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(2..))]
    pub denominator_bound: u64,

    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,

    /// Write the report here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// No summary on standard error.
    #[arg(long, short, conflicts_with = "verbose")]
    pub quiet: bool,

    /// List every failing check on standard error.
    #[arg(long, short)]
    pub verbose: bool,

    /// Run checks on a single thread.
    #[arg(long)]
    pub sequential: bool,
}

impl Cli {
    pub fn config(&self) -> SampleConfig {
        SampleConfig {
            seed: self.seed,
            trials: self.trials as usize,
            n_max: self.n_max as usize,
            m_max: self.m_max as usize,
            order: self.trunc as usize,
            denominator_bound: self.denominator_bound,
            mode: self.mode.into(),
        }
    }
}

fn write_report(report: &Report, sink: &mut dyn Write) -> std::io::Result<()> {
    let mut out = BufWriter::new(sink);
    report.write_ndjson(&mut out)?;
    out.flush()
}

/// Parses `args` (including the program name), runs the selected suites and
/// returns the process exit status.
pub fn dispatch<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    run(&cli, stdout, stderr)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let config = cli.config();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let report = match run_suites_with(&cli.command.suites(config.mode), &config, &Evaluators::default(), exec) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };

    let written = match &cli.output {
        Some(path) => File::create(path).and_then(|mut f| write_report(&report, &mut f)),
        None => write_report(&report, stdout),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return EXIT_INTERNAL;
    }

    if cli.verbose {
        for f in report.failures() {
            let detail = f.error.clone().unwrap_or_else(|| "sides differ".to_string());
            let _ = writeln!(stderr, "FAIL {}/{} {:?} trial {:?}: {detail}", f.suite, f.check, f.params, f.trial);
        }
    }
    if !cli.quiet {
        let _ = writeln!(
            stderr,
            "{}: {} passed, {} failed",
            if report.overall { "PASS" } else { "FAIL" },
            report.pass_count,
            report.fail_count
        );
    }
    if report.overall {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
