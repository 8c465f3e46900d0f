//! Command-line front end. [`run`] is the whole program minus process exit.
//!
//! Exit codes: 0 all checks pass, 1 some check failed, 2 usage or parse
//! error, 3 computation error.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::conformal::Invariant;
use crate::error::Error;
use crate::report::{write_report, ResidualReport};
use crate::scalar::CoefficientMode;
use crate::scenario::{generate_random, parse_scenario, ScenarioSpec};
use crate::suite::{self, SuiteOptions};
use crate::with_mode;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "confhyp", version, about = "Conformal hypersurface invariants from metric jets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Coefficient arithmetic; defaults to the scenario's own mode.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<CoefficientMode>,
    /// Leave the timestamp and elapsed time out of the report.
    #[arg(long)]
    pub no_timestamp: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Probe seed; defaults to the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    /// Largest normal order perturbed; defaults to the adapted jet order.
    #[arg(long)]
    pub max_order: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extrinsic invariants and curvature stack at the base point.
    Report {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Identity, weight-law and reduce-to suites.
    Verify {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Transverse-order probe of named invariants (n, II, H, IIo, III, IV).
    Probe {
        scenario: PathBuf,
        #[arg(long, required = true, value_delimiter = ',')]
        invariant: Vec<String>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Improve the defining function to an asymptotic unit one.
    Improve {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Emit a seeded random scenario file.
    Generate {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_mode, default_value = "float")]
        mode: CoefficientMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Candidate terms of the m-th conformal fundamental form.
    Enumerate {
        #[arg(long, required = true, num_args = 1.., value_parser = clap::value_parser!(u32).range(3..))]
        m: Vec<u32>,
        /// Exponent bound for the search that flags unexpected solutions.
        #[arg(long, default_value_t = 8)]
        bound: u32,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_mode(s: &str) -> std::result::Result<CoefficientMode, String> {
    s.parse().map_err(|_| format!("expected `float` or `exact`, got `{s}`"))
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Computation(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::InvalidField { .. } | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            e => Failure::Computation(e),
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::FourthFormExcluded => "fourth_form_excluded",
        Error::OrderUnderflow(_) => "order_underflow",
        Error::NotPositiveDefinite => "not_positive_definite",
        Error::NotADefiningFunction(_) => "not_a_defining_function",
        Error::DegenerateConormal => "degenerate_conormal",
        Error::DimensionTooSmall(..) | Error::WeylDimension | Error::CottonUndefined => "dimension",
        _ => "computation",
    }
}

fn load(path: &Path) -> Result<ScenarioSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn with_mode_override(mut spec: ScenarioSpec, mode: Option<CoefficientMode>) -> ScenarioSpec {
    if let Some(m) = mode {
        spec.mode = m;
    }
    spec
}

fn options(spec: &ScenarioSpec, p: &ProbeArgs) -> SuiteOptions {
    SuiteOptions {
        trials: p.trials,
        seed: p.seed.unwrap_or(spec.seed),
        max_order: p.max_order,
    }
}

/// Reports plus the output settings they share.
fn execute(cli: Cli) -> Result<(Vec<ResidualReport>, Option<PathBuf>, bool), Failure> {
    match cli.command {
        Command::Report { scenario, common } => {
            let spec = with_mode_override(load(&scenario)?, common.mode);
            let r = timed(|| with_mode!(spec.mode, S => suite::summary::<S>(&spec)))?;
            Ok((vec![r], common.out, common.no_timestamp))
        }
        Command::Verify {
            scenarios,
            common,
            probe,
        } => {
            let mut out = Vec::new();
            for path in &scenarios {
                let spec = with_mode_override(load(path)?, common.mode);
                let opts = options(&spec, &probe);
                out.push(timed(|| with_mode!(spec.mode, S => suite::verify::<S>(&spec, &opts)))?);
            }
            Ok((out, common.out, common.no_timestamp))
        }
        Command::Probe {
            scenario,
            invariant,
            common,
            probe,
        } => {
            let invariants = invariant
                .iter()
                .map(|s| s.parse::<Invariant>())
                .collect::<crate::Result<Vec<_>>>()?;
            let spec = with_mode_override(load(&scenario)?, common.mode);
            let opts = options(&spec, &probe);
            let r = timed(|| with_mode!(spec.mode, S => suite::probe::<S>(&spec, &invariants, &opts)))?;
            Ok((vec![r], common.out, common.no_timestamp))
        }
        Command::Improve { scenario, common } => {
            let spec = with_mode_override(load(&scenario)?, common.mode);
            let r = timed(|| with_mode!(spec.mode, S => suite::improve::<S>(&spec)))?;
            Ok((vec![r], common.out, common.no_timestamp))
        }
        Command::Enumerate { m, bound, common } => {
            let start = Instant::now();
            let mut r = suite::enumerate(&m, bound)?;
            stamp(&mut r, start);
            Ok((vec![r], common.out, common.no_timestamp))
        }
        Command::Generate { .. } => unreachable!("handled by run"),
    }
}

fn timed(f: impl FnOnce() -> crate::Result<ResidualReport>) -> crate::Result<ResidualReport> {
    let start = Instant::now();
    let mut r = f()?;
    stamp(&mut r, start);
    Ok(r)
}

fn stamp(r: &mut ResidualReport, start: Instant) {
    r.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    r.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
}

fn write_out(path: Option<&Path>, text: &str, outcome: &mut Outcome) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            outcome.stdout.push_str(text);
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut outcome = Outcome {
        code: EXIT_PASS,
        stdout: String::new(),
        stderr: String::new(),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                outcome.stderr = text;
                outcome.code = EXIT_USAGE;
            } else {
                outcome.stdout = text;
            }
            return outcome;
        }
    };
    let result = match cli.command {
        Command::Generate {
            dim,
            order,
            seed,
            mode,
            ref out,
        } => generate_random(dim, order, seed, mode)
            .map_err(Failure::from)
            .and_then(|spec| write_out(out.as_deref(), &spec.to_text(), &mut outcome)),
        _ => execute(cli).and_then(|(reports, out, no_timestamp)| {
            let mut text = String::new();
            for mut r in reports {
                if no_timestamp {
                    r.timestamp = None;
                    r.elapsed_ms = None;
                }
                for f in &r.failures {
                    outcome.stderr.push_str(&format!("FAIL {f}\n"));
                }
                if !r.passed() {
                    outcome.code = EXIT_CHECK_FAILED;
                }
                text.push_str(&write_report(&r));
            }
            write_out(out.as_deref(), &text, &mut outcome)
        }),
    };
    match result {
        Ok(()) => {}
        Err(Failure::Usage(msg)) => {
            outcome.code = EXIT_USAGE;
            outcome.stderr.push_str(&format!("error kind=usage: {msg}\n"));
        }
        Err(Failure::Computation(e)) => {
            outcome.code = EXIT_COMPUTATION;
            outcome.stderr.push_str(&format!("error kind={}: {e}\n", error_kind(&e)));
        }
    }
    outcome
}
