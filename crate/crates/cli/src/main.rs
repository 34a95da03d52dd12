//! Command-line front end for the quadratic program certifier.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 validation or analysis
//! error, 3 fixture failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use qpcert::certify::{certify_existence, solve_problem};
use qpcert::fixtures::{run_all, run_fixture};
use qpcert::galerkin::sweep;
use qpcert::problem_file::parse_problem;
use qpcert::report::{render_report, Format, RenderOptions, Report};
use qpcert::{tolerance, QpError};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_FIXTURE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qpcert", version, about = "Existence certificates for quadratic programs with convex quadratic constraints")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// Feasibility tolerance used when reporting witnesses.
    #[arg(long, global = true, default_value_t = tolerance::REPORT, value_parser = parse_tol)]
    tol: f64,

    /// Seed for the randomized searches.
    #[arg(long, global = true, default_value_t = tolerance::DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every hypothesis and report the existence verdict.
    Analyze { file: PathBuf },
    /// Compute a minimizer when existence can be certified.
    Solve { file: PathBuf },
    /// Solve the leading truncations of a sequence-space problem.
    Sweep {
        file: PathBuf,
        /// `a..b` or `a..b:step` (inclusive), or a comma-separated list.
        #[arg(long, value_parser = parse_levels)]
        levels: Levels,
    },
    /// Built-in worked examples.
    Fixtures {
        #[command(subcommand)]
        action: Option<FixtureAction>,
    },
}

#[derive(Subcommand, Debug)]
enum FixtureAction {
    /// List the fixture names
    List,
    /// Run one fixture and compare against its expected facts
    Run { name: String },
    /// Run every fixture
    RunAll,
}

#[derive(Clone, Debug)]
struct Levels(Vec<usize>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    let bad = || format!("invalid levels `{s}`: expected a..b, a..b:step or n1,n2,...");
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let levels: Vec<usize> = if let Some((a, rest)) = s.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, step)) => (num(b)?, num(step)?),
            None => (num(rest)?, 1),
        };
        let a = num(a)?;
        if step == 0 || b < a {
            return Err(bad());
        }
        (a..=b).step_by(step).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if levels.is_empty() || levels.contains(&0) || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad());
    }
    Ok(Levels(levels))
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(format!("invalid tolerance `{s}`: expected a finite nonnegative number")),
    }
}

fn exit_code(e: &QpError) -> u8 {
    match e {
        QpError::Parse { .. } | QpError::UnknownFixture(_) => EXIT_USAGE,
        _ => EXIT_INVALID,
    }
}

fn read(path: &Path) -> Result<String, (u8, String)> {
    fs::read_to_string(path).map_err(|e| (EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(String, bool), (u8, String)> {
    let opts = RenderOptions { format: cli.format.into(), tol: cli.tol };
    let lib = |e: QpError| (exit_code(&e), e.to_string());
    let load = |path: &Path| parse_problem(&read(path)?).map_err(lib);
    Ok(match &cli.command {
        Command::Analyze { file } => {
            let c = certify_existence(&load(file)?).map_err(lib)?;
            (render_report(&Report::Certificate(&c), &opts), true)
        }
        Command::Solve { file } => {
            let s = solve_problem(&load(file)?).map_err(lib)?;
            (render_report(&Report::Solve(&s), &opts), true)
        }
        Command::Sweep { file, levels } => {
            let r = sweep(&load(file)?, &levels.0).map_err(lib)?;
            (render_report(&Report::Sweep(&r), &opts), true)
        }
        Command::Fixtures { action } => match action {
            None | Some(FixtureAction::List) => (render_report(&Report::FixtureList, &opts), true),
            Some(FixtureAction::Run { name }) => {
                let r = run_fixture(name).map_err(lib)?;
                (render_report(&Report::Fixture(&r), &opts), r.passed)
            }
            Some(FixtureAction::RunAll) => {
                let rs = run_all().map_err(lib)?;
                (render_report(&Report::Fixtures(&rs), &opts), rs.iter().all(|r| r.passed))
            }
        },
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match tolerance::with_seed(cli.seed, || run(&cli)) {
        Ok((out, passed)) => {
            print!("{out}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FIXTURE)
            }
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
