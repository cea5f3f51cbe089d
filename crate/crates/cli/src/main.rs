//! `qfol`: batch reports for linear torus foliations, suspensions, local
//! models and quasifold atlases.

mod commands;
mod input;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use commands::{Options, Outcome, EXIT_INPUT};
use report::{sha256_hex, Report};

#[derive(Parser, Debug)]
#[command(name = "qfol", version, about = "Exact reports on foliations, quasifolds and their local models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem file (TOML)
    #[arg(long, global = true)]
    input: Option<String>,
    /// Word-length bound for group searches
    #[arg(long, global = true, default_value_t = 6)]
    wordlen: usize,
    /// Shadow tolerance for sign decisions
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include wall-clock timings (makes reports run-dependent)
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Rational hull of a linear foliation and its leaf-closure dimension
    Closure,
    /// Deck group of the leaf-space chart
    Deckgroup,
    /// Quasifold chart of the leaf space
    Leafspace,
    /// Whether two points lie on the same leaf
    Sameleaf,
    /// Build the suspension of a generator list
    Suspend,
    /// Verify the suspension cocycle case by case
    CheckCocycle,
    /// Replay the closedness case analysis on sampled sequences
    CheckGodement,
    /// Affine local model and its action axioms
    Localmodel,
    /// Kernel of the local-model action
    Effective,
    /// Orbit equality under a finitely generated affine group
    OrbitEq,
    /// Transition certification and structural pseudogroup of an atlas
    AtlasPseudogroup,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Closure => "closure",
            Command::Deckgroup => "deckgroup",
            Command::Leafspace => "leafspace",
            Command::Sameleaf => "sameleaf",
            Command::Suspend => "suspend",
            Command::CheckCocycle => "check-cocycle",
            Command::CheckGodement => "check-godement",
            Command::Localmodel => "localmodel",
            Command::Effective => "effective",
            Command::OrbitEq => "orbit-eq",
            Command::AtlasPseudogroup => "atlas-pseudogroup",
        }
    }
}

fn run(cli: &Cli) -> Result<(Report, i32), input::InputError> {
    let path = cli.input.as_deref().ok_or_else(|| input::InputError::Invalid {
        at: "--input".into(),
        message: "a problem file is required".into(),
    })?;
    let started = Instant::now();
    let problem = input::load(path)?;
    let opts = Options { wordlen: cli.wordlen, tolerance: cli.tolerance, seed: cli.seed };
    let outcome: Outcome = match cli.command {
        Command::Closure => commands::closure(&problem, &opts),
        Command::Deckgroup => commands::deckgroup(&problem, &opts),
        Command::Leafspace => commands::leafspace(&problem, &opts),
        Command::Sameleaf => commands::sameleaf(&problem, &opts),
        Command::Suspend => commands::suspend(&problem, &opts),
        Command::CheckCocycle => commands::check_cocycle(&problem, &opts),
        Command::CheckGodement => commands::check_godement(&problem, &opts),
        Command::Localmodel => commands::localmodel(&problem, &opts),
        Command::Effective => commands::effective(&problem, &opts),
        Command::OrbitEq => commands::orbit_eq(&problem, &opts),
        Command::AtlasPseudogroup => commands::atlas_pseudogroup(&problem, &opts),
    }?;
    let report = Report {
        command: cli.command.name().into(),
        input_sha256: sha256_hex(&problem.bytes),
        parameters: json!({ "wordlen": cli.wordlen, "tolerance": cli.tolerance, "seed": cli.seed }),
        results: outcome.results,
        verdict: outcome.verdict,
        numeric: outcome.numeric,
        timings: cli.timings.then(|| json!({ "total_ms": started.elapsed().as_secs_f64() * 1e3 })),
    };
    Ok((report, outcome.exit))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((report, code)) => {
            match cli.format {
                Format::Json => print!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
