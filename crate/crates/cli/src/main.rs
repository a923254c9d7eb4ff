//! Command-line front end for the trihelix indicator library.
//!
//! Exit codes: 0 on success, 1 on validation or consistency errors
//! (including bad flag combinations), 2 on I/O errors.

mod commands;
mod error;
mod ingest;
mod report;

use clap::{Parser, Subcommand};
use commands::{BasisArg, CategoriesArg, EmitArg, MethodArg, ModeArg, PolicyArg, UnitArg};
use error::CliError;
use report::OutputFormat;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "trihelix",
    version,
    about = "Information-theoretic Triple Helix indicators from count files and address records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: OutputFormat,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Print measures at full float precision instead of 4 decimals.
    #[arg(long, global = true)]
    full_precision: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Split overlapping counts into the exclusive cells of the 2x2x2 cube.
    Decompose {
        /// Count file (year,u,i,g,ui,ug,ig,uig[,total]).
        #[arg(long)]
        input: PathBuf,
        /// How to treat Boolean-inconsistent counts.
        #[arg(long, value_enum, default_value = "strict")]
        policy: PolicyArg,
        /// Emit exclusive cells or recomposed re-ingestible counts.
        #[arg(long, value_enum, default_value = "cells")]
        emit: EmitArg,
    },
    /// Trilateral transmission per year or for a single count vector.
    Transmission {
        /// Count file (year,u,i,g,ui,ug,ig,uig[,total]).
        #[arg(long, conflicts_with = "values", required_unless_present = "values")]
        input: Option<PathBuf>,
        /// One inline vector: U,I,G,UI,UG,IG,UIG[,TOTAL].
        #[arg(long, value_name = "COUNTS")]
        values: Option<String>,
        /// None-cell handling.
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        /// Assert that every item carries at least one label, so cube mode
        /// works without a grand total.
        #[arg(long)]
        closed_domain: bool,
        #[arg(long, value_enum, default_value = "strict")]
        policy: PolicyArg,
        /// Reporting unit.
        #[arg(long, value_enum, default_value = "mbit")]
        unit: UnitArg,
    },
    /// Test a count series for systemness: Markov vs univariate-trend
    /// prediction of a target year, scored in millibits.
    Systemness {
        #[arg(long)]
        input: PathBuf,
        /// Year to predict; defaults to the last year in the file.
        #[arg(long)]
        target_year: Option<i32>,
        /// Category set, or all three side by side.
        #[arg(long, value_enum, default_value = "all")]
        categories: CategoriesArg,
        /// Univariate extrapolation method.
        #[arg(long, value_enum, default_value = "linear")]
        method: MethodArg,
        /// Fit relative frequencies or raw cell counts.
        #[arg(long, value_enum, default_value = "shares")]
        basis: BasisArg,
        #[arg(long, value_enum, default_value = "strict")]
        policy: PolicyArg,
    },
    /// Attribute addresses to University / Industry / Government sectors and
    /// tag countries.
    Classify {
        /// Record file (one JSON object per line: id, addresses[, countries]).
        #[arg(long, conflicts_with = "address", required_unless_present = "address")]
        input: Option<PathBuf>,
        /// Classify one address string instead of a file.
        #[arg(long)]
        address: Option<String>,
        /// Ruleset file; defaults to the built-in rules.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Skip malformed lines (reported on stderr) instead of aborting.
        #[arg(long)]
        skip_malformed: bool,
    },
    /// Roll labeled records up into per-subset count tables with their
    /// transmissions.
    Aggregate {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated subset names: all, international, countries or
        /// groups (UK, EU, Scandinavia).
        #[arg(long, value_delimiter = ',', default_value = "all")]
        subsets: Vec<String>,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        skip_malformed: bool,
    },
    /// Count addresses (not records) per sector label.
    Census {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        skip_malformed: bool,
    },
    /// Evaluate both pair-column readings of published subset tables against
    /// target transmissions and report the residuals.
    Interpret {
        /// Table file (name,records,pct_identified,t_target_mbit,ui,ug,ig,uig,univ,ind,gov).
        #[arg(long)]
        input: PathBuf,
    },
    /// Least-squares trend of the yearly transmission series.
    Trend {
        #[arg(long)]
        input: PathBuf,
        /// Inclusive year window FROM:TO; defaults to the whole series.
        #[arg(long, value_name = "FROM:TO")]
        window: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long)]
        closed_domain: bool,
        #[arg(long, value_enum, default_value = "strict")]
        policy: PolicyArg,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let full = cli.full_precision;
    let report = match &cli.command {
        Command::Decompose { input, policy, emit } => commands::decompose_cmd(input, *policy, *emit)?,
        Command::Transmission { input, values, mode, closed_domain, policy, unit } => commands::transmission_cmd(
            input.as_deref(),
            values.as_deref(),
            *mode,
            *closed_domain,
            *policy,
            *unit,
            full,
        )?,
        Command::Systemness { input, target_year, categories, method, basis, policy } => {
            commands::systemness_cmd(input, *target_year, *categories, *method, *basis, *policy, full)?
        }
        Command::Classify { input, address, rules, skip_malformed } => {
            commands::classify_cmd(input.as_deref(), address.as_deref(), rules.as_deref(), *skip_malformed)?
        }
        Command::Aggregate { input, subsets, rules, skip_malformed } => {
            commands::aggregate_cmd(input, subsets, rules.as_deref(), *skip_malformed, full)?
        }
        Command::Census { input, rules, skip_malformed } => {
            commands::census_cmd(input, rules.as_deref(), *skip_malformed, full)?
        }
        Command::Interpret { input } => commands::interpret_cmd(input, full)?,
        Command::Trend { input, window, mode, closed_domain, policy } => {
            commands::trend_cmd(input, window.as_deref(), *mode, *closed_domain, *policy, full)?
        }
    };
    let mut out = report::open_output(cli.output.as_deref())?;
    report.write(&mut out, cli.format)?;
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version print and succeed; real usage errors are
            // validation failures
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
