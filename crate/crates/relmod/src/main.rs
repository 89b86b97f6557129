//! Command-line front end for relational-model diagnosis and fitting.

use clap::{Args, Parser, Subcommand, ValueEnum};
use relmod::fit::{Algorithm, ExtendedMode, FitError, FitOptions};
use relmod::io::{self, IoError};
use relmod::model::{ModelMatrix, Observed};
use relmod::oracle::OracleOptions;
use relmod::transform::{self, TransformError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "relmod", version, about = "Relational models: diagnosis, transformation and maximum likelihood fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Auto,
    Gipf,
    Gipfm,
    Both,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Auto => Algorithm::Auto,
            AlgorithmArg::Gipf => Algorithm::Gipf,
            AlgorithmArg::Gipfm => Algorithm::Gipfm,
            AlgorithmArg::Both => Algorithm::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtendedArg {
    Auto,
    On,
    Off,
}

impl From<ExtendedArg> for ExtendedMode {
    fn from(e: ExtendedArg) -> Self {
        match e {
            ExtendedArg::Auto => ExtendedMode::Auto,
            ExtendedArg::On => ExtendedMode::On,
            ExtendedArg::Off => ExtendedMode::Off,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformOp {
    AddOverall,
    RemoveOverall,
    Homogenize,
}

#[derive(Args)]
struct CommonArgs {
    /// Model file (JSON: {name, cells, matrix})
    #[arg(long)]
    model: PathBuf,
    /// Report format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ToleranceArgs {
    /// Inner subset-sum tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol_inner: f64,
    /// Outer objective tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol_outer: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Structural report: dimensions, overall effect, kernel basis, odds ratios
    Inspect {
        #[command(flatten)]
        common: CommonArgs,
        /// Optional data whose membership in the model is tested
        #[arg(long)]
        data: Option<PathBuf>,
        /// Membership tolerance on max |D log p|
        #[arg(long, default_value_t = 1e-8)]
        tol_membership: f64,
    },
    /// Maximum likelihood fit
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// Data file (JSON counts or CSV cell,count)
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[arg(long, value_enum, default_value = "auto")]
        algorithm: AlgorithmArg,
        /// Extended-MLE fallback when no positive MLE exists
        #[arg(long, value_enum, default_value = "auto")]
        extended: ExtendedArg,
    },
    /// MLE existence certification through facial sets
    Exists {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        data: PathBuf,
    },
    /// Add or remove the overall effect, or homogenize the model
    Transform {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        op: TransformOp,
    },
    /// Brute-force likelihood maximizer (desk-scale validation)
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        data: PathBuf,
        /// RNG seed for the multi-start search
        #[arg(long, default_value_t = 20240101)]
        seed: u64,
        /// Also run the main solver and report the disagreement
        #[arg(long)]
        compare: bool,
    },
}

const EXIT_NO_POSITIVE_MLE: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Oracle(#[from] relmod::oracle::OracleError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Fit(FitError::NoPositiveMLE) => EXIT_NO_POSITIVE_MLE,
            CliError::Fit(FitError::InnerNoConvergence { .. })
            | CliError::Fit(FitError::OuterNoBracket)
            | CliError::Fit(FitError::OuterNoConvergence { .. }) => EXIT_NO_CONVERGENCE,
            _ => 1,
        }
    }
}

fn load(common: &CommonArgs) -> Result<ModelMatrix, CliError> {
    Ok(io::read_model(&common.model)?)
}

fn load_data(model: &ModelMatrix, path: &Path) -> Result<Observed, CliError> {
    Ok(io::read_counts(path, model.space())?)
}

fn emit(
    value: &serde_json::Value,
    common: &CommonArgs,
    table: impl Fn(&serde_json::Value) -> String,
) -> Result<(), CliError> {
    match common.format {
        Format::Json => io::write_or_print(value, common.output.as_deref())?,
        Format::Table => {
            let text = table(value);
            match &common.output {
                Some(path) => std::fs::write(path, text + "\n").map_err(|source| IoError::Write {
                    path: path.display().to_string(),
                    source,
                })?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn inspect_table(v: &serde_json::Value) -> String {
    let mut out = Vec::new();
    out.push(format!("model          {}", v["name"].as_str().unwrap_or("?")));
    out.push(format!("cells (I)      {}", v["I"]));
    out.push(format!("rows (J)       {}", v["J"]));
    out.push(format!("df (K)         {}", v["K"]));
    out.push(format!("overall effect {}", v["overall_effect"]));
    out.push(format!("saturated      {}", v["saturated"]));
    out.push("odds ratios:".to_string());
    if let Some(ratios) = v["odds_ratios"].as_array() {
        for r in ratios {
            let kind = if r["homogeneous"].as_bool().unwrap_or(false) {
                "homogeneous"
            } else {
                "non-homogeneous"
            };
            out.push(format!(
                "  {} = 1   [{kind}]",
                r["ratio"].as_str().unwrap_or("?")
            ));
        }
    }
    if v.get("membership").is_some() && !v["membership"].is_null() {
        out.push(format!(
            "membership     max |D log p| = {} (member: {})",
            v["membership"]["max_abs_residual"], v["membership"]["member"]
        ));
    }
    out.join("\n")
}

fn fit_table(v: &serde_json::Value) -> String {
    let mut out = Vec::new();
    out.push(format!("algorithm      {}", v["algorithm"].as_str().unwrap_or("?")));
    out.push(format!("gamma          {}", v["gamma"]));
    out.push(format!("converged      {}", v["converged"]));
    out.push(format!("extended       {}", v["extended"]));
    out.push(format!("p_hat          {}", v["p_hat"]));
    out.push(format!("residuals      {}", v["residuals"]));
    out.join("\n")
}

fn generic_table(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("reports are valid JSON")
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Inspect {
            common,
            data,
            tol_membership,
        } => {
            let model = load(&common)?;
            let observed = match &data {
                Some(path) => Some(load_data(&model, path)?),
                None => None,
            };
            let report = io::inspect_report(&model, observed.as_ref().map(|d| (d, tol_membership)));
            emit(&report, &common, inspect_table)
        }
        Command::Fit {
            common,
            data,
            tol,
            algorithm,
            extended,
        } => {
            let model = load(&common)?;
            let observed = load_data(&model, &data)?;
            let opts = FitOptions {
                tol_inner: tol.tol_inner,
                tol_outer: tol.tol_outer,
                algorithm: algorithm.into(),
                extended: extended.into(),
                ..FitOptions::default()
            };
            let result = relmod::fit::fit(&model, &observed, &opts)?;
            let report = io::fit_report(&model, &result);
            emit(&report, &common, fit_table)
        }
        Command::Exists { common, data } => {
            let model = load(&common)?;
            let observed = load_data(&model, &data)?;
            let report = relmod::facial::existence_check(&model, &observed);
            let value = io::exists_report(&model, &report);
            emit(&value, &common, generic_table)
        }
        Command::Transform { common, op } => {
            let model = load(&common)?;
            let value = match op {
                TransformOp::AddOverall => {
                    let transformed = transform::add_overall(&model)?;
                    io::transform_report(&model, &transformed, None)
                }
                TransformOp::RemoveOverall => {
                    let report = transform::remove_overall(&model)?;
                    io::transform_report(&model, &report.reduced, Some(&report))
                }
                TransformOp::Homogenize => {
                    let transformed = transform::homogenize(&model)?;
                    io::transform_report(&model, &transformed, None)
                }
            };
            emit(&value, &common, generic_table)
        }
        Command::Oracle {
            common,
            data,
            seed,
            compare,
        } => {
            let model = load(&common)?;
            let observed = load_data(&model, &data)?;
            let opts = OracleOptions {
                seed,
                ..OracleOptions::default()
            };
            let result = relmod::oracle::brute_force_mle(&model, &observed, &opts)?;
            let fitted = if compare {
                Some(relmod::fit::fit(&model, &observed, &FitOptions::default())?)
            } else {
                None
            };
            let value = io::oracle_report(&model, &result, fitted.as_ref());
            emit(&value, &common, generic_table)
        }
    }
}
