//! `otsuki`: bipolar Otsuki tori from the command line.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage error,
//! 3 numerical failure.

// `!(x > y)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_case, Format, Overrides, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "otsuki", version, about = "Bipolar Otsuki tori: geodesics, Laplace spectrum, extremal-index checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Numerator of the rotation number p/q.
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Denominator of the rotation number p/q.
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Sturm–Liouville grid size (rounded up to a multiple of 4q) [default: 2048].
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Largest Fourier index l in the assembly [default: 3].
    #[arg(long, global = true)]
    l_max: Option<u32>,
    /// Eigenvalue cut of the assembly and the oracle [default: 2.5].
    #[arg(long, global = true)]
    lambda_cut: Option<f64>,
    /// Output format [default: text; csv for `table`].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout (the mesh itself for `export-mesh`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat `key = value` config file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a named tolerance, e.g. `--tol omega=1e-10`.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the Otsuki geodesic: a, b, c, t0, Ω residual and Λ.
    Solve,
    /// Run every certificate for one rotation number.
    Verify,
    /// Print the assembled mode table below the cut.
    Spectrum,
    /// Compare the assembly with a brute-force 2-D discretisation.
    CrossCheck {
        /// Oracle grid points in α [default: 96].
        #[arg(long)]
        n_alpha: Option<usize>,
        /// Oracle grid points in t [default: 768].
        #[arg(long)]
        n_t: Option<usize>,
    },
    /// Batch summary over several rotation numbers, e.g. `table 3/5 5/8`.
    Table {
        /// Cases as p/q; falls back to `cases` in the config file.
        cases: Vec<String>,
    },
    /// Write a vertex grid of the bipolar surface (CSV or OBJ).
    ExportMesh {
        #[arg(long, default_value_t = 64)]
        n_alpha: usize,
        #[arg(long, default_value_t = 512)]
        n_t: usize,
        /// `csv` or `obj`; inferred from the --out extension when omitted.
        #[arg(long)]
        mesh_format: Option<String>,
    },
}

fn build_config(common: &Common, oracle: (Option<usize>, Option<usize>)) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    let tolerances = common
        .tol
        .iter()
        .map(|t| {
            let (k, v) =
                t.split_once('=').ok_or_else(|| CliError::Usage(format!("--tol expects NAME=VALUE, got `{t}`")))?;
            let v = v.trim().parse().map_err(|_| CliError::Usage(format!("--tol {k}: `{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect::<Result<_, CliError>>()?;
    cfg.apply_overrides(&Overrides {
        p: common.p,
        q: common.q,
        grid_size: common.grid_size,
        oracle_n_alpha: oracle.0,
        oracle_n_t: oracle.1,
        l_max: common.l_max,
        lambda_cut: common.lambda_cut,
        tolerances,
        format: common.format,
        out: common.out.clone(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let oracle = match &cli.command {
        Command::CrossCheck { n_alpha, n_t } => (*n_alpha, *n_t),
        _ => (None, None),
    };
    let cfg = build_config(&cli.common, oracle)?;
    let mut report_path = cfg.out.clone();
    let mut default_format = Format::Text;
    let outcome = match &cli.command {
        Command::Solve => commands::solve(&cfg)?,
        Command::Verify => commands::verify(&cfg)?,
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::CrossCheck { .. } => commands::cross(&cfg)?,
        Command::Table { cases } => {
            default_format = Format::Csv;
            let cases = if cases.is_empty() {
                cfg.cases.clone()
            } else {
                cases.iter().map(|c| parse_case(c)).collect::<Result<_, _>>()?
            };
            commands::table(&cfg, &cases)?
        }
        Command::ExportMesh { n_alpha, n_t, mesh_format } => {
            let path = report_path
                .take()
                .ok_or_else(|| CliError::Usage("export-mesh needs --out PATH for the mesh".into()))?;
            let format = commands::mesh_format(mesh_format.as_deref(), &path)?;
            commands::export(&cfg, *n_alpha, *n_t, format, &path)?
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let text = outcome.rendered.render(cfg.format.unwrap_or(default_format))?;
    output::emit(&text, report_path.as_deref())?;
    match outcome.failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
