use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use otsuki_spectra::geodesic::{profile, solve_rotation};
use otsuki_spectra::immersion::{export_mesh, MeshFormat};
use otsuki_spectra::oracle::{cross_check, dense_spectrum, resolution_warning, CrossCheck, OracleMode, TorusGrid};
use otsuki_spectra::spectrum::{
    assemble, index_report, lambda_functional, lambda_functional_closed_form, sl_grid_size, upper_bound,
};
use otsuki_spectra::{Config, Report, RotationNumber};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{fmt15, Rendered};

/// A rendered result plus whether it counts as a pass.
pub struct Outcome {
    pub rendered: Rendered,
    pub failure: Option<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn pass(rendered: Rendered) -> Self {
        Self { rendered, failure: None, warnings: Vec::new() }
    }
}

fn rotation(cfg: &RunConfig) -> Result<RotationNumber, CliError> {
    let (p, q) = cfg.rotation()?;
    Ok(RotationNumber::new(p, q)?)
}

fn spectrum_config(cfg: &RunConfig) -> Config {
    Config { grid_size: cfg.grid_size, l_max: cfg.l_max, lambda_cut: cfg.lambda_cut }
}

#[derive(Serialize)]
struct SolveReport {
    p: u32,
    q: u32,
    a: f64,
    b: f64,
    c: f64,
    t0: f64,
    omega_residual: f64,
    lambda_functional: f64,
    lambda_closed_form: f64,
    upper_bound: f64,
    pass: bool,
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = rotation(cfg)?;
    let sol = solve_rotation::<f64>(r)?;
    let tol = cfg.tolerance("omega");
    let pass = sol.omega_residual.abs() < tol;
    let rep = SolveReport {
        p: r.p(),
        q: r.q(),
        a: sol.a,
        b: sol.b,
        c: sol.c,
        t0: sol.t0,
        omega_residual: sol.omega_residual,
        lambda_functional: lambda_functional(&sol),
        lambda_closed_form: lambda_functional_closed_form(&sol)?,
        upper_bound: upper_bound(r),
        pass,
    };
    let failure = (!pass).then(|| format!("|Omega(a) - p pi/q| = {} exceeds {}", fmt15(sol.omega_residual.abs()), tol));
    Ok(Outcome { rendered: Rendered::new(&rep)?.scalar_row(), failure, warnings: Vec::new() })
}

fn certificate_rows(rep: &Report) -> Vec<Vec<String>> {
    rep.certificates
        .iter()
        .map(|c| vec![format!("\"{}\"", c.name), fmt15(c.lhs), fmt15(c.rhs), fmt15(c.margin), c.pass.to_string()])
        .collect()
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rep = index_report(rotation(cfg)?, &spectrum_config(cfg))?;
    let failure = rep.first_failure().map(|c| format!("{}: {} vs {}", c.name, fmt15(c.lhs), fmt15(c.rhs)));
    let rendered = Rendered::new(&rep)?.table(&["certificate", "lhs", "rhs", "margin", "pass"], certificate_rows(&rep));
    Ok(Outcome { rendered, failure, warnings: Vec::new() })
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = rotation(cfg)?;
    let sol = solve_rotation::<f64>(r)?;
    let n = sl_grid_size(cfg.grid_size, r.q());
    let prof = profile(&sol, n / (2 * r.q() as usize))?;
    let table = assemble(&prof, cfg.l_max, cfg.lambda_cut)?;
    let rows = table
        .entries
        .iter()
        .map(|e| {
            vec![
                e.l.to_string(),
                e.index.to_string(),
                fmt15(e.lambda),
                fmt15(e.lambda_extrapolated),
                e.exact.map(fmt15).unwrap_or_default(),
                e.multiplicity.to_string(),
                e.kept.to_string(),
                e.threshold.to_string(),
                e.zero_count.to_string(),
            ]
        })
        .collect();
    let header =
        ["l", "index", "lambda", "lambda_extrapolated", "exact", "multiplicity", "kept", "threshold", "zero_count"];
    Ok(Outcome::pass(Rendered::new(&table)?.table(&header, rows)))
}

#[derive(Serialize)]
struct CrossCheckReport {
    p: u32,
    q: u32,
    n_alpha: usize,
    n_t: usize,
    epsilon_grid: f64,
    #[serde(flatten)]
    check: CrossCheck<f64>,
    warning: Option<String>,
    modes: Vec<OracleMode<f64>>,
}

pub fn cross(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = rotation(cfg)?;
    let rep = index_report(r, &spectrum_config(cfg))?;
    let prof = profile(&rep.solution, 64)?;
    let grid = TorusGrid::new(&prof, cfg.oracle_n_alpha, cfg.oracle_n_t)?;
    let warning = resolution_warning(r.q(), cfg.oracle_n_t);
    let oracle = dense_spectrum(&prof, &grid, cfg.lambda_cut)?;
    let check = cross_check(&rep.table, &oracle, cfg.tolerance("cross_check"));
    let failure = (!check.counts_agree)
        .then(|| format!("assembled table has {} modes below 2, oracle has {}", check.table_count, check.oracle_count));
    let report = CrossCheckReport {
        p: r.p(),
        q: r.q(),
        n_alpha: grid.n_alpha,
        n_t: grid.n_t,
        epsilon_grid: oracle.epsilon_grid,
        check,
        warning: warning.clone(),
        modes: oracle.modes,
    };
    Ok(Outcome { rendered: Rendered::new(&report)?.scalar_row(), failure, warnings: warning.into_iter().collect() })
}

#[derive(Serialize)]
struct TableRow {
    p: u32,
    q: u32,
    a: f64,
    b: f64,
    t0: f64,
    #[serde(rename = "N2")]
    n2: usize,
    #[serde(rename = "Lambda")]
    lambda: f64,
    bound: f64,
    pass: bool,
}

pub fn table(cfg: &RunConfig, cases: &[(u32, u32)]) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let mut unique: Vec<(u32, u32)> = Vec::new();
    for &c in cases {
        if unique.contains(&c) {
            warnings.push(format!("duplicate case {}/{} ignored", c.0, c.1));
        } else {
            unique.push(c);
        }
    }
    let rotations = unique.iter().map(|&(p, q)| RotationNumber::new(p, q)).collect::<Result<Vec<_>, _>>()?;
    let sc = spectrum_config(cfg);
    // collect() keeps input order
    let reports: Vec<Report> = rotations.par_iter().map(|&r| index_report(r, &sc)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<TableRow> = reports
        .iter()
        .map(|rep| TableRow {
            p: rep.p,
            q: rep.q,
            a: rep.a,
            b: rep.b,
            t0: rep.t0,
            n2: rep.n2,
            lambda: rep.lambda_functional,
            bound: rep.upper_bound,
            pass: rep.pass(),
        })
        .collect();
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{}/{}", r.p, r.q)).collect();
    let csv = rows
        .iter()
        .map(|r| {
            vec![
                r.p.to_string(),
                r.q.to_string(),
                fmt15(r.a),
                fmt15(r.b),
                fmt15(r.t0),
                r.n2.to_string(),
                fmt15(r.lambda),
                fmt15(r.bound),
            ]
        })
        .collect();
    #[derive(Serialize)]
    struct Doc {
        cases: Vec<TableRow>,
    }
    let rendered =
        Rendered::new(&Doc { cases: rows })?.table(&["p", "q", "a", "b", "t0", "N2", "Lambda", "bound"], csv);
    let failure = (!failed.is_empty()).then(|| format!("certificates failed for {}", failed.join(", ")));
    Ok(Outcome { rendered, failure, warnings })
}

#[derive(Serialize)]
struct MeshReport {
    p: u32,
    q: u32,
    path: PathBuf,
    format: &'static str,
    n_alpha: usize,
    n_t: usize,
    vertices: usize,
}

pub fn mesh_format(explicit: Option<&str>, path: &Path) -> Result<MeshFormat, CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match explicit.map(str::to_ascii_lowercase).or(ext).as_deref() {
        Some("obj") => Ok(MeshFormat::Obj),
        Some("csv") | None => Ok(MeshFormat::Csv),
        Some(other) => Err(CliError::Usage(format!("unknown mesh format `{other}` (csv, obj)"))),
    }
}

pub fn export(
    cfg: &RunConfig,
    n_alpha: usize,
    n_t: usize,
    format: MeshFormat,
    path: &Path,
) -> Result<Outcome, CliError> {
    let r = rotation(cfg)?;
    let sol = solve_rotation::<f64>(r)?;
    let prof = profile(&sol, 64)?;
    let m = export_mesh(&prof, n_alpha, n_t, format, path)?;
    let rep = MeshReport {
        p: r.p(),
        q: r.q(),
        path: path.to_path_buf(),
        format: match format {
            MeshFormat::Csv => "csv",
            MeshFormat::Obj => "obj",
        },
        n_alpha,
        n_t,
        vertices: m.len(),
    };
    Ok(Outcome::pass(Rendered::new(&rep)?.scalar_row()))
}
