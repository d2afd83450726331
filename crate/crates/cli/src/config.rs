//! Run configuration: defaults, overridden by a flat `key = value` file,
//! overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use otsuki_spectra::oracle::{DEFAULT_N_ALPHA, DEFAULT_N_T};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn from_str_ci(s: &str) -> Result<Self, CliError> {
        <Format as ValueEnum>::from_str(s, true)
            .map_err(|_| CliError::Usage(format!("unknown format `{s}` (json, csv, text)")))
    }
}

/// Named tolerances and their defaults.
pub const TOLERANCES: [(&str, f64); 2] = [
    // |Ω(a) − pπ/q| accepted by `solve`
    ("omega", 1e-11),
    // absolute floor of the pairwise oracle comparison
    ("cross_check", 1e-3),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub grid_size: usize,
    pub oracle_n_alpha: usize,
    pub oracle_n_t: usize,
    pub l_max: u32,
    pub lambda_cut: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub cases: Vec<(u32, u32)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: None,
            q: None,
            grid_size: 2048,
            oracle_n_alpha: DEFAULT_N_ALPHA,
            oracle_n_t: DEFAULT_N_T,
            l_max: 3,
            lambda_cut: 2.5,
            tolerances: TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            format: None,
            out: None,
            cases: Vec::new(),
        }
    }
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub grid_size: Option<usize>,
    pub oracle_n_alpha: Option<usize>,
    pub oracle_n_t: Option<usize>,
    pub l_max: Option<u32>,
    pub lambda_cut: Option<f64>,
    pub tolerances: Vec<(String, f64)>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Usage(format!("config: cannot parse `{key} = {value}`")))
}

/// `3/5`, `3,5` or `3:5`.
pub fn parse_case(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("cannot parse case `{s}`; expected p/q"));
    let (p, q) = s.trim().split_once(['/', ',', ':']).ok_or_else(bad)?;
    Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
}

impl RunConfig {
    /// Applies one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "p" => self.p = Some(parse(key, value)?),
            "q" => self.q = Some(parse(key, value)?),
            "grid_size" => self.grid_size = parse(key, value)?,
            "oracle_n_alpha" => self.oracle_n_alpha = parse(key, value)?,
            "oracle_n_t" => self.oracle_n_t = parse(key, value)?,
            "l_max" => self.l_max = parse(key, value)?,
            "lambda_cut" => self.lambda_cut = parse(key, value)?,
            "format" => self.format = Some(Format::from_str_ci(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "cases" => {
                self.cases = value.split_whitespace().map(parse_case).collect::<Result<_, _>>()?;
            }
            _ => match key.strip_prefix("tol.") {
                Some(name) => self.set_tolerance(name, parse(key, value)?)?,
                None => return Err(CliError::Usage(format!("config: unknown key `{key}`"))),
            },
        }
        Ok(())
    }

    pub fn set_tolerance(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        if !TOLERANCES.iter().any(|(k, _)| *k == name) {
            let known: Vec<_> = TOLERANCES.iter().map(|(k, _)| *k).collect();
            return Err(CliError::Usage(format!("unknown tolerance `{name}` (known: {})", known.join(", "))));
        }
        if !(value > 0.0) {
            return Err(CliError::Usage(format!("tolerance `{name}` must be positive")));
        }
        self.tolerances.insert(name.to_string(), value);
        Ok(())
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    /// Parses the flat config format: one `key = value` per line, `#`
    /// starts a comment, blank lines are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<(), CliError> {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        take!(grid_size, oracle_n_alpha, oracle_n_t, l_max, lambda_cut);
        if o.p.is_some() {
            self.p = o.p;
        }
        if o.q.is_some() {
            self.q = o.q;
        }
        if o.format.is_some() {
            self.format = o.format;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        for (k, v) in &o.tolerances {
            self.set_tolerance(k, *v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid_size == 0 || self.oracle_n_alpha == 0 || self.oracle_n_t == 0 {
            return Err(CliError::Usage("resolutions must be positive".into()));
        }
        if !(self.lambda_cut > 2.0) {
            return Err(CliError::Usage(format!("lambda_cut must exceed 2, got {}", self.lambda_cut)));
        }
        if self.l_max < 2 {
            return Err(CliError::Usage(format!("l_max must be at least 2, got {}", self.l_max)));
        }
        Ok(())
    }

    pub fn rotation(&self) -> Result<(u32, u32), CliError> {
        match (self.p, self.q) {
            (Some(p), Some(q)) => Ok((p, q)),
            _ => Err(CliError::Usage("--p and --q are required".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_flags_then_file_then_defaults() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\np = 3\nq = 5\nl_max = 4\nlambda_cut = 2.8\ntol.omega = 1e-10\n").unwrap();
        let o = Overrides { l_max: Some(5), ..Default::default() };
        c.apply_overrides(&o).unwrap();
        assert_eq!((c.p, c.q, c.l_max, c.lambda_cut), (Some(3), Some(5), 5, 2.8));
        assert_eq!(c.tolerance("omega"), 1e-10);
        assert_eq!(c.grid_size, 2048);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("colour = blue").is_err());
        assert!(c.apply_text("tol.nope = 1").is_err());
        assert!(c.apply_text("p three").is_err());
        c.lambda_cut = 2.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn case_syntax() {
        assert_eq!(parse_case("3/5").unwrap(), (3, 5));
        assert_eq!(parse_case(" 5,8 ").unwrap(), (5, 8));
        assert!(parse_case("35").is_err());
    }
}
