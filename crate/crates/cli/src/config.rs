//! Flat `key = value` pipeline configuration.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a comment. Relative paths resolve against the config file's
//! directory. See the README for the full key list.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use vecmkit::johansen::JohansenCase;
use vecmkit::unitroot::DeterministicSpec;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    CsvBundle,
    Json,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" | "csv-bundle" | "csv_bundle" => Ok(OutputFormat::CsvBundle),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("unknown format '{other}' (csv-bundle, json, both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub data: PathBuf,
    /// `(series name, CSV header)`; empty loads every column.
    pub columns: Vec<(String, String)>,
    /// Series replaced by their natural logarithm (name kept).
    pub log: Vec<String>,
    pub max_lag: usize,
    pub unitroot_max_lag: usize,
    pub significance: f64,
    pub det_level: DeterministicSpec,
    pub det_diff: DeterministicSpec,
    pub johansen_case: JohansenCase,
    pub weak_exog_level: f64,
    /// `(x, y)`: both directions are tested. Defaults to the first two
    /// variables kept after the weak-exogeneity step.
    pub granger: Option<(String, String)>,
    /// Defaults to the restricted system's recommended lag.
    pub granger_lag: Option<usize>,
    /// Test on levels instead of first differences.
    pub granger_levels: bool,
    pub horizon: usize,
    /// Cholesky ordering; defaults to the restricted dataset order.
    pub ordering: Option<Vec<String>>,
    pub bootstrap_replications: usize,
    pub bootstrap_level: f64,
    pub seed: u64,
    pub portmanteau_lags: usize,
    pub arch_lags: usize,
    pub output: PathBuf,
    pub format: OutputFormat,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data: PathBuf::from("data.csv"),
            columns: Vec::new(),
            log: Vec::new(),
            max_lag: 3,
            unitroot_max_lag: 3,
            significance: 0.05,
            det_level: DeterministicSpec::DriftTrend,
            det_diff: DeterministicSpec::Drift,
            johansen_case: JohansenCase::RestrictedConstant,
            weak_exog_level: 0.10,
            granger: None,
            granger_lag: None,
            granger_levels: false,
            horizon: 9,
            ordering: None,
            bootstrap_replications: 1000,
            bootstrap_level: 0.95,
            seed: 20_240_601,
            portmanteau_lags: 10,
            arch_lags: 5,
            output: PathBuf::from("report"),
            format: OutputFormat::Both,
        }
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{key} = {value}: {why}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| bad(key, value, e))
}

fn flag(key: &str, value: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

impl PipelineConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut pairs = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().to_ascii_lowercase();
            if pairs.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }
        let mut c = PipelineConfig::default();
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let mut has_data = false;
        for (key, value) in &pairs {
            let v = value.as_str();
            match key.as_str() {
                "data" => {
                    c.data = resolve(v);
                    has_data = true;
                }
                "columns" => {
                    c.columns = list(v)
                        .into_iter()
                        .map(|item| match item.split_once(':') {
                            Some((name, header)) => (name.trim().to_string(), header.trim().to_string()),
                            None => (item.clone(), item),
                        })
                        .collect()
                }
                "log" => c.log = list(v),
                "max_lag" => c.max_lag = num(key, v)?,
                "unitroot_max_lag" => c.unitroot_max_lag = num(key, v)?,
                "significance" => c.significance = num(key, v)?,
                "det_level" => c.det_level = v.parse().map_err(|e| bad(key, v, e))?,
                "det_diff" => c.det_diff = v.parse().map_err(|e| bad(key, v, e))?,
                "johansen_case" => c.johansen_case = v.parse().map_err(|e| bad(key, v, e))?,
                "weak_exog_level" => c.weak_exog_level = num(key, v)?,
                "granger" => {
                    let names = list(v);
                    if names.len() != 2 {
                        return Err(bad(key, v, "expected two comma-separated names"));
                    }
                    c.granger = Some((names[0].clone(), names[1].clone()));
                }
                "granger_lag" => c.granger_lag = Some(num(key, v)?),
                "granger_levels" => c.granger_levels = flag(key, v)?,
                "horizon" => c.horizon = num(key, v)?,
                "ordering" => c.ordering = Some(list(v)),
                "bootstrap_replications" => c.bootstrap_replications = num(key, v)?,
                "bootstrap_level" => c.bootstrap_level = num(key, v)?,
                "seed" => c.seed = num(key, v)?,
                "portmanteau_lags" => c.portmanteau_lags = num(key, v)?,
                "arch_lags" => c.arch_lags = num(key, v)?,
                "output" => c.output = resolve(v),
                "format" => c.format = v.parse().map_err(|e| bad(key, v, e))?,
                other => return Err(CliError::config(format!("unknown key '{other}'"))),
            }
        }
        if !has_data {
            return Err(CliError::config("missing required key 'data'"));
        }
        if !pairs.contains_key("output") {
            c.output = base.join("report");
        }
        c.validate()?;
        Ok(c)
    }

    /// Checks that do not need the data; column existence is checked at load.
    pub fn validate(&self) -> Result<(), CliError> {
        let levels = [0.01, 0.05, 0.10];
        if !levels.iter().any(|l| (l - self.significance).abs() < 1e-12) {
            return Err(CliError::config(format!(
                "significance must be 0.01, 0.05 or 0.10, got {}",
                self.significance
            )));
        }
        if !(self.weak_exog_level > 0.0 && self.weak_exog_level < 1.0) {
            return Err(CliError::config("weak_exog_level must lie in (0, 1)"));
        }
        if self.horizon < 1 {
            return Err(CliError::config("horizon must be >= 1"));
        }
        if self.max_lag < 2 {
            return Err(CliError::config("max_lag must be >= 2 so a VECM has a lagged difference"));
        }
        if self.bootstrap_replications != 0 && self.bootstrap_replications < 100 {
            return Err(CliError::config("bootstrap_replications must be 0 (off) or >= 100"));
        }
        if !(self.bootstrap_level > 0.0 && self.bootstrap_level < 1.0) {
            return Err(CliError::config("bootstrap_level must lie in (0, 1)"));
        }
        let names: Vec<&String> = self.columns.iter().map(|(n, _)| n).collect();
        if !names.is_empty() {
            for l in &self.log {
                if !names.contains(&l) {
                    return Err(CliError::config(format!("log column '{l}' is not listed in columns")));
                }
            }
        }
        Ok(())
    }

    /// Normalized key/value echo for the report.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let join = |v: &[String]| v.join(",");
        m.insert("data".into(), self.data.display().to_string());
        m.insert(
            "columns".into(),
            self.columns
                .iter()
                .map(|(n, h)| if n == h { n.clone() } else { format!("{n}:{h}") })
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("log".into(), join(&self.log));
        m.insert("max_lag".into(), self.max_lag.to_string());
        m.insert("unitroot_max_lag".into(), self.unitroot_max_lag.to_string());
        m.insert("significance".into(), self.significance.to_string());
        m.insert("det_level".into(), self.det_level.label().into());
        m.insert("det_diff".into(), self.det_diff.label().into());
        m.insert("johansen_case".into(), self.johansen_case.label().into());
        m.insert("weak_exog_level".into(), self.weak_exog_level.to_string());
        m.insert(
            "granger".into(),
            self.granger.as_ref().map(|(a, b)| format!("{a},{b}")).unwrap_or_default(),
        );
        m.insert(
            "granger_lag".into(),
            self.granger_lag.map(|l| l.to_string()).unwrap_or_default(),
        );
        m.insert("granger_levels".into(), self.granger_levels.to_string());
        m.insert("horizon".into(), self.horizon.to_string());
        m.insert("ordering".into(), self.ordering.as_deref().map(join).unwrap_or_default());
        m.insert("bootstrap_replications".into(), self.bootstrap_replications.to_string());
        m.insert("bootstrap_level".into(), self.bootstrap_level.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("portmanteau_lags".into(), self.portmanteau_lags.to_string());
        m.insert("arch_lags".into(), self.arch_lags.to_string());
        m
    }
}
