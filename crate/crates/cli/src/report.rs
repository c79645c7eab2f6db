//! Report tables and their CSV / JSON emission.
//!
//! CSV cells carry numbers at 4 decimals; the JSON bundle keeps full
//! precision. Every number comes straight from a library result.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use vecmkit::dataset::DescriptiveStats;
use vecmkit::diagnostics::DiagnosticReport;
use vecmkit::dynamics::{FevdResult, IrfResult};
use vecmkit::johansen::JohansenResult;
use vecmkit::unitroot::UnitRootResult;
use vecmkit::varmodel::{GrangerResult, LagSelection};
use vecmkit::vecm::{LongRunVector, VecmModel, WeakExogeneityResult};

use crate::config::OutputFormat;
use crate::CliError;

/// File stems of the CSV bundle, in report order.
pub const TABLE_NAMES: [&str; 15] = [
    "table01_descriptives",
    "table02_unit_roots",
    "table03_lag_selection",
    "table04_johansen",
    "table05_vecm_unrestricted",
    "table06_vecm_restricted",
    "table07_long_run",
    "table08_granger",
    "table09_diagnostics",
    "table10_fevd",
    "appendix_a1_vecm_unrestricted_full",
    "appendix_a2_weak_exogeneity",
    "appendix_a3_vecm_restricted_full",
    "appendix_a4_lag_selection_restricted",
    "appendix_a5_johansen_restricted",
];

pub const IRF_TABLE: &str = "figure05_irf";
pub const JSON_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => csv_escape(s),
            Cell::Num(v) if v.is_nan() => "NA".into(),
            Cell::Num(v) if v.is_infinite() => if *v > 0.0 { "Inf" } else { "-Inf" }.into(),
            Cell::Num(v) => {
                let s = format!("{v:.4}");
                if s == "-0.0000" {
                    "0.0000".into()
                } else {
                    s
                }
            }
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn t(s: impl Into<String>) -> Cell {
    Cell::Text(s.into())
}

fn n(v: f64) -> Cell {
    Cell::Num(v)
}

fn i(v: usize) -> Cell {
    Cell::Int(v as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl Table {
    fn new(name: &str, title: &str, columns: Vec<String>) -> Self {
        Table {
            name: name.into(),
            title: title.into(),
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|c| csv_escape(c)).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// First row whose first cell is the text `key`.
    pub fn row(&self, key: &str) -> Option<&[Cell]> {
        self.rows
            .iter()
            .find(|r| matches!(r.first(), Some(Cell::Text(s)) if s == key))
            .map(Vec::as_slice)
    }

    pub fn number(&self, key: &str, column: &str) -> Option<f64> {
        let c = self.column(column)?;
        match self.row(key)?.get(c)? {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Completed,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub config: BTreeMap<String, String>,
    pub stages: Vec<StageRecord>,
    pub decisions: Vec<String>,
    pub tables: Vec<Table>,
    pub failure: Option<String>,
}

impl StudyReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::new("report", e.to_string()))
    }
}

/// Writes the report into `dir`; returns the files written.
pub fn emit_report(report: &StudyReport, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |e: std::io::Error, p: &Path| CliError::new("report", format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let mut written = Vec::new();
    if matches!(format, OutputFormat::CsvBundle | OutputFormat::Both) {
        for name in TABLE_NAMES {
            if let Some(table) = report.table(name) {
                let path = dir.join(format!("{name}.csv"));
                std::fs::write(&path, table.to_csv()).map_err(|e| io(e, &path))?;
                written.push(path);
            }
        }
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let path = dir.join(JSON_FILE);
        std::fs::write(&path, report.to_json()? + "\n").map_err(|e| io(e, &path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn descriptives(rows: &[(String, DescriptiveStats)]) -> Table {
    let mut tb = Table::new(
        "table01_descriptives",
        "Descriptive statistics",
        ["variable", "mean", "median", "max", "min", "sd", "obs"].map(String::from).to_vec(),
    );
    for (name, s) in rows {
        tb.rows.push(vec![t(name), n(s.mean), n(s.median), n(s.max), n(s.min), n(s.sd), i(s.n_obs)]);
    }
    tb
}

pub struct UnitRootRow {
    pub variable: String,
    pub adf_level: UnitRootResult,
    pub adf_diff: UnitRootResult,
    pub pp_level: UnitRootResult,
    pub pp_diff: UnitRootResult,
    pub order: Option<usize>,
}

pub fn unit_roots(rows: &[UnitRootRow], level: f64) -> Table {
    let cols = [
        "variable",
        "adf_level_stat",
        "adf_level_crit",
        "adf_level_lag",
        "adf_level_reject",
        "adf_diff_stat",
        "adf_diff_crit",
        "adf_diff_lag",
        "adf_diff_reject",
        "pp_level_stat",
        "pp_level_crit",
        "pp_level_bandwidth",
        "pp_level_reject",
        "pp_diff_stat",
        "pp_diff_crit",
        "pp_diff_bandwidth",
        "pp_diff_reject",
        "integration_order_pp",
    ];
    let mut tb = Table::new("table02_unit_roots", "Unit root tests", cols.map(String::from).to_vec());
    let crit = |r: &UnitRootResult| {
        if level <= 0.01 {
            r.critical_values.pct1
        } else if level <= 0.05 {
            r.critical_values.pct5
        } else {
            r.critical_values.pct10
        }
    };
    for r in rows {
        let mut row = vec![t(&r.variable)];
        for res in [&r.adf_level, &r.adf_diff, &r.pp_level, &r.pp_diff] {
            row.extend([n(res.statistic), n(crit(res)), i(res.lag_or_bandwidth), Cell::Bool(res.rejects_at(level))]);
        }
        row.push(r.order.map(i).unwrap_or(t("unsupported")));
        tb.rows.push(row);
    }
    if let Some(r) = rows.first() {
        tb.notes.push(format!(
            "critical values at {}%; levels with {} terms, differences with {} terms",
            level * 100.0,
            r.adf_level.deterministic.label(),
            r.adf_diff.deterministic.label()
        ));
    }
    tb
}

pub fn lag_selection(name: &str, title: &str, sel: &LagSelection) -> Table {
    let mut tb = Table::new(
        name,
        title,
        ["lag", "aic", "hq", "sc", "fpe", "selected_by"].map(String::from).to_vec(),
    );
    for row in &sel.table {
        let mut by = Vec::new();
        for (label, lag) in [
            ("AIC", sel.chosen.aic),
            ("HQ", sel.chosen.hq),
            ("SC", sel.chosen.sc),
            ("FPE", sel.chosen.fpe),
        ] {
            if lag == row.lag {
                by.push(label);
            }
        }
        tb.rows.push(vec![i(row.lag), n(row.aic), n(row.hq), n(row.sc), n(row.fpe), t(by.join(" "))]);
    }
    tb.notes.push(format!("recommended lag {} (modal vote); common sample {}", sel.recommended, sel.n_obs));
    tb
}

pub fn johansen(name: &str, title: &str, j: &JohansenResult, level: f64) -> Table {
    let mut tb = Table::new(
        name,
        title,
        [
            "null",
            "eigenvalue",
            "eigen_stat",
            "eigen_crit",
            "eigen_reject",
            "trace_stat",
            "trace_crit",
            "trace_reject",
        ]
        .map(String::from)
        .to_vec(),
    );
    for row in &j.rows {
        let null = if row.r == 0 { "r = 0".to_string() } else { format!("r <= {}", row.r) };
        let ec = row.eigen_critical.at(level);
        let tc = row.trace_critical.at(level);
        tb.rows.push(vec![
            t(null),
            n(row.eigenvalue),
            n(row.eigen_stat),
            n(ec),
            Cell::Bool(row.eigen_stat > ec),
            n(row.trace_stat),
            n(tc),
            Cell::Bool(row.trace_stat > tc),
        ]);
    }
    tb.notes.push(format!(
        "{} lags, {}; trace rank {} at {}%",
        j.lags,
        j.det_case.label(),
        j.rank_at(level),
        level * 100.0
    ));
    tb
}

fn coef_text(estimate: f64, stars: &str) -> String {
    if stars.is_empty() {
        format!("{estimate:.4}")
    } else {
        format!("{estimate:.4}{stars}")
    }
}

/// Every ECT and short-run coefficient per equation, with standard
/// errors, p-values and star markers.
pub fn vecm_full(name: &str, title: &str, m: &VecmModel) -> Table {
    let coef_names: Vec<String> = m.equations[0].coefficients.iter().map(|c| c.name.clone()).collect();
    let mut cols = vec!["equation".to_string()];
    for c in &coef_names {
        cols.push(c.clone());
        cols.push(format!("{c}_se"));
        cols.push(format!("{c}_p"));
        cols.push(format!("{c}_sig"));
    }
    let mut tb = Table::new(name, title, cols);
    for eq in &m.equations {
        let mut row = vec![t(format!("Δ{}", eq.variable))];
        for c in &eq.coefficients {
            row.extend([n(c.estimate), n(c.std_error), n(c.p_value), t(coef_text(c.estimate, &c.stars))]);
        }
        tb.rows.push(row);
    }
    tb.notes.push(format!(
        "rank {}, {} lagged difference(s), {}; log-likelihood {:.4}; *** 0.1%, ** 1%, * 5%, . 10%",
        m.r,
        m.p_diff,
        m.det_case.label(),
        m.log_likelihood
    ));
    tb
}

/// Own-equation ECT (equation i uses ECT i) plus the short-run terms, for
/// the first `r` equations.
pub fn vecm_own(name: &str, title: &str, m: &VecmModel) -> Table {
    let short: Vec<String> = m.equations[0]
        .coefficients
        .iter()
        .skip(m.r)
        .map(|c| c.name.clone())
        .collect();
    let mut cols = vec!["equation".to_string(), "ect".into(), "ect_se".into(), "ect_p".into(), "ect_sig".into()];
    for c in &short {
        cols.push(c.clone());
        cols.push(format!("{c}_p"));
        cols.push(format!("{c}_sig"));
    }
    let mut tb = Table::new(name, title, cols);
    for (idx, eq) in m.equations.iter().take(m.r).enumerate() {
        let ect = &eq.coefficients[idx];
        let mut row = vec![
            t(format!("Δ{}", eq.variable)),
            n(ect.estimate),
            n(ect.std_error),
            n(ect.p_value),
            t(coef_text(ect.estimate, &ect.stars)),
        ];
        for c in eq.coefficients.iter().skip(m.r) {
            row.extend([n(c.estimate), n(c.p_value), t(coef_text(c.estimate, &c.stars))]);
        }
        tb.rows.push(row);
    }
    tb.notes.push("equation i reports ECTi (the vector normalized on variable i)".into());
    tb
}

pub fn weak_exogeneity(rows: &[WeakExogeneityResult], level: f64) -> Table {
    let mut tb = Table::new(
        "appendix_a2_weak_exogeneity",
        "Weak exogeneity tests",
        ["variable", "lr_statistic", "df", "p_value", "weakly_exogenous"].map(String::from).to_vec(),
    );
    for r in rows {
        tb.rows.push(vec![
            t(&r.variable),
            n(r.lr_statistic),
            i(r.df),
            n(r.p_value),
            Cell::Bool(r.p_value >= level),
        ]);
    }
    tb.notes.push(format!("weakly exogenous when p >= {level}"));
    tb
}

pub fn long_run(vectors: &[LongRunVector]) -> Table {
    let mut cols = vec!["vector".to_string(), "normalized_on".into()];
    if let Some(v) = vectors.first() {
        cols.extend(v.coefficients.iter().map(|(name, _)| name.clone()));
    }
    cols.push("presentation".into());
    let mut tb = Table::new("table07_long_run", "Long-run cointegrating vectors", cols);
    for (idx, v) in vectors.iter().enumerate() {
        let mut row = vec![t(format!("r{}", idx + 1)), t(&v.normalization_variable)];
        row.extend(v.coefficients.iter().map(|(_, c)| n(*c)));
        row.push(t(&v.presentation));
        tb.rows.push(row);
    }
    tb
}

pub fn granger(rows: &[GrangerResult], level: f64, on: &str) -> Table {
    let mut tb = Table::new(
        "table08_granger",
        "Granger causality",
        ["null", "lag", "f_statistic", "df_num", "df_den", "p_value", "decision"]
            .map(String::from)
            .to_vec(),
    );
    for r in rows {
        tb.rows.push(vec![
            t(format!("{} does not Granger cause {}", r.cause, r.effect)),
            i(r.lag),
            n(r.statistic),
            i(r.df_num),
            i(r.df_den),
            n(r.p_value),
            t(if r.p_value < level { "Reject" } else { "Accept" }),
        ]);
    }
    tb.notes.push(format!("bivariate F-tests on {on}; decision at {}%", level * 100.0));
    tb
}

pub fn diagnostics(models: &[(&str, &DiagnosticReport)]) -> Table {
    let mut cols = vec!["test".to_string()];
    cols.extend(models.iter().map(|(label, _)| label.to_string()));
    let mut tb = Table::new("table09_diagnostics", "Residual diagnostics (p-values)", cols);
    let mut p = vec![t("Portmanteau")];
    let mut jb = vec![t("Jarque-Bera")];
    let mut arch = vec![t("ARCH-LM")];
    for (_, d) in models {
        p.push(n(d.portmanteau_p()));
        jb.push(n(d.jarque_bera_p()));
        arch.push(n(d.arch_p()));
    }
    tb.rows = vec![p, jb, arch];
    for (label, d) in models {
        tb.notes.push(format!(
            "{label}: portmanteau h={} df={}, JB df={}, ARCH q={} df={}{}",
            d.portmanteau.lags,
            d.portmanteau.df,
            d.jarque_bera.df,
            d.arch.lags,
            d.arch.df,
            if d.arch.saturated { " (saturated)" } else { "" }
        ));
    }
    tb
}

/// Wide layout: one column per (variable, shock) pair.
pub fn fevd(f: &FevdResult) -> Table {
    let mut cols = vec!["period".to_string()];
    for v in &f.ordering {
        for s in &f.ordering {
            cols.push(format!("{v}:{s}"));
        }
    }
    let mut tb = Table::new("table10_fevd", "Forecast-error variance decomposition", cols);
    let k = f.ordering.len();
    for (h, shares) in f.horizons.iter().zip(&f.shares) {
        let mut row = vec![i(*h)];
        for a in 0..k {
            for b in 0..k {
                row.push(n(shares[(a, b)]));
            }
        }
        tb.rows.push(row);
    }
    tb.notes.push("column variable:shock = share of variable's forecast-error variance due to shock".into());
    tb
}

/// Long layout: horizon, shock, responder, value, lower, upper.
pub fn fevd_long(f: &FevdResult) -> Table {
    let mut tb = Table::new(
        "fevd_long",
        "Forecast-error variance decomposition (long)",
        ["horizon", "shock", "responder", "value", "lower", "upper"].map(String::from).to_vec(),
    );
    let k = f.ordering.len();
    for (h, shares) in f.horizons.iter().zip(&f.shares) {
        for s in 0..k {
            for v in 0..k {
                tb.rows.push(vec![i(*h), t(&f.ordering[s]), t(&f.ordering[v]), n(shares[(v, s)]), Cell::Empty, Cell::Empty]);
            }
        }
    }
    tb
}

/// Long layout: horizon, shock, responder, value, lower, upper.
pub fn irf(r: &IrfResult) -> Table {
    let mut tb = Table::new(
        IRF_TABLE,
        "Orthogonalized impulse responses",
        ["horizon", "shock", "responder", "value", "lower", "upper"].map(String::from).to_vec(),
    );
    let k = r.ordering.len();
    for (h, theta) in r.horizons.iter().zip(&r.responses) {
        for s in 0..k {
            for v in 0..k {
                let (lo, up) = match (&r.lower, &r.upper) {
                    (Some(l), Some(u)) => (n(l[*h][(v, s)]), n(u[*h][(v, s)])),
                    _ => (Cell::Empty, Cell::Empty),
                };
                tb.rows.push(vec![i(*h), t(&r.ordering[s]), t(&r.ordering[v]), n(theta[(v, s)]), lo, up]);
            }
        }
    }
    if let Some(b) = &r.bootstrap {
        tb.notes.push(format!(
            "{} bootstrap, {:.0}% bands, {} replications ({} failed), seed {}",
            b.interval,
            b.level * 100.0,
            b.replications,
            b.failures,
            b.seed
        ));
    }
    tb.notes.push("responses to unit-root systems are permanent and need not die out".into());
    tb
}
