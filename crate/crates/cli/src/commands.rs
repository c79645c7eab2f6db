//! Single-stage commands. Each returns report tables so the binary and the
//! tests share one code path.

use std::path::Path;

use vecmkit::dataset::{difference_dataset, first_difference, load_csv, log_transform, Dataset};
use vecmkit::diagnostics::diagnose;
use vecmkit::dynamics::{bootstrap_bands, fevd, irf};
use vecmkit::johansen::{johansen_test, JohansenCase};
use vecmkit::unitroot::{adf_test, integration_order_at, pp_test, Bandwidth, DeterministicSpec};
use vecmkit::varmodel::{granger_test, select_lag_order};
use vecmkit::vecm::{fit_vecm, normalize_long_run, weak_exogeneity_test, VecmModel};

use crate::report::{self, Table, UnitRootRow};
use crate::CliError;

/// Loads `data`, keeping `columns` (`name` or `name:header`) and logging `log`.
pub fn load_data(data: &Path, columns: &[String], log: &[String]) -> Result<Dataset, CliError> {
    let at = CliError::at("load");
    let spec: Vec<(String, String)> = columns
        .iter()
        .map(|c| match c.split_once(':') {
            Some((n, h)) => (n.trim().to_string(), h.trim().to_string()),
            None => (c.trim().to_string(), c.trim().to_string()),
        })
        .collect();
    let mut d = load_csv(data, &spec).map_err(&at)?;
    for name in log {
        let s = d.get(name).map_err(&at)?;
        let logged = log_transform(s).map_err(&at)?.renamed(name.clone());
        d = d.replace(name, logged).map_err(&at)?;
    }
    Ok(d)
}

pub fn unitroot(
    d: &Dataset,
    max_lag: usize,
    det_level: DeterministicSpec,
    det_diff: DeterministicSpec,
    level: f64,
) -> Result<Vec<Table>, CliError> {
    let at = CliError::at("unitroot");
    let mut rows = Vec::new();
    for s in d.series() {
        let ds = first_difference(s).map_err(&at)?;
        rows.push(UnitRootRow {
            variable: s.name().to_string(),
            adf_level: adf_test(s, det_level, max_lag).map_err(&at)?,
            adf_diff: adf_test(&ds, det_diff, max_lag).map_err(&at)?,
            pp_level: pp_test(s, det_level, Bandwidth::Automatic).map_err(&at)?,
            pp_diff: pp_test(&ds, det_diff, Bandwidth::Automatic).map_err(&at)?,
            order: integration_order_at(s, det_level, det_diff, level).ok(),
        });
    }
    Ok(vec![report::unit_roots(&rows, level)])
}

pub fn lagselect(d: &Dataset, max_lag: usize) -> Result<Vec<Table>, CliError> {
    let sel = select_lag_order(d, max_lag).map_err(CliError::at("lagselect"))?;
    Ok(vec![report::lag_selection(
        "table03_lag_selection",
        "VAR lag order selection",
        &sel,
    )])
}

pub fn johansen(d: &Dataset, lags: Option<usize>, max_lag: usize, case: JohansenCase, level: f64) -> Result<Vec<Table>, CliError> {
    let at = CliError::at("johansen");
    let p = match lags {
        Some(p) => p,
        None => select_lag_order(d, max_lag).map_err(&at)?.recommended,
    };
    let j = johansen_test(d, p, case).map_err(&at)?;
    Ok(vec![report::johansen(
        "table04_johansen",
        "Johansen cointegration test",
        &j,
        level,
    )])
}

/// Shared model specification for the VECM-based commands.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub keep: Vec<String>,
    pub lags: Option<usize>,
    pub rank: Option<usize>,
    pub max_lag: usize,
    pub case: JohansenCase,
    pub level: f64,
}

/// Fits the VECM described by `spec`: lag from lag selection and rank from
/// the trace test unless given.
pub fn build_vecm(d: &Dataset, spec: &ModelSpec, stage: &str) -> Result<VecmModel, CliError> {
    let at = CliError::at(stage);
    let d = if spec.keep.is_empty() {
        d.clone()
    } else {
        d.subset(&spec.keep).map_err(&at)?
    };
    let p = match spec.lags {
        Some(p) => p,
        None => select_lag_order(&d, spec.max_lag).map_err(&at)?.recommended,
    };
    let r = match spec.rank {
        Some(r) => r,
        None => johansen_test(&d, p, spec.case).map_err(&at)?.rank_at(spec.level),
    };
    fit_vecm(&d, p, r, spec.case).map_err(&at)
}

pub fn vecm(d: &Dataset, spec: &ModelSpec, weak_exog_level: f64) -> Result<Vec<Table>, CliError> {
    let at = CliError::at("vecm");
    let m = build_vecm(d, spec, "vecm")?;
    let we = m
        .variable_names
        .iter()
        .map(|v| weak_exogeneity_test(&m, v))
        .collect::<Result<Vec<_>, _>>()
        .map_err(&at)?;
    let lr = normalize_long_run(&m, &m.variable_names).map_err(&at)?;
    Ok(vec![
        report::vecm_own("vecm_own_ect", "VECM: own error-correction terms", &m),
        report::vecm_full("vecm_full", "VECM: all coefficients", &m),
        report::long_run(&lr),
        report::weak_exogeneity(&we, weak_exog_level),
    ])
}

pub fn granger(d: &Dataset, cause: &str, effect: &str, lag: usize, levels: bool, level: f64) -> Result<Vec<Table>, CliError> {
    let at = CliError::at("granger");
    let (data, on) = if levels {
        (d.clone(), "levels")
    } else {
        (difference_dataset(d).map_err(&at)?, "first differences")
    };
    let rows = vec![
        granger_test(&data, cause, effect, lag).map_err(&at)?,
        granger_test(&data, effect, cause, lag).map_err(&at)?,
    ];
    Ok(vec![report::granger(&rows, level, on)])
}

pub fn diagnose_model(d: &Dataset, spec: &ModelSpec, portmanteau_lags: usize, arch_lags: usize) -> Result<Vec<Table>, CliError> {
    let m = build_vecm(d, spec, "diagnose")?;
    let rep = diagnose(&m.residuals, m.p_levels, portmanteau_lags, arch_lags).map_err(CliError::at("diagnose"))?;
    let label = format!("VECM (r={})", m.r);
    Ok(vec![report::diagnostics(&[(&label, &rep)])])
}

pub struct IrfSpec {
    pub horizon: usize,
    pub ordering: Option<Vec<String>>,
    pub replications: usize,
    pub seed: u64,
    pub band_level: f64,
}

pub fn irf_tables(d: &Dataset, spec: &ModelSpec, irf_spec: &IrfSpec) -> Result<Vec<Table>, CliError> {
    let at = CliError::at("irf");
    let m = build_vecm(d, spec, "irf")?;
    let ordering = irf_spec.ordering.clone().unwrap_or_else(|| m.variable_names.clone());
    let r = if irf_spec.replications > 0 {
        bootstrap_bands(&m, irf_spec.horizon, &ordering, irf_spec.replications, irf_spec.seed, irf_spec.band_level)
    } else {
        irf(&m, irf_spec.horizon, &ordering)
    }
    .map_err(&at)?;
    Ok(vec![report::irf(&r)])
}

pub fn fevd_tables(d: &Dataset, spec: &ModelSpec, horizon: usize, ordering: Option<Vec<String>>) -> Result<Vec<Table>, CliError> {
    let at = CliError::at("fevd");
    let m = build_vecm(d, spec, "fevd")?;
    let ordering = ordering.unwrap_or_else(|| m.variable_names.clone());
    let f = fevd(&m, horizon, &ordering).map_err(&at)?;
    Ok(vec![report::fevd(&f), report::fevd_long(&f)])
}
