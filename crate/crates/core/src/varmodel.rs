//! Vector autoregressions: estimation, lag-order selection and bivariate
//! Granger causality.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dataset::Dataset;
use crate::dist::f_sf;
use crate::linalg::{hstack, lag_block, log_det_spd, lstsq, ones};
use crate::linreg::{info_criteria, ols, InfoCriteria};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarModel {
    pub variable_names: Vec<String>,
    pub k: usize,
    pub p: usize,
    /// Zero when the model has no intercept.
    pub intercepts: DVector<f64>,
    /// Coefficients on a linear time index, when the model carries one.
    pub trend: Option<DVector<f64>>,
    /// `A_1 .. A_p`, each k×k, row = equation.
    pub lag_coefficients: Vec<DMatrix<f64>>,
    pub residuals: DMatrix<f64>,
    /// ML residual covariance (divisor = residual rows).
    pub sigma: DMatrix<f64>,
    pub log_likelihood: f64,
}

impl VarModel {
    pub fn n_resid(&self) -> usize {
        self.residuals.nrows()
    }

    /// kp×kp companion matrix.
    pub fn companion(&self) -> DMatrix<f64> {
        let (k, p) = (self.k, self.p);
        let mut c = DMatrix::zeros(k * p, k * p);
        for (j, a) in self.lag_coefficients.iter().enumerate() {
            c.view_mut((0, j * k), (k, k)).copy_from(a);
        }
        for i in k..k * p {
            c[(i, i - k)] = 1.0;
        }
        c
    }

    /// Moduli of the companion-matrix eigenvalues, descending.
    pub fn companion_moduli(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self
            .companion()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect();
        m.sort_by(|a, b| b.total_cmp(a));
        m
    }

    /// One-step fitted value for row `t` of a T×k level matrix (`t >= p`).
    /// `time` is the value of the trend regressor at `t`.
    pub fn fitted_at(&self, data: &DMatrix<f64>, t: usize, time: f64) -> DVector<f64> {
        let mut out = self.intercepts.clone();
        if let Some(tr) = &self.trend {
            out += tr * time;
        }
        for (j, a) in self.lag_coefficients.iter().enumerate() {
            out += a * data.row(t - j - 1).transpose();
        }
        out
    }
}

fn gaussian_loglik(sigma: &DMatrix<f64>, n: usize) -> Result<f64> {
    let k = sigma.nrows() as f64;
    let ld = log_det_spd(sigma, "residual covariance")?;
    Ok(-0.5 * n as f64 * (k * (2.0 * PI).ln() + ld + k))
}

/// Equation-by-equation OLS on rows `start..T`.
fn fit_var_rows(
    data: &DMatrix<f64>,
    names: &[String],
    p: usize,
    include_intercept: bool,
    start: usize,
) -> Result<VarModel> {
    let (t, k) = data.shape();
    let n = t - start;
    let m = k * p + usize::from(include_intercept);
    if n <= m {
        return Err(Error::InsufficientData(format!(
            "VAR({p}) with k={k} needs more than {m} usable observations, got {n}"
        )));
    }
    let y = data.rows(start, n).into_owned();
    let lags = lag_block(data, p, start);
    let x = if include_intercept {
        hstack(&[&ones(n), &lags])
    } else {
        lags
    };
    let b = lstsq(&x, &y)?;
    let residuals = &y - &x * &b;
    let sigma = residuals.transpose() * &residuals / n as f64;
    let off = usize::from(include_intercept);
    let intercepts = if include_intercept {
        b.row(0).transpose()
    } else {
        DVector::zeros(k)
    };
    let lag_coefficients = (0..p)
        .map(|j| b.rows(off + j * k, k).transpose())
        .collect();
    let log_likelihood = gaussian_loglik(&sigma, n)?;
    Ok(VarModel {
        variable_names: names.to_vec(),
        k,
        p,
        intercepts,
        trend: None,
        lag_coefficients,
        residuals,
        sigma,
        log_likelihood,
    })
}

/// VAR(p) in levels fitted by equation-wise OLS over `t = p..T`.
pub fn fit_var(d: &Dataset, p: usize, include_intercept: bool) -> Result<VarModel> {
    if p == 0 {
        return Err(Error::InvalidArgument("VAR lag order must be >= 1".into()));
    }
    let t = d.n_obs();
    let k = d.n_series();
    if t <= p + k * p + 1 {
        return Err(Error::InsufficientData(format!(
            "VAR({p}) with k={k} needs T > {}, got {t}",
            p + k * p + 1
        )));
    }
    fit_var_rows(&d.matrix(), &d.names(), p, include_intercept, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagCriteria {
    pub lag: usize,
    pub aic: f64,
    pub hq: f64,
    pub sc: f64,
    pub fpe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChosenLags {
    pub aic: usize,
    pub hq: usize,
    pub sc: usize,
    pub fpe: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagSelection {
    pub max_lag: usize,
    /// Common sample size shared by all candidates.
    pub n_obs: usize,
    pub table: Vec<LagCriteria>,
    pub chosen: ChosenLags,
    /// Modal choice across the four criteria; ties go to the smaller lag.
    pub recommended: usize,
}

impl LagSelection {
    /// True when the criteria do not all agree.
    pub fn criteria_disagree(&self) -> bool {
        let c = self.chosen;
        !(c.aic == c.hq && c.hq == c.sc && c.sc == c.fpe)
    }
}

fn argmin_lag(table: &[LagCriteria], f: impl Fn(&LagCriteria) -> f64) -> usize {
    let mut best = &table[0];
    for row in &table[1..] {
        if f(row) < f(best) {
            best = row;
        }
    }
    best.lag
}

/// Information criteria for VAR(1..=max_lag) with intercept, all on the
/// sample `t = max_lag..T`.
pub fn select_lag_order(d: &Dataset, max_lag: usize) -> Result<LagSelection> {
    if max_lag == 0 {
        return Err(Error::InvalidArgument("max_lag must be >= 1".into()));
    }
    let data = d.matrix();
    let names = d.names();
    let k = d.n_series();
    let n = d.n_obs().saturating_sub(max_lag);
    let mut table = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let model = fit_var_rows(&data, &names, lag, true, max_lag)?;
        let InfoCriteria { aic, hq, sc, fpe } = info_criteria(&model.sigma, n, k * lag + 1, k)?;
        table.push(LagCriteria { lag, aic, hq, sc, fpe });
    }
    let chosen = ChosenLags {
        aic: argmin_lag(&table, |r| r.aic),
        hq: argmin_lag(&table, |r| r.hq),
        sc: argmin_lag(&table, |r| r.sc),
        fpe: argmin_lag(&table, |r| r.fpe),
    };
    let votes = [chosen.aic, chosen.hq, chosen.sc, chosen.fpe];
    let recommended = (1..=max_lag)
        .max_by(|a, b| {
            let ca = votes.iter().filter(|v| *v == a).count();
            let cb = votes.iter().filter(|v| *v == b).count();
            ca.cmp(&cb).then(b.cmp(a))
        })
        .expect("max_lag >= 1");
    Ok(LagSelection {
        max_lag,
        n_obs: n,
        table,
        chosen,
        recommended,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrangerResult {
    pub cause: String,
    pub effect: String,
    pub lag: usize,
    pub statistic: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p_value: f64,
    pub reject_at_5pct: bool,
}

/// Regressors of the bivariate Granger regressions: `(y, restricted X, unrestricted X)`.
/// Rows run over `t = lag..T`; columns are the constant, own lags, then the
/// cause's lags.
pub fn granger_design(
    effect: &[f64],
    cause: &[f64],
    lag: usize,
) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = effect.len() - lag;
    let y = DVector::from_fn(n, |i, _| effect[lag + i]);
    let restricted = DMatrix::from_fn(n, 1 + lag, |i, c| {
        if c == 0 {
            1.0
        } else {
            effect[lag + i - c]
        }
    });
    let unrestricted = DMatrix::from_fn(n, 1 + 2 * lag, |i, c| match c {
        0 => 1.0,
        c if c <= lag => effect[lag + i - c],
        c => cause[lag + i - (c - lag)],
    });
    (y, restricted, unrestricted)
}

/// F-test that `cause`'s lags add nothing to an autoregression of `effect`.
pub fn granger_test(d: &Dataset, cause: &str, effect: &str, lag: usize) -> Result<GrangerResult> {
    if cause == effect {
        return Err(Error::InvalidArgument(format!(
            "Granger test needs two distinct series, got '{cause}' twice"
        )));
    }
    if lag == 0 {
        return Err(Error::InvalidArgument("Granger lag must be >= 1".into()));
    }
    let c = d.get(cause)?;
    let e = d.get(effect)?;
    let t = d.n_obs();
    if t <= lag || t - lag <= 2 * lag + 1 {
        return Err(Error::InsufficientData(format!(
            "Granger test with {lag} lags needs more than {} observations, got {t}",
            3 * lag + 1
        )));
    }
    let (y, xr, xu) = granger_design(e.values(), c.values(), lag);
    let fr = ols(&y, &xr)?;
    let fu = ols(&y, &xu)?;
    let df_den = fu.df_resid();
    let statistic = ((fr.rss - fu.rss) / lag as f64) / (fu.rss / df_den as f64);
    let p_value = f_sf(statistic, lag as f64, df_den as f64);
    Ok(GrangerResult {
        cause: cause.to_string(),
        effect: effect.to_string(),
        lag,
        statistic,
        df_num: lag,
        df_den,
        p_value,
        reject_at_5pct: p_value < 0.05,
    })
}
