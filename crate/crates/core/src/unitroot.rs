//! Augmented Dickey–Fuller and Phillips–Perron unit-root tests.
//!
//! Both tests are left-tailed: the unit-root null is rejected when the
//! statistic falls below the critical value. Critical values come from the
//! Dickey–Fuller tau tables (Fuller 1976), linearly interpolated in `1/T`
//! where `T` is the length of the tested series.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dataset::{first_difference, Series};
use crate::linreg::{ols, OlsFit};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DeterministicSpec {
    None,
    Drift,
    DriftTrend,
}

impl DeterministicSpec {
    pub fn n_terms(self) -> usize {
        match self {
            DeterministicSpec::None => 0,
            DeterministicSpec::Drift => 1,
            DeterministicSpec::DriftTrend => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DeterministicSpec::None => "none",
            DeterministicSpec::Drift => "drift",
            DeterministicSpec::DriftTrend => "trend",
        }
    }
}

impl std::str::FromStr for DeterministicSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "nc" => Ok(Self::None),
            "drift" | "constant" | "c" => Ok(Self::Drift),
            "trend" | "drift+trend" | "ct" => Ok(Self::DriftTrend),
            other => Err(Error::InvalidArgument(format!(
                "unknown deterministic spec '{other}' (none, drift, trend)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnitRootTest {
    Adf,
    PhillipsPerron,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalValues {
    pub pct1: f64,
    pub pct5: f64,
    pub pct10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRootResult {
    pub test: UnitRootTest,
    pub statistic: f64,
    pub critical_values: CriticalValues,
    /// ADF: chosen lag of differences. PP: Bartlett bandwidth.
    pub lag_or_bandwidth: usize,
    pub deterministic: DeterministicSpec,
    pub reject_at_5pct: bool,
    /// Observations in the test regression.
    pub n_obs: usize,
}

impl UnitRootResult {
    pub fn rejects_at(&self, level: f64) -> bool {
        let cv = if level <= 0.01 {
            self.critical_values.pct1
        } else if level <= 0.05 {
            self.critical_values.pct5
        } else {
            self.critical_values.pct10
        };
        self.statistic < cv
    }
}

const TABLE_T: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, f64::INFINITY];

// Rows follow TABLE_T; columns are the 1%, 5%, 10% quantiles.
const TAU_NONE: [[f64; 3]; 6] = [
    [-2.66, -1.95, -1.60],
    [-2.62, -1.95, -1.61],
    [-2.60, -1.95, -1.61],
    [-2.58, -1.95, -1.62],
    [-2.58, -1.95, -1.62],
    [-2.58, -1.95, -1.62],
];
const TAU_DRIFT: [[f64; 3]; 6] = [
    [-3.75, -3.00, -2.63],
    [-3.58, -2.93, -2.60],
    [-3.51, -2.89, -2.58],
    [-3.46, -2.88, -2.57],
    [-3.44, -2.87, -2.57],
    [-3.43, -2.86, -2.57],
];
const TAU_TREND: [[f64; 3]; 6] = [
    [-4.38, -3.60, -3.24],
    [-4.15, -3.50, -3.18],
    [-4.04, -3.45, -3.15],
    [-3.99, -3.43, -3.13],
    [-3.98, -3.42, -3.13],
    [-3.96, -3.41, -3.12],
];

/// Dickey–Fuller tau critical values for a series of length `t`.
pub fn dickey_fuller_critical_values(det: DeterministicSpec, t: usize) -> CriticalValues {
    let table = match det {
        DeterministicSpec::None => &TAU_NONE,
        DeterministicSpec::Drift => &TAU_DRIFT,
        DeterministicSpec::DriftTrend => &TAU_TREND,
    };
    let inv = 1.0 / (t.max(1) as f64);
    let inv_grid: Vec<f64> = TABLE_T.iter().map(|x| 1.0 / x).collect();
    let row = |i: usize| table[i];
    let cv = if inv >= inv_grid[0] {
        row(0)
    } else {
        let i = (0..5).find(|&i| inv <= inv_grid[i] && inv >= inv_grid[i + 1]).unwrap_or(4);
        let w = (inv_grid[i] - inv) / (inv_grid[i] - inv_grid[i + 1]);
        let (a, b) = (row(i), row(i + 1));
        [0, 1, 2].map(|c| a[c] + w * (b[c] - a[c]))
    };
    CriticalValues {
        pct1: cv[0],
        pct5: cv[1],
        pct10: cv[2],
    }
}

/// Design for `Δy_t = ρ y_{t-1} + det + Σ_{j≤lag} c_j Δy_{t-j}` over rows
/// `t = start..T`. Column 0 is `y_{t-1}`; deterministic terms follow, then lags.
pub fn adf_design(
    y: &[f64],
    det: DeterministicSpec,
    lag: usize,
    start: usize,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = y.len() - start;
    let m = 1 + det.n_terms() + lag;
    let dy = |t: usize| y[t] - y[t - 1];
    let resp = DVector::from_fn(n, |i, _| dy(start + i));
    let x = DMatrix::from_fn(n, m, |i, c| {
        let t = start + i;
        if c == 0 {
            return y[t - 1];
        }
        let c = c - 1;
        if c < det.n_terms() {
            return if c == 0 { 1.0 } else { t as f64 };
        }
        dy(t - (c - det.n_terms() + 1))
    });
    (resp, x)
}

fn check_variation(s: &Series) -> Result<()> {
    let v = s.values();
    if v.windows(2).all(|w| w[1] == w[0]) {
        return Err(Error::Degenerate(format!(
            "series '{}' has zero variance",
            s.name()
        )));
    }
    Ok(())
}

fn df_fit(y: &DVector<f64>, x: &DMatrix<f64>, name: &str) -> Result<OlsFit> {
    let fit = ols(y, x).map_err(|e| match e {
        Error::SingularDesign(m) => Error::Degenerate(format!("'{name}': {m}")),
        other => other,
    })?;
    if fit.rss <= 1e-28 * y.norm_squared().max(1e-300) {
        return Err(Error::Degenerate(format!(
            "'{name}': test regression fits exactly"
        )));
    }
    Ok(fit)
}

/// ADF test with the lag of differences chosen in `0..=max_lag` by AIC.
///
/// All candidate regressions use the common sample `t = max_lag+1 .. T`,
/// and the reported statistic comes from the chosen regression on that sample.
pub fn adf_test(s: &Series, det: DeterministicSpec, max_lag: usize) -> Result<UnitRootResult> {
    let t = s.len();
    if t <= max_lag + 2 + det.n_terms() + 1 {
        return Err(Error::InsufficientData(format!(
            "ADF on '{}' with max lag {max_lag} needs more than {} observations, got {t}",
            s.name(),
            max_lag + 3 + det.n_terms()
        )));
    }
    check_variation(s)?;
    let y = s.values();
    let start = max_lag + 1;
    let mut best: Option<(f64, usize, OlsFit)> = None;
    for lag in 0..=max_lag {
        let (resp, x) = adf_design(y, det, lag, start);
        let fit = df_fit(&resp, &x, s.name())?;
        let aic = fit.aic();
        if best.as_ref().map_or(true, |(b, _, _)| aic < *b) {
            best = Some((aic, lag, fit));
        }
    }
    let (_, lag, fit) = best.expect("at least one candidate lag");
    let statistic = fit.t_stats[0];
    let critical_values = dickey_fuller_critical_values(det, t);
    Ok(UnitRootResult {
        test: UnitRootTest::Adf,
        statistic,
        critical_values,
        lag_or_bandwidth: lag,
        deterministic: det,
        reject_at_5pct: statistic < critical_values.pct5,
        n_obs: fit.n_obs,
    })
}

/// Newey–West automatic bandwidth `floor(4 (n/100)^(2/9))`.
pub fn newey_west_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett-kernel long-run variance of a residual sequence (divisor n).
pub fn bartlett_long_run_variance(e: &[f64], bandwidth: usize) -> f64 {
    let n = e.len();
    let autocov = |j: usize| e[j..].iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let mut lrv = autocov(0);
    for j in 1..=bandwidth.min(n.saturating_sub(1)) {
        lrv += 2.0 * (1.0 - j as f64 / (bandwidth as f64 + 1.0)) * autocov(j);
    }
    lrv
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bandwidth {
    Fixed(usize),
    /// Newey–West rule on the regression sample size.
    Automatic,
}

/// Phillips–Perron Z-tau test.
pub fn pp_test(s: &Series, det: DeterministicSpec, bandwidth: Bandwidth) -> Result<UnitRootResult> {
    let t = s.len();
    if t < 10 {
        return Err(Error::InsufficientData(format!(
            "PP on '{}' needs at least 10 observations, got {t}",
            s.name()
        )));
    }
    check_variation(s)?;
    let (resp, x) = adf_design(s.values(), det, 0, 1);
    let fit = df_fit(&resp, &x, s.name())?;
    let n = fit.n_obs;
    let l = match bandwidth {
        Bandwidth::Fixed(l) => l,
        Bandwidth::Automatic => newey_west_bandwidth(n),
    };
    let gamma0 = fit.rss / n as f64;
    let lrv = bartlett_long_run_variance(&fit.residuals, l);
    if lrv <= 0.0 {
        return Err(Error::Degenerate(format!(
            "'{}': nonpositive long-run variance",
            s.name()
        )));
    }
    let t_rho = fit.t_stats[0];
    let se_rho = fit.std_errors[0];
    let s_reg = fit.sigma2.sqrt();
    let statistic = (gamma0 / lrv).sqrt() * t_rho
        - 0.5 * (lrv - gamma0) / lrv.sqrt() * (n as f64 * se_rho / s_reg);
    let critical_values = dickey_fuller_critical_values(det, t);
    Ok(UnitRootResult {
        test: UnitRootTest::PhillipsPerron,
        statistic,
        critical_values,
        lag_or_bandwidth: l,
        deterministic: det,
        reject_at_5pct: statistic < critical_values.pct5,
        n_obs: n,
    })
}

/// Order of integration (0 or 1) decided by the PP test at 5%.
pub fn integration_order(
    s: &Series,
    det_level: DeterministicSpec,
    det_diff: DeterministicSpec,
) -> Result<usize> {
    integration_order_at(s, det_level, det_diff, 0.05)
}

/// [`integration_order`] at a 1%, 5% or 10% test level.
pub fn integration_order_at(
    s: &Series,
    det_level: DeterministicSpec,
    det_diff: DeterministicSpec,
    level: f64,
) -> Result<usize> {
    if pp_test(s, det_level, Bandwidth::Automatic)?.rejects_at(level) {
        return Ok(0);
    }
    let d = first_difference(s)?;
    if pp_test(&d, det_diff, Bandwidth::Automatic)?.rejects_at(level) {
        return Ok(1);
    }
    Err(Error::UnsupportedOrder(format!(
        "'{}' keeps a unit root after first differencing; only I(0)/I(1) are handled",
        s.name()
    )))
}
