//! Residual adequacy tests for multivariate systems.
//!
//! Residual matrices are T×k with one row per period. The three tests
//! follow the usual multivariate forms: an adjusted (Ljung–Box weighted)
//! portmanteau statistic, a Cholesky-standardized Jarque–Bera statistic
//! and an ARCH-LM test on `vech(u_t u_t')`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dist::chi2_sf;
use crate::linalg::{cholesky_lower, inverse_spd, symmetrize};
use crate::{Error, Result};

pub const DEFAULT_PORTMANTEAU_LAGS: usize = 10;
pub const DEFAULT_ARCH_LAGS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortmanteauResult {
    pub statistic: f64,
    pub lags: usize,
    pub df: usize,
    pub p_value: f64,
}

/// Adjusted portmanteau test
/// `Q = T² Σ_{j=1..h} tr(C_j' C_0⁻¹ C_j C_0⁻¹) / (T - j)`, `C_j = Σ u_t u_{t-j}' / T`.
///
/// The chi-square reference has `k²·h - df_adjust` degrees of freedom; for a
/// VAR or VECM pass `k²` times the level lag order.
pub fn portmanteau(resid: &DMatrix<f64>, h: usize, df_adjust: usize) -> Result<PortmanteauResult> {
    let (t, k) = resid.shape();
    if h == 0 {
        return Err(Error::InvalidArgument("portmanteau horizon must be positive".into()));
    }
    if t <= h + 1 {
        return Err(Error::InsufficientData(format!(
            "portmanteau horizon {h} too large for {t} residual rows"
        )));
    }
    let df_total = k * k * h;
    if df_total <= df_adjust {
        return Err(Error::InvalidArgument(format!(
            "portmanteau horizon {h} leaves no degrees of freedom after removing {df_adjust}; raise h above the lag order"
        )));
    }
    let tf = t as f64;
    let c0 = symmetrize(&(resid.transpose() * resid / tf));
    let c0_inv = inverse_spd(&c0, "residual covariance")?;
    let mut q = 0.0;
    for j in 1..=h {
        let lead = resid.rows(j, t - j);
        let lag = resid.rows(0, t - j);
        let cj = lead.transpose() * lag / tf;
        let term = (cj.transpose() * &c0_inv * &cj * &c0_inv).trace();
        q += term / (tf - j as f64);
    }
    let statistic = tf * tf * q;
    let df = df_total - df_adjust;
    Ok(PortmanteauResult {
        statistic,
        lags: h,
        df,
        p_value: chi2_sf(statistic, df as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JarqueBeraResult {
    pub statistic: f64,
    pub skewness_statistic: f64,
    pub kurtosis_statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Multivariate Jarque–Bera: centred residuals are standardized by the
/// inverse Cholesky factor of their covariance (divisor T), then
/// `JB = T/6 Σ b1_i² + T/24 Σ (b2_i - 3)²` against χ²(2k).
pub fn jarque_bera(resid: &DMatrix<f64>) -> Result<JarqueBeraResult> {
    let (t, k) = resid.shape();
    if t < 3 || k == 0 {
        return Err(Error::InsufficientData(format!(
            "Jarque-Bera needs at least 3 rows, got {t}"
        )));
    }
    let tf = t as f64;
    let mut centred = resid.clone();
    for mut col in centred.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let s = symmetrize(&(centred.transpose() * &centred / tf));
    let l = cholesky_lower(&s, "residual covariance")?;
    let w = l
        .solve_lower_triangular(&centred.transpose())
        .ok_or_else(|| Error::Numerical("standardization failed".into()))?;
    let mut s3 = 0.0;
    let mut s4 = 0.0;
    for i in 0..k {
        let row = w.row(i);
        let b1 = row.iter().map(|v| v.powi(3)).sum::<f64>() / tf;
        let b2 = row.iter().map(|v| v.powi(4)).sum::<f64>() / tf;
        s3 += b1 * b1;
        s4 += (b2 - 3.0) * (b2 - 3.0);
    }
    let skewness_statistic = tf * s3 / 6.0;
    let kurtosis_statistic = tf * s4 / 24.0;
    let statistic = skewness_statistic + kurtosis_statistic;
    let df = 2 * k;
    Ok(JarqueBeraResult {
        statistic,
        skewness_statistic,
        kurtosis_statistic,
        df,
        p_value: chi2_sf(statistic, df as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchResult {
    pub statistic: f64,
    pub lags: usize,
    pub df: usize,
    pub p_value: f64,
    /// Regressors at least as many as usable rows: the auxiliary fit is exact.
    pub saturated: bool,
}

/// Lower-triangle (column-major) vech of `u u'`.
fn vech_outer(u: &[f64]) -> Vec<f64> {
    let k = u.len();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for j in 0..k {
        for i in j..k {
            out.push(u[i] * u[j]);
        }
    }
    out
}

/// Multivariate ARCH-LM test.
///
/// `vech(u_t u_t')` is regressed on a constant and its own `q` lags;
/// `R²_m = 1 - 2/(k(k+1)) tr(Ω̂ Ω̂_0⁻¹)` and `LM = ½ T k(k+1) R²_m`, with
/// `q (k(k+1)/2)²` degrees of freedom. When the regression has at least as
/// many regressors as rows it fits exactly and `R²_m = 1`.
pub fn arch_lm(resid: &DMatrix<f64>, q: usize) -> Result<ArchResult> {
    let (t, k) = resid.shape();
    if q == 0 {
        return Err(Error::InvalidArgument("ARCH lag order must be positive".into()));
    }
    if t < q + 3 {
        return Err(Error::InsufficientData(format!(
            "{t} residual rows too short for {q} lags of vech products"
        )));
    }
    let m = k * (k + 1) / 2;
    let vech: Vec<Vec<f64>> = (0..t)
        .map(|i| vech_outer(&resid.row(i).iter().copied().collect::<Vec<_>>()))
        .collect();
    let n = t - q;
    let y = DMatrix::from_fn(n, m, |i, j| vech[i + q][j]);
    let ncol = 1 + q * m;
    let x = DMatrix::from_fn(n, ncol, |i, c| {
        if c == 0 {
            1.0
        } else {
            let lag = (c - 1) / m + 1;
            vech[i + q - lag][(c - 1) % m]
        }
    });

    let centred = |a: &DMatrix<f64>| {
        let mut out = a.clone();
        for mut col in out.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        out
    };
    let y0 = centred(&y);
    let omega0 = symmetrize(&(y0.transpose() * &y0));
    let omega0_inv = inverse_spd(&omega0, "vech covariance").map_err(|_| {
        Error::Degenerate("squared residual products have a singular covariance".into())
    })?;

    let saturated = ncol >= n;
    let r2m = if saturated {
        1.0
    } else {
        let svd = x.clone().svd(true, true);
        let b = svd
            .solve(&y, 1e-12 * svd.singular_values.max())
            .map_err(|e| Error::Numerical(format!("ARCH auxiliary regression: {e}")))?;
        let e = &y - &x * b;
        let omega1 = e.transpose() * &e;
        1.0 - 2.0 / (k * (k + 1)) as f64 * (omega1 * &omega0_inv).trace()
    };
    let statistic = 0.5 * n as f64 * (k * (k + 1)) as f64 * r2m;
    let df = q * m * m;
    Ok(ArchResult {
        statistic,
        lags: q,
        df,
        p_value: chi2_sf(statistic.max(0.0), df as f64),
        saturated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub portmanteau: PortmanteauResult,
    pub jarque_bera: JarqueBeraResult,
    pub arch: ArchResult,
}

impl DiagnosticReport {
    pub fn portmanteau_p(&self) -> f64 {
        self.portmanteau.p_value
    }

    pub fn jarque_bera_p(&self) -> f64 {
        self.jarque_bera.p_value
    }

    pub fn arch_p(&self) -> f64 {
        self.arch.p_value
    }
}

/// All three tests on one residual matrix from a model with `lag_order`
/// level lags.
pub fn diagnose(
    resid: &DMatrix<f64>,
    lag_order: usize,
    portmanteau_lags: usize,
    arch_lags: usize,
) -> Result<DiagnosticReport> {
    let k = resid.ncols();
    Ok(DiagnosticReport {
        portmanteau: portmanteau(resid, portmanteau_lags, k * k * lag_order)?,
        jarque_bera: jarque_bera(resid)?,
        arch: arch_lm(resid, arch_lags)?,
    })
}
