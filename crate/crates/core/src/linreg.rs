//! Ordinary least squares and multivariate information criteria.
//!
//! The Gaussian log-likelihood keeps its constant term:
//! `logL = -n/2 * (ln(2 pi) + ln(RSS/n) + 1)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dist::t_two_sided;
use crate::linalg::{check_rank, log_det_spd};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// `rss / (n_obs - n_params)`.
    pub sigma2: f64,
    pub n_obs: usize,
    pub n_params: usize,
    pub log_likelihood: f64,
}

impl OlsFit {
    pub fn df_resid(&self) -> usize {
        self.n_obs - self.n_params
    }

    /// `-2 logL + 2 m`.
    pub fn aic(&self) -> f64 {
        -2.0 * self.log_likelihood + 2.0 * self.n_params as f64
    }
}

/// Least squares of `y` on the columns of `x` via Householder QR.
pub fn ols(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<OlsFit> {
    let (n, m) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("design matrix has no columns".into()));
    }
    if n <= m {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {m} parameters"
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite regression input".into()));
    }

    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(&r, x)?;
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    let residuals = y - x * &coef;
    let rss = residuals.norm_squared();
    let df = (n - m) as f64;
    let sigma2 = rss / df;

    // diag((X'X)^-1) = row sums of squares of R^-1
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(m, m))
        .ok_or_else(|| Error::SingularDesign("triangular inverse failed".into()))?;
    let std_errors: Vec<f64> = (0..m)
        .map(|i| (sigma2 * rinv.row(i).norm_squared()).sqrt())
        .collect();
    let t_stats: Vec<f64> = coef
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| if *se > 0.0 { b / se } else { f64::NAN })
        .collect();
    let p_values = t_stats.iter().map(|t| t_two_sided(*t, df)).collect();
    let nf = n as f64;
    let log_likelihood = -0.5 * nf * ((2.0 * PI).ln() + (rss / nf).ln() + 1.0);

    Ok(OlsFit {
        coefficients: coef.iter().copied().collect(),
        std_errors,
        t_stats,
        p_values,
        residuals: residuals.iter().copied().collect(),
        rss,
        sigma2,
        n_obs: n,
        n_params: m,
        log_likelihood,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoCriteria {
    pub aic: f64,
    pub hq: f64,
    pub sc: f64,
    pub fpe: f64,
}

/// Multivariate criteria from the ML residual covariance of a k-equation
/// system with `n_params_per_equation` regressors each:
///
/// * `AIC = ln|S| + 2 k m / n`
/// * `HQ  = ln|S| + 2 ln(ln n) k m / n`
/// * `SC  = ln|S| + ln(n) k m / n`
/// * `FPE = ((n + m) / (n - m))^k |S|`
pub fn info_criteria(
    sigma: &DMatrix<f64>,
    n_obs: usize,
    n_params_per_equation: usize,
    k: usize,
) -> Result<InfoCriteria> {
    if sigma.nrows() != k || sigma.ncols() != k {
        return Err(Error::InvalidArgument(format!(
            "covariance is {}x{}, expected {k}x{k}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    if n_obs <= n_params_per_equation {
        return Err(Error::InsufficientData(format!(
            "{n_obs} observations for {n_params_per_equation} parameters per equation"
        )));
    }
    let ln_det = log_det_spd(sigma, "residual covariance")?;
    let n = n_obs as f64;
    let m = n_params_per_equation as f64;
    let total = k as f64 * m;
    Ok(InfoCriteria {
        aic: ln_det + 2.0 * total / n,
        hq: ln_det + 2.0 * n.ln().ln() * total / n,
        sc: ln_det + n.ln() * total / n,
        fpe: ((n + m) / (n - m)).powi(k as i32) * ln_det.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 5.0]);
        let y = &x * DVector::from_vec(vec![2.0, -1.0]);
        let fit = ols(&y, &x).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] + 1.0).abs() < 1e-12);
        assert!(fit.rss < 1e-24);
    }

    #[test]
    fn intercept_only_is_mean() {
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let x = DMatrix::from_element(5, 1, 1.0);
        let fit = ols(&y, &x).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-14);
        assert!((fit.rss - 10.0).abs() < 1e-12);
        assert!((fit.sigma2 - 2.5).abs() < 1e-12);
        assert!((fit.std_errors[0] - (2.5f64 / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn too_few_observations_and_rank_deficiency() {
        let x = DMatrix::from_element(2, 2, 1.0);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(ols(&y, &x), Err(Error::InsufficientData(_))));

        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 4.0]);
        assert!(matches!(ols(&y, &x), Err(Error::SingularDesign(_))));
    }

    #[test]
    fn penalty_monotonicity() {
        let s = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3]);
        let a = info_criteria(&s, 40, 3, 2).unwrap();
        let b = info_criteria(&s, 40, 5, 2).unwrap();
        assert!(a.aic < b.aic && a.hq < b.hq && a.sc < b.sc && a.fpe < b.fpe);
    }

    #[test]
    fn criteria_reject_indefinite_covariance() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(info_criteria(&s, 40, 3, 2), Err(Error::NotPositiveDefinite(_))));
    }
}
