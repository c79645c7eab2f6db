//! Level-VAR representation of a VECM, orthogonalized impulse responses,
//! forecast-error variance decomposition and residual-bootstrap bands.
//!
//! Response matrices are indexed `[responder, shock]` in the Cholesky
//! ordering the caller supplies. Because a VECM keeps `k - r` unit roots,
//! responses settle at a permanent level instead of dying out.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::linalg::{cholesky_lower, permutation, permute_square, symmetrize};
use crate::varmodel::VarModel;
use crate::vecm::{fit_vecm, VecmModel};
use crate::{Error, Result};

pub const DEFAULT_HORIZON: usize = 9;
pub const DEFAULT_BAND_LEVEL: f64 = 0.95;
/// Replications whose re-estimation fails may not exceed this share.
pub const MAX_FAILURE_SHARE: f64 = 0.10;

/// Level VAR implied by a VECM:
/// `A_1 = I + Π + Γ_1`, `A_j = Γ_j - Γ_{j-1}`, `A_p = -Γ_{p-1}`.
///
/// A restricted constant becomes the intercept `α ρ`; a restricted trend
/// becomes `α τ` on the level-row index.
pub fn vecm_to_var_levels(m: &VecmModel) -> VarModel {
    let k = m.k;
    let p = m.p_levels;
    let pi = &m.alpha * m.beta.rows(0, k).transpose();
    let mut a = Vec::with_capacity(p);
    for j in 1..=p {
        let mut aj = DMatrix::zeros(k, k);
        if j == 1 {
            aj += DMatrix::identity(k, k) + &pi;
        }
        if j <= m.p_diff {
            aj += &m.gamma[j - 1];
        }
        if j >= 2 {
            aj -= &m.gamma[j - 2];
        }
        a.push(aj);
    }
    VarModel {
        variable_names: m.variable_names.clone(),
        k,
        p,
        intercepts: m.intercepts.clone(),
        trend: m.trend.clone(),
        lag_coefficients: a,
        residuals: m.residuals.clone(),
        sigma: m.sigma.clone(),
        log_likelihood: m.log_likelihood,
    }
}

/// Moving-average matrices `Φ_0 = I`, `Φ_h = Σ_{j=1..min(h,p)} A_j Φ_{h-j}`.
pub fn ma_matrices(v: &VarModel, horizon: usize) -> Vec<DMatrix<f64>> {
    let k = v.k;
    let mut phi: Vec<DMatrix<f64>> = vec![DMatrix::identity(k, k)];
    for h in 1..=horizon {
        let mut acc = DMatrix::zeros(k, k);
        for j in 1..=h.min(v.p) {
            acc += &v.lag_coefficients[j - 1] * &phi[h - j];
        }
        phi.push(acc);
    }
    phi
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapInfo {
    pub interval: &'static str,
    pub level: f64,
    pub replications: usize,
    pub failures: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrfResult {
    pub ordering: Vec<String>,
    /// `0..=H`.
    pub horizons: Vec<usize>,
    /// `Θ_h = Φ_h P` in ordering coordinates.
    pub responses: Vec<DMatrix<f64>>,
    /// Non-orthogonalized `Φ_h` in model variable order.
    pub ma: Vec<DMatrix<f64>>,
    pub lower: Option<Vec<DMatrix<f64>>>,
    pub upper: Option<Vec<DMatrix<f64>>>,
    pub bootstrap: Option<BootstrapInfo>,
}

impl IrfResult {
    fn index(&self, name: &str) -> Result<usize> {
        self.ordering
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidArgument(format!("'{name}' is not in the IRF ordering")))
    }

    /// Response of `responder` at horizon `h` to a one-s.d. `shock`.
    pub fn response(&self, responder: &str, shock: &str, h: usize) -> Result<f64> {
        let (i, j) = (self.index(responder)?, self.index(shock)?);
        self.responses
            .get(h)
            .map(|m| m[(i, j)])
            .ok_or_else(|| Error::InvalidArgument(format!("horizon {h} beyond {}", self.responses.len() - 1)))
    }

    pub fn band(&self, responder: &str, shock: &str, h: usize) -> Result<Option<(f64, f64)>> {
        let (i, j) = (self.index(responder)?, self.index(shock)?);
        Ok(match (&self.lower, &self.upper) {
            (Some(lo), Some(up)) if h < lo.len() => Some((lo[h][(i, j)], up[h][(i, j)])),
            _ => None,
        })
    }
}

/// Orthogonalized IRF of a level VAR; `ordering` must permute its variables.
pub fn irf_from_var(v: &VarModel, horizon: usize, ordering: &[String]) -> Result<IrfResult> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("IRF horizon must be >= 1".into()));
    }
    let perm = permutation(&v.variable_names, ordering)?;
    let sigma_o = permute_square(&symmetrize(&v.sigma), &perm);
    let chol = cholesky_lower(&sigma_o, "residual covariance")?;
    let ma = ma_matrices(v, horizon);
    let responses = ma
        .iter()
        .map(|phi| permute_square(phi, &perm) * &chol)
        .collect();
    Ok(IrfResult {
        ordering: ordering.to_vec(),
        horizons: (0..=horizon).collect(),
        responses,
        ma,
        lower: None,
        upper: None,
        bootstrap: None,
    })
}

pub fn irf(m: &VecmModel, horizon: usize, ordering: &[String]) -> Result<IrfResult> {
    irf_from_var(&vecm_to_var_levels(m), horizon, ordering)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FevdResult {
    pub ordering: Vec<String>,
    /// `1..=H` forecast steps.
    pub horizons: Vec<usize>,
    /// `shares[h-1][(i, j)]`: share of variable i's h-step error variance due
    /// to shock j, both in ordering coordinates.
    pub shares: Vec<DMatrix<f64>>,
}

impl FevdResult {
    pub fn share(&self, variable: &str, shock: &str, step: usize) -> Result<f64> {
        let pos = |n: &str| {
            self.ordering
                .iter()
                .position(|o| o == n)
                .ok_or_else(|| Error::InvalidArgument(format!("'{n}' is not in the FEVD ordering")))
        };
        if step == 0 || step > self.shares.len() {
            return Err(Error::InvalidArgument(format!("FEVD step {step} out of range")));
        }
        Ok(self.shares[step - 1][(pos(variable)?, pos(shock)?)])
    }
}

/// Shares from cumulated squared orthogonalized responses: step h uses
/// `Θ_0 .. Θ_{h-1}`.
pub fn fevd_from_irf(irf: &IrfResult, steps: usize) -> Result<FevdResult> {
    if steps == 0 || steps > irf.responses.len() {
        return Err(Error::InvalidArgument(format!(
            "FEVD needs 1 <= steps <= {}, got {steps}",
            irf.responses.len()
        )));
    }
    let k = irf.ordering.len();
    let mut cum = DMatrix::<f64>::zeros(k, k);
    let mut shares = Vec::with_capacity(steps);
    for theta in irf.responses.iter().take(steps) {
        cum += theta.component_mul(theta);
        let mut s = cum.clone();
        for i in 0..k {
            let total: f64 = cum.row(i).sum();
            for j in 0..k {
                s[(i, j)] = if total > 0.0 { cum[(i, j)] / total } else { 0.0 };
            }
        }
        shares.push(s);
    }
    Ok(FevdResult {
        ordering: irf.ordering.clone(),
        horizons: (1..=steps).collect(),
        shares,
    })
}

pub fn fevd(m: &VecmModel, steps: usize, ordering: &[String]) -> Result<FevdResult> {
    fevd_from_irf(&irf(m, steps, ordering)?, steps)
}

/// Unit-lower `L` and diagonal `d` with `Σ = L diag(d) L'`.
fn ldl(sigma: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let k = sigma.nrows();
    let mut l = DMatrix::identity(k, k);
    let mut d = vec![0.0; k];
    for j in 0..k {
        let mut dj = sigma[(j, j)];
        for c in 0..j {
            dj -= l[(j, c)] * l[(j, c)] * d[c];
        }
        if !(dj > 0.0) {
            return Err(Error::NotPositiveDefinite(format!("LDL pivot {j} is {dj}")));
        }
        d[j] = dj;
        for i in j + 1..k {
            let mut v = sigma[(i, j)];
            for c in 0..j {
                v -= l[(i, c)] * l[(j, c)] * d[c];
            }
            l[(i, j)] = v / dj;
        }
    }
    Ok((l, d))
}

/// Variance decomposition computed without the IRF recursion: `Φ_h` from
/// powers of the companion matrix, shocks from an LDL factorization, and
/// the total from `Σ_h Φ_h Σ Φ_h'`.
pub fn fevd_companion(v: &VarModel, steps: usize, ordering: &[String]) -> Result<FevdResult> {
    if steps == 0 {
        return Err(Error::InvalidArgument("FEVD needs at least one step".into()));
    }
    let k = v.k;
    let perm = permutation(&v.variable_names, ordering)?;
    let sigma = permute_square(&symmetrize(&v.sigma), &perm);
    let (l, d) = ldl(&sigma)?;
    let comp = v.companion();
    let kp = comp.nrows();
    let mut power = DMatrix::<f64>::identity(kp, kp);
    let mut num = DMatrix::<f64>::zeros(k, k);
    let mut total = DMatrix::<f64>::zeros(k, k);
    let mut shares = Vec::with_capacity(steps);
    for _ in 0..steps {
        let phi = permute_square(&power.view((0, 0), (k, k)).into_owned(), &perm);
        let pl = &phi * &l;
        for i in 0..k {
            for j in 0..k {
                num[(i, j)] += pl[(i, j)] * pl[(i, j)] * d[j];
            }
        }
        total += &phi * &sigma * phi.transpose();
        shares.push(DMatrix::from_fn(k, k, |i, j| num[(i, j)] / total[(i, i)]));
        power = &comp * power;
    }
    Ok(FevdResult {
        ordering: ordering.to_vec(),
        horizons: (1..=steps).collect(),
        shares,
    })
}

/// Type-7 sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Rebuilds a level path from the first `p` observed rows, the level VAR
/// and resampled centred residuals.
fn resample_levels(
    var: &VarModel,
    levels: &DMatrix<f64>,
    centred: &DMatrix<f64>,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let (t, k) = levels.shape();
    let p = var.p;
    let n = centred.nrows();
    let mut y = DMatrix::zeros(t, k);
    y.rows_mut(0, p).copy_from(&levels.rows(0, p));
    for row in p..t {
        let draw = rng.gen_range(0..n);
        let mean = var.fitted_at(&y, row, row as f64);
        for v in 0..k {
            y[(row, v)] = mean[v] + centred[(draw, v)];
        }
    }
    y
}

/// Percentile bands from a residual-resampling bootstrap.
///
/// Replication `b` draws from a ChaCha8 generator seeded with `seed` on
/// stream `b`, so output does not depend on the number of threads. Bands
/// are widened where needed so they always contain the point response.
pub fn bootstrap_bands(
    m: &VecmModel,
    horizon: usize,
    ordering: &[String],
    replications: usize,
    seed: u64,
    level: f64,
) -> Result<IrfResult> {
    if replications < 100 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 100 replications, got {replications}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("band level {level} outside (0, 1)")));
    }
    let point = irf(m, horizon, ordering)?;
    let var = vecm_to_var_levels(m);
    let mut centred = m.residuals.clone();
    for mut col in centred.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let names = m.variable_names.clone();

    let draws: Vec<Option<Vec<DMatrix<f64>>>> = (0..replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let y = resample_levels(&var, &m.levels, &centred, &mut rng);
            let d = Dataset::from_matrix(&names, m.start_year, &y).ok()?;
            let refit = fit_vecm(&d, m.p_levels, m.r, m.det_case).ok()?;
            irf(&refit, horizon, ordering).ok().map(|r| r.responses)
        })
        .collect();
    let ok: Vec<&Vec<DMatrix<f64>>> = draws.iter().flatten().collect();
    let failures = replications - ok.len();
    if failures as f64 > MAX_FAILURE_SHARE * replications as f64 {
        return Err(Error::Numerical(format!(
            "{failures} of {replications} bootstrap re-estimations failed"
        )));
    }

    let k = m.k;
    let tail = (1.0 - level) / 2.0;
    let mut lower = Vec::with_capacity(horizon + 1);
    let mut upper = Vec::with_capacity(horizon + 1);
    let mut cell = Vec::with_capacity(ok.len());
    for h in 0..=horizon {
        let mut lo = DMatrix::zeros(k, k);
        let mut up = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                cell.clear();
                cell.extend(ok.iter().map(|r| r[h][(i, j)]));
                cell.sort_by(f64::total_cmp);
                let pt = point.responses[h][(i, j)];
                lo[(i, j)] = quantile_sorted(&cell, tail).min(pt);
                up[(i, j)] = quantile_sorted(&cell, 1.0 - tail).max(pt);
            }
        }
        lower.push(lo);
        upper.push(up);
    }
    Ok(IrfResult {
        lower: Some(lower),
        upper: Some(upper),
        bootstrap: Some(BootstrapInfo {
            interval: "percentile",
            level,
            replications,
            failures,
            seed,
        }),
        ..point
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn var1(a: DMatrix<f64>, sigma: DMatrix<f64>) -> VarModel {
        let k = a.nrows();
        VarModel {
            variable_names: (0..k).map(|i| format!("v{i}")).collect(),
            k,
            p: 1,
            intercepts: DVector::zeros(k),
            trend: None,
            lag_coefficients: vec![a],
            residuals: DMatrix::zeros(0, k),
            sigma,
            log_likelihood: 0.0,
        }
    }

    #[test]
    fn ar1_response_is_geometric() {
        let v = var1(DMatrix::from_element(1, 1, 0.5), DMatrix::identity(1, 1));
        let r = irf_from_var(&v, 8, &["v0".to_string()]).unwrap();
        for h in 0..=8 {
            assert!((r.responses[h][(0, 0)] - 0.5f64.powi(h as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_system_is_decoupled() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.3, -0.6, 0.9]));
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.5]));
        let v = var1(a, s);
        let ord: Vec<String> = vec!["v2".into(), "v0".into(), "v1".into()];
        let r = irf_from_var(&v, 6, &ord).unwrap();
        for m in &r.responses {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert_eq!(m[(i, j)], 0.0);
                    }
                }
            }
        }
        let f = fevd_from_irf(&r, 6).unwrap();
        for s in &f.shares {
            for i in 0..3 {
                assert!((s[(i, i)] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_fevd_paths_agree() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.7]);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 2.0]);
        let v = var1(a, s);
        let ord: Vec<String> = vec!["v1".into(), "v0".into()];
        let f1 = fevd_from_irf(&irf_from_var(&v, 10, &ord).unwrap(), 10).unwrap();
        let f2 = fevd_companion(&v, 10, &ord).unwrap();
        for (x, y) in f1.shares.iter().zip(&f2.shares) {
            assert!((x - y).abs().max() < 1e-12);
        }
    }

    #[test]
    fn ldl_reconstructs() {
        let s = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]);
        let (l, d) = ldl(&s).unwrap();
        let rec = &l * DMatrix::from_diagonal(&DVector::from_vec(d)) * l.transpose();
        assert!((rec - s).abs().max() < 1e-14);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert!((quantile_sorted(&v, 0.1) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn bad_arguments() {
        let v = var1(DMatrix::from_element(1, 1, 0.5), DMatrix::identity(1, 1));
        assert!(irf_from_var(&v, 0, &["v0".to_string()]).is_err());
        assert!(irf_from_var(&v, 3, &["x".to_string()]).is_err());
        let bad = var1(DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, -1.0));
        assert!(irf_from_var(&bad, 3, &["v0".to_string()]).is_err());
    }
}
