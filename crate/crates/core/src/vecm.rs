//! Maximum-likelihood vector error-correction models.
//!
//! `Δy_t = α β' [y_{t-1}; d_t] + Σ_j Γ_j Δy_{t-j} + μ + ε_t`
//!
//! β is taken from the Johansen eigenvectors and, when possible, put in
//! Phillips form (leading r×r block = identity in dataset column order);
//! α, Γ and any unrestricted constant then come from equation-wise OLS of
//! `Δy_t` on the error-correction terms and the lagged differences.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dataset::Dataset;
use crate::dist::{chi2_sf, significance_stars};
use crate::johansen::{eigen_problem, johansen_test, reduced_rank, JohansenCase, JohansenResult};
use crate::linalg::{hstack, log_det_spd};
use crate::linreg::ols;
use crate::varmodel::{select_lag_order, LagSelection};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub stars: String,
}

/// One short-run equation: `Δ<variable>` on the ECTs and lagged differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equation {
    pub variable: String,
    pub coefficients: Vec<Coefficient>,
    pub rss: f64,
    pub df_resid: usize,
}

impl Equation {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VecmModel {
    pub variable_names: Vec<String>,
    pub k: usize,
    /// Lag order of the underlying level VAR.
    pub p_levels: usize,
    /// Number of lagged differences, `p_levels - 1`.
    pub p_diff: usize,
    pub r: usize,
    pub det_case: JohansenCase,
    /// k×r loadings.
    pub alpha: DMatrix<f64>,
    /// (k + restricted)×r cointegrating vectors; the last row holds the
    /// restricted constant or trend coefficient when the case has one.
    pub beta: DMatrix<f64>,
    /// Whether `beta` has an identity leading block in dataset order.
    pub beta_normalized: bool,
    /// `Γ_1 .. Γ_{p_diff}`, k×k.
    pub gamma: Vec<DMatrix<f64>>,
    /// Constant in each equation (for a restricted constant this is `α ρ`).
    pub intercepts: DVector<f64>,
    /// Coefficient on the time index (restricted trend only, `α τ`).
    pub trend: Option<DVector<f64>>,
    /// `ECT_{t-1} = β' [y_{t-1}; d_t]`, one column per vector.
    pub ect_series: DMatrix<f64>,
    /// `[y_{t-1}; d_t]` rows used to build `ect_series`.
    pub ect_regressors: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub log_likelihood: f64,
    pub equations: Vec<Equation>,
    /// Johansen eigenvalues from the same reduced-rank regression.
    pub eigenvalues: Vec<f64>,
    pub n_obs: usize,
    /// Levels the model was fitted on (T×k) and their first year.
    pub levels: DMatrix<f64>,
    pub start_year: i64,
    #[serde(skip)]
    moments: Moments,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Moments {
    s00: DMatrix<f64>,
    s01: DMatrix<f64>,
    s11: DMatrix<f64>,
}

impl VecmModel {
    /// `Π = α β'` (k × (k + restricted)).
    pub fn pi(&self) -> DMatrix<f64> {
        &self.alpha * self.beta.transpose()
    }

    /// Differenced fitted values `Δy_t - ε_t`.
    pub fn fitted_differences(&self) -> DMatrix<f64> {
        let n = self.n_obs;
        let mut fitted = &self.ect_series * self.alpha.transpose();
        for i in 0..n {
            let t = self.p_levels + i;
            // restricted deterministic terms already sit inside the ECT
            let mut row = if self.det_case.has_unrestricted_constant() {
                self.intercepts.clone()
            } else {
                DVector::zeros(self.k)
            };
            for (j, g) in self.gamma.iter().enumerate() {
                let lag = t - 1 - j;
                let dy = (self.levels.row(lag) - self.levels.row(lag - 1)).transpose();
                row += g * dy;
            }
            for v in 0..self.k {
                fitted[(i, v)] += row[v];
            }
        }
        fitted
    }

    /// Δy matrix over the estimation sample.
    pub fn differences(&self) -> DMatrix<f64> {
        let n = self.n_obs;
        DMatrix::from_fn(n, self.k, |i, v| {
            let t = self.p_levels + i;
            self.levels[(t, v)] - self.levels[(t - 1, v)]
        })
    }

    pub fn equation(&self, variable: &str) -> Result<&Equation> {
        self.equations
            .iter()
            .find(|e| e.variable == variable)
            .ok_or_else(|| Error::InvalidArgument(format!("no equation for '{variable}'")))
    }

    pub fn position(&self, variable: &str) -> Result<usize> {
        self.variable_names
            .iter()
            .position(|n| n == variable)
            .ok_or_else(|| Error::InvalidArgument(format!("'{variable}' is not in the model")))
    }

    /// Same model with β re-expressed in Phillips form under `ordering`
    /// (α adjusted so that Π is unchanged).
    pub fn renormalized(&self, ordering: &[String]) -> Result<VecmModel> {
        let (beta_n, transform) = phillips_normalize(&self.beta, &self.variable_names, ordering, self.r)?;
        // β_n = β B1^-1  =>  α_n = α B1'
        let alpha_n = &self.alpha * transform.transpose();
        let ect = &self.ect_regressors * &beta_n;
        let mut out = self.clone();
        out.alpha = alpha_n;
        out.beta = beta_n;
        out.ect_series = ect;
        out.beta_normalized = ordering
            .iter()
            .take(self.r)
            .zip(&self.variable_names)
            .all(|(a, b)| a == b);
        Ok(out)
    }
}

/// Returns `(β B1^-1, B1)` where B1 stacks the rows of β for the first `r`
/// names of `ordering`.
fn phillips_normalize(
    beta: &DMatrix<f64>,
    names: &[String],
    ordering: &[String],
    r: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if ordering.len() < r {
        return Err(Error::InvalidArgument(format!(
            "normalization ordering needs at least {r} names, got {}",
            ordering.len()
        )));
    }
    let mut rows = Vec::with_capacity(r);
    for name in &ordering[..r] {
        let pos = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidArgument(format!("'{name}' is not in the model")))?;
        if rows.contains(&pos) {
            return Err(Error::InvalidArgument(format!("'{name}' repeated in ordering")));
        }
        rows.push(pos);
    }
    let b1 = DMatrix::from_fn(r, r, |i, j| beta[(rows[i], j)]);
    let svd = b1.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin / smax < 1e-10 {
        let workable = workable_ordering(beta, names, r);
        return Err(Error::ReorderRequired(format!(
            "leading block for {:?} is singular; try normalizing on {:?}",
            &ordering[..r],
            workable
        )));
    }
    let inv = b1
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("normalization block inversion failed".into()))?;
    let mut normalized = beta * inv;
    // the identity block is exact by construction; drop the rounding residue
    for (i, &row) in rows.iter().enumerate() {
        for j in 0..r {
            normalized[(row, j)] = if i == j { 1.0 } else { 0.0 };
        }
    }
    Ok((normalized, b1))
}

/// Greedy choice of `r` variables whose β rows are linearly independent.
fn workable_ordering(beta: &DMatrix<f64>, names: &[String], r: usize) -> Vec<String> {
    let k = names.len();
    let mut chosen: Vec<usize> = Vec::new();
    for _ in 0..r {
        let mut best: Option<(f64, usize)> = None;
        for cand in (0..k).filter(|c| !chosen.contains(c)) {
            let mut rows = chosen.clone();
            rows.push(cand);
            let m = DMatrix::from_fn(rows.len(), r, |i, j| beta[(rows[i], j)]);
            let s = m.svd(false, false).singular_values.min();
            if best.map_or(true, |(b, _)| s > b) {
                best = Some((s, cand));
            }
        }
        if let Some((_, c)) = best {
            chosen.push(c);
        }
    }
    chosen.into_iter().map(|i| names[i].clone()).collect()
}

fn short_run_names(names: &[String], p_diff: usize, case: JohansenCase) -> Vec<String> {
    let mut out = Vec::new();
    for j in 1..=p_diff {
        for n in names {
            out.push(format!("Δ{n}(-{j})"));
        }
    }
    if case.has_unrestricted_constant() {
        out.push("const".into());
    }
    out
}

fn gaussian_loglik(sigma: &DMatrix<f64>, n: usize) -> Result<f64> {
    let k = sigma.nrows() as f64;
    let ld = log_det_spd(sigma, "VECM residual covariance")?;
    Ok(-0.5 * n as f64 * (k * (2.0 * PI).ln() + ld + k))
}

/// Fits a VECM with cointegrating rank `r` from a level VAR of order `p_levels`.
pub fn fit_vecm(d: &Dataset, p_levels: usize, r: usize, det_case: JohansenCase) -> Result<VecmModel> {
    d.require_multivariate()?;
    let k = d.n_series();
    if r == 0 {
        return Err(Error::InvalidArgument(
            "cointegrating rank 0: no error-correction term; fit a VAR in first differences instead".into(),
        ));
    }
    if r >= k {
        return Err(Error::InvalidArgument(format!(
            "cointegrating rank {r} = k: the system is stationary in levels; fit a level VAR instead"
        )));
    }
    if p_levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "VECM needs a level lag order >= 2 (at least one lagged difference), got {p_levels}"
        )));
    }
    let levels = d.matrix();
    let names = d.names();
    let rr = reduced_rank(&levels, p_levels, det_case)?;
    let raw_beta = rr.eigenvectors.columns(0, r).into_owned();
    let (beta, beta_normalized) = match phillips_normalize(&raw_beta, &names, &names, r) {
        Ok((b, _)) => (b, true),
        Err(Error::ReorderRequired(_)) => (raw_beta, false),
        Err(e) => return Err(e),
    };
    let n = rr.n;
    let ect_series = &rr.zk * &beta;
    let x = hstack(&[&ect_series, &rr.z1]);
    let p_diff = p_levels - 1;

    let mut coef_names: Vec<String> = (1..=r).map(|i| format!("ECT{i}")).collect();
    coef_names.extend(short_run_names(&names, p_diff, det_case));

    let mut b = DMatrix::zeros(x.ncols(), k);
    let mut residuals = DMatrix::zeros(n, k);
    let mut equations = Vec::with_capacity(k);
    for v in 0..k {
        let y = rr.z0.column(v).into_owned();
        let fit = ols(&y, &x)?;
        for (i, c) in fit.coefficients.iter().enumerate() {
            b[(i, v)] = *c;
        }
        for (i, e) in fit.residuals.iter().enumerate() {
            residuals[(i, v)] = *e;
        }
        let coefficients = coef_names
            .iter()
            .enumerate()
            .map(|(i, name)| Coefficient {
                name: name.clone(),
                estimate: fit.coefficients[i],
                std_error: fit.std_errors[i],
                t_stat: fit.t_stats[i],
                p_value: fit.p_values[i],
                stars: significance_stars(fit.p_values[i]).to_string(),
            })
            .collect();
        equations.push(Equation {
            variable: names[v].clone(),
            coefficients,
            rss: fit.rss,
            df_resid: fit.df_resid(),
        });
    }

    let alpha = b.rows(0, r).transpose();
    let gamma: Vec<DMatrix<f64>> = (0..p_diff)
        .map(|j| b.rows(r + j * k, k).transpose())
        .collect();
    let mut intercepts = DVector::zeros(k);
    let mut trend = None;
    match det_case {
        JohansenCase::NoDeterministic => {}
        JohansenCase::RestrictedConstant => {
            intercepts = &alpha * beta.row(k).transpose();
        }
        JohansenCase::UnrestrictedConstant => {
            intercepts = b.row(r + p_diff * k).transpose();
        }
        JohansenCase::RestrictedTrend => {
            intercepts = b.row(r + p_diff * k).transpose();
            trend = Some(&alpha * beta.row(k).transpose());
        }
    }
    let sigma = residuals.transpose() * &residuals / n as f64;
    let log_likelihood = gaussian_loglik(&sigma, n)?;

    Ok(VecmModel {
        variable_names: names,
        k,
        p_levels,
        p_diff,
        r,
        det_case,
        alpha,
        beta,
        beta_normalized,
        gamma,
        intercepts,
        trend,
        ect_series,
        ect_regressors: rr.zk.clone(),
        residuals,
        sigma,
        log_likelihood,
        equations,
        eigenvalues: rr.eigenvalues.clone(),
        n_obs: n,
        levels,
        start_year: d.time_index()[0],
        moments: Moments {
            s00: rr.s00,
            s01: rr.s01,
            s11: rr.s11,
        },
    })
}

impl VecmModel {
    /// Concentrated log-likelihood `-n/2 (k ln 2π + k + ln|S00| + Σ_{i≤r} ln(1-λ_i))`.
    pub fn concentrated_log_likelihood(&self) -> Result<f64> {
        let ld = log_det_spd(&self.moments.s00, "S00")?;
        let kf = self.k as f64;
        let sum: f64 = self.eigenvalues[..self.r].iter().map(|l| (1.0 - l).ln()).sum();
        Ok(-0.5 * self.n_obs as f64 * (kf * (2.0 * PI).ln() + kf + ld + sum))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaRestrictionResult {
    pub lr_statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub log_likelihood_unrestricted: f64,
    pub log_likelihood_restricted: f64,
    pub restricted_eigenvalues: Vec<f64>,
}

/// Likelihood-ratio test of `α = A ψ` for a k×m matrix `A` (m ≥ r).
pub fn alpha_restriction_test(m: &VecmModel, a: &DMatrix<f64>) -> Result<AlphaRestrictionResult> {
    let k = m.k;
    let cols = a.ncols();
    if a.nrows() != k || cols < m.r || cols > k {
        return Err(Error::InvalidArgument(format!(
            "restriction matrix must be {k}×m with {} <= m <= {k}, got {}×{cols}",
            m.r,
            a.nrows()
        )));
    }
    // Orthonormal basis for span(A) and its complement.
    let mut padded = DMatrix::zeros(k, k);
    padded.columns_mut(0, cols).copy_from(a);
    let qr = padded.qr();
    let q_full = qr.q();
    let rdiag = qr.r();
    for j in 0..cols {
        if rdiag[(j, j)].abs() < 1e-12 * a.column(j).norm().max(1e-300) {
            return Err(Error::InvalidArgument("restriction matrix does not have full column rank".into()));
        }
    }
    let qa = q_full.columns(0, cols).into_owned();
    let qb = q_full.columns(cols, k - cols).into_owned();

    let Moments { s00, s01, s11 } = &m.moments;
    let s_aa = qa.transpose() * s00 * &qa;
    let s_a1 = qa.transpose() * s01;
    let (s_aa_b, s_a1_b, s11_b, ld_bb) = if k > cols {
        let s_ab = qa.transpose() * s00 * &qb;
        let s_bb = qb.transpose() * s00 * &qb;
        let s_b1 = qb.transpose() * s01;
        let s_bb_inv = crate::linalg::inverse_spd(&s_bb, "S_bb")?;
        (
            &s_aa - &s_ab * &s_bb_inv * s_ab.transpose(),
            &s_a1 - &s_ab * &s_bb_inv * &s_b1,
            s11 - s_b1.transpose() * &s_bb_inv * &s_b1,
            log_det_spd(&s_bb, "S_bb")?,
        )
    } else {
        (s_aa, s_a1, s11.clone(), 0.0)
    };
    let (lambda_r, _) = eigen_problem(&s_aa_b, &s_a1_b, &s11_b).map_err(|e| {
        Error::Numerical(format!(
            "restricted reduced-rank estimation failed ({e}); check for collinear levels"
        ))
    })?;
    let n = m.n_obs as f64;
    let kf = k as f64;
    let sum_r: f64 = lambda_r[..m.r].iter().map(|l| (1.0 - l).ln()).sum();
    let ld_aa = log_det_spd(&s_aa_b, "S_aa.b")?;
    let logl_r = -0.5 * n * (kf * (2.0 * PI).ln() + kf + ld_bb + ld_aa + sum_r);
    let logl_u = m.concentrated_log_likelihood()?;
    let lr = (2.0 * (logl_u - logl_r)).max(0.0);
    let df = m.r * (k - cols);
    let p_value = if df == 0 { 1.0 } else { chi2_sf(lr, df as f64) };
    Ok(AlphaRestrictionResult {
        lr_statistic: lr,
        df,
        p_value,
        log_likelihood_unrestricted: logl_u,
        log_likelihood_restricted: logl_r,
        restricted_eigenvalues: lambda_r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakExogeneityResult {
    pub variable: String,
    pub lr_statistic: f64,
    pub p_value: f64,
    pub df: usize,
    pub weakly_exogenous_at_10pct: bool,
}

/// LR test that `variable`'s row of α is zero (χ² with r degrees of freedom).
pub fn weak_exogeneity_test(m: &VecmModel, variable: &str) -> Result<WeakExogeneityResult> {
    let j = m.position(variable)?;
    let k = m.k;
    let keep: Vec<usize> = (0..k).filter(|&i| i != j).collect();
    let a = DMatrix::from_fn(k, k - 1, |i, c| if i == keep[c] { 1.0 } else { 0.0 });
    let res = alpha_restriction_test(m, &a)?;
    Ok(WeakExogeneityResult {
        variable: variable.to_string(),
        lr_statistic: res.lr_statistic,
        p_value: res.p_value,
        df: res.df,
        weakly_exogenous_at_10pct: res.p_value >= 0.10,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetChain {
    pub kept: Vec<String>,
    pub lag_selection: LagSelection,
    pub johansen: JohansenResult,
    pub vecm: VecmModel,
}

/// Re-runs lag selection, the Johansen test and VECM estimation on `keep`.
///
/// The level lag order defaults to the lag-selection recommendation and the
/// rank to the Johansen trace decision.
pub fn restrict_to_subset(
    d: &Dataset,
    keep: &[String],
    max_lag: usize,
    p_levels: Option<usize>,
    det_case: JohansenCase,
) -> Result<SubsetChain> {
    if keep.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a restricted system needs at least 2 variables, got {}",
            keep.len()
        )));
    }
    let sub = d.subset(keep)?;
    let lag_selection = select_lag_order(&sub, max_lag)?;
    let p = p_levels.unwrap_or(lag_selection.recommended);
    let johansen = johansen_test(&sub, p, det_case)?;
    let vecm = fit_vecm(&sub, p, johansen.decided_rank, det_case)?;
    Ok(SubsetChain {
        kept: keep.to_vec(),
        lag_selection,
        johansen,
        vecm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongRunVector {
    pub normalization_variable: String,
    /// Coefficients on every variable in model order, then the restricted
    /// deterministic term (labelled `const` or `trend`) when present.
    pub coefficients: Vec<(String, f64)>,
    /// `y_norm = c_1 x_1 + ...` with right-hand signs reversed; zero
    /// coefficients and deterministic terms are left out.
    pub presentation: String,
}

/// Phillips-normalized cointegrating vectors: the first `r` names of
/// `ordering` get an identity block.
pub fn normalize_long_run(m: &VecmModel, ordering: &[String]) -> Result<Vec<LongRunVector>> {
    if m.r == 0 {
        return Err(Error::InvalidArgument("model has no cointegrating vectors".into()));
    }
    let (beta_n, _) = phillips_normalize(&m.beta, &m.variable_names, ordering, m.r)?;
    let det_label = match m.det_case {
        JohansenCase::RestrictedConstant => Some("const"),
        JohansenCase::RestrictedTrend => Some("trend"),
        _ => None,
    };
    let mut out = Vec::with_capacity(m.r);
    for (i, norm_var) in ordering[..m.r].iter().enumerate() {
        let col = beta_n.column(i);
        let mut coefficients: Vec<(String, f64)> = m
            .variable_names
            .iter()
            .enumerate()
            .map(|(v, name)| (name.clone(), col[v]))
            .collect();
        // Identity block entries are exact by construction.
        for (j, other) in ordering[..m.r].iter().enumerate() {
            let pos = m.position(other)?;
            coefficients[pos].1 = if i == j { 1.0 } else { 0.0 };
        }
        if let Some(label) = det_label {
            coefficients.push((label.to_string(), col[m.k]));
        }
        let rhs: Vec<String> = coefficients
            .iter()
            .take(m.k)
            .filter(|(name, c)| name != norm_var && c.abs() > 1e-12)
            .map(|(name, c)| format!("{:.4}·{}", -c, name))
            .collect();
        let presentation = if rhs.is_empty() {
            format!("{norm_var} = 0")
        } else {
            format!("{norm_var} = {}", rhs.join(" + ").replace("+ -", "- "))
        };
        out.push(LongRunVector {
            normalization_variable: norm_var.clone(),
            coefficients,
            presentation,
        });
    }
    Ok(out)
}
