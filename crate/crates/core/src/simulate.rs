//! Seeded data-generating processes for fixtures and Monte Carlo checks.
//!
//! All kinds draw Gaussian innovations from [`ChaCha8Rng`] seeded with
//! `seed_from_u64(seed)` on stream `stream` (0 by default); at each period
//! the k standard normals are drawn in variable order and coloured by the
//! lower Cholesky factor of the innovation covariance. Changing the
//! generator changes every fixture, so it is part of the public contract.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::linalg::cholesky_lower;
use crate::varmodel::VarModel;
use crate::{Error, Result};

pub const STATIONARY_BURN_IN: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum DgpKind {
    /// `y_t = ε_t`, ε ~ N(0, cov).
    WhiteNoise { cov: DMatrix<f64> },
    /// `y_t = y_{t-1} + ε_t`, `y_0 = ε_0`.
    RandomWalk { cov: DMatrix<f64> },
    /// `y_t = c + φ y_{t-1} + σ ε_t`.
    Ar1 { intercept: f64, phi: f64, sd: f64 },
    /// Stationary `y_t = c + Σ A_j y_{t-j} + ε_t`.
    Var {
        intercept: DVector<f64>,
        lags: Vec<DMatrix<f64>>,
        cov: DMatrix<f64>,
    },
    /// `Δy_t = c + α β' y_{t-1} + Σ Γ_j Δy_{t-j} + ε_t` with rank(αβ') = r.
    Vecm {
        alpha: DMatrix<f64>,
        beta: DMatrix<f64>,
        gamma: Vec<DMatrix<f64>>,
        intercept: DVector<f64>,
        cov: DMatrix<f64>,
    },
    /// `e_t = sqrt(h_t) z_t`, `h_t = ω + a e_{t-1}²`.
    Arch1 { omega: f64, a: f64 },
}

impl DgpKind {
    pub fn label(&self) -> &'static str {
        match self {
            DgpKind::WhiteNoise { .. } => "white_noise",
            DgpKind::RandomWalk { .. } => "random_walk",
            DgpKind::Ar1 { .. } => "ar1",
            DgpKind::Var { .. } => "var",
            DgpKind::Vecm { .. } => "vecm",
            DgpKind::Arch1 { .. } => "arch1",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            DgpKind::WhiteNoise { cov } | DgpKind::RandomWalk { cov } => cov.nrows(),
            DgpKind::Ar1 { .. } | DgpKind::Arch1 { .. } => 1,
            DgpKind::Var { cov, .. } | DgpKind::Vecm { cov, .. } => cov.nrows(),
        }
    }

    /// White noise keeps no burn-in so that a random walk is exactly the
    /// cumulative sum of the white noise drawn with the same seed.
    pub fn default_burn_in(&self) -> usize {
        match self {
            DgpKind::WhiteNoise { .. } | DgpKind::RandomWalk { .. } | DgpKind::Vecm { .. } => 0,
            DgpKind::Ar1 { .. } | DgpKind::Var { .. } | DgpKind::Arch1 { .. } => STATIONARY_BURN_IN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub t: usize,
    /// `None` uses [`DgpKind::default_burn_in`].
    pub burn_in: Option<usize>,
    pub seed: u64,
    pub stream: u64,
    /// Defaults to `y1 .. yk`.
    pub names: Option<Vec<String>>,
    pub start_year: i64,
}

impl DgpSpec {
    pub fn new(kind: DgpKind, t: usize, seed: u64) -> Self {
        DgpSpec {
            kind,
            t,
            burn_in: None,
            seed,
            stream: 0,
            names: None,
            start_year: 1,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        self.names = Some(names);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let spec_err = |m: String| Err(Error::InvalidArgument(format!("{} DGP: {m}", self.kind.label())));
        if self.t == 0 {
            return spec_err("length must be positive".into());
        }
        let k = self.kind.dimension();
        if k == 0 {
            return spec_err("dimension must be positive".into());
        }
        if let Some(n) = &self.names {
            if n.len() != k {
                return spec_err(format!("{} names for {k} variables", n.len()));
            }
        }
        match &self.kind {
            DgpKind::WhiteNoise { cov } | DgpKind::RandomWalk { cov } => check_cov(cov, k),
            DgpKind::Ar1 { phi, sd, .. } => {
                if !(phi.abs() < 1.0) {
                    return spec_err(format!("|phi| = {} is not < 1", phi.abs()));
                }
                if !(*sd > 0.0) {
                    return spec_err(format!("sd {sd} must be positive"));
                }
                Ok(())
            }
            DgpKind::Arch1 { omega, a } => {
                if !(*omega > 0.0) || !(*a >= 0.0 && *a < 1.0) {
                    return spec_err(format!("need omega > 0 and 0 <= a < 1, got {omega}, {a}"));
                }
                Ok(())
            }
            DgpKind::Var { intercept, lags, cov } => {
                check_cov(cov, k)?;
                if lags.is_empty() || lags.iter().any(|a| a.shape() != (k, k)) || intercept.len() != k {
                    return spec_err("lag matrices must be k×k and the intercept length k".into());
                }
                let rho = level_var(intercept, lags.clone(), k).companion_moduli()[0];
                if rho >= 1.0 {
                    return spec_err(format!("spectral radius {rho:.6} is not < 1"));
                }
                Ok(())
            }
            DgpKind::Vecm { alpha, beta, gamma, intercept, cov } => {
                check_cov(cov, k)?;
                let r = alpha.ncols();
                if alpha.nrows() != k || beta.shape() != (k, r) || intercept.len() != k {
                    return spec_err("alpha and beta must be k×r, intercept length k".into());
                }
                if gamma.iter().any(|g| g.shape() != (k, k)) {
                    return spec_err("short-run matrices must be k×k".into());
                }
                if r == 0 || r >= k {
                    return spec_err(format!("rank {r} must satisfy 0 < r < k = {k}"));
                }
                let pi = alpha * beta.transpose();
                let sv = pi.clone().svd(false, false).singular_values;
                let tol = 1e-8 * sv.max().max(1.0);
                let rank = sv.iter().filter(|s| **s > tol).count();
                if rank != r {
                    return spec_err(format!("rank(alpha beta') = {rank}, declared {r}"));
                }
                let moduli = level_var(intercept, vecm_level_lags(&pi, gamma, k), k).companion_moduli();
                if moduli[k - r] >= 1.0 - 1e-8 {
                    return spec_err(format!(
                        "error-correction dynamics are not stable: root modulus {:.6} beyond the {} unit roots",
                        moduli[k - r],
                        k - r
                    ));
                }
                Ok(())
            }
        }
    }
}

fn check_cov(cov: &DMatrix<f64>, k: usize) -> Result<()> {
    if cov.shape() != (k, k) {
        return Err(Error::InvalidArgument(format!("innovation covariance must be {k}×{k}")));
    }
    cholesky_lower(cov, "innovation covariance").map(|_| ())
}

fn vecm_level_lags(pi: &DMatrix<f64>, gamma: &[DMatrix<f64>], k: usize) -> Vec<DMatrix<f64>> {
    let p = gamma.len() + 1;
    (1..=p)
        .map(|j| {
            let mut a = DMatrix::zeros(k, k);
            if j == 1 {
                a += DMatrix::identity(k, k) + pi;
            }
            if j <= gamma.len() {
                a += &gamma[j - 1];
            }
            if j >= 2 {
                a -= &gamma[j - 2];
            }
            a
        })
        .collect()
}

fn level_var(intercept: &DVector<f64>, lags: Vec<DMatrix<f64>>, k: usize) -> VarModel {
    VarModel {
        variable_names: (1..=k).map(|i| format!("y{i}")).collect(),
        k,
        p: lags.len(),
        intercepts: intercept.clone(),
        trend: None,
        lag_coefficients: lags,
        residuals: DMatrix::zeros(0, k),
        sigma: DMatrix::identity(k, k),
        log_likelihood: 0.0,
    }
}

/// `n` rows of N(0, cov) draws.
fn innovations(rng: &mut ChaCha8Rng, n: usize, cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = cov.nrows();
    let l = cholesky_lower(cov, "innovation covariance")?;
    let mut out = DMatrix::zeros(n, k);
    let mut z = DVector::zeros(k);
    for i in 0..n {
        for v in 0..k {
            z[v] = StandardNormal.sample(rng);
        }
        let e = &l * &z;
        out.row_mut(i).copy_from(&e.transpose());
    }
    Ok(out)
}

fn recurse_levels(lags: &[DMatrix<f64>], intercept: &DVector<f64>, eps: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = eps.shape();
    let mut y = DMatrix::zeros(n, k);
    for t in 0..n {
        let mut row = intercept.clone() + eps.row(t).transpose();
        for (j, a) in lags.iter().enumerate() {
            if t > j {
                row += a * y.row(t - j - 1).transpose();
            }
        }
        y.row_mut(t).copy_from(&row.transpose());
    }
    y
}

/// Draws one dataset; identical `(spec, seed, stream)` give identical output.
pub fn generate(spec: &DgpSpec) -> Result<Dataset> {
    spec.validate()?;
    let k = spec.kind.dimension();
    let burn = spec.burn_in.unwrap_or_else(|| spec.kind.default_burn_in());
    let total = burn + spec.t;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.stream);

    let full = match &spec.kind {
        DgpKind::WhiteNoise { cov } => innovations(&mut rng, total, cov)?,
        DgpKind::RandomWalk { cov } => {
            let mut y = innovations(&mut rng, total, cov)?;
            for t in 1..total {
                for v in 0..k {
                    y[(t, v)] += y[(t - 1, v)];
                }
            }
            y
        }
        DgpKind::Ar1 { intercept, phi, sd } => {
            let eps = innovations(&mut rng, total, &DMatrix::from_element(1, 1, sd * sd))?;
            recurse_levels(
                &[DMatrix::from_element(1, 1, *phi)],
                &DVector::from_element(1, *intercept),
                &eps,
            )
        }
        DgpKind::Var { intercept, lags, cov } => {
            let eps = innovations(&mut rng, total, cov)?;
            recurse_levels(lags, intercept, &eps)
        }
        DgpKind::Vecm { alpha, beta, gamma, intercept, cov } => {
            let eps = innovations(&mut rng, total, cov)?;
            let lags = vecm_level_lags(&(alpha * beta.transpose()), gamma, k);
            recurse_levels(&lags, intercept, &eps)
        }
        DgpKind::Arch1 { omega, a } => {
            let mut y = DMatrix::zeros(total, 1);
            let mut prev: f64 = 0.0;
            for t in 0..total {
                let z: f64 = StandardNormal.sample(&mut rng);
                let e = (omega + a * prev * prev).sqrt() * z;
                y[(t, 0)] = e;
                prev = e;
            }
            y
        }
    };
    let data = full.rows(burn, spec.t).into_owned();
    let names = spec
        .names
        .clone()
        .unwrap_or_else(|| (1..=k).map(|i| format!("y{i}")).collect());
    Dataset::from_matrix(&names, spec.start_year, &data)
}
