//! Johansen cointegration rank test by reduced-rank regression.
//!
//! For a VAR(p) in levels the procedure concentrates out the short-run
//! dynamics: `R0` holds residuals of `Δy_t` and `R1` residuals of the
//! lagged levels (plus any restricted deterministic term), both regressed on
//! `Δy_{t-1} .. Δy_{t-p+1}` and the unrestricted deterministic terms. The
//! eigenvalues of `S11^-1 S10 S00^-1 S01` give the canonical correlations
//! between the two residual sets.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::dataset::Dataset;
use crate::linalg::{cholesky_lower, diff_rows, hstack, inverse_spd, log_det_spd, moment, ones, residualize};
use crate::{Error, Result};

/// Placement of deterministic terms in the error-correction model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum JohansenCase {
    /// No constant or trend anywhere.
    NoDeterministic,
    /// Constant inside the cointegrating relation only.
    RestrictedConstant,
    /// Unrestricted constant in the short-run equations.
    UnrestrictedConstant,
    /// Trend inside the cointegrating relation plus an unrestricted constant.
    RestrictedTrend,
}

impl JohansenCase {
    pub fn label(self) -> &'static str {
        match self {
            JohansenCase::NoDeterministic => "none",
            JohansenCase::RestrictedConstant => "restricted_constant",
            JohansenCase::UnrestrictedConstant => "unrestricted_constant",
            JohansenCase::RestrictedTrend => "restricted_trend",
        }
    }

    /// Number of deterministic rows appended to β.
    pub fn restricted_terms(self) -> usize {
        match self {
            JohansenCase::RestrictedConstant | JohansenCase::RestrictedTrend => 1,
            _ => 0,
        }
    }

    pub fn has_unrestricted_constant(self) -> bool {
        matches!(
            self,
            JohansenCase::UnrestrictedConstant | JohansenCase::RestrictedTrend
        )
    }
}

impl std::str::FromStr for JohansenCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Self::NoDeterministic),
            "restricted_constant" | "const" | "constant" => Ok(Self::RestrictedConstant),
            "unrestricted_constant" | "drift" => Ok(Self::UnrestrictedConstant),
            "restricted_trend" | "trend" => Ok(Self::RestrictedTrend),
            other => Err(Error::InvalidArgument(format!(
                "unknown Johansen case '{other}' (none, restricted_constant, unrestricted_constant, restricted_trend)"
            ))),
        }
    }
}

// Critical values indexed by k - r = 1..10; columns 90%, 95%, 99%.
// Restricted constant and restricted trend: Osterwald-Lenum (1992), tables 1* and 2*.
// No deterministic and unrestricted constant: MacKinnon, Haug and Michelis (1999).
const EIGEN_RCONST: [[f64; 3]; 10] = [
    [7.52, 9.24, 12.97],
    [13.75, 15.67, 20.20],
    [19.77, 22.00, 26.81],
    [25.56, 28.14, 33.24],
    [31.66, 34.40, 39.79],
    [37.45, 40.30, 46.82],
    [43.25, 46.45, 51.91],
    [48.91, 52.00, 57.95],
    [54.35, 57.42, 63.71],
    [60.25, 63.57, 69.94],
];
const TRACE_RCONST: [[f64; 3]; 10] = [
    [7.52, 9.24, 12.97],
    [17.85, 19.96, 24.60],
    [32.00, 34.91, 41.07],
    [49.65, 53.12, 60.16],
    [71.86, 76.07, 84.45],
    [97.18, 102.14, 111.01],
    [126.58, 131.70, 143.09],
    [159.48, 165.58, 177.20],
    [196.37, 202.92, 215.74],
    [236.54, 244.15, 257.68],
];
const EIGEN_RTREND: [[f64; 3]; 10] = [
    [10.49, 12.25, 16.26],
    [16.85, 18.96, 23.65],
    [23.11, 25.54, 30.34],
    [29.12, 31.46, 36.65],
    [34.75, 37.52, 42.36],
    [40.91, 43.97, 49.51],
    [46.32, 49.42, 54.71],
    [52.16, 55.50, 62.46],
    [57.87, 61.29, 67.88],
    [63.18, 66.23, 73.73],
];
const TRACE_RTREND: [[f64; 3]; 10] = [
    [10.49, 12.25, 16.26],
    [22.76, 25.32, 30.45],
    [39.06, 42.44, 48.45],
    [59.14, 62.99, 70.05],
    [83.20, 87.31, 96.58],
    [110.42, 114.90, 124.75],
    [141.01, 146.76, 158.49],
    [176.67, 182.82, 196.08],
    [215.17, 222.21, 234.41],
    [256.72, 263.42, 279.07],
];
const EIGEN_NONE: [[f64; 3]; 10] = [
    [2.9762, 4.1296, 6.9406],
    [9.4748, 11.2246, 15.0923],
    [15.7175, 17.7961, 22.2519],
    [21.8370, 24.1592, 29.0609],
    [27.9160, 30.4428, 35.7359],
    [33.9271, 36.6301, 42.2333],
    [39.9085, 42.7679, 48.6606],
    [45.8930, 48.8795, 55.0335],
    [51.8528, 54.9629, 61.3449],
    [57.7954, 61.0404, 67.6415],
];
const TRACE_NONE: [[f64; 3]; 10] = [
    [2.9762, 4.1296, 6.9406],
    [10.4741, 12.3212, 16.3640],
    [21.7781, 24.2761, 29.5147],
    [37.0339, 40.1749, 46.5716],
    [56.2839, 60.0627, 67.6367],
    [79.5329, 83.9383, 92.7136],
    [106.7351, 111.7797, 121.7375],
    [137.9954, 143.6691, 154.7977],
    [173.2292, 179.5199, 191.8122],
    [212.4721, 219.4051, 232.8291],
];
const EIGEN_UCONST: [[f64; 3]; 10] = [
    [2.7055, 3.8415, 6.6349],
    [12.2971, 14.2639, 18.5200],
    [18.8928, 21.1314, 25.8650],
    [25.1236, 27.5858, 32.7172],
    [31.2379, 33.8777, 39.3693],
    [37.2786, 40.0763, 45.8662],
    [43.2947, 46.2299, 52.3069],
    [49.2855, 52.3622, 58.6634],
    [55.2412, 58.4332, 64.9960],
    [61.2041, 64.5040, 71.2525],
];
const TRACE_UCONST: [[f64; 3]; 10] = [
    [2.7055, 3.8415, 6.6349],
    [13.4294, 15.4943, 19.9349],
    [27.0669, 29.7961, 35.4628],
    [44.4929, 47.8545, 54.6815],
    [65.8202, 69.8189, 77.8202],
    [91.1090, 95.7542, 104.9637],
    [120.3673, 125.6185, 135.9825],
    [153.6341, 159.5290, 171.0905],
    [190.8714, 197.3772, 210.0366],
    [232.1030, 239.2468, 253.2526],
];

/// Largest `k - r` covered by the embedded tables.
pub const MAX_TABLE_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JohansenCriticalValues {
    pub pct10: f64,
    pub pct5: f64,
    pub pct1: f64,
}

/// `(max-eigenvalue, trace)` critical values for `dim = k - r`.
pub fn critical_values(
    case: JohansenCase,
    dim: usize,
) -> Result<(JohansenCriticalValues, JohansenCriticalValues)> {
    if dim == 0 || dim > MAX_TABLE_DIM {
        return Err(Error::UnsupportedDimension(format!(
            "critical values cover k - r in 1..={MAX_TABLE_DIM}, got {dim}"
        )));
    }
    let (e, t) = match case {
        JohansenCase::NoDeterministic => (&EIGEN_NONE, &TRACE_NONE),
        JohansenCase::RestrictedConstant => (&EIGEN_RCONST, &TRACE_RCONST),
        JohansenCase::UnrestrictedConstant => (&EIGEN_UCONST, &TRACE_UCONST),
        JohansenCase::RestrictedTrend => (&EIGEN_RTREND, &TRACE_RTREND),
    };
    let row = |r: &[f64; 3]| JohansenCriticalValues {
        pct10: r[0],
        pct5: r[1],
        pct1: r[2],
    };
    Ok((row(&e[dim - 1]), row(&t[dim - 1])))
}

/// Solves `|λ S11 - S10 S00^-1 S01| = 0` through the Cholesky factor of S11.
///
/// Returns eigenvalues in descending order and eigenvectors as columns,
/// normalized so that `V' S11 V = I`.
pub fn eigen_problem(
    s00: &DMatrix<f64>,
    s01: &DMatrix<f64>,
    s11: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let l = cholesky_lower(s11, "S11").map_err(|e| degenerate(e, "S11"))?;
    let s00_inv = inverse_spd(s00, "S00").map_err(|e| degenerate(e, "S00"))?;
    let n1 = s11.nrows();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(n1, n1))
        .ok_or_else(|| Error::Numerical("S11 Cholesky factor is singular".into()))?;
    let s10 = s01.transpose();
    let m = &linv * &s10 * &s00_inv * s01 * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n1).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = Vec::with_capacity(n1);
    let mut vectors = DMatrix::zeros(n1, n1);
    for (dst, &src) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        if lambda >= 1.0 - 1e-12 || !lambda.is_finite() {
            return Err(Error::Numerical(format!(
                "canonical correlation {lambda} is not below one; the levels are perfectly predictable"
            )));
        }
        values.push(lambda.max(0.0));
        let v = linv.transpose() * eig.eigenvectors.column(src);
        vectors.set_column(dst, &v);
    }
    Ok((values, vectors))
}

fn degenerate(e: Error, what: &str) -> Error {
    match e {
        Error::NotPositiveDefinite(m) => Error::Numerical(format!("{what} is singular: {m}")),
        other => other,
    }
}

/// Concentrated regression matrices shared by the rank test and the VECM.
#[derive(Debug, Clone)]
pub struct ReducedRank {
    pub k: usize,
    /// VAR lag order in levels.
    pub p: usize,
    pub case: JohansenCase,
    /// Effective sample `T - p`.
    pub n: usize,
    /// `Δy_t`, n×k.
    pub z0: DMatrix<f64>,
    /// `[y_{t-1}, restricted deterministic]`, n×(k + restricted).
    pub zk: DMatrix<f64>,
    /// `[Δy_{t-1} .. Δy_{t-p+1}, unrestricted deterministic]`.
    pub z1: DMatrix<f64>,
    pub r0: DMatrix<f64>,
    pub r1: DMatrix<f64>,
    pub s00: DMatrix<f64>,
    pub s01: DMatrix<f64>,
    pub s11: DMatrix<f64>,
    /// All eigenvalues (length k + restricted), descending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, `V' S11 V = I`.
    pub eigenvectors: DMatrix<f64>,
}

impl ReducedRank {
    /// Gaussian log-likelihood of the VECM with cointegrating rank `r`.
    pub fn log_likelihood(&self, r: usize) -> Result<f64> {
        let ld = log_det_spd(&self.s00, "S00")?;
        let kf = self.k as f64;
        let sum: f64 = self.eigenvalues[..r].iter().map(|l| (1.0 - l).ln()).sum();
        Ok(-0.5 * self.n as f64 * (kf * (2.0 * PI).ln() + kf + ld + sum))
    }

    /// Number of short-run regressors per equation (lagged differences and
    /// unrestricted deterministic terms).
    pub fn n_short_run(&self) -> usize {
        self.z1.ncols()
    }
}

/// Builds the reduced-rank regression for a level VAR of order `p`.
pub fn reduced_rank(data: &DMatrix<f64>, p: usize, case: JohansenCase) -> Result<ReducedRank> {
    let (t, k) = data.shape();
    if p == 0 {
        return Err(Error::InvalidArgument("Johansen lag order must be >= 1".into()));
    }
    if t <= p || t - p <= k * p {
        return Err(Error::InsufficientData(format!(
            "Johansen test with p={p}, k={k} needs T - p > k p, got T={t}"
        )));
    }
    let n = t - p;
    let dy = diff_rows(data); // row i is y_{i+1} - y_i
    // level row t (p..T) <-> dy row t-1
    let z0 = dy.rows(p - 1, n).into_owned();
    let mut lagged = DMatrix::zeros(n, k * (p - 1));
    for i in 0..n {
        let t_row = p + i;
        for j in 1..p {
            for v in 0..k {
                lagged[(i, (j - 1) * k + v)] = dy[(t_row - 1 - j, v)];
            }
        }
    }
    let levels = data.rows(p - 1, n).into_owned();
    let time = DMatrix::from_fn(n, 1, |i, _| (p + i) as f64);
    let zk = match case {
        JohansenCase::RestrictedConstant => hstack(&[&levels, &ones(n)]),
        JohansenCase::RestrictedTrend => hstack(&[&levels, &time]),
        _ => levels,
    };
    let z1 = if case.has_unrestricted_constant() {
        hstack(&[&lagged, &ones(n)])
    } else {
        lagged
    };
    let r0 = residualize(&z0, &z1)?;
    let r1 = residualize(&zk, &z1)?;
    let s00 = moment(&r0, &r0, n);
    let s01 = moment(&r0, &r1, n);
    let s11 = moment(&r1, &r1, n);
    let (eigenvalues, eigenvectors) = eigen_problem(&s00, &s01, &s11)?;
    Ok(ReducedRank {
        k,
        p,
        case,
        n,
        z0,
        zk,
        z1,
        r0,
        r1,
        s00,
        s01,
        s11,
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    /// Null hypothesis `rank <= r`.
    pub r: usize,
    pub eigenvalue: f64,
    pub eigen_stat: f64,
    pub trace_stat: f64,
    pub eigen_critical: JohansenCriticalValues,
    pub trace_critical: JohansenCriticalValues,
    pub eigen_rejects_5pct: bool,
    pub trace_rejects_5pct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JohansenResult {
    pub variable_names: Vec<String>,
    pub k: usize,
    pub lags: usize,
    pub det_case: JohansenCase,
    pub n_obs: usize,
    /// The k largest eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub eigen_stats: Vec<f64>,
    pub trace_stats: Vec<f64>,
    pub rows: Vec<RankRow>,
    /// Smallest r whose trace null is not rejected at 5% (k if all are).
    pub decided_rank: usize,
    /// Same rule applied to the max-eigenvalue statistics.
    pub eigen_decided_rank: usize,
    /// Candidate cointegrating vectors as columns (k + restricted rows).
    pub eigenvectors: DMatrix<f64>,
}

impl JohansenCriticalValues {
    /// Critical value for a 1%, 5% or 10% test.
    pub fn at(&self, level: f64) -> f64 {
        if level <= 0.01 {
            self.pct1
        } else if level <= 0.05 {
            self.pct5
        } else {
            self.pct10
        }
    }
}

impl JohansenResult {
    /// Sequential trace-test rank at `level` (1%, 5% or 10%).
    pub fn rank_at(&self, level: f64) -> usize {
        self.rows
            .iter()
            .position(|row| row.trace_stat <= row.trace_critical.at(level))
            .unwrap_or(self.k)
    }

    /// Sequential max-eigenvalue rank at `level`.
    pub fn eigen_rank_at(&self, level: f64) -> usize {
        self.rows
            .iter()
            .position(|row| row.eigen_stat <= row.eigen_critical.at(level))
            .unwrap_or(self.k)
    }
}

/// Eigen and trace statistics for eigenvalues λ_1 ≥ .. ≥ λ_k:
/// `eigen[r] = -n ln(1 - λ_{r+1})`, `trace[r] = eigen[r] + trace[r+1]`.
///
/// The eigen statistics are snapped to a dyadic grid two bits finer than the
/// largest representable step at the total's magnitude, so every partial sum
/// and difference is exact in f64 and the recurrence holds with no rounding.
pub fn rank_statistics(eigenvalues: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let raw: Vec<f64> = eigenvalues
        .iter()
        .map(|l| -(n as f64) * (1.0 - l).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let eigen: Vec<f64> = if total.is_finite() && total > 0.0 {
        let quantum = 2f64.powi(total.log2().ceil() as i32 + 1 - 50);
        raw.iter().map(|e| (e / quantum).round() * quantum).collect()
    } else {
        raw
    };
    let mut trace = vec![0.0; eigen.len()];
    let mut acc = 0.0;
    for r in (0..eigen.len()).rev() {
        acc = eigen[r] + acc;
        trace[r] = acc;
    }
    (eigen, trace)
}

pub fn johansen_test(d: &Dataset, p: usize, det_case: JohansenCase) -> Result<JohansenResult> {
    d.require_multivariate()?;
    let k = d.n_series();
    if k > MAX_TABLE_DIM {
        return Err(Error::UnsupportedDimension(format!(
            "Johansen tables cover up to {MAX_TABLE_DIM} series, got {k}"
        )));
    }
    let rr = reduced_rank(&d.matrix(), p, det_case)?;
    let eigenvalues = rr.eigenvalues[..k].to_vec();
    let (eigen_stats, trace_stats) = rank_statistics(&eigenvalues, rr.n);
    let mut rows = Vec::with_capacity(k);
    for r in 0..k {
        let (ecv, tcv) = critical_values(det_case, k - r)?;
        rows.push(RankRow {
            r,
            eigenvalue: eigenvalues[r],
            eigen_stat: eigen_stats[r],
            trace_stat: trace_stats[r],
            eigen_critical: ecv,
            trace_critical: tcv,
            eigen_rejects_5pct: eigen_stats[r] > ecv.pct5,
            trace_rejects_5pct: trace_stats[r] > tcv.pct5,
        });
    }
    let decided_rank = rows.iter().position(|row| !row.trace_rejects_5pct).unwrap_or(k);
    let eigen_decided_rank = rows.iter().position(|row| !row.eigen_rejects_5pct).unwrap_or(k);
    let eigenvectors = rr.eigenvectors.columns(0, k).into_owned();
    Ok(JohansenResult {
        variable_names: d.names(),
        k,
        lags: p,
        det_case,
        n_obs: rr.n,
        eigenvalues,
        eigen_stats,
        trace_stats,
        rows,
        decided_rank,
        eigen_decided_rank,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cross_moment_gives_zero_eigenvalues() {
        let s00 = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let s11 = DMatrix::from_row_slice(2, 2, &[1.5, -0.2, -0.2, 0.7]);
        let (vals, _) = eigen_problem(&s00, &DMatrix::zeros(2, 2), &s11).unwrap();
        assert!(vals.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn identity_moments_give_squared_diagonal() {
        let id = DMatrix::identity(3, 3);
        let s01 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.3, 0.8, 0.5]));
        let (vals, vecs) = eigen_problem(&id, &s01, &id).unwrap();
        let expect = [0.64, 0.25, 0.09];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-14);
        }
        assert!((vecs.transpose() * &vecs - DMatrix::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn non_positive_definite_inputs_fail() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let id = DMatrix::identity(2, 2);
        assert!(eigen_problem(&bad, &DMatrix::zeros(2, 2), &id).is_err());
        assert!(eigen_problem(&id, &DMatrix::zeros(2, 2), &bad).is_err());
    }

    #[test]
    fn tables_match_restricted_constant_ladder() {
        let trace: Vec<f64> = (1..=5)
            .map(|d| critical_values(JohansenCase::RestrictedConstant, d).unwrap().1.pct5)
            .collect();
        assert_eq!(trace, vec![9.24, 19.96, 34.91, 53.12, 76.07]);
        let eig: Vec<f64> = (2..=5)
            .map(|d| critical_values(JohansenCase::RestrictedConstant, d).unwrap().0.pct5)
            .collect();
        assert_eq!(eig, vec![15.67, 22.00, 28.14, 34.40]);
        assert!(critical_values(JohansenCase::RestrictedConstant, 11).is_err());
        assert!(critical_values(JohansenCase::RestrictedConstant, 0).is_err());
    }

    #[test]
    fn tables_are_monotone() {
        for case in [
            JohansenCase::NoDeterministic,
            JohansenCase::RestrictedConstant,
            JohansenCase::UnrestrictedConstant,
            JohansenCase::RestrictedTrend,
        ] {
            for d in 1..=MAX_TABLE_DIM {
                let (e, t) = critical_values(case, d).unwrap();
                assert!(e.pct10 < e.pct5 && e.pct5 < e.pct1);
                assert!(t.pct10 < t.pct5 && t.pct5 < t.pct1);
                assert!(t.pct5 >= e.pct5 - 1e-9);
                if d > 1 {
                    let (pe, pt) = critical_values(case, d - 1).unwrap();
                    assert!(e.pct5 > pe.pct5 && t.pct5 > pt.pct5);
                }
            }
        }
    }

    #[test]
    fn trace_recurrence_is_exact() {
        let (e, t) = rank_statistics(&[0.6, 0.31, 0.12, 0.013], 48);
        for r in 0..4 {
            let next = if r + 1 < 4 { t[r + 1] } else { 0.0 };
            assert_eq!(t[r], e[r] + next);
        }
    }
}
