// Oracle and invariant measurements on fixed fixtures. Each returns the
// largest discrepancy seen, so callers can compare it to a tolerance.

#![allow(dead_code)]

use super::fixtures::*;
use super::oracle::*;
use vecmkit::diagnostics::jarque_bera;
use vecmkit::dynamics::{fevd, fevd_companion, irf, vecm_to_var_levels};
use vecmkit::johansen::{eigen_problem, rank_statistics, reduced_rank, johansen_test, JohansenCase};
use vecmkit::linalg::{cholesky_lower, moment, permutation, permute_square};
use vecmkit::linreg::ols;
use vecmkit::nalgebra::{DMatrix, DVector};
use vecmkit::unitroot::{adf_design, adf_test, pp_test, Bandwidth, DeterministicSpec};
use vecmkit::vecm::fit_vecm;

pub const CASES: [JohansenCase; 4] = [
    JohansenCase::NoDeterministic,
    JohansenCase::RestrictedConstant,
    JohansenCase::UnrestrictedConstant,
    JohansenCase::RestrictedTrend,
];

const SEEDS: std::ops::Range<u64> = 0..6;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn to_q(m: &DMatrix<f64>) -> Vec<Vec<Q>> {
    qmat(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Coefficients, RSS and t-ratios against exact rational normal equations.
pub fn ols_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let noise = white_noise_matrix(3, 12, 11 + seed, 0);
        let x: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![1.0, noise[(i, 0)], noise[(i, 1)] + 0.3 * i as f64])
            .collect();
        let y: Vec<f64> = (0..12).map(|i| 0.5 - 1.2 * x[i][1] + 0.7 * x[i][2] + noise[(i, 2)]).collect();
        let exact = normal_equations(&y, &x);
        let fit = ols(&DVector::from_vec(y), &DMatrix::from_fn(12, 3, |i, j| x[i][j])).unwrap();
        for (b, e) in fit.coefficients.iter().zip(&exact.coefficients) {
            worst = worst.max(rel(*b, to_f64(e)));
        }
        worst = worst.max(rel(fit.rss, to_f64(&exact.rss)));
        for j in 0..3 {
            worst = worst.max(rel(fit.t_stats[j], t_ratio(&exact, 12, j)));
        }
    }
    worst
}

/// Generalized eigenvalues against the exact characteristic polynomial.
pub fn johansen_eigen_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let z = white_noise_matrix(6, 40, 21 + seed, 0);
        let z0 = DMatrix::from_fn(40, 3, |i, j| z[(i, j)] + 0.5 * z[(i, j + 3)]);
        let z1 = DMatrix::from_fn(40, 3, |i, j| z[(i, j + 3)] - 0.2 * z[(i, (j + 1) % 3)]);
        let (s00, s01, s11) = (moment(&z0, &z0, 40), moment(&z0, &z1, 40), moment(&z1, &z1, 40));
        let (values, _) = eigen_problem(&s00, &s01, &s11).unwrap();
        let oracle = johansen_spectrum(&to_q(&s00), &to_q(&s01), &to_q(&s11));
        for (a, b) in values.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
        let rr = reduced_rank(&trivariate_system(60, seed).matrix(), 2, JohansenCase::RestrictedConstant).unwrap();
        let oracle = johansen_spectrum(&to_q(&rr.s00), &to_q(&rr.s01), &to_q(&rr.s11));
        for (a, b) in rr.eigenvalues.iter().take(3).zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// ADF t-ratio against the explicit rational regression.
pub fn adf_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let s = random_walk_series(30, 5 + seed, 0);
        for det in [DeterministicSpec::None, DeterministicSpec::Drift, DeterministicSpec::DriftTrend] {
            let res = adf_test(&s, det, 3).unwrap();
            let (resp, rows) = adf_rows(
                s.values(),
                det != DeterministicSpec::None,
                det == DeterministicSpec::DriftTrend,
                res.lag_or_bandwidth,
                4,
            );
            let exact = normal_equations(&resp, &rows);
            worst = worst.max((res.statistic - t_ratio(&exact, resp.len(), 0)).abs());
        }
    }
    worst
}

/// Jarque-Bera against direct moment sums (univariate and bivariate).
pub fn jarque_bera_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let z = white_noise_matrix(2, 15, 31 + seed, 0);
        let x: Vec<f64> = z.column(0).iter().map(|v| v + 0.3 * v * v).collect();
        let y: Vec<f64> = x.iter().zip(z.column(1).iter()).map(|(a, b)| 0.4 * a + b).collect();
        let uni = jarque_bera(&DMatrix::from_column_slice(15, 1, &x)).unwrap();
        worst = worst.max((uni.statistic - jarque_bera_moments(&x)).abs());
        let both = DMatrix::from_fn(15, 2, |i, j| if j == 0 { x[i] } else { y[i] });
        let bi = jarque_bera(&both).unwrap();
        worst = worst.max((bi.statistic - jarque_bera_bivariate(&x, &y)).abs());
    }
    worst
}

/// FEVD from the VECM moving-average path against the companion-form path.
pub fn fevd_paths_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let m = fit_vecm(&trivariate_system(120, 8 + seed), 2, 1, JohansenCase::RestrictedConstant).unwrap();
        let ordering = vec!["b".to_string(), "a".to_string(), "c".to_string()];
        let a = fevd(&m, 12, &ordering).unwrap();
        let b = fevd_companion(&vecm_to_var_levels(&m), 12, &ordering).unwrap();
        for (sa, sb) in a.shares.iter().zip(&b.shares) {
            worst = worst.max((sa - sb).amax());
        }
    }
    worst
}

/// `trace_r - eigen_r - trace_{r+1}`; exact means 0.
pub fn trace_recurrence_residual() -> f64 {
    let mut worst = 0.0f64;
    let mut check = |e: &[f64], t: &[f64]| {
        for r in 0..e.len() {
            let next = if r + 1 < e.len() { t[r + 1] } else { 0.0 };
            worst = worst.max((t[r] - e[r] - next).abs());
        }
    };
    for seed in SEEDS {
        for case in CASES {
            let j = johansen_test(&trivariate_system(70, seed), 2, case).unwrap();
            check(&j.eigen_stats, &j.trace_stats);
        }
        let eig: Vec<f64> = (0..5).map(|i| 0.9 / (1.0 + i as f64 + seed as f64 * 0.37)).collect();
        let (e, t) = rank_statistics(&eig, 50 + seed as usize * 13);
        check(&e, &t);
    }
    worst
}

pub fn fevd_row_sum_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let m = fit_vecm(&trivariate_system(90, seed), 2, 1, JohansenCase::RestrictedConstant).unwrap();
        for s in &fevd(&m, 15, &m.variable_names).unwrap().shares {
            for i in 0..m.k {
                worst = worst.max((s.row(i).sum() - 1.0).abs());
            }
        }
    }
    worst
}

/// Largest gap between the horizon-0 response and the Cholesky factor.
pub fn irf_horizon_zero_gap() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let m = fit_vecm(&trivariate_system(90, seed), 2, 1, JohansenCase::RestrictedConstant).unwrap();
        for rot in 0..3 {
            let mut ordering = m.variable_names.clone();
            ordering.rotate_left(rot);
            let res = irf(&m, 4, &ordering).unwrap();
            let perm = permutation(&m.variable_names, &ordering).unwrap();
            let chol = cholesky_lower(&permute_square(&m.sigma, &perm), "sigma").unwrap();
            worst = worst.max((&res.responses[0] - chol).amax());
        }
    }
    worst
}

/// Π and the fitted differences under a change of normalizing variables.
pub fn pi_renormalization_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let m = fit_vecm(&trivariate_system(90, seed), 2, 2, JohansenCase::RestrictedConstant).unwrap();
        for rot in 1..3 {
            let mut ordering = m.variable_names.clone();
            ordering.rotate_left(rot);
            let n = m.renormalized(&ordering).unwrap();
            worst = worst.max((m.pi() - n.pi()).amax() / m.pi().amax().max(1.0));
            worst = worst.max((m.fitted_differences() - n.fitted_differences()).amax());
        }
    }
    worst
}

/// PP with a zero bandwidth against the lag-0 Dickey-Fuller t-ratio.
pub fn pp_bandwidth_zero_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let s = random_walk_series(60, seed, 1);
        for det in [DeterministicSpec::None, DeterministicSpec::Drift, DeterministicSpec::DriftTrend] {
            let pp = pp_test(&s, det, Bandwidth::Fixed(0)).unwrap();
            let (y, x) = adf_design(s.values(), det, 0, 1);
            worst = worst.max((pp.statistic - ols(&y, &x).unwrap().t_stats[0]).abs());
        }
    }
    worst
}

/// Level-VAR one-step fits against the VECM fitted differences.
pub fn level_var_roundtrip_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        for case in CASES {
            for p in 2..4 {
                let m = fit_vecm(&trivariate_system(90, seed), p, 1, case).unwrap();
                let v = vecm_to_var_levels(&m);
                let fd = m.fitted_differences();
                for i in 0..m.n_obs {
                    let t = m.p_levels + i;
                    let level = v.fitted_at(&m.levels, t, t as f64);
                    for j in 0..m.k {
                        worst = worst.max((level[j] - m.levels[(t - 1, j)] - fd[(i, j)]).abs());
                    }
                }
            }
        }
    }
    worst
}
