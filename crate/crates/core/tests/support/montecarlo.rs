// Seeded Monte Carlo experiments. Trial i always uses stream i of a fixed
// seed, so the rates do not depend on how rayon schedules the work.

#![allow(dead_code)]

use rayon::prelude::*;

use super::fixtures::*;
use vecmkit::dataset::{Dataset, Series};
use vecmkit::diagnostics::{arch_lm, jarque_bera, portmanteau};
use vecmkit::dynamics::bootstrap_bands;
use vecmkit::johansen::{johansen_test, JohansenCase};
use vecmkit::nalgebra::DMatrix;
use vecmkit::simulate::{generate, DgpKind, DgpSpec};
use vecmkit::unitroot::{adf_test, pp_test, Bandwidth, DeterministicSpec};
use vecmkit::varmodel::granger_test;
use vecmkit::vecm::fit_vecm;

pub fn rate(trials: usize, f: impl Fn(u64) -> bool + Sync) -> f64 {
    let hits = (0..trials as u64).into_par_iter().filter(|&i| f(i)).count();
    hits as f64 / trials as f64
}

pub fn adf_size() -> f64 {
    rate(2000, |i| {
        adf_test(&random_walk_series(200, 101, i), DeterministicSpec::Drift, 3)
            .unwrap()
            .reject_at_5pct
    })
}

pub fn pp_size() -> f64 {
    rate(2000, |i| {
        pp_test(&random_walk_series(200, 102, i), DeterministicSpec::Drift, Bandwidth::Automatic)
            .unwrap()
            .reject_at_5pct
    })
}

pub fn adf_power() -> f64 {
    rate(2000, |i| {
        adf_test(&ar1(0.5, 200, 103, i), DeterministicSpec::Drift, 3)
            .unwrap()
            .reject_at_5pct
    })
}

pub fn pp_power() -> f64 {
    rate(2000, |i| {
        pp_test(&ar1(0.5, 200, 104, i), DeterministicSpec::Drift, Bandwidth::Automatic)
            .unwrap()
            .reject_at_5pct
    })
}

/// Three independent random walks, T = 500: share deciding rank 0.
pub fn johansen_rank0() -> f64 {
    rate(500, |i| {
        johansen_test(&random_walks(3, 500, 105, i), 2, JohansenCase::RestrictedConstant)
            .unwrap()
            .decided_rank
            == 0
    })
}

/// Simulated VECM with α = (−0.5, 0.1)', β = (1, −1)', T = 2000.
pub fn johansen_rank1_vecm() -> f64 {
    rate(500, |i| {
        let d = bivariate_vecm([-0.5, 0.1], [1.0, -1.0], 2000, 106, i);
        johansen_test(&d, 2, JohansenCase::RestrictedConstant)
            .unwrap()
            .decided_rank
            == 1
    })
}

/// `y1` a random walk, `y2 = y1 + u` with `u` a stationary AR(1), T = 500.
pub fn cointegrated_pair(seed: u64, stream: u64) -> Dataset {
    let walk = random_walk_series(500, seed, 2 * stream);
    let noise = ar1(0.5, 500, seed, 2 * stream + 1);
    let y2: Vec<f64> = walk.values().iter().zip(noise.values()).map(|(a, b)| a + b).collect();
    Dataset::new(vec![
        walk.renamed("y1"),
        Series::from_values("y2", 1, y2).unwrap(),
    ])
    .unwrap()
}

pub fn johansen_rank1_pair() -> f64 {
    rate(500, |i| {
        johansen_test(&cointegrated_pair(107, i), 2, JohansenCase::RestrictedConstant)
            .unwrap()
            .decided_rank
            == 1
    })
}

pub fn granger_size() -> f64 {
    rate(2000, |i| {
        granger_test(&white_noise(2, 200, 108, i), "y1", "y2", 2)
            .unwrap()
            .reject_at_5pct
    })
}

/// `y_t = 0.8 x_{t-1} + e_t`, T = 500.
pub fn granger_power_p() -> f64 {
    let z = white_noise_matrix(2, 501, 109, 0);
    let x: Vec<f64> = (1..501).map(|t| z[(t, 0)]).collect();
    let y: Vec<f64> = (1..501).map(|t| 0.8 * z[(t - 1, 0)] + z[(t, 1)]).collect();
    let d = Dataset::new(vec![
        Series::from_values("x", 1, x).unwrap(),
        Series::from_values("y", 1, y).unwrap(),
    ])
    .unwrap();
    granger_test(&d, "x", "y", 2).unwrap().p_value
}

pub fn portmanteau_size() -> f64 {
    rate(2000, |i| {
        portmanteau(&white_noise_matrix(2, 500, 110, i), 10, 0).unwrap().p_value < 0.05
    })
}

pub fn jarque_bera_size() -> f64 {
    rate(2000, |i| {
        jarque_bera(&white_noise_matrix(2, 1000, 111, i)).unwrap().p_value < 0.05
    })
}

pub fn arch_size() -> f64 {
    rate(1000, |i| {
        arch_lm(&white_noise_matrix(2, 500, 112, i), 5).unwrap().p_value < 0.05
    })
}

/// Univariate ARCH(1) with coefficient 0.6, T = 1000.
pub fn arch_power() -> f64 {
    rate(200, |i| {
        let spec = DgpSpec::new(DgpKind::Arch1 { omega: 1.0, a: 0.6 }, 1000, 113).with_stream(i);
        let e = generate(&spec).unwrap().matrix();
        arch_lm(&e, 5).unwrap().p_value < 0.05
    })
}

pub const COVERAGE_TRIALS: usize = 200;
pub const COVERAGE_REPLICATIONS: usize = 199;
pub const COVERAGE_HORIZON: usize = 9;

/// Pointwise coverage of nominal 95% percentile bands over every
/// (responder, shock, horizon) cell of a bivariate VECM with known IRF.
pub fn bootstrap_coverage() -> f64 {
    let alpha = [-0.5, 0.1];
    let beta = [1.0, -1.0];
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
    let a = DMatrix::identity(2, 2)
        + DMatrix::from_column_slice(2, 1, &alpha) * DMatrix::from_column_slice(2, 1, &beta).transpose();
    let chol = cov.clone().cholesky().unwrap().l();
    let mut truth = Vec::with_capacity(COVERAGE_HORIZON + 1);
    let mut phi = DMatrix::<f64>::identity(2, 2);
    for _ in 0..=COVERAGE_HORIZON {
        truth.push(&phi * &chol);
        phi = &a * phi;
    }
    let cells = 4 * (COVERAGE_HORIZON + 1);
    let covered: usize = (0..COVERAGE_TRIALS as u64)
        .map(|i| {
            let spec = DgpSpec::new(vecm_kind(alpha, beta, Vec::new(), cov.clone()), 500, 114).with_stream(i);
            let d = generate(&spec).unwrap();
            let m = fit_vecm(&d, 2, 1, JohansenCase::RestrictedConstant).unwrap();
            let bands = bootstrap_bands(&m, COVERAGE_HORIZON, &m.variable_names, COVERAGE_REPLICATIONS, 1000 + i, 0.95)
                .unwrap();
            let (lo, hi) = (bands.lower.unwrap(), bands.upper.unwrap());
            let mut hit = 0;
            for h in 0..=COVERAGE_HORIZON {
                for r in 0..2 {
                    for s in 0..2 {
                        let v = truth[h][(r, s)];
                        if lo[h][(r, s)] <= v && v <= hi[h][(r, s)] {
                            hit += 1;
                        }
                    }
                }
            }
            hit
        })
        .sum();
    covered as f64 / (COVERAGE_TRIALS * cells) as f64
}
