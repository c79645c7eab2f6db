// Seeded datasets shared by the oracle, invariant and Monte Carlo tests.

#![allow(dead_code)]

use vecmkit::dataset::{Dataset, Series};
use vecmkit::nalgebra::{DMatrix, DVector};
use vecmkit::simulate::{generate, DgpKind, DgpSpec};

pub fn identity(k: usize) -> DMatrix<f64> {
    DMatrix::identity(k, k)
}

pub fn white_noise(k: usize, t: usize, seed: u64, stream: u64) -> Dataset {
    let spec = DgpSpec::new(DgpKind::WhiteNoise { cov: identity(k) }, t, seed).with_stream(stream);
    generate(&spec).expect("white noise")
}

pub fn white_noise_matrix(k: usize, t: usize, seed: u64, stream: u64) -> DMatrix<f64> {
    white_noise(k, t, seed, stream).matrix()
}

pub fn random_walks(k: usize, t: usize, seed: u64, stream: u64) -> Dataset {
    let spec = DgpSpec::new(DgpKind::RandomWalk { cov: identity(k) }, t, seed).with_stream(stream);
    generate(&spec).expect("random walks")
}

pub fn ar1(phi: f64, t: usize, seed: u64, stream: u64) -> Series {
    let spec = DgpSpec::new(
        DgpKind::Ar1 {
            intercept: 0.0,
            phi,
            sd: 1.0,
        },
        t,
        seed,
    )
    .with_stream(stream);
    generate(&spec).expect("ar1").series()[0].clone()
}

pub fn random_walk_series(t: usize, seed: u64, stream: u64) -> Series {
    random_walks(1, t, seed, stream).series()[0].clone()
}

/// Bivariate VECM `Δy = α β' y_{t-1} + ε` with identity covariance.
pub fn bivariate_vecm(alpha: [f64; 2], beta: [f64; 2], t: usize, seed: u64, stream: u64) -> Dataset {
    let spec = DgpSpec::new(vecm_kind(alpha, beta, Vec::new(), identity(2)), t, seed).with_stream(stream);
    generate(&spec).expect("vecm")
}

pub fn vecm_kind(alpha: [f64; 2], beta: [f64; 2], gamma: Vec<DMatrix<f64>>, cov: DMatrix<f64>) -> DgpKind {
    DgpKind::Vecm {
        alpha: DMatrix::from_column_slice(2, 1, &alpha),
        beta: DMatrix::from_column_slice(2, 1, &beta),
        gamma,
        intercept: DVector::zeros(2),
        cov,
    }
}

/// Three cointegrated series with two common trends plus stationary noise,
/// a small fixed fixture for model-level checks.
pub fn trivariate_system(t: usize, seed: u64) -> Dataset {
    let spec = DgpSpec::new(
        DgpKind::Vecm {
            alpha: DMatrix::from_column_slice(3, 1, &[-0.4, 0.2, 0.1]),
            beta: DMatrix::from_column_slice(3, 1, &[1.0, -0.5, -0.5]),
            gamma: vec![DMatrix::from_row_slice(
                3,
                3,
                &[0.2, 0.0, 0.1, 0.0, 0.1, 0.0, 0.1, 0.0, -0.1],
            )],
            intercept: DVector::from_column_slice(&[0.1, 0.05, 0.02]),
            cov: DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.0]),
        },
        t,
        seed,
    )
    .with_names(vec!["a".into(), "b".into(), "c".into()]);
    generate(&spec).expect("trivariate vecm")
}

pub fn names(d: &Dataset) -> Vec<String> {
    d.names()
}
