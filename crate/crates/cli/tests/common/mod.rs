// Synthetic five-series study that clears every pipeline stage: three
// variables share two cointegrating relations, two are unrelated random
// walks that should be found weakly exogenous and dropped.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use vecmkit::nalgebra::{DMatrix, DVector};
use vecmkit::simulate::{generate, DgpKind, DgpSpec};
use vecmkit_cli::{OutputFormat, PipelineConfig};

pub const STUDY_NAMES: [&str; 5] = ["output", "inflow", "credit", "openness", "spending"];
pub const STUDY_SEED: u64 = 7;
pub const STUDY_T: usize = 120;

pub fn study_spec(seed: u64) -> DgpSpec {
    let alpha = DMatrix::from_row_slice(5, 2, &[
        -0.30, 0.05,
        0.05, -0.40,
        0.20, 0.15,
        0.00, 0.00,
        0.00, 0.00,
    ]);
    let beta = DMatrix::from_row_slice(5, 2, &[
        1.0, 0.0,
        0.0, 1.0,
        -0.5, -0.8,
        0.0, 0.0,
        0.0, 0.0,
    ]);
    let gamma = vec![DMatrix::from_diagonal(&DVector::from_element(5, 0.45))];
    let mut spec = DgpSpec::new(
        DgpKind::Vecm {
            alpha,
            beta,
            gamma,
            intercept: DVector::from_column_slice(&[0.02, 0.01, 0.03, 0.02, 0.01]),
            cov: DMatrix::identity(5, 5) * 0.25,
        },
        STUDY_T,
        seed,
    )
    .with_names(STUDY_NAMES.iter().map(|s| s.to_string()).collect());
    spec.start_year = 1900;
    spec
}

pub fn write_study_csv(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join("study.csv");
    generate(&study_spec(seed)).unwrap().write_csv(&path).unwrap();
    path
}

pub fn study_config(csv: &Path, out: &Path) -> PipelineConfig {
    PipelineConfig {
        data: csv.to_path_buf(),
        output: out.to_path_buf(),
        format: OutputFormat::Both,
        ..PipelineConfig::default()
    }
}

/// Three independent random walks, T = 120.
pub fn write_walks_csv(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join("walks.csv");
    let mut spec = DgpSpec::new(DgpKind::RandomWalk { cov: DMatrix::identity(3, 3) }, STUDY_T, seed)
        .with_names(vec!["a".into(), "b".into(), "c".into()]);
    spec.start_year = 1900;
    generate(&spec).unwrap().write_csv(&path).unwrap();
    path
}
