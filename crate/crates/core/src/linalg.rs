//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky_lower(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!("{what} is not square")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite(format!("{what} has non-finite entries")));
    }
    let sym = symmetrize(m);
    let chol = sym
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite(what.to_string()))?;
    let l = chol.l();
    let max_diag = (0..l.nrows()).map(|i| l[(i, i)]).fold(0.0, f64::max);
    if (0..l.nrows()).any(|i| l[(i, i)] <= max_diag * 1e-12) {
        return Err(Error::NotPositiveDefinite(format!("{what} is numerically singular")));
    }
    Ok(l)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// ln|M| for symmetric positive definite M.
pub fn log_det_spd(m: &DMatrix<f64>, what: &str) -> Result<f64> {
    let l = cholesky_lower(m, what)?;
    Ok(2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>())
}

/// Inverse of a symmetric positive definite matrix.
pub fn inverse_spd(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let l = cholesky_lower(m, what)?;
    let n = l.nrows();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::NotPositiveDefinite(what.to_string()))?;
    Ok(symmetrize(&(linv.transpose() * linv)))
}

/// Cross-product `A'B / n`.
pub fn moment(a: &DMatrix<f64>, b: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    a.transpose() * b / n as f64
}

/// Least-squares projection residuals of the columns of `y` on `x`
/// (returns `y` unchanged when `x` has no columns).
pub fn residualize(y: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() == 0 {
        return Ok(y.clone());
    }
    let coef = lstsq(x, y)?;
    Ok(y - x * coef)
}

/// Least-squares coefficients `argmin ||Y - X B||` via Householder QR.
/// Fails when `X` is rank deficient or has no more rows than columns.
pub fn lstsq(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, m) = x.shape();
    if n < m {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {m} regressors"
        )));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(&r, x)?;
    let qty = qr.q().transpose() * y;
    r.solve_upper_triangular(&qty)
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))
}

pub(crate) fn check_rank(r: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<()> {
    let m = r.ncols();
    let col_scale = (0..m)
        .map(|j| x.column(j).norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for j in 0..m {
        let rjj = r[(j, j)].abs();
        let cj = x.column(j).norm();
        if rjj <= 1e-10 * cj.max(1e-300) || rjj <= 1e-13 * col_scale {
            return Err(Error::SingularDesign(format!(
                "design column {j} is (numerically) a combination of earlier columns"
            )));
        }
    }
    Ok(())
}

/// Stacks `[y_{t-1}, ..., y_{t-p}]` rows for t in `start..n` from a T×k matrix.
pub fn lag_block(data: &DMatrix<f64>, p: usize, start: usize) -> DMatrix<f64> {
    let (n, k) = data.shape();
    DMatrix::from_fn(n - start, k * p, |i, c| {
        let lag = c / k + 1;
        let var = c % k;
        data[(start + i - lag, var)]
    })
}

/// First differences of every column (T-1 rows).
pub fn diff_rows(data: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = data.shape();
    DMatrix::from_fn(n - 1, k, |i, j| data[(i + 1, j)] - data[(i, j)])
}

/// Horizontal concatenation of matrices with equal row counts.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let n = blocks.iter().map(|b| b.nrows()).max().unwrap_or(0);
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(n, m);
    let mut c = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), n);
        out.view_mut((0, c), (n, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

pub fn ones(n: usize) -> DMatrix<f64> {
    DMatrix::from_element(n, 1, 1.0)
}

pub fn column(v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

/// Permutation that moves `ordering` into position: `out[i] = names.position(ordering[i])`.
pub fn permutation(names: &[String], ordering: &[String]) -> Result<Vec<usize>> {
    if ordering.len() != names.len() {
        return Err(Error::InvalidArgument(format!(
            "ordering has {} names, model has {}",
            ordering.len(),
            names.len()
        )));
    }
    let mut used = vec![false; names.len()];
    ordering
        .iter()
        .map(|o| {
            let pos = names
                .iter()
                .position(|n| n == o)
                .ok_or_else(|| Error::InvalidArgument(format!("'{o}' is not a model variable")))?;
            if used[pos] {
                return Err(Error::InvalidArgument(format!("'{o}' repeated in ordering")));
            }
            used[pos] = true;
            Ok(pos)
        })
        .collect()
}

/// `P' M P` style reindexing of a square matrix: `out[i][j] = m[perm[i]][perm[j]]`.
pub fn permute_square(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(perm.len(), perm.len(), |i, j| m[(perm[i], perm[j])])
}
