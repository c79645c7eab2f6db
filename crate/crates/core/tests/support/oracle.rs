// Independent reference computations in exact rational arithmetic.
//
// f64 inputs are converted exactly to BigRational, every intermediate is
// exact, and only the final answer is rounded back to f64.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;
pub type QMat = Vec<Vec<Q>>;

pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite input")
}

pub fn qi(x: i64) -> Q {
    BigRational::from_integer(BigInt::from(x))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().expect("representable")
}

pub fn qmat(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> QMat {
    (0..rows)
        .map(|i| (0..cols).map(|j| q(f(i, j))).collect())
        .collect()
}

pub fn transpose(a: &QMat) -> QMat {
    let (n, m) = (a.len(), a[0].len());
    (0..m)
        .map(|j| (0..n).map(|i| a[i][j].clone()).collect())
        .collect()
}

pub fn matmul(a: &QMat, b: &QMat) -> QMat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    assert_eq!(a[0].len(), m);
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut s = Q::zero();
                    for l in 0..m {
                        s += &a[i][l] * &b[l][j];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Gauss-Jordan inverse with exact pivoting on nonzero entries.
pub fn inverse(a: &QMat) -> QMat {
    let n = a.len();
    let mut w: QMat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !w[r][col].is_zero())
            .expect("singular matrix in oracle");
        w.swap(col, piv);
        let p = w[col][col].clone();
        for x in w[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !w[r][col].is_zero() {
                let f = w[r][col].clone();
                for c in 0..2 * n {
                    let v = &w[col][c] * &f;
                    w[r][c] -= v;
                }
            }
        }
    }
    w.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub struct ExactOls {
    pub coefficients: Vec<Q>,
    pub rss: Q,
    pub xtx_inv: QMat,
}

/// `b = (X'X)^-1 X'y` with everything exact.
pub fn normal_equations(y: &[f64], x: &[Vec<f64>]) -> ExactOls {
    let n = y.len();
    let m = x[0].len();
    let xq = qmat(n, m, |i, j| x[i][j]);
    let yq: QMat = y.iter().map(|v| vec![q(*v)]).collect();
    let xt = transpose(&xq);
    let xtx_inv = inverse(&matmul(&xt, &xq));
    let b = matmul(&xtx_inv, &matmul(&xt, &yq));
    let fitted = matmul(&xq, &b);
    let mut rss = Q::zero();
    for i in 0..n {
        let e = &yq[i][0] - &fitted[i][0];
        rss += &e * &e;
    }
    ExactOls {
        coefficients: b.into_iter().map(|r| r[0].clone()).collect(),
        rss,
        xtx_inv,
    }
}

/// t-ratio of coefficient `j` with `s^2 = rss / (n - m)`.
pub fn t_ratio(fit: &ExactOls, n: usize, j: usize) -> f64 {
    let m = fit.coefficients.len();
    let s2 = &fit.rss / qi((n - m) as i64);
    let var = s2 * &fit.xtx_inv[j][j];
    to_f64(&fit.coefficients[j]) / to_f64(&var).sqrt()
}

/// ADF design written out row by row: Δy_t on y_{t-1}, optional constant,
/// optional trend t, and `lag` lagged differences, for t = start..T.
pub fn adf_rows(y: &[f64], constant: bool, trend: bool, lag: usize, start: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut resp = Vec::new();
    let mut rows = Vec::new();
    for t in start..y.len() {
        resp.push(y[t] - y[t - 1]);
        let mut row = vec![y[t - 1]];
        if constant {
            row.push(1.0);
        }
        if trend {
            row.push(t as f64);
        }
        for j in 1..=lag {
            row.push(y[t - j] - y[t - j - 1]);
        }
        rows.push(row);
    }
    (resp, rows)
}

/// Characteristic polynomial coefficients `c_0 .. c_n` of `det(λI - A)`
/// (c_n = 1) by Faddeev-LeVerrier.
pub fn char_poly(a: &QMat) -> Vec<Q> {
    let n = a.len();
    let mut c = vec![Q::zero(); n + 1];
    c[n] = Q::one();
    let mut m: QMat = vec![vec![Q::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(a, &m);
        for i in 0..n {
            next[i][i] += &c[n - k + 1];
        }
        m = next;
        let am = matmul(a, &m);
        let mut tr = Q::zero();
        for i in 0..n {
            tr += &am[i][i];
        }
        c[n - k] = -tr / qi(k as i64);
    }
    c
}

fn eval(poly: &[Q], x: &Q) -> Q {
    let mut acc = Q::zero();
    for c in poly.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn derivative(poly: &[Q]) -> Vec<Q> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * qi(i as i64))
        .collect()
}

fn sign(x: &Q) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Real roots in `[lo, hi]` of a polynomial whose roots are all real and
/// simple. Critical points from the derivative split the interval; each
/// piece is bisected with exact sign evaluation until f64 can't refine it.
pub fn real_roots(poly: &[Q], lo: f64, hi: f64) -> Vec<f64> {
    let degree = poly.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let mut cuts = vec![lo];
    if degree >= 2 {
        cuts.extend(real_roots(&derivative(poly), lo, hi));
    }
    cuts.push(hi);
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let sa = sign(&eval(poly, &q(a)));
        let sb = sign(&eval(poly, &q(b)));
        if sa == 0 {
            roots.push(a);
            continue;
        }
        if sa == sb {
            continue;
        }
        if sb == 0 {
            continue;
        }
        loop {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let sm = sign(&eval(poly, &q(mid)));
            if sm == 0 {
                a = mid;
                b = mid;
                break;
            }
            if sm == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if let Some(last) = cuts.last() {
        if sign(&eval(poly, &q(*last))) == 0 && !roots.contains(last) {
            roots.push(*last);
        }
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    roots.dedup();
    roots
}

/// Spectrum of `S11^-1 S10 S00^-1 S01`, descending.
pub fn johansen_spectrum(s00: &QMat, s01: &QMat, s11: &QMat) -> Vec<f64> {
    let s10 = transpose(s01);
    let m = matmul(
        &matmul(&matmul(&inverse(s11), &s10), &inverse(s00)),
        s01,
    );
    let mut roots = real_roots(&char_poly(&m), 0.0, 1.0);
    roots.reverse();
    roots
}

/// Univariate Jarque-Bera by direct moment sums (divisor T).
pub fn jarque_bera_moments(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    n / 6.0 * skew * skew + n / 24.0 * (kurt - 3.0).powi(2)
}

/// Bivariate Jarque-Bera with the 2x2 lower Cholesky factor written out.
pub fn jarque_bera_bivariate(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let saa = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / n;
    let sbb = b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / n;
    let sab = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    let l11 = saa.sqrt();
    let l21 = sab / l11;
    let l22 = (sbb - l21 * l21).sqrt();
    let mut s3 = [0.0; 2];
    let mut s4 = [0.0; 2];
    for (x, y) in a.iter().zip(b) {
        let u1 = (x - ma) / l11;
        let u2 = ((y - mb) - l21 * u1) / l22;
        s3[0] += u1.powi(3);
        s3[1] += u2.powi(3);
        s4[0] += u1.powi(4);
        s4[1] += u2.powi(4);
    }
    let mut jb = 0.0;
    for i in 0..2 {
        let skew = s3[i] / n;
        let kurt = s4[i] / n;
        jb += n / 6.0 * skew * skew + n / 24.0 * (kurt - 3.0).powi(2);
    }
    jb
}
