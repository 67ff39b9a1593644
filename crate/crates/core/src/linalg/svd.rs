//! Thin singular value decomposition.
//!
//! Tall inputs are first reduced with a Householder QR, then the small
//! triangular factor is diagonalized with one-sided (Hestenes) Jacobi
//! rotations. Wide inputs are handled through their transpose. Column
//! vectors are kept contiguous throughout so the inner loops are plain slice
//! dot products.

use super::matrix::{dot, norm, Matrix};
use crate::error::{Error, Result};

/// Singular values at or below `RANK_TOLERANCE * sigma_max` are dropped.
pub const RANK_TOLERANCE: f64 = 1e-10;

const MAX_SWEEPS: usize = 80;

/// Thin, rank-truncated SVD: `input ≈ u * diag(sigma) * vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// m×r, orthonormal columns.
    pub u: Matrix,
    /// r values, descending, all positive.
    pub sigma: Vec<f64>,
    /// n×r, orthonormal columns.
    pub v: Matrix,
}

impl Svd {
    /// Effective rank.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let r = self.rank();
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for j in 0..r {
                us[(i, j)] *= self.sigma[j];
            }
        }
        us.matmul(&self.v.transpose()).expect("svd factors are conformant")
    }
}

/// Computes the thin SVD of `m`, truncated at the effective rank.
///
/// Signs are fixed so the largest-magnitude entry of each left singular
/// vector is non-negative (first such entry on ties); the right vectors
/// follow. The result is therefore a pure function of the input bits.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if m.is_empty() {
        return Err(Error::InvalidInput("svd of an empty matrix".into()));
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("svd input has non-finite entries".into()));
    }
    let (rows, cols) = m.shape();
    let (u_cols, sigma, v_cols) = if rows >= cols {
        tall_svd(m.transpose().as_slice(), rows, cols)?
    } else {
        let (u, s, v) = tall_svd(m.as_slice(), cols, rows)?;
        (v, s, u)
    };
    let u_len = rows;
    let v_len = cols;
    let mut u_cols = u_cols;
    let mut v_cols = v_cols;
    for (u, v) in u_cols.iter_mut().zip(v_cols.iter_mut()) {
        fix_sign(u, v);
    }
    Ok(Svd {
        u: columns_to_matrix(&u_cols, u_len),
        sigma,
        v: columns_to_matrix(&v_cols, v_len),
    })
}

type Columns = Vec<Vec<f64>>;

/// SVD of an m×n matrix (m ≥ n) given as `n` contiguous columns of length
/// `m` (i.e. the row-major storage of its transpose).
fn tall_svd(data: &[f64], m: usize, n: usize) -> Result<(Columns, Vec<f64>, Columns)> {
    let mut work: Vec<Vec<f64>> = data.chunks(m).map(<[f64]>::to_vec).collect();
    debug_assert_eq!(work.len(), n);

    let reflectors = householder_qr(&mut work, m, n);

    // Upper-triangular R, columns truncated to length n.
    let mut g: Vec<Vec<f64>> = work.iter().map(|c| c[..n].to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    hestenes_jacobi(&mut g, &mut v)?;

    let mut order: Vec<(f64, usize)> = g.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let sigma_max = order.first().map_or(0.0, |o| o.0);
    let cutoff = RANK_TOLERANCE * sigma_max;

    let mut sigma = Vec::new();
    let mut u_cols = Vec::new();
    let mut v_cols = Vec::new();
    for &(s, j) in &order {
        if s <= cutoff || s == 0.0 {
            break;
        }
        let mut u = vec![0.0; m];
        for (dst, src) in u.iter_mut().zip(&g[j]) {
            *dst = src / s;
        }
        apply_q(&reflectors, &mut u);
        sigma.push(s);
        u_cols.push(u);
        v_cols.push(std::mem::take(&mut v[j]));
    }
    Ok((u_cols, sigma, v_cols))
}

/// In-place Householder QR on column storage. On return `cols[j][..=j]`
/// holds column `j` of R. Returns the reflectors (start row, unit vector).
fn householder_qr(cols: &mut [Vec<f64>], m: usize, n: usize) -> Vec<Option<Vec<f64>>> {
    let mut reflectors = Vec::with_capacity(n);
    for j in 0..n {
        let x = &cols[j][j..m];
        let alpha_norm = norm(x);
        if alpha_norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] >= 0.0 { -alpha_norm } else { alpha_norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vn = norm(&v);
        if vn == 0.0 {
            reflectors.push(None);
            continue;
        }
        for e in &mut v {
            *e /= vn;
        }
        cols[j][j] = alpha;
        for e in &mut cols[j][j + 1..m] {
            *e = 0.0;
        }
        for c in cols.iter_mut().skip(j + 1) {
            reflect(&v, &mut c[j..m]);
        }
        reflectors.push(Some(v));
    }
    reflectors
}

#[inline]
fn reflect(v: &[f64], x: &mut [f64]) {
    let d = 2.0 * dot(v, x);
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= d * vi;
    }
}

/// `x ← Q x` with Q = H₀ H₁ … H_{n-1}.
fn apply_q(reflectors: &[Option<Vec<f64>>], x: &mut [f64]) {
    for (j, r) in reflectors.iter().enumerate().rev() {
        if let Some(v) = r {
            reflect(v, &mut x[j..j + v.len()]);
        }
    }
}

/// Orthogonalizes the columns of `g` by plane rotations, accumulating the
/// rotations into `v`. Cyclic row ordering; converged when every pair
/// satisfies |gₚ·g_q| ≤ tol·‖gₚ‖‖g_q‖.
fn hestenes_jacobi(g: &mut [Vec<f64>], v: &mut [Vec<f64>]) -> Result<()> {
    let n = g.len();
    if n < 2 {
        return Ok(());
    }
    let tol = f64::EPSILON * (n as f64).max(16.0);
    let mut sq: Vec<f64> = g.iter().map(|c| dot(c, c)).collect();
    // Columns at rounding level carry no signal; rotating them never settles.
    let floor = (f64::EPSILON * f64::EPSILON) * sq.iter().sum::<f64>();
    for _ in 0..MAX_SWEEPS {
        for (s, c) in sq.iter_mut().zip(g.iter()) {
            *s = dot(c, c);
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = sq[p];
                let beta = sq[q];
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let (gp, gq) = pair_mut(g, p, q);
                let gamma = dot(gp, gq);
                if gamma.abs() <= tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(gp, gq, c, s);
                let (vp, vq) = pair_mut(v, p, q);
                rotate(vp, vq, c, s);
                sq[p] = (alpha - t * gamma).max(0.0);
                sq[q] = (beta + t * gamma).max(0.0);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::Numerical(format!(
        "one-sided Jacobi did not converge within {MAX_SWEEPS} sweeps"
    )))
}

#[inline]
fn pair_mut<T>(xs: &mut [T], p: usize, q: usize) -> (&mut T, &mut T) {
    debug_assert!(p < q);
    let (a, b) = xs.split_at_mut(q);
    (&mut a[p], &mut b[0])
}

#[inline]
fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let xv = *x;
        let yv = *y;
        *x = c * xv - s * yv;
        *y = s * xv + c * yv;
    }
}

fn fix_sign(u: &mut [f64], v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in u.iter().enumerate() {
        if x.abs() > u[best].abs() {
            best = i;
        }
    }
    if u.get(best).is_some_and(|x| *x < 0.0) {
        u.iter_mut().for_each(|x| *x = -*x);
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn columns_to_matrix(cols: &[Vec<f64>], len: usize) -> Matrix {
    let r = cols.len();
    let mut data = vec![0.0; len * r];
    for (j, c) in cols.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            data[i * r + j] = *x;
        }
    }
    Matrix::from_raw(len, r, data)
}
