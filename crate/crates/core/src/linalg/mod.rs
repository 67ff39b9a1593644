//! Dense linear algebra: matrices, thin SVD, pseudo-inverse and least squares.
//!
//! Everything here is a pure function of its inputs.

mod matrix;
mod svd;

pub use matrix::Matrix;
pub use svd::{svd, Svd, RANK_TOLERANCE};


use crate::error::{Error, Result};

/// Moore–Penrose pseudo-inverse, `V Σ⁻¹ Uᵀ` over the effective rank.
pub fn pseudo_inverse(m: &Matrix) -> Result<Matrix> {
    let s = svd(m)?;
    let mut v_scaled = s.v.clone();
    for i in 0..v_scaled.rows() {
        for (j, sigma) in s.sigma.iter().enumerate() {
            v_scaled[(i, j)] /= sigma;
        }
    }
    v_scaled.matmul(&s.u.transpose())
}

/// Minimum-norm solution `X` (k'×k) of `min ‖b − X a‖_F` for `a` (k×n) and
/// `b` (k'×n), i.e. `X = b a⁺`. Both matrices hold one sample per column.
pub fn least_squares(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(Error::InvalidInput(format!(
            "least squares: sample counts differ ({} vs {})",
            a.cols(),
            b.cols()
        )));
    }
    let s = svd(a)?;
    // X = (b V) Σ⁻¹ Uᵀ, cheaper than forming a⁺ when k' < k.
    let mut bv = b.matmul(&s.v)?;
    for i in 0..bv.rows() {
        for (j, sigma) in s.sigma.iter().enumerate() {
            bv[(i, j)] /= sigma;
        }
    }
    if s.rank() == 0 {
        return Ok(Matrix::zeros(b.rows(), a.rows()));
    }
    bv.matmul(&s.u.transpose())
}
