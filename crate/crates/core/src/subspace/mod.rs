//! PCA subspace models for images and shapes.
//!
//! A model is the affine subspace `mean + span(basis)`: `encode` projects a
//! sample onto its k coordinates and `decode` maps coordinates back into the
//! ambient space.

mod autoencoder;
pub mod io;

pub use autoencoder::{train_linear_autoencoder, AutoencoderInit, AutoencoderSchedule, LinearAutoencoder};

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel {
    mean: Vec<f64>,
    /// dim×k, orthonormal columns in descending singular-value order.
    basis: Matrix,
    singular_values: Vec<f64>,
    requested_k: usize,
}

impl SubspaceModel {
    pub(crate) fn from_parts(mean: Vec<f64>, basis: Matrix, singular_values: Vec<f64>) -> Result<Self> {
        if basis.rows() != mean.len() {
            return Err(Error::mismatch("basis rows", mean.len(), basis.rows()));
        }
        if singular_values.len() != basis.cols() {
            return Err(Error::mismatch("singular value count", basis.cols(), singular_values.len()));
        }
        Ok(Self {
            requested_k: basis.cols(),
            mean,
            basis,
            singular_values,
        })
    }

    /// Ambient dimension (D for images, p for shapes).
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Subspace dimension actually kept.
    pub fn k(&self) -> usize {
        self.basis.cols()
    }

    /// True when the data rank forced `k` below the requested value.
    pub fn rank_limited(&self) -> bool {
        self.k() < self.requested_k
    }

    pub fn requested_k(&self) -> usize {
        self.requested_k
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// `basisᵀ (x − mean)`.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::mismatch("subspace encode input length", self.dim(), x.len()));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        self.basis.tr_mul_vec(&centered)
    }

    /// `mean + basis · code`.
    pub fn decode(&self, code: &[f64]) -> Result<Vec<f64>> {
        if code.len() != self.k() {
            return Err(Error::mismatch("subspace decode code length", self.k(), code.len()));
        }
        let mut out = self.basis.mul_vec(code)?;
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o += m;
        }
        Ok(out)
    }

    /// Encodes every column of a dim×n sample matrix, giving k×n codes.
    pub fn encode_columns(&self, samples: &Matrix) -> Result<Matrix> {
        if samples.rows() != self.dim() {
            return Err(Error::mismatch("subspace encode input length", self.dim(), samples.rows()));
        }
        self.basis.transpose().matmul(&samples.sub_from_rows(&self.mean)?)
    }

    /// Squared reconstruction error summed over the columns of `samples`.
    pub fn reconstruction_sse(&self, samples: &Matrix) -> Result<f64> {
        let codes = self.encode_columns(samples)?;
        let recon = self.basis.matmul(&codes)?;
        let centered = samples.sub_from_rows(&self.mean)?;
        Ok(centered.sub(&recon)?.as_slice().iter().map(|v| v * v).sum())
    }
}

/// Fits the mean and the top-`k` left singular vectors of the centered
/// dim×n sample matrix.
///
/// When the centered data has rank r < k, only r directions are kept and
/// [`SubspaceModel::rank_limited`] reports it.
pub fn fit_subspace(samples: &Matrix, k: usize) -> Result<SubspaceModel> {
    let (dim, n) = samples.shape();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")));
    }
    if k > dim.min(n) {
        return Err(Error::InvalidInput(format!(
            "subspace dimension {k} exceeds min(dim {dim}, samples {n})"
        )));
    }
    let mean = samples.row_means();
    let centered = samples.sub_from_rows(&mean)?;
    let decomposition = svd(&centered)?;
    let keep = k.min(decomposition.rank());
    if keep < k {
        warn!("data rank {} is below requested subspace dimension {k}; keeping {keep}", decomposition.rank());
    }
    Ok(SubspaceModel {
        mean,
        basis: decomposition.u.leading_columns(keep),
        singular_values: decomposition.sigma[..keep].to_vec(),
        requested_k: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn identical_samples_give_empty_basis() {
        let v = vec![0.3, -1.0, 2.0];
        let m = Matrix::from_columns(&vec![v.clone(); 5]).unwrap();
        let model = fit_subspace(&m, 2).unwrap();
        assert_eq!(model.mean(), &v[..]);
        assert_eq!(model.k(), 0);
        assert!(model.rank_limited());
        assert_eq!(model.encode(&v).unwrap(), Vec::<f64>::new());
        assert_eq!(model.decode(&[]).unwrap(), v);
    }

    #[test]
    fn two_point_pca() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![2.0, 0.0, 5.0];
        let model = fit_subspace(&Matrix::from_columns(&[a.clone(), b.clone()]).unwrap(), 1).unwrap();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let len = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
        let col = model.basis().column(0);
        // Sign convention: largest-magnitude entry (index 1 here) positive.
        let sign = if diff[1] / len > 0.0 { 1.0 } else { -1.0 };
        for (c, d) in col.iter().zip(&diff) {
            assert!((c - sign * d / len).abs() < 1e-14);
        }
    }

    #[test]
    fn truncated_sse_equals_discarded_spectrum() {
        let x = random_matrix(10, 6, 3);
        // Oracle: full spectrum of the centered matrix.
        let centered = x.sub_from_rows(&x.row_means()).unwrap();
        let full = svd(&centered).unwrap();
        let discarded: f64 = full.sigma[3..].iter().map(|s| s * s).sum();
        let model = fit_subspace(&x, 3).unwrap();
        let sse = model.reconstruction_sse(&x).unwrap();
        assert!((sse - discarded).abs() <= 1e-8 * discarded);
    }

    #[test]
    fn encode_decode_identities() {
        let x = random_matrix(7, 12, 5);
        let model = fit_subspace(&x, 4).unwrap();
        assert!(model.encode(model.mean()).unwrap().iter().all(|v| v.abs() < 1e-15));
        for j in 0..model.k() {
            let probe: Vec<f64> = model
                .mean()
                .iter()
                .zip(model.basis().column(j))
                .map(|(m, b)| m + b)
                .collect();
            let code = model.encode(&probe).unwrap();
            for (i, c) in code.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c - want).abs() < 1e-12);
            }
        }
        assert_eq!(model.decode(&vec![0.0; 4]).unwrap(), model.mean());

        // Column j of Y = Uᵀ X_c via an explicit product.
        let centered = x.sub_from_rows(&x.row_means()).unwrap();
        let y = model.basis().transpose().matmul(&centered).unwrap();
        let code = model.encode(&x.column(5)).unwrap();
        for (a, b) in code.iter().zip(y.column(5)) {
            assert!((a - b).abs() < 1e-12);
        }

        // A point already in the affine subspace comes back unchanged.
        let inside = model.decode(&[0.3, -1.2, 0.5, 2.0]).unwrap();
        let again = model.decode(&model.encode(&inside).unwrap()).unwrap();
        for (a, b) in again.iter().zip(&inside) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_is_closest_subspace_point() {
        let x = random_matrix(6, 10, 8);
        let model = fit_subspace(&x, 2).unwrap();
        let probe: Vec<f64> = (0..6).map(|i| (i as f64 * 0.7).sin()).collect();
        let proj = model.decode(&model.encode(&probe).unwrap()).unwrap();
        let dist = |p: &[f64]| p.iter().zip(&probe).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let best = dist(&proj);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let code: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            assert!(best <= dist(&model.decode(&code).unwrap()));
        }
    }

    #[test]
    fn errors() {
        let x = random_matrix(4, 3, 1);
        assert!(fit_subspace(&x, 4).is_err());
        assert!(fit_subspace(&random_matrix(4, 1, 1), 1).is_err());
        let model = fit_subspace(&x, 2).unwrap();
        assert!(matches!(model.encode(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(model.decode(&[1.0]).is_err());
    }

    #[test]
    fn nested_bases_are_prefixes() {
        let x = random_matrix(9, 15, 11);
        let big = fit_subspace(&x, 6).unwrap();
        for k in 1..6 {
            let small = fit_subspace(&x, k).unwrap();
            assert_eq!(small.basis(), &big.basis().leading_columns(k));
            assert_eq!(small.singular_values(), &big.singular_values()[..k]);
        }
    }
}
