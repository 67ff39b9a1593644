//! Maps between image codes and shape codes, plus the direct pixel-to-shape
//! baseline.

pub mod io;
mod mlp;

pub use mlp::{
    mlp_forward, mlp_gradients, mlp_init, mlp_loss, mlp_train, Activation, MlpGradients, MlpMap, TrainSchedule,
    TrainedMlp,
};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};
use crate::subspace::SubspaceModel;

/// Linear map from image codes (k) to shape codes (k′); `t` is k′×k.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    pub t: Matrix,
}

impl LinearMap {
    pub fn apply(&self, code: &[f64]) -> Result<Vec<f64>> {
        self.t.mul_vec(code)
    }
}

/// Direct linear map from image vectors (D) to shape vectors (p); p×D.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectMap {
    pub b_hat: Matrix,
}

impl DirectMap {
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.b_hat.mul_vec(x)
    }

    pub fn predict_columns(&self, x: &Matrix) -> Result<Matrix> {
        self.b_hat.matmul(x)
    }
}

/// Least-squares `t = argmin ‖b − t·y‖` (minimum norm) for codes stored one
/// sample per column.
pub fn fit_linear_map(y: &Matrix, b: &Matrix) -> Result<LinearMap> {
    Ok(LinearMap { t: least_squares(y, b)? })
}

/// `shape.decode(t · image.encode(x))`.
pub fn apply_linear_pipeline(
    image_model: &SubspaceModel,
    shape_model: &SubspaceModel,
    map: &LinearMap,
    x: &[f64],
) -> Result<Vec<f64>> {
    if map.t.cols() != image_model.k() {
        return Err(Error::mismatch("linear map columns vs image code length", image_model.k(), map.t.cols()));
    }
    if map.t.rows() != shape_model.k() {
        return Err(Error::mismatch("linear map rows vs shape code length", shape_model.k(), map.t.rows()));
    }
    let code = image_model.encode(x)?;
    shape_model.decode(&map.apply(&code)?)
}

/// Least-squares `b_hat = argmin ‖z − b·x‖` straight from pixels to shape
/// vectors, without centering.
pub fn fit_direct_map(x: &Matrix, z: &Matrix) -> Result<DirectMap> {
    Ok(DirectMap { b_hat: least_squares(x, z)? })
}
