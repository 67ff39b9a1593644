//! End-to-end experiments: pretrain both subspaces on unlabeled pools, fit a
//! mapping on paired data, reconstruct and score.

pub mod config;
pub mod dataset;
mod heatmap;
mod report;

pub use config::{Config, DatasetConfig, ExperimentConfig, Method, ScheduleConfig, ShapeFamily};
pub use dataset::{generate_dataset, shape_seed, Dataset, DatasetManifest, PairedData, Split, SplitRecord};
pub use heatmap::{heatmap, voxel_heatmap, HeatMap, HeatMapMode};
pub use report::{compare_methods, evaluate_columns, evaluate_rmse, ComparisonReport, ComparisonRow, EvaluationReport};

use std::fs;
use std::path::Path;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mapping::{
    fit_direct_map, fit_linear_map, mlp_train, Activation, DirectMap, LinearMap, MlpMap, TrainSchedule,
};
use crate::shapes::{PointCloud, Shape, VoxelGrid};
use crate::subspace::{fit_subspace, SubspaceModel};

/// Voxel predictions at or above this value count as occupied.
pub const VOXEL_THRESHOLD: f64 = 0.5;

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// The image-side and shape-side subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspaces {
    pub image: SubspaceModel,
    pub shape: SubspaceModel,
}

pub fn pretrain_from_matrices(images: &Matrix, shapes: &Matrix, k_2d: usize, k_3d: usize) -> Result<Subspaces> {
    let clamp = |k: usize, m: &Matrix, what: &str| {
        let cap = m.rows().min(m.cols());
        if k > cap {
            warn!("{what} subspace dimension {k} exceeds the pool limit {cap}; using {cap}");
        }
        k.min(cap)
    };
    let image = fit_subspace(images, clamp(k_2d, images, "image"))?;
    let shape = fit_subspace(shapes, clamp(k_3d, shapes, "shape"))?;
    info!(
        "pretrained subspaces: image {}→{}, shape {}→{}",
        image.dim(),
        image.k(),
        shape.dim(),
        shape.k()
    );
    Ok(Subspaces { image, shape })
}

/// Fits both subspaces from the unlabeled pools only; the paired splits
/// are never opened.
pub fn pretrain(dataset: &Dataset, k_2d: usize, k_3d: usize) -> Result<Subspaces> {
    pretrain_from_matrices(&dataset.unlabeled_images()?, &dataset.unlabeled_shapes()?, k_2d, k_3d)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MappingModel {
    Lowdim(LinearMap),
    Direct(DirectMap),
    Mlp(MlpMap),
}

impl MappingModel {
    pub fn method(&self) -> Method {
        match self {
            MappingModel::Lowdim(_) => Method::Lowdim,
            MappingModel::Direct(_) => Method::Direct,
            MappingModel::Mlp(_) => Method::Mlp,
        }
    }

    pub fn to_mlp(&self) -> MlpMap {
        match self {
            MappingModel::Lowdim(m) => m.into(),
            MappingModel::Direct(m) => m.into(),
            MappingModel::Mlp(m) => m.clone(),
        }
    }

    /// Rebuilds a mapping read from a `.map` file.
    pub fn from_mlp(method: Method, map: MlpMap) -> Result<Self> {
        Ok(match method {
            Method::Lowdim => MappingModel::Lowdim(LinearMap {
                t: crate::mapping::io::as_single_matrix(&map)?.clone(),
            }),
            Method::Direct => MappingModel::Direct(DirectMap {
                b_hat: crate::mapping::io::as_single_matrix(&map)?.clone(),
            }),
            Method::Mlp => MappingModel::Mlp(map),
        })
    }
}

fn rms(m: &Matrix) -> f64 {
    let n = m.as_slice().len();
    if n == 0 {
        return 1.0;
    }
    let r = (m.as_slice().iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if r > 0.0 {
        r
    } else {
        1.0
    }
}

/// Trains the network on codes scaled to unit RMS, then folds the two
/// scale factors into the first and last layers so the result acts on raw
/// codes.
pub fn fit_mlp_codes(y: &Matrix, b: &Matrix, hidden: &[usize], schedule: &TrainSchedule) -> Result<MlpMap> {
    let (sy, sb) = (rms(y), rms(b));
    let mut sizes = vec![y.rows()];
    sizes.extend_from_slice(hidden);
    sizes.push(b.rows());
    let run = mlp_train(&sizes, Activation::Tanh, &y.scale(1.0 / sy), &b.scale(1.0 / sb), schedule)?;
    if let Some(last) = run.loss_history.last() {
        info!("mlp trained for {} epochs, final scaled loss {last:.6e}", run.loss_history.len());
    }
    let map = run.map;
    let last = map.weights().len() - 1;
    let mut weights = map.weights().to_vec();
    let mut biases = map.biases().to_vec();
    weights[0] = weights[0].scale(1.0 / sy);
    weights[last] = weights[last].scale(sb);
    for v in biases[last].iter_mut() {
        *v *= sb;
    }
    MlpMap::from_parts(weights, biases, Activation::Tanh)
}

/// Fits the mapping for `method` on paired data. The direct method ignores
/// the subspaces.
pub fn fit_mapping(
    method: Method,
    experiment: &ExperimentConfig,
    models: &Subspaces,
    train: &PairedData,
) -> Result<MappingModel> {
    if train.is_empty() {
        return Err(Error::InvalidInput("no paired training data".into()));
    }
    if method == Method::Direct {
        return Ok(MappingModel::Direct(fit_direct_map(&train.images, &train.shapes)?));
    }
    let y = models.image.encode_columns(&train.images)?;
    let b = models.shape.encode_columns(&train.shapes)?;
    Ok(match method {
        Method::Lowdim => MappingModel::Lowdim(fit_linear_map(&y, &b)?),
        _ => MappingModel::Mlp(fit_mlp_codes(&y, &b, &experiment.mlp_hidden, &experiment.schedule())?),
    })
}

fn check_chain(models: &Subspaces, mapping: &MappingModel, image_dim: usize) -> Result<()> {
    let (inp, out, want_in, want_out) = match mapping {
        MappingModel::Direct(d) => (d.b_hat.cols(), d.b_hat.rows(), image_dim, models.shape.dim()),
        MappingModel::Lowdim(l) => (l.t.cols(), l.t.rows(), models.image.k(), models.shape.k()),
        MappingModel::Mlp(m) => (m.input_size(), m.output_size(), models.image.k(), models.shape.k()),
    };
    if image_dim != models.image.dim() {
        return Err(Error::mismatch("image length vs image model dim", models.image.dim(), image_dim));
    }
    if inp != want_in {
        return Err(Error::mismatch("mapping input width", want_in, inp));
    }
    if out != want_out {
        return Err(Error::mismatch("mapping output width", want_out, out));
    }
    Ok(())
}

/// Predicts shape vectors for every column of a D×n image matrix.
pub fn reconstruct_columns(models: &Subspaces, mapping: &MappingModel, images: &Matrix) -> Result<Matrix> {
    check_chain(models, mapping, images.rows())?;
    let codes_to_shapes = |codes: Matrix| -> Result<Matrix> {
        let mut out = models.shape.basis().matmul(&codes)?;
        let mean = models.shape.mean();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                out[(i, j)] += mean[i];
            }
        }
        Ok(out)
    };
    match mapping {
        MappingModel::Direct(d) => d.predict_columns(images),
        MappingModel::Lowdim(l) => codes_to_shapes(l.t.matmul(&models.image.encode_columns(images)?)?),
        MappingModel::Mlp(m) => codes_to_shapes(m.forward_columns(&models.image.encode_columns(images)?)?),
    }
}

pub fn reconstruct(models: &Subspaces, mapping: &MappingModel, image: &[f64]) -> Result<Vec<f64>> {
    let m = Matrix::from_columns(&[image.to_vec()])?;
    Ok(reconstruct_columns(models, mapping, &m)?.column(0))
}

/// Turns a raw predicted vector into a shape: a point cloud, or a voxel grid
/// binarized at [`VOXEL_THRESHOLD`].
pub fn decode_shape(family: ShapeFamily, values: &[f64], config: &DatasetConfig) -> Result<Shape> {
    Ok(match family {
        ShapeFamily::Cloud => Shape::Cloud(PointCloud::from_vector(
            values,
            Some(crate::shapes::correspondence_id(config.kinds[0], config.point_count)),
        )?),
        ShapeFamily::Voxel => Shape::Voxels(VoxelGrid::from_values(config.resolution, values, VOXEL_THRESHOLD)?),
    })
}
