use std::fmt;

use crate::error::{Error, Result};
use crate::shapes::{PointCloud, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatMapMode {
    /// Distance between the i-th predicted and i-th true point.
    Corresponded,
    /// Distance from each true point to the closest predicted point.
    NearestNeighbor,
}

impl HeatMapMode {
    pub fn name(self) -> &'static str {
        match self {
            HeatMapMode::Corresponded => "corresponded",
            HeatMapMode::NearestNeighbor => "nearest",
        }
    }
}

impl fmt::Display for HeatMapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for HeatMapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corresponded" => Ok(HeatMapMode::Corresponded),
            "nearest" | "nearest-neighbor" => Ok(HeatMapMode::NearestNeighbor),
            other => Err(Error::InvalidInput(format!("unknown heat-map mode `{other}`"))),
        }
    }
}

/// Per-point (or per-cell) errors in ground-truth order.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMap {
    pub values: Vec<f64>,
    pub mode: HeatMapMode,
}

impl HeatMap {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn heatmap(prediction: &PointCloud, truth: &PointCloud, mode: HeatMapMode) -> Result<HeatMap> {
    let values = match mode {
        HeatMapMode::Corresponded => {
            if prediction.len() != truth.len() {
                return Err(Error::mismatch("corresponded heat map point count", truth.len(), prediction.len()));
            }
            match (&prediction.correspondence_id, &truth.correspondence_id) {
                (Some(a), Some(b)) if a == b => {}
                (a, b) => {
                    return Err(Error::InvalidInput(format!(
                        "corresponded heat map needs a shared correspondence id, got {a:?} and {b:?}"
                    )))
                }
            }
            prediction.points.iter().zip(&truth.points).map(|(p, t)| dist(p, t)).collect()
        }
        HeatMapMode::NearestNeighbor => {
            if prediction.is_empty() {
                return Err(Error::InvalidInput("nearest-neighbor heat map needs a non-empty prediction".into()));
            }
            truth
                .points
                .iter()
                .map(|t| prediction.points.iter().map(|p| dist(p, t)).fold(f64::INFINITY, f64::min))
                .collect()
        }
    };
    Ok(HeatMap { values, mode })
}

/// Per-cell absolute error between raw predicted occupancies and a grid.
pub fn voxel_heatmap(prediction: &[f64], truth: &VoxelGrid) -> Result<HeatMap> {
    let cells = truth.occupancy().len();
    if prediction.len() != cells {
        return Err(Error::mismatch("voxel heat map cell count", cells, prediction.len()));
    }
    let values = prediction
        .iter()
        .zip(truth.occupancy())
        .map(|(p, &t)| (p - if t { 1.0 } else { 0.0 }).abs())
        .collect();
    Ok(HeatMap {
        values,
        mode: HeatMapMode::Corresponded,
    })
}
