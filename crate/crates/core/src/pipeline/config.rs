//! Dataset and experiment configuration, read from TOML.
//!
//! A config file has two optional sections, `[dataset]` and `[experiment]`.
//! Every key has a default and unknown keys are rejected.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::TrainSchedule;
use crate::render::{view_poses, Pose};
use crate::shapes::{ShapeKind, MAX_GENERATED_RESOLUTION, MIN_GENERATED_RESOLUTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeFamily {
    Cloud,
    Voxel,
}

impl ShapeFamily {
    pub fn extension(self) -> &'static str {
        match self {
            ShapeFamily::Cloud => "ply",
            ShapeFamily::Voxel => "voxr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Subspace codes linked by a least-squares linear map.
    Lowdim,
    /// Least squares straight from pixels to shape vectors.
    Direct,
    /// Subspace codes linked by a feed-forward network.
    Mlp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Lowdim, Method::Direct, Method::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lowdim => "lowdim",
            Method::Direct => "direct",
            Method::Mlp => "mlp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}` (expected lowdim, direct or mlp)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub family: ShapeFamily,
    pub kinds: Vec<ShapeKind>,
    /// Points per cloud (cloud family).
    pub point_count: usize,
    /// Grid resolution (voxel family).
    pub resolution: usize,
    pub image_size: usize,
    /// Explicit yaw angles in degrees; overrides `view_count`.
    pub poses: Option<Vec<f64>>,
    /// Number of evenly spaced yaws 180°·i/n, used when `poses` is unset.
    pub view_count: Option<usize>,
    /// Unlabeled images, each of a fresh shape.
    pub unlabeled_2d: usize,
    /// Unlabeled shapes.
    pub unlabeled_3d: usize,
    /// Paired shapes; every pose of each shape becomes one pair.
    pub paired_train: usize,
    pub paired_test: usize,
    pub base_seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            family: ShapeFamily::Cloud,
            kinds: vec![ShapeKind::Ellipsoid],
            point_count: 500,
            resolution: 16,
            image_size: 32,
            poses: None,
            view_count: None,
            unlabeled_2d: 300,
            unlabeled_3d: 300,
            paired_train: 67,
            paired_test: 17,
            base_seed: 42,
        }
    }
}

impl DatasetConfig {
    /// Yaw angles in degrees as configured (not reduced to [0, 360)).
    pub fn pose_labels(&self) -> Vec<f64> {
        match (&self.poses, self.view_count) {
            (Some(p), _) => p.clone(),
            (None, Some(n)) => view_poses(n).iter().map(Pose::yaw_deg).collect(),
            (None, None) => vec![-45.0, 0.0, 45.0],
        }
    }

    pub fn pose_list(&self) -> Vec<Pose> {
        self.pose_labels().into_iter().map(Pose::from_degrees).collect()
    }

    pub fn image_dim(&self) -> usize {
        self.image_size * self.image_size
    }

    pub fn shape_dim(&self) -> usize {
        match self.family {
            ShapeFamily::Cloud => 3 * self.point_count,
            ShapeFamily::Voxel => self.resolution.pow(3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() {
            return Err(Error::Config("dataset.kinds must not be empty".into()));
        }
        match self.family {
            ShapeFamily::Cloud => {
                if self.kinds.len() != 1 || self.kinds[0] == ShapeKind::Composite {
                    return Err(Error::Config(
                        "cloud family needs exactly one non-composite kind so points correspond".into(),
                    ));
                }
                if self.point_count < 4 {
                    return Err(Error::Config("dataset.point_count must be at least 4".into()));
                }
            }
            ShapeFamily::Voxel => {
                if !(MIN_GENERATED_RESOLUTION..=MAX_GENERATED_RESOLUTION).contains(&self.resolution) {
                    return Err(Error::Config(format!(
                        "dataset.resolution must be in {MIN_GENERATED_RESOLUTION}..={MAX_GENERATED_RESOLUTION}"
                    )));
                }
            }
        }
        if self.image_size == 0 {
            return Err(Error::Config("dataset.image_size must be positive".into()));
        }
        if let Some(p) = &self.poses {
            if p.is_empty() || p.iter().any(|d| !d.is_finite()) {
                return Err(Error::Config("dataset.poses must be a non-empty list of finite angles".into()));
            }
        }
        if self.view_count == Some(0) {
            return Err(Error::Config("dataset.view_count must be positive".into()));
        }
        if self.unlabeled_2d < 2 || self.unlabeled_3d < 2 {
            return Err(Error::Config("unlabeled pools need at least 2 samples each".into()));
        }
        if self.paired_train == 0 || self.paired_test == 0 {
            return Err(Error::Config("paired splits must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    /// `[rate, epochs]` pairs run in order.
    pub phases: Vec<(f64, usize)>,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let r = TrainSchedule::reference(42);
        Self {
            phases: r.phases,
            batch_size: r.batch_size,
            seed: r.seed,
        }
    }
}

impl From<&ScheduleConfig> for TrainSchedule {
    fn from(c: &ScheduleConfig) -> Self {
        TrainSchedule {
            phases: c.phases.clone(),
            batch_size: c.batch_size,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub k_2d: usize,
    pub k_3d: usize,
    pub method: Method,
    /// Hidden layer widths; the input and output widths come from k_2d/k_3d.
    pub mlp_hidden: Vec<usize>,
    pub schedule: ScheduleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k_2d: 60,
            k_3d: 98,
            method: Method::Lowdim,
            mlp_hidden: vec![100],
            schedule: ScheduleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn schedule(&self) -> TrainSchedule {
        (&self.schedule).into()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_2d == 0 || self.k_3d == 0 {
            return Err(Error::Config("experiment.k_2d and k_3d must be positive".into()));
        }
        if self.mlp_hidden.contains(&0) {
            return Err(Error::Config("experiment.mlp_hidden widths must be positive".into()));
        }
        self.schedule().validate().map_err(|e| Error::Config(format!("experiment.schedule: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub dataset: DatasetConfig,
    pub experiment: ExperimentConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.experiment.validate()
    }

    /// Overrides the dataset seed and the training seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.dataset.base_seed = seed;
        self.experiment.schedule.seed = seed;
        self
    }
}
