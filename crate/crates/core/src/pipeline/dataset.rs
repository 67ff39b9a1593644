//! On-disk datasets.
//!
//! Layout under the dataset directory:
//!
//! ```text
//! manifest.toml
//! splits/unlabeled_2d.csv   id,kind,seed,pose_deg,image,shape
//! splits/unlabeled_3d.csv
//! splits/paired_train.csv   one row per (shape, pose) pair
//! splits/paired_test.csv
//! images/<id>_p<j>.pgm
//! shapes/<id>.ply | shapes/<id>.voxr
//! ```
//!
//! Shape seeds are derived from the base seed, a per-split salt and the
//! sample index, and the shape ID is the seed in hex, so the splits are
//! disjoint and everything can be regenerated bit for bit.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DatasetConfig, ShapeFamily};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::render::{render_depth, Image2D};
use crate::shapes::io::{load_ply, load_voxr, save_ply, save_voxr};
use crate::shapes::{generate_point_shape, generate_voxel_shape, Shape, ShapeSpec};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Unlabeled2d,
    Unlabeled3d,
    PairedTrain,
    PairedTest,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Unlabeled2d, Split::Unlabeled3d, Split::PairedTrain, Split::PairedTest];

    pub fn name(self) -> &'static str {
        match self {
            Split::Unlabeled2d => "unlabeled_2d",
            Split::Unlabeled3d => "unlabeled_3d",
            Split::PairedTrain => "paired_train",
            Split::PairedTest => "paired_test",
        }
    }

    fn salt(self) -> u64 {
        match self {
            Split::Unlabeled2d => 0x2d2d_2d2d,
            Split::Unlabeled3d => 0x3d3d_3d3d,
            Split::PairedTrain => 0x7472_6169_6e00,
            Split::PairedTest => 0x7465_7374_0000,
        }
    }

    pub fn relative_path(self) -> PathBuf {
        PathBuf::from("splits").join(format!("{}.csv", self.name()))
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn shape_seed(base_seed: u64, split: Split, index: usize) -> u64 {
    splitmix64(splitmix64(base_seed ^ split.salt()).wrapping_add(index as u64))
}

/// One row of a split index. Paths are relative to the dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub id: String,
    pub kind: String,
    pub seed: u64,
    pub pose_deg: Option<f64>,
    pub image: Option<String>,
    pub shape: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub dataset: DatasetConfig,
    /// Split name → index file.
    pub splits: BTreeMap<String, String>,
    /// Split name → row count.
    pub counts: BTreeMap<String, usize>,
}

fn build_shape(config: &DatasetConfig, spec: &ShapeSpec) -> Result<Shape> {
    Ok(match config.family {
        ShapeFamily::Cloud => Shape::Cloud(generate_point_shape(spec, config.point_count)?),
        ShapeFamily::Voxel => Shape::Voxels(generate_voxel_shape(spec, config.resolution)?),
    })
}

fn save_shape(path: &Path, shape: &Shape) -> Result<()> {
    match shape {
        Shape::Cloud(c) => save_ply(path, c, None),
        Shape::Voxels(g) => save_voxr(path, g),
    }
}

fn generate_item(config: &DatasetConfig, dir: &Path, split: Split, index: usize) -> Result<Vec<SplitRecord>> {
    let seed = shape_seed(config.base_seed, split, index);
    let kind = config.kinds[index % config.kinds.len()];
    let id = format!("{seed:016x}");
    let spec = ShapeSpec::random(kind, seed);
    let shape = build_shape(config, &spec)?;
    let poses = config.pose_list();
    let labels = config.pose_labels();
    let size = config.image_size;

    let shape_rel = match split {
        Split::Unlabeled2d => None,
        _ => {
            let rel = format!("shapes/{id}.{}", config.family.extension());
            save_shape(&dir.join(&rel), &shape)?;
            Some(rel)
        }
    };
    let record = |j: usize, pose: Option<f64>| SplitRecord {
        id: id.clone(),
        kind: kind.name().to_string(),
        seed,
        pose_deg: pose,
        image: pose.map(|_| format!("images/{id}_p{j}.pgm")),
        shape: shape_rel.clone(),
    };
    let render = |j: usize| -> Result<()> {
        let img = render_depth(&shape, poses[j], size, size);
        img.save_pgm(&dir.join(format!("images/{id}_p{j}.pgm")))
    };
    Ok(match split {
        Split::Unlabeled3d => vec![record(0, None)],
        Split::Unlabeled2d => {
            let j = index % poses.len();
            render(j)?;
            vec![record(j, Some(labels[j]))]
        }
        Split::PairedTrain | Split::PairedTest => (0..poses.len())
            .map(|j| {
                render(j)?;
                Ok(record(j, Some(labels[j])))
            })
            .collect::<Result<_>>()?,
    })
}

fn split_count(config: &DatasetConfig, split: Split) -> usize {
    match split {
        Split::Unlabeled2d => config.unlabeled_2d,
        Split::Unlabeled3d => config.unlabeled_3d,
        Split::PairedTrain => config.paired_train,
        Split::PairedTest => config.paired_test,
    }
}

fn check_disjoint(records: &BTreeMap<Split, Vec<SplitRecord>>) -> Result<()> {
    let ids = |s: Split| records[&s].iter().map(|r| r.id.as_str()).collect::<HashSet<_>>();
    let test = ids(Split::PairedTest);
    for other in [Split::Unlabeled2d, Split::Unlabeled3d, Split::PairedTrain] {
        if let Some(id) = ids(other).intersection(&test).next() {
            return Err(Error::InvalidInput(format!("shape {id} appears in both {other} and paired_test")));
        }
    }
    Ok(())
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    super::write_atomic(path, &bytes)
}

/// Writes the full dataset tree under `dir` and returns its manifest.
pub fn generate_dataset(config: &DatasetConfig, dir: &Path) -> Result<DatasetManifest> {
    config.validate()?;
    for sub in ["splits", "images", "shapes"] {
        fs::create_dir_all(dir.join(sub))?;
    }
    let mut records = BTreeMap::new();
    for split in Split::ALL {
        let rows: Vec<Vec<SplitRecord>> = (0..split_count(config, split))
            .into_par_iter()
            .map(|i| generate_item(config, dir, split, i))
            .collect::<Result<_>>()?;
        records.insert(split, rows.into_iter().flatten().collect::<Vec<_>>());
    }
    check_disjoint(&records)?;
    let mut manifest = DatasetManifest {
        format_version: MANIFEST_FORMAT_VERSION,
        dataset: config.clone(),
        splits: BTreeMap::new(),
        counts: BTreeMap::new(),
    };
    for (split, rows) in &records {
        let rel = split.relative_path();
        write_csv(&dir.join(&rel), rows)?;
        manifest.splits.insert(split.name().into(), rel.to_string_lossy().replace('\\', "/"));
        manifest.counts.insert(split.name().into(), rows.len());
    }
    let text = toml::to_string(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    super::write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

/// Image (D×n) and shape (p×n) matrices with matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedData {
    pub images: Matrix,
    pub shapes: Matrix,
    /// `<id>_p<j>` per column.
    pub labels: Vec<String>,
}

impl PairedData {
    pub fn new(images: Matrix, shapes: Matrix, labels: Vec<String>) -> Result<Self> {
        if images.cols() != shapes.cols() {
            return Err(Error::mismatch("paired shape count", images.cols(), shapes.cols()));
        }
        if labels.len() != images.cols() {
            return Err(Error::mismatch("paired label count", images.cols(), labels.len()));
        }
        Ok(Self { images, shapes, labels })
    }

    pub fn len(&self) -> usize {
        self.images.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Read access to a generated dataset directory.
#[derive(Debug, Clone)]
pub struct Dataset {
    dir: PathBuf,
    manifest: DatasetManifest,
}

fn columns_to_matrix(rows: usize, columns: Vec<Vec<f64>>, what: &str) -> Result<Matrix> {
    for c in &columns {
        if c.len() != rows {
            return Err(Error::mismatch(what, rows, c.len()));
        }
    }
    if columns.is_empty() {
        return Ok(Matrix::zeros(rows, 0));
    }
    Matrix::from_columns(&columns)
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let manifest: DatasetManifest =
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported manifest version {}",
                manifest.format_version
            )));
        }
        manifest.dataset.validate()?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn config(&self) -> &DatasetConfig {
        &self.manifest.dataset
    }

    pub fn records(&self, split: Split) -> Result<Vec<SplitRecord>> {
        let rel = self
            .manifest
            .splits
            .get(split.name())
            .ok_or_else(|| Error::Format(format!("manifest lists no {split} split")))?;
        let path = self.dir.join(rel);
        let file = fs::File::open(&path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        csv::Reader::from_reader(file)
            .deserialize()
            .collect::<std::result::Result<Vec<SplitRecord>, _>>()
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    fn file(&self, rel: &Option<String>, what: &str, id: &str) -> Result<PathBuf> {
        rel.as_ref()
            .map(|r| self.dir.join(r))
            .ok_or_else(|| Error::Format(format!("record {id} has no {what} file")))
    }

    pub fn load_image(&self, record: &SplitRecord) -> Result<Image2D> {
        let img = Image2D::load_pgm(&self.file(&record.image, "image", &record.id)?)?;
        let size = self.config().image_size;
        if img.width() != size || img.height() != size {
            return Err(Error::mismatch("image pixel count", size * size, img.width() * img.height()));
        }
        Ok(img)
    }

    pub fn load_shape_vector(&self, record: &SplitRecord) -> Result<Vec<f64>> {
        let path = self.file(&record.shape, "shape", &record.id)?;
        let v = match self.config().family {
            ShapeFamily::Cloud => load_ply(&path)?.cloud.to_vector(),
            ShapeFamily::Voxel => load_voxr(&path)?.to_vector(),
        };
        if v.len() != self.config().shape_dim() {
            return Err(Error::mismatch("shape vector length", self.config().shape_dim(), v.len()));
        }
        Ok(v)
    }

    fn image_matrix(&self, records: &[SplitRecord]) -> Result<Matrix> {
        let cols = records
            .par_iter()
            .map(|r| Ok(self.load_image(r)?.to_vector()))
            .collect::<Result<Vec<_>>>()?;
        columns_to_matrix(self.config().image_dim(), cols, "image pixel count")
    }

    fn shape_matrix(&self, records: &[SplitRecord]) -> Result<Matrix> {
        let cols = records
            .par_iter()
            .map(|r| self.load_shape_vector(r))
            .collect::<Result<Vec<_>>>()?;
        columns_to_matrix(self.config().shape_dim(), cols, "shape vector length")
    }

    /// D×n matrix of the unlabeled image pool.
    pub fn unlabeled_images(&self) -> Result<Matrix> {
        self.image_matrix(&self.records(Split::Unlabeled2d)?)
    }

    /// p×n matrix of the unlabeled shape pool.
    pub fn unlabeled_shapes(&self) -> Result<Matrix> {
        self.shape_matrix(&self.records(Split::Unlabeled3d)?)
    }

    pub fn paired(&self, split: Split) -> Result<PairedData> {
        if !matches!(split, Split::PairedTrain | Split::PairedTest) {
            return Err(Error::InvalidInput(format!("{split} is not a paired split")));
        }
        let records = self.records(split)?;
        let labels = records
            .iter()
            .map(|r| {
                let stem = r.image.as_deref().and_then(|p| Path::new(p).file_stem()?.to_str());
                stem.map(str::to_string).unwrap_or_else(|| r.id.clone())
            })
            .collect();
        PairedData::new(self.image_matrix(&records)?, self.shape_matrix(&records)?, labels)
    }
}
