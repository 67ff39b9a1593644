//! Procedural shape families and the voxel / point-cloud representations.

pub mod io;
mod sampling;
mod spec;

pub use sampling::SurfaceParam;
pub use spec::{
    ShapeKind, ShapeSpec, Solid, CENTER_RANGE, MAJOR_RADIUS_RANGE, MAX_HORIZONTAL_REACH,
    MINOR_RADIUS_RANGE, SIZE_RANGE, VERTICAL_MARGIN,
};

use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 30;
pub const MIN_GENERATED_RESOLUTION: usize = 8;
pub const MAX_GENERATED_RESOLUTION: usize = 64;

/// Binary occupancy on a cubic lattice over the unit cube. Cell `(x, y, z)`
/// lives at index `x + res * (y + res * z)` (x fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelGrid {
    resolution: usize,
    occupancy: Vec<bool>,
}

impl VoxelGrid {
    pub fn empty(resolution: usize) -> Self {
        Self {
            resolution,
            occupancy: vec![false; resolution.pow(3)],
        }
    }

    pub fn from_occupancy(resolution: usize, occupancy: Vec<bool>) -> Result<Self> {
        if occupancy.len() != resolution.pow(3) {
            return Err(Error::mismatch(
                format!("occupancy length for resolution {resolution}"),
                resolution.pow(3),
                occupancy.len(),
            ));
        }
        Ok(Self { resolution, occupancy })
    }

    /// Binarizes a real-valued shape vector: a cell is occupied when its
    /// value is at least `threshold`.
    pub fn from_values(resolution: usize, values: &[f64], threshold: f64) -> Result<Self> {
        Self::from_occupancy(resolution, values.iter().map(|v| *v >= threshold).collect())
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.resolution * (y + self.resolution * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupancy[self.index(x, y, z)]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        self.occupancy[i] = value;
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|b| **b).count()
    }

    /// Center of cell `i` along one axis, in unit-cube coordinates.
    #[inline]
    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.resolution as f64
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.occupancy.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect()
    }
}

/// Ordered 3D points. Clouds sharing a `correspondence_id` have the same
/// length and point `i` denotes the same surface location in each.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
    pub correspondence_id: Option<String>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>, correspondence_id: Option<String>) -> Self {
        Self {
            points,
            correspondence_id,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Flattened as (x₁, y₁, z₁, x₂, …).
    pub fn to_vector(&self) -> Vec<f64> {
        self.points.iter().flatten().copied().collect()
    }

    pub fn from_vector(values: &[f64], correspondence_id: Option<String>) -> Result<Self> {
        if values.len() % 3 != 0 {
            return Err(Error::InvalidInput(format!(
                "point vector length {} is not a multiple of 3",
                values.len()
            )));
        }
        let points = values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Self::new(points, correspondence_id))
    }

    pub fn is_normalized(&self) -> bool {
        self.points.iter().flatten().all(|v| (0.0..=1.0).contains(v))
    }

    /// Min-max rescales each axis independently onto [0, 1]. Degenerate axes
    /// (zero extent) map to 0.5.
    pub fn normalized(&self) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                let mut q = [0.0; 3];
                for a in 0..3 {
                    let span = hi[a] - lo[a];
                    q[a] = if span > 0.0 { (p[a] - lo[a]) / span } else { 0.5 };
                }
                q
            })
            .collect();
        Self::new(points, self.correspondence_id.clone())
    }
}

/// Either representation, for operations defined on both.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Voxels(VoxelGrid),
    Cloud(PointCloud),
}

impl Shape {
    pub fn to_vector(&self) -> Vec<f64> {
        vectorize_shape(self)
    }
}

impl From<VoxelGrid> for Shape {
    fn from(g: VoxelGrid) -> Self {
        Shape::Voxels(g)
    }
}

impl From<PointCloud> for Shape {
    fn from(c: PointCloud) -> Self {
        Shape::Cloud(c)
    }
}

/// Column-vector form of a shape, one entry per cell or coordinate.
pub fn vectorize_shape(shape: &Shape) -> Vec<f64> {
    match shape {
        Shape::Voxels(g) => g.to_vector(),
        Shape::Cloud(c) => c.to_vector(),
    }
}

/// Rasterizes a solid: a cell is occupied iff its center is inside.
pub fn generate_voxel_shape(spec: &ShapeSpec, resolution: usize) -> Result<VoxelGrid> {
    if !(MIN_GENERATED_RESOLUTION..=MAX_GENERATED_RESOLUTION).contains(&resolution) {
        return Err(Error::InvalidInput(format!(
            "resolution {resolution} outside [{MIN_GENERATED_RESOLUTION}, {MAX_GENERATED_RESOLUTION}]"
        )));
    }
    spec.validate()?;
    let mut grid = VoxelGrid::empty(resolution);
    for z in 0..resolution {
        for y in 0..resolution {
            for x in 0..resolution {
                let p = [grid.cell_center(x), grid.cell_center(y), grid.cell_center(z)];
                if spec.solid.contains(p) {
                    grid.set(x, y, z, true);
                }
            }
        }
    }
    Ok(grid)
}

/// Identifier shared by every cloud sampled from `kind` with `point_count`
/// points.
pub fn correspondence_id(kind: ShapeKind, point_count: usize) -> String {
    format!("{kind}-{point_count}")
}

/// Samples the solid's surface on the kind's fixed lattice.
pub fn generate_point_shape(spec: &ShapeSpec, point_count: usize) -> Result<PointCloud> {
    generate_point_shape_with_params(spec, point_count).map(|(cloud, _)| cloud)
}

/// As [`generate_point_shape`], also returning each point's surface
/// coordinate.
pub fn generate_point_shape_with_params(
    spec: &ShapeSpec,
    point_count: usize,
) -> Result<(PointCloud, Vec<SurfaceParam>)> {
    if point_count < 4 {
        return Err(Error::InvalidInput(format!(
            "point count must be at least 4, got {point_count}"
        )));
    }
    spec.validate()?;
    let (params, points) = sampling::sample_surface(&spec.solid, point_count)?;
    let id = correspondence_id(spec.kind(), point_count);
    Ok((PointCloud::new(points, Some(id)), params))
}

/// Marks every cell that contains at least one point. Cells are half-open
/// except the last along each axis, which is closed so 1.0 lands inside.
/// Points outside the unit cube are ignored.
pub fn voxelize(cloud: &PointCloud, resolution: usize) -> VoxelGrid {
    let mut grid = VoxelGrid::empty(resolution);
    let cell = |v: f64| ((v * resolution as f64).floor() as usize).min(resolution - 1);
    for p in &cloud.points {
        if p.iter().all(|v| (0.0..=1.0).contains(v)) {
            grid.set(cell(p[0]), cell(p[1]), cell(p[2]), true);
        }
    }
    grid
}

/// One point at each occupied cell center, in grid order.
pub fn cloud_from_voxels(grid: &VoxelGrid) -> PointCloud {
    let r = grid.resolution();
    let mut points = Vec::with_capacity(grid.occupied_count());
    for z in 0..r {
        for y in 0..r {
            for x in 0..r {
                if grid.get(x, y, z) {
                    points.push([grid.cell_center(x), grid.cell_center(y), grid.cell_center(z)]);
                }
            }
        }
    }
    PointCloud::new(points, None)
}
