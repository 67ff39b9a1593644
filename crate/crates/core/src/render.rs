//! Orthographic depth rendering of voxel grids and point clouds.
//!
//! The camera looks along +y. Image columns follow x (left to right) and
//! rows follow z (top row = high z). A pixel holds `1 − depth`, where depth
//! is the y coordinate of the nearest surface in unit-cube units, and 0
//! where nothing projects.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::shapes::{PointCloud, Shape, VoxelGrid};

pub const DEFAULT_IMAGE_SIZE: usize = 32;

/// Grayscale raster, row-major, values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image2D {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::mismatch(
                format!("pixel count for {width}x{height} image"),
                width * height,
                pixels.len(),
            ));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.pixels.clone()
    }

    /// Left-right mirror.
    pub fn mirrored(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks(self.width) {
            pixels.extend(row.iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Binary PGM (P5), maxval 255, byte = round(pixel · 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().map(|v| (v * 255.0).round() as u8));
        out
    }

    pub fn from_pgm(data: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            // Skip whitespace and comments.
            while pos < data.len() && (data[pos].is_ascii_whitespace() || data[pos] == b'#') {
                if data[pos] == b'#' {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < data.len() && !data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::UnexpectedEof);
            }
            fields.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
        }
        if fields[0] != "P5" {
            return Err(Error::Format(format!("expected P5 magic, found `{}`", fields[0])));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad PGM header field `{s}`")))
        };
        let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
        if maxval != 255 {
            return Err(Error::Format(format!("unsupported PGM maxval {maxval}")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        let body = data.get(pos + 1..).ok_or(Error::UnexpectedEof)?;
        if body.len() < width * height {
            return Err(Error::UnexpectedEof);
        }
        let pixels = body[..width * height].iter().map(|b| *b as f64 / 255.0).collect();
        Self::new(width, height, pixels)
    }

    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_pgm())?;
        Ok(())
    }

    pub fn load_pgm(path: &Path) -> Result<Self> {
        Self::from_pgm(&fs::read(path)?)
    }
}

/// Viewpoint as a rotation about the vertical axis through the cube center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    yaw_deg: f64,
}

impl Pose {
    /// Any angle; stored reduced to [0, 360).
    pub fn from_degrees(yaw: f64) -> Self {
        let mut yaw_deg = yaw.rem_euclid(360.0);
        if yaw_deg >= 360.0 {
            yaw_deg = 0.0;
        }
        Self { yaw_deg }
    }

    pub fn yaw_deg(&self) -> f64 {
        self.yaw_deg
    }

    /// (cos, sin), exact at multiples of 90°.
    fn cos_sin(&self) -> (f64, f64) {
        match self.yaw_deg {
            y if y == 0.0 => (1.0, 0.0),
            y if y == 90.0 => (0.0, 1.0),
            y if y == 180.0 => (-1.0, 0.0),
            y if y == 270.0 => (0.0, -1.0),
            y => {
                let r = y.to_radians();
                (r.cos(), r.sin())
            }
        }
    }
}

#[inline]
fn rotate_xy(p: [f64; 3], cos: f64, sin: f64) -> [f64; 3] {
    let dx = p[0] - 0.5;
    let dy = p[1] - 0.5;
    [0.5 + cos * dx - sin * dy, 0.5 + sin * dx + cos * dy, p[2]]
}

pub fn rotate_cloud(cloud: &PointCloud, pose: Pose) -> PointCloud {
    if pose.yaw_deg == 0.0 {
        return cloud.clone();
    }
    let (c, s) = pose.cos_sin();
    PointCloud::new(
        cloud.points.iter().map(|p| rotate_xy(*p, c, s)).collect(),
        cloud.correspondence_id.clone(),
    )
}

/// Each target cell center is mapped back through the inverse rotation and
/// takes the occupancy of the cell it lands in (empty if outside the grid).
pub fn rotate_voxels(grid: &VoxelGrid, pose: Pose) -> VoxelGrid {
    if pose.yaw_deg == 0.0 {
        return grid.clone();
    }
    let (c, s) = pose.cos_sin();
    let res = grid.resolution();
    let mut out = VoxelGrid::empty(res);
    let cell = |v: f64| {
        let i = (v * res as f64).floor();
        (i >= 0.0 && i < res as f64).then_some(i as usize)
    };
    for z in 0..res {
        for y in 0..res {
            for x in 0..res {
                let src = rotate_xy([grid.cell_center(x), grid.cell_center(y), 0.0], c, -s);
                if let (Some(sx), Some(sy)) = (cell(src[0]), cell(src[1])) {
                    if grid.get(sx, sy, z) {
                        out.set(x, y, z, true);
                    }
                }
            }
        }
    }
    out
}

pub fn rotate_z(shape: &Shape, pose: Pose) -> Shape {
    match shape {
        Shape::Voxels(g) => Shape::Voxels(rotate_voxels(g, pose)),
        Shape::Cloud(c) => Shape::Cloud(rotate_cloud(c, pose)),
    }
}

pub fn render_depth(shape: &Shape, pose: Pose, width: usize, height: usize) -> Image2D {
    match shape {
        Shape::Voxels(g) => render_voxels(&rotate_voxels(g, pose), width, height),
        Shape::Cloud(c) => render_cloud(&rotate_cloud(c, pose), width, height),
    }
}

fn render_voxels(grid: &VoxelGrid, width: usize, height: usize) -> Image2D {
    let res = grid.resolution();
    let mut img = Image2D::blank(width, height);
    if res == 0 {
        return img;
    }
    let cell = |v: f64| ((v * res as f64).floor() as usize).min(res - 1);
    for row in 0..height {
        let z = cell(1.0 - (row as f64 + 0.5) / height as f64);
        for col in 0..width {
            let x = cell((col as f64 + 0.5) / width as f64);
            if let Some(y) = (0..res).find(|&y| grid.get(x, y, z)) {
                img.pixels[row * width + col] = 1.0 - grid.cell_center(y);
            }
        }
    }
    img
}

fn render_cloud(cloud: &PointCloud, width: usize, height: usize) -> Image2D {
    let mut img = Image2D::blank(width, height);
    let bin = |v: f64, n: usize| ((v * n as f64).floor() as usize).min(n - 1);
    for p in &cloud.points {
        if !p.iter().all(|v| (0.0..=1.0).contains(v)) {
            continue;
        }
        let col = bin(p[0], width);
        let row = bin(1.0 - p[2], height);
        let px = &mut img.pixels[row * width + col];
        *px = px.max(1.0 - p[1]);
    }
    img
}

/// Yaws used for `view_count` object views: 180·i / view_count degrees.
pub fn view_poses(view_count: usize) -> Vec<Pose> {
    (0..view_count)
        .map(|i| Pose::from_degrees(180.0 * i as f64 / view_count as f64))
        .collect()
}

pub fn render_views(shape: &Shape, view_count: usize, width: usize, height: usize) -> Result<Vec<Image2D>> {
    if view_count == 0 {
        return Err(Error::InvalidInput("view count must be at least 1".into()));
    }
    Ok(render_poses(shape, &view_poses(view_count), width, height))
}

/// Renders an explicit pose list, e.g. −45°, 0°, 45°.
pub fn render_poses(shape: &Shape, poses: &[Pose], width: usize, height: usize) -> Vec<Image2D> {
    poses.iter().map(|p| render_depth(shape, *p, width, height)).collect()
}
