//! ASCII PLY for point clouds and the packed-bit VOXR format for voxel grids.
//!
//! PLY vertices carry `x y z` as doubles printed with 17 significant digits,
//! so values survive a round trip exactly. An optional extra per-vertex
//! scalar (used for error heat maps) follows the coordinates.
//!
//! VOXR is the line `VOXR <resolution>\n` followed by `resolution³` bits in
//! grid order, 8 per byte, least significant bit first, with the last byte
//! zero-padded.

use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use super::{PointCloud, VoxelGrid};
use crate::error::{Error, Result};

const CORRESPONDENCE_COMMENT: &str = "comment correspondence ";

/// A cloud plus the per-vertex scalar, when one was stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PlyData {
    pub cloud: PointCloud,
    pub scalar: Option<(String, Vec<f64>)>,
}

pub fn write_ply<W: Write>(out: W, cloud: &PointCloud, scalar: Option<(&str, &[f64])>) -> Result<()> {
    if let Some((_, values)) = scalar {
        if values.len() != cloud.len() {
            return Err(Error::mismatch("per-vertex scalar count", cloud.len(), values.len()));
        }
    }
    let mut w = BufWriter::new(out);
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    if let Some(id) = &cloud.correspondence_id {
        writeln!(w, "{CORRESPONDENCE_COMMENT}{id}")?;
    }
    writeln!(w, "element vertex {}", cloud.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property double {axis}")?;
    }
    if let Some((name, _)) = scalar {
        writeln!(w, "property double {name}")?;
    }
    writeln!(w, "end_header")?;
    for (i, p) in cloud.points.iter().enumerate() {
        write!(w, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2])?;
        if let Some((_, values)) = scalar {
            write!(w, " {:.16e}", values[i])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_ply(path: &Path, cloud: &PointCloud, scalar: Option<(&str, &[f64])>) -> Result<()> {
    write_ply(fs::File::create(path)?, cloud, scalar)
}

pub fn read_ply<R: BufRead>(input: R) -> Result<PlyData> {
    let mut lines = input.lines();
    let mut next = || -> Result<String> {
        match lines.next() {
            Some(line) => Ok(line?),
            None => Err(Error::UnexpectedEof),
        }
    };
    if next()?.trim() != "ply" {
        return Err(Error::Format("missing `ply` magic".into()));
    }
    let mut vertex_count = None;
    let mut in_vertex = false;
    let mut properties: Vec<String> = Vec::new();
    let mut correspondence_id = None;
    loop {
        let line = next()?;
        let line = line.trim();
        if line == "end_header" {
            break;
        }
        if let Some(id) = line.strip_prefix(CORRESPONDENCE_COMMENT) {
            correspondence_id = Some(id.trim().to_string());
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(Error::Format(format!("unsupported PLY format `{fmt}`")))
            }
            ["element", "vertex", n] => {
                vertex_count = Some(
                    n.parse::<usize>()
                        .map_err(|_| Error::Format(format!("bad vertex count `{n}`")))?,
                );
                in_vertex = true;
            }
            ["element", ..] => in_vertex = false,
            ["property", _ty, name] if in_vertex => properties.push(name.to_string()),
            _ => {}
        }
    }
    let count = vertex_count.ok_or_else(|| Error::Format("no vertex element".into()))?;
    let col = |name: &str| properties.iter().position(|p| p == name);
    let (ix, iy, iz) = match (col("x"), col("y"), col("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(Error::Format("vertex element lacks x/y/z".into())),
    };
    let extra = properties
        .iter()
        .enumerate()
        .find(|(i, _)| ![ix, iy, iz].contains(i))
        .map(|(i, name)| (i, name.clone()));

    let mut points = Vec::with_capacity(count);
    let mut scalar = Vec::new();
    for _ in 0..count {
        let line = next()?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Format(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        if values.len() < properties.len() {
            return Err(Error::Format(format!(
                "vertex line has {} values, expected {}",
                values.len(),
                properties.len()
            )));
        }
        points.push([values[ix], values[iy], values[iz]]);
        if let Some((i, _)) = &extra {
            scalar.push(values[*i]);
        }
    }
    Ok(PlyData {
        cloud: PointCloud::new(points, correspondence_id),
        scalar: extra.map(|(_, name)| (name, scalar)),
    })
}

pub fn load_ply(path: &Path) -> Result<PlyData> {
    read_ply(std::io::BufReader::new(fs::File::open(path)?))
}

pub fn encode_voxr(grid: &VoxelGrid) -> Vec<u8> {
    let mut out = format!("VOXR {}\n", grid.resolution()).into_bytes();
    let occ = grid.occupancy();
    let mut bytes = vec![0u8; occ.len().div_ceil(8)];
    for (i, _) in occ.iter().enumerate().filter(|(_, b)| **b) {
        bytes[i / 8] |= 1 << (i % 8);
    }
    out.extend_from_slice(&bytes);
    out
}

pub fn decode_voxr(data: &[u8]) -> Result<VoxelGrid> {
    let newline = data
        .iter()
        .position(|b| *b == b'\n')
        .ok_or(Error::UnexpectedEof)?;
    let header = std::str::from_utf8(&data[..newline])
        .map_err(|_| Error::Format("VOXR header is not text".into()))?;
    let res: usize = header
        .strip_prefix("VOXR ")
        .ok_or_else(|| Error::Format("missing VOXR magic".into()))?
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("bad VOXR resolution in `{header}`")))?;
    if res == 0 || res > 1024 {
        return Err(Error::Format(format!("unsupported VOXR resolution {res}")));
    }
    let cells = res.pow(3);
    let body = &data[newline + 1..];
    let needed = cells.div_ceil(8);
    if body.len() < needed {
        return Err(Error::UnexpectedEof);
    }
    if body.len() > needed {
        return Err(Error::Format(format!(
            "VOXR body has {} bytes, expected {needed}",
            body.len()
        )));
    }
    let occupancy = (0..cells).map(|i| body[i / 8] >> (i % 8) & 1 == 1).collect();
    VoxelGrid::from_occupancy(res, occupancy)
}

pub fn save_voxr(path: &Path, grid: &VoxelGrid) -> Result<()> {
    fs::write(path, encode_voxr(grid))?;
    Ok(())
}

pub fn load_voxr(path: &Path) -> Result<VoxelGrid> {
    decode_voxr(&fs::read(path)?)
}
