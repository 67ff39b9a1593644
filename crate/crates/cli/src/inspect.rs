use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use semirender::mapping::io::decode_map;
use semirender::pipeline::Dataset;
use semirender::render::Image2D;
use semirender::shapes::io::{decode_voxr, read_ply};
use semirender::subspace::io::decode_ssm;
use semirender::{Error, Result};

fn stats(values: &[f64]) -> String {
    if values.is_empty() {
        return "min=- max=- mean=-".into();
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    format!("min={min:.6} max={max:.6} mean={mean:.6}")
}

pub fn inspect(path: &Path) -> Result<String> {
    if path.is_dir() {
        return inspect_dataset(path);
    }
    let data = fs::read(path)?;
    let mut out = String::new();
    if data.starts_with(b"{") {
        let end = data.iter().position(|&b| b == b'\n').ok_or(Error::UnexpectedEof)?;
        let head: serde_json::Value = serde_json::from_slice(&data[..end])
            .map_err(|e| Error::Format(format!("header is not JSON: {e}")))?;
        let version = head.get("format_version").cloned().unwrap_or_default();
        if head.get("layer_sizes").is_some() {
            let map = decode_map(&data)?;
            writeln!(out, "format:         map (version {version})").unwrap();
            writeln!(out, "layer sizes:    {:?}", map.layer_sizes()).unwrap();
            writeln!(out, "activation:     {}", map.activation()).unwrap();
            writeln!(out, "parameters:     {}", map.parameter_count()).unwrap();
            for (i, w) in map.weights().iter().enumerate() {
                writeln!(out, "layer {i} weights: {}", stats(w.as_slice())).unwrap();
            }
        } else if head.get("k").is_some() {
            let model = decode_ssm(&data)?;
            writeln!(out, "format:          subspace (version {version})").unwrap();
            writeln!(out, "dim:             {}", model.dim()).unwrap();
            writeln!(out, "k:               {}", model.k()).unwrap();
            writeln!(out, "mean:            {}", stats(model.mean())).unwrap();
            writeln!(out, "singular values: {}", stats(model.singular_values())).unwrap();
        } else {
            return Err(Error::Format("unrecognized JSON header".into()));
        }
    } else if data.starts_with(b"VOXR") {
        let grid = decode_voxr(&data)?;
        let n = grid.resolution().pow(3);
        writeln!(out, "format:     voxr").unwrap();
        writeln!(out, "resolution: {}", grid.resolution()).unwrap();
        writeln!(out, "occupied:   {} of {n}", grid.occupied_count()).unwrap();
    } else if data.starts_with(b"ply") {
        let ply = read_ply(data.as_slice())?;
        writeln!(out, "format:         ply").unwrap();
        writeln!(out, "points:         {}", ply.cloud.len()).unwrap();
        if let Some(id) = &ply.cloud.correspondence_id {
            writeln!(out, "correspondence: {id}").unwrap();
        }
        for (axis, name) in ["x", "y", "z"].iter().enumerate() {
            let v: Vec<f64> = ply.cloud.points.iter().map(|p| p[axis]).collect();
            writeln!(out, "{name}:              {}", stats(&v)).unwrap();
        }
        if let Some((name, values)) = &ply.scalar {
            writeln!(out, "{name}: {}", stats(values)).unwrap();
        }
    } else if data.starts_with(b"P5") {
        let image = Image2D::from_pgm(&data)?;
        writeln!(out, "format: pgm").unwrap();
        writeln!(out, "size:   {}x{}", image.width(), image.height()).unwrap();
        writeln!(out, "pixels: {}", stats(image.pixels())).unwrap();
    } else {
        return Err(Error::Format(format!("{}: unknown file format", path.display())));
    }
    Ok(out)
}

fn inspect_dataset(dir: &Path) -> Result<String> {
    let dataset = Dataset::open(dir)?;
    let manifest = dataset.manifest();
    let config = dataset.config();
    let mut out = String::new();
    writeln!(out, "format:     dataset (version {})", manifest.format_version).unwrap();
    writeln!(out, "family:     {:?}", config.family).unwrap();
    writeln!(out, "image dim:  {}", config.image_dim()).unwrap();
    writeln!(out, "shape dim:  {}", config.shape_dim()).unwrap();
    writeln!(out, "poses:      {:?}", config.pose_labels()).unwrap();
    writeln!(out, "base seed:  {}", config.base_seed).unwrap();
    for (split, n) in &manifest.counts {
        writeln!(out, "{split:<13} {n}").unwrap();
    }
    Ok(out)
}
