//! `.map` files: a JSON header line
//! `{"layer_sizes":[…],"activation":"tanh","format_version":1}` followed by
//! little-endian f64 values, layer by layer: the weight matrix row-major
//! (out×in), then its bias. Linear and direct maps are stored as a single
//! layer with zero bias.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, DirectMap, LinearMap, MlpMap};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::subspace::io::{read_f64s, split_header};

pub const MAP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapHeader {
    pub layer_sizes: Vec<usize>,
    pub activation: String,
    pub format_version: u32,
}

impl From<&LinearMap> for MlpMap {
    fn from(map: &LinearMap) -> Self {
        single_layer(&map.t)
    }
}

impl From<&DirectMap> for MlpMap {
    fn from(map: &DirectMap) -> Self {
        single_layer(&map.b_hat)
    }
}

fn single_layer(w: &Matrix) -> MlpMap {
    MlpMap::from_parts(vec![w.clone()], vec![vec![0.0; w.rows()]], Activation::Identity)
        .expect("single layer is consistent")
}

/// Weight matrix of a single-layer, zero-bias map.
pub fn as_single_matrix(map: &MlpMap) -> Result<&Matrix> {
    if map.weights().len() != 1 || map.biases()[0].iter().any(|b| *b != 0.0) {
        return Err(Error::Format(format!(
            "expected a single-layer linear map, found layers {:?}",
            map.layer_sizes()
        )));
    }
    Ok(&map.weights()[0])
}

pub fn encode_map(map: &MlpMap) -> Vec<u8> {
    let header = MapHeader {
        layer_sizes: map.layer_sizes().to_vec(),
        activation: map.activation().name().to_string(),
        format_version: MAP_FORMAT_VERSION,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    let count: usize = map.parameter_count();
    out.reserve(count * 8);
    for (w, b) in map.weights().iter().zip(map.biases()) {
        for v in w.as_slice().iter().chain(b) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_map(data: &[u8]) -> Result<MlpMap> {
    let (head, body) = split_header(data)?;
    let header: MapHeader =
        serde_json::from_slice(head).map_err(|e| Error::Format(format!("bad .map header: {e}")))?;
    if header.format_version != MAP_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported .map format version {}",
            header.format_version
        )));
    }
    let sizes = &header.layer_sizes;
    if sizes.len() < 2 {
        return Err(Error::Format(format!("bad layer sizes {sizes:?}")));
    }
    let activation: Activation = header.activation.parse()?;
    let count = sizes
        .windows(2)
        .try_fold(0usize, |acc, p| acc.checked_add(p[1].checked_mul(p[0] + 1)?))
        .ok_or_else(|| Error::Format("layer sizes overflow".into()))?;
    let values = read_f64s(body, count)?;
    let mut offset = 0;
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for p in sizes.windows(2) {
        let (fan_in, fan_out) = (p[0], p[1]);
        let w = &values[offset..offset + fan_in * fan_out];
        offset += fan_in * fan_out;
        weights.push(Matrix::new(fan_out, fan_in, w.to_vec())?);
        biases.push(values[offset..offset + fan_out].to_vec());
        offset += fan_out;
    }
    MlpMap::from_parts(weights, biases, activation)
}

pub fn save_map(path: &Path, map: &MlpMap) -> Result<()> {
    fs::write(path, encode_map(map))?;
    Ok(())
}

pub fn load_map(path: &Path) -> Result<MlpMap> {
    decode_map(&fs::read(path)?)
}
