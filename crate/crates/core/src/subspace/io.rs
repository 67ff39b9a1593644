//! `.ssm` files: one JSON header line `{"dim":…,"k":…,"format_version":1}`
//! followed by little-endian f64 values: the mean, the basis column-major,
//! then the singular values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SubspaceModel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const SSM_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsmHeader {
    pub dim: usize,
    pub k: usize,
    pub format_version: u32,
}

pub fn encode_ssm(model: &SubspaceModel) -> Vec<u8> {
    let header = SsmHeader {
        dim: model.dim(),
        k: model.k(),
        format_version: SSM_FORMAT_VERSION,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    let mut push = |v: f64| out.extend_from_slice(&v.to_le_bytes());
    model.mean().iter().for_each(|v| push(*v));
    for j in 0..model.k() {
        for i in 0..model.dim() {
            push(model.basis()[(i, j)]);
        }
    }
    model.singular_values().iter().for_each(|v| push(*v));
    out
}

/// Splits a "JSON line + binary body" file.
pub(crate) fn split_header(data: &[u8]) -> Result<(&[u8], &[u8])> {
    if data.first() != Some(&b'{') {
        return Err(Error::Format("missing JSON header".into()));
    }
    let nl = data.iter().position(|b| *b == b'\n').ok_or(Error::UnexpectedEof)?;
    Ok((&data[..nl], &data[nl + 1..]))
}

pub(crate) fn read_f64s(body: &[u8], count: usize) -> Result<Vec<f64>> {
    let needed = count.checked_mul(8).ok_or_else(|| Error::Format("size overflow".into()))?;
    if body.len() < needed {
        return Err(Error::UnexpectedEof);
    }
    if body.len() > needed {
        return Err(Error::Format(format!(
            "{} trailing bytes after payload",
            body.len() - needed
        )));
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn decode_ssm(data: &[u8]) -> Result<SubspaceModel> {
    let (head, body) = split_header(data)?;
    let header: SsmHeader =
        serde_json::from_slice(head).map_err(|e| Error::Format(format!("bad .ssm header: {e}")))?;
    if header.format_version != SSM_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported .ssm format version {}",
            header.format_version
        )));
    }
    let (dim, k) = (header.dim, header.k);
    let values = read_f64s(body, dim + dim * k + k)?;
    let mean = values[..dim].to_vec();
    let mut basis = Matrix::zeros(dim, k);
    for j in 0..k {
        for i in 0..dim {
            basis[(i, j)] = values[dim + j * dim + i];
        }
    }
    let basis = Matrix::new(dim, k, basis.into_vec())?;
    let singular_values = values[dim + dim * k..].to_vec();
    SubspaceModel::from_parts(mean, basis, singular_values)
}

pub fn save_ssm(path: &Path, model: &SubspaceModel) -> Result<()> {
    fs::write(path, encode_ssm(model))?;
    Ok(())
}

pub fn load_ssm(path: &Path) -> Result<SubspaceModel> {
    decode_ssm(&fs::read(path)?)
}
