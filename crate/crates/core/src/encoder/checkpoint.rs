//! Parameter checkpoint file.
//!
//! ```text
//! "RPCK" | u32 version | u64 header length | JSON header | f32 blocks
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EncoderConfig, EncoderParams};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RPCK";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub config: EncoderConfig,
    pub group_relations: Vec<String>,
    pub group_dims: Vec<usize>,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_hash: Option<String>,
    pub blocks: Vec<BlockEntry>,
}

pub fn save_checkpoint(
    path: &Path,
    config: &EncoderConfig,
    group_relations: &[String],
    params: &EncoderParams<f32>,
    manifest_hash: Option<&str>,
) -> Result<()> {
    if group_relations.len() != params.groups.len() {
        return Err(Error::Config(format!(
            "{} relation names for {} groups",
            group_relations.len(),
            params.groups.len()
        )));
    }
    let header = CheckpointHeader {
        config: config.clone(),
        group_relations: group_relations.to_vec(),
        group_dims: params
            .groups
            .iter()
            .map(|g| g.mlp.input_dim() / g.conv_b.len())
            .collect(),
        iterations: params.groups.first().map_or(0, |g| g.conv_w.nrows()),
        manifest_hash: manifest_hash.map(str::to_string),
        blocks: params
            .block_layout()
            .into_iter()
            .map(|(name, shape)| BlockEntry { name, shape })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(16 + json.len() + 4 * params.num_parameters());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for block in params.blocks() {
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointHeader, EncoderParams<f32>)> {
    let bytes = fs::read(path)?;
    let corrupt = |msg: &str| Error::Format(format!("{}: {msg}", path.display()));
    if bytes.len() < 16 || &bytes[0..4] != MAGIC {
        return Err(corrupt("not a checkpoint"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(corrupt(&format!("unsupported checkpoint version {version}")));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body_start = 16usize
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| corrupt("truncated header"))?;
    let header: CheckpointHeader =
        serde_json::from_slice(&bytes[16..body_start]).map_err(|e| corrupt(&format!("corrupt header: {e}")))?;

    let mut params = EncoderParams::<f32>::init(&header.config, &header.group_dims, header.iterations, 0)
        .map_err(|e| corrupt(&format!("header describes an invalid encoder: {e}")))?;
    let layout = params.block_layout();
    if layout.len() != header.blocks.len()
        || layout
            .iter()
            .zip(&header.blocks)
            .any(|((n, s), b)| *n != b.name || *s != b.shape)
    {
        return Err(corrupt("block layout does not match the encoder config"));
    }
    let payload = &bytes[body_start..];
    if payload.len() != 4 * params.num_parameters() {
        return Err(corrupt(&format!(
            "expected {} parameter bytes, found {}",
            4 * params.num_parameters(),
            payload.len()
        )));
    }
    let mut floats = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()));
    for block in params.blocks_mut() {
        for (slot, v) in block.iter_mut().zip(floats.by_ref()) {
            *slot = v;
        }
    }
    if !params.is_finite() {
        return Err(Error::NonFinite("checkpoint parameters".into()));
    }
    Ok((header, params))
}
