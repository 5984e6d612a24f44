//! Group archive file.
//!
//! ```text
//! "RPHG" | u32 version | u64 header length | JSON header | f32 blocks
//! ```
//!
//! Blocks are written group by group, slab by slab, each row-major
//! little-endian `rows × dim`.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::GroupTensor;
use crate::error::{Error, Result};
use crate::relations::{Parity, Scheme};
use crate::squashing::RpConfig;

pub const ARCHIVE_MAGIC: &[u8; 4] = b"RPHG";
pub const ARCHIVE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub relation: String,
    pub parity: Parity,
    pub dim: usize,
    /// Projection seeds used for this relation, one per iteration.
    pub rp_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub schema_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_hash: Option<String>,
    pub target: String,
    pub scheme: Scheme,
    pub iterations: usize,
    pub rows: usize,
    pub rp: RpConfig,
    pub groups: Vec<GroupEntry>,
}

impl ArchiveHeader {
    fn payload_len(&self) -> usize {
        self.groups
            .iter()
            .map(|g| self.iterations * self.rows * g.dim * 4)
            .sum()
    }
}

pub fn save_groups(path: &Path, header: &ArchiveHeader, groups: &[GroupTensor]) -> Result<()> {
    if header.groups.len() != groups.len() {
        return Err(Error::Format(format!(
            "header lists {} groups, got {}",
            header.groups.len(),
            groups.len()
        )));
    }
    for (entry, group) in header.groups.iter().zip(groups) {
        if group.slabs.len() != header.iterations {
            return Err(Error::Format(format!(
                "group `{}` has {} slabs, header says {}",
                group.relation,
                group.slabs.len(),
                header.iterations
            )));
        }
        for s in &group.slabs {
            if s.dim() != (header.rows, entry.dim) {
                return Err(Error::shape(
                    format!("slab of `{}`", group.relation),
                    (header.rows, entry.dim),
                    s.dim(),
                ));
            }
        }
    }

    let json = serde_json::to_vec(header)?;
    let mut out = Vec::with_capacity(16 + json.len() + header.payload_len());
    out.extend_from_slice(ARCHIVE_MAGIC);
    out.extend_from_slice(&ARCHIVE_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for group in groups {
        for slab in &group.slabs {
            for v in slab.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_groups(path: &Path) -> Result<(ArchiveHeader, Vec<GroupTensor>)> {
    let bytes = fs::read(path)?;
    let corrupt = |msg: &str| Error::Format(format!("{}: {msg}", path.display()));
    if bytes.len() < 16 || &bytes[0..4] != ARCHIVE_MAGIC {
        return Err(corrupt("not a group archive"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != ARCHIVE_VERSION {
        return Err(corrupt(&format!("unsupported archive version {version}")));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body_start = 16usize
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| corrupt("truncated header"))?;
    let header: ArchiveHeader =
        serde_json::from_slice(&bytes[16..body_start]).map_err(|e| corrupt(&format!("corrupt header: {e}")))?;
    let payload = &bytes[body_start..];
    if payload.len() != header.payload_len() {
        return Err(corrupt(&format!(
            "header describes {} payload bytes but file holds {}",
            header.payload_len(),
            payload.len()
        )));
    }

    let mut floats = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()));
    let groups = header
        .groups
        .iter()
        .map(|entry| GroupTensor {
            relation: entry.relation.clone(),
            parity: entry.parity,
            slabs: (0..header.iterations)
                .map(|_| {
                    let data: Vec<f32> = floats.by_ref().take(header.rows * entry.dim).collect();
                    Array2::from_shape_vec((header.rows, entry.dim), data).expect("payload length checked")
                })
                .collect(),
        })
        .collect();
    Ok((header, groups))
}
