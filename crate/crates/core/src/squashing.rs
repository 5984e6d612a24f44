//! Random projection squashing: project each relation's collected matrix to
//! the vertex type's own dimension, L2-normalize rows, and sum over
//! relations.

use ndarray::{Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::CollectedNeighborInfo;
use crate::seed::derive_seed;

pub const DEFAULT_P_SPARSE: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RpStrategy {
    /// Entries in {+1, 0, -1} with probabilities ((1-p)/2, p, (1-p)/2).
    Sparse { p_sp: f64 },
    /// i.i.d. standard normal entries.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpConfig {
    pub strategy: RpStrategy,
    pub base_seed: u64,
}

impl Default for RpConfig {
    fn default() -> Self {
        Self {
            strategy: RpStrategy::Sparse { p_sp: DEFAULT_P_SPARSE },
            base_seed: 0,
        }
    }
}

impl RpConfig {
    pub fn validate(&self) -> Result<()> {
        if let RpStrategy::Sparse { p_sp } = self.strategy {
            if !(0.0..1.0).contains(&p_sp) {
                return Err(Error::Config(format!("p_sp must lie in [0, 1), got {p_sp}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpWeights {
    /// `d_in × d_out`.
    pub matrix: Array2<f32>,
    pub seed_used: u64,
}

/// Seed used for the projection of `relation_id` at iteration `k`.
pub fn rp_seed(cfg: &RpConfig, relation_id: &str, k: usize) -> u64 {
    derive_seed(
        cfg.base_seed,
        &[b"rp", relation_id.as_bytes(), &(k as u64).to_le_bytes()],
    )
}

pub fn make_rp_weights(cfg: &RpConfig, relation_id: &str, k: usize, d_in: usize, d_out: usize) -> RpWeights {
    let seed = rp_seed(cfg, relation_id, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f32> = match cfg.strategy {
        RpStrategy::Sparse { p_sp } => {
            let half = (1.0 - p_sp) / 2.0;
            (0..d_in * d_out)
                .map(|_| {
                    let u: f64 = rng.random();
                    if u < p_sp {
                        0.0
                    } else if u < p_sp + half {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect()
        }
        RpStrategy::Gaussian => (0..d_in * d_out).map(|_| StandardNormal.sample(&mut rng)).collect(),
    };
    RpWeights {
        matrix: Array2::from_shape_vec((d_in, d_out), data).expect("shape matches length"),
        seed_used: seed,
    }
}

/// Scales each nonzero row to unit L2 norm; zero rows stay zero.
pub fn l2_normalize_rows(m: ArrayView2<'_, f32>) -> Array2<f32> {
    let mut out = m.to_owned();
    normalize_in_place(&mut out);
    out
}

fn normalize_in_place(m: &mut Array2<f32>) {
    m.axis_iter_mut(Axis(0)).into_par_iter().for_each(|mut row| {
        let norm = row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
        if norm > 0.0 {
            let inv = (1.0 / norm) as f32;
            row.mapv_inplace(|v| v * inv);
        }
    });
}

/// Size below which a sum of `terms` products counts as zero.
///
/// `scale` bounds the magnitude of the summands: `max|H| · max|W|` for a
/// projected row of `H · W`, or the sum of absolute parts when relations are
/// pooled. Sums that cancel keep only 32-bit rounding noise, a few
/// `ε · scale` in size; normalizing that noise later would blow it up to a
/// unit row, so such values are zeroed instead.
pub fn cancellation_floor(terms: usize, scale: f64) -> f64 {
    64.0 * (terms as f64).sqrt() * f32::EPSILON as f64 * scale
}

/// Result of squashing one vertex type's collections.
#[derive(Debug, Clone, PartialEq)]
pub struct Squashed {
    pub state: Array2<f32>,
    /// Set when there was nothing to squash and `state` is all zeros.
    pub empty: bool,
}

/// Sum over relations of `Norm(H_rel · W_rel)`, with fresh weights per
/// relation and iteration. Projected rows and pooled entries at or below
/// [`cancellation_floor`] are zero.
pub fn squash(
    collected: &[CollectedNeighborInfo],
    rows: usize,
    target_dim: usize,
    cfg: &RpConfig,
    k: usize,
) -> Result<Squashed> {
    let weights: Vec<Array2<f32>> = collected
        .iter()
        .map(|c| make_rp_weights(cfg, c.relation.key(), k, c.matrix.ncols(), target_dim).matrix)
        .collect();
    squash_with_weights(collected, &weights, rows, target_dim)
}

/// [`squash`] with caller-provided projection matrices.
pub fn squash_with_weights(
    collected: &[CollectedNeighborInfo],
    weights: &[Array2<f32>],
    rows: usize,
    target_dim: usize,
) -> Result<Squashed> {
    if collected.len() != weights.len() {
        return Err(Error::Config(format!(
            "{} collections but {} projection matrices",
            collected.len(),
            weights.len()
        )));
    }
    for (c, w) in collected.iter().zip(weights) {
        if c.matrix.nrows() != rows {
            return Err(Error::shape("collected matrix", (rows, c.matrix.ncols()), c.matrix.dim()));
        }
        if w.dim() != (c.matrix.ncols(), target_dim) {
            return Err(Error::shape("projection matrix", (c.matrix.ncols(), target_dim), w.dim()));
        }
    }
    let parts: Vec<Array2<f32>> = collected
        .par_iter()
        .zip(weights)
        .map(|(c, w)| {
            let mut p = c.matrix.dot(w);
            let w_max = w.iter().fold(0.0f32, |m, v| m.max(v.abs())) as f64;
            let c_max = c.matrix.iter().fold(0.0f32, |m, v| m.max(v.abs())) as f64;
            let floor = cancellation_floor(c.matrix.ncols(), c_max * w_max);
            p.axis_iter_mut(Axis(0)).for_each(|mut row| {
                let norm = row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
                if norm > floor {
                    row.mapv_inplace(|v| (v as f64 / norm) as f32);
                } else {
                    row.fill(0.0);
                }
            });
            p
        })
        .collect();
    let mut sum = Array2::<f64>::zeros((rows, target_dim));
    let mut magnitude = Array2::<f64>::zeros((rows, target_dim));
    for p in &parts {
        Zip::from(&mut sum).and(&mut magnitude).and(p).for_each(|s, m, &v| {
            *s += v as f64;
            *m += (v as f64).abs();
        });
    }
    let state = Zip::from(&sum).and(&magnitude).map_collect(|&s, &m| {
        if s.abs() > cancellation_floor(parts.len(), m) {
            s as f32
        } else {
            0.0
        }
    });
    Ok(Squashed {
        state,
        empty: collected.is_empty(),
    })
}
