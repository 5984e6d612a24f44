//! Epoch timing over the number of iterations.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_groups, run_epoch, Adam, TrainConfig};
use crate::encoder::{EncoderConfig, EncoderParams};
use crate::error::{Error, Result};
use crate::precompute::GroupTensor;
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub iterations: usize,
    /// Fastest of the timed repeats, one epoch over every row.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: usize,
    pub groups: usize,
    pub timings: Vec<BenchRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares `y = slope·x + intercept`; returns `(slope, intercept, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Times one training epoch over all rows of `groups` using only the first
/// `k` slabs, for each `k` in `iterations`.
///
/// Every `k` is measured `repeats` times after one warm-up epoch and the
/// fastest run is kept; repeats are interleaved across the `k` values. Labels are a fixed round-robin over the classes.
pub fn bench_epoch_time(
    groups: &[GroupTensor],
    enc_cfg: &EncoderConfig,
    train_cfg: &TrainConfig,
    iterations: &[usize],
    repeats: usize,
) -> Result<BenchReport> {
    let rows = groups.first().map_or(0, |g| g.rows());
    let available = check_groups(groups, rows)?;
    if iterations.len() < 2 {
        return Err(Error::Config("benchmark needs at least two iteration counts".into()));
    }
    if let Some(&k) = iterations.iter().find(|&&k| k == 0 || k > available) {
        return Err(Error::Config(format!(
            "cannot time {k} iterations; the archive holds {available}"
        )));
    }
    let idx: Vec<usize> = (0..rows).collect();
    let labels: Vec<usize> = (0..rows).map(|i| i % enc_cfg.num_classes).collect();
    let dims: Vec<usize> = groups.iter().map(|g| g.dim()).collect();

    let mut states = Vec::with_capacity(iterations.len());
    for &k in iterations {
        let mut params = EncoderParams::<f32>::init(enc_cfg, &dims, k, derive_seed(train_cfg.seed, &[b"init"]))?;
        let mut adam = Adam::new(&params, train_cfg.lr);
        run_epoch(&mut params, &mut adam, groups, &labels, &idx, k, enc_cfg, train_cfg, 0)?;
        states.push((params, adam));
    }
    // Repeats cycle through every `k` so slow spells hit all of them alike.
    let mut best = vec![f64::INFINITY; iterations.len()];
    for r in 0..repeats.max(1) {
        for (i, &k) in iterations.iter().enumerate() {
            let (params, adam) = &mut states[i];
            let started = Instant::now();
            run_epoch(params, adam, groups, &labels, &idx, k, enc_cfg, train_cfg, r + 1)?;
            best[i] = best[i].min(started.elapsed().as_secs_f64());
        }
    }
    let timed: Vec<BenchRow> = iterations
        .iter()
        .zip(best)
        .map(|(&iterations, seconds)| BenchRow { iterations, seconds })
        .collect();
    let x: Vec<f64> = timed.iter().map(|r| r.iterations as f64).collect();
    let y: Vec<f64> = timed.iter().map(|r| r.seconds).collect();
    let (slope, intercept, r_squared) = linear_fit(&x, &y);
    Ok(BenchReport {
        rows,
        groups: groups.len(),
        timings: timed,
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fits_perfectly() {
        let (s, b, r2) = linear_fit(&[1.0, 2.0, 4.0, 8.0], &[3.0, 5.0, 9.0, 17.0]);
        assert!((s - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_fit_below_one() {
        let (_, _, r2) = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]);
        assert!(r2 < 1.0 && r2 > 0.0);
    }
}
