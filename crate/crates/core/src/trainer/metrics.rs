use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub accuracy: f64,
}

/// Single-label classification metrics.
///
/// Macro-F1 averages per-class F1 over every class that occurs in `truth`
/// or `pred`. Micro-F1 equals accuracy. Empty input scores zero.
pub fn classification_metrics(truth: &[usize], pred: &[usize]) -> Metrics {
    assert_eq!(truth.len(), pred.len(), "truth and predictions differ in length");
    if truth.is_empty() {
        return Metrics {
            macro_f1: 0.0,
            micro_f1: 0.0,
            accuracy: 0.0,
        };
    }
    // class -> (true positives, false positives, false negatives)
    let mut counts: BTreeMap<usize, (u64, u64, u64)> = BTreeMap::new();
    let mut correct = 0u64;
    for (&t, &p) in truth.iter().zip(pred) {
        if t == p {
            correct += 1;
            counts.entry(t).or_default().0 += 1;
        } else {
            counts.entry(p).or_default().1 += 1;
            counts.entry(t).or_default().2 += 1;
        }
    }
    let f1_sum: f64 = counts
        .values()
        .map(|&(tp, fp, fn_)| {
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                0.0
            } else {
                (2 * tp) as f64 / denom as f64
            }
        })
        .sum();
    let accuracy = correct as f64 / truth.len() as f64;
    Metrics {
        macro_f1: f1_sum / counts.len() as f64,
        micro_f1: accuracy,
        accuracy,
    }
}
