//! Independent reference implementations shared by the integration tests
//! and the acceptance runner.

#![allow(dead_code)]

pub mod pipeline;

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use rphgnn::encoder::{loss_and_grads, EncoderConfig, EncoderParams};
use rphgnn::hetgraph::HeteroGraph;
use rphgnn::relations::{oracle_aggregate, scheme_relations, Relation};
use rphgnn::squashing::{cancellation_floor, make_rp_weights};
use rphgnn::{build_graph, EdgeSpec, PrecomputeConfig};

/// A random graph plus the raw edge lists it was built from.
pub struct RandomGraph {
    pub graph: HeteroGraph,
    pub specs: Vec<EdgeSpec>,
}

/// Up to 4 vertex types of up to 50 vertices, up to 5 edge types, random
/// feature tables. Some vertices end up with no in-neighbors.
pub fn random_graph(seed: u64) -> RandomGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_types = rng.random_range(1..=4usize);
    let names: Vec<String> = (0..n_types).map(|i| format!("t{i}")).collect();
    let counts: Vec<usize> = (0..n_types).map(|_| rng.random_range(1..=50)).collect();
    let n_edges = rng.random_range(1..=5usize);
    let mut specs = Vec::with_capacity(n_edges);
    for e in 0..n_edges {
        let s = rng.random_range(0..n_types);
        let d = rng.random_range(0..n_types);
        let density: f64 = rng.random_range(0.01..0.3);
        let mut pairs = Vec::new();
        for u in 0..counts[s] {
            for v in 0..counts[d] {
                if rng.random::<f64>() < density {
                    pairs.push((u as u32, v as u32));
                }
            }
        }
        let name = format!("e{e}");
        specs.push(if s == d && rng.random::<f64>() < 0.3 {
            EdgeSpec::symmetric(&names[s], &name, pairs)
        } else {
            EdgeSpec::new(&names[s], &name, &names[d], pairs)
        });
    }
    let vts: Vec<(&str, usize)> = names.iter().map(String::as_str).zip(counts.iter().copied()).collect();
    let mut graph = build_graph(&vts, specs.clone()).expect("generated graph is valid");
    for (i, &c) in counts.iter().enumerate() {
        let dim = rng.random_range(1..=6);
        let m = Array2::from_shape_simple_fn((c, dim), || rng.random_range(-2.0f32..2.0));
        graph.attach_features(rphgnn::hetgraph::VertexTypeId(i), m).unwrap();
    }
    RandomGraph { graph, specs }
}

/// In-neighbor lists of one edge type, built from raw `(src, dst)` pairs.
fn in_neighbors(pairs: &[(u32, u32)], dst_count: usize) -> Vec<BTreeSet<usize>> {
    let mut out = vec![BTreeSet::new(); dst_count];
    for &(s, d) in pairs {
        out[d as usize].insert(s as usize);
    }
    out
}

/// Raw pairs of every materialized edge type, derived from the specs alone:
/// a symmetric spec merges both directions, other specs add a swapped
/// reverse right after the forward type.
pub fn edge_lists(specs: &[EdgeSpec]) -> Vec<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    for s in specs {
        let swapped: Vec<(u32, u32)> = s.pairs.iter().map(|&(a, b)| (b, a)).collect();
        if s.symmetric {
            let mut both = s.pairs.clone();
            both.extend(swapped);
            out.push(both);
        } else {
            out.push(s.pairs.clone());
            out.push(swapped);
        }
    }
    out
}

/// Walk-based reference: the value at a vertex is the mean over its
/// in-neighbors of their values one hop earlier, computed by explicit
/// recursion over neighbor sets.
pub fn path_oracle(rg: &RandomGraph, r: &Relation, raw: &[Array2<f64>]) -> Array2<f64> {
    let g = &rg.graph;
    let lists = edge_lists(&rg.specs);
    let mut h = raw[r.start().0].clone();
    for &e in r.edges() {
        let et = g.edge_type(e);
        let dst_count = g.vertex_type(et.dst).count;
        let nbrs = in_neighbors(&lists[e.0], dst_count);
        let mut next = Array2::zeros((dst_count, h.ncols()));
        for (v, ns) in nbrs.iter().enumerate() {
            if ns.is_empty() {
                continue;
            }
            for &u in ns {
                for c in 0..h.ncols() {
                    next[[v, c]] += h[[u, c]];
                }
            }
            for c in 0..h.ncols() {
                next[[v, c]] /= ns.len() as f64;
            }
        }
        h = next;
    }
    h
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn to_f64(m: &Array2<f32>) -> Array2<f64> {
    m.mapv(f64::from)
}

/// 64-bit re-implementation of the whole propagate-then-squash loop using
/// the dense aggregation oracle and the library's seeded projection
/// weights. Returns the target's pre-squash collections per iteration.
pub fn precompute_oracle(g: &HeteroGraph, cfg: &PrecomputeConfig) -> Vec<Vec<Array2<f64>>> {
    let target = g.vertex_type_id(&cfg.target).unwrap();
    let sets: Vec<Vec<Relation>> = g
        .vertex_type_ids()
        .map(|vt| scheme_relations(g, cfg.scheme, vt).unwrap())
        .collect();
    let mut states: Vec<Array2<f64>> = g.raw_states().unwrap().iter().map(to_f64).collect();
    let mut slabs = vec![Vec::new(); sets[target.0].len()];
    for k in 1..=cfg.iterations {
        let mut next = Vec::with_capacity(states.len());
        for vt in g.vertex_type_ids() {
            let rows = g.vertex_type(vt).count;
            let dim = states[vt.0].ncols();
            let mut state = Array2::<f64>::zeros((rows, dim));
            let mut magnitude = Array2::<f64>::zeros((rows, dim));
            for (i, r) in sets[vt.0].iter().enumerate() {
                let c = oracle_aggregate(g, r, &states).unwrap();
                let w = to_f64(&make_rp_weights(&cfg.rp, r.key(), k, c.ncols(), dim).matrix);
                let mut p = naive_matmul(&c, &w);
                let w_max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let c_max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let floor = cancellation_floor(c.ncols(), c_max * w_max);
                for mut row in p.rows_mut() {
                    let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if n > floor {
                        row.mapv_inplace(|v| v / n);
                    } else {
                        row.fill(0.0);
                    }
                }
                magnitude = magnitude + p.mapv(f64::abs);
                state = state + p;
                if vt == target {
                    slabs[i].push(c);
                }
            }
            let terms = sets[vt.0].len();
            state.zip_mut_with(&magnitude, |s, &m| {
                if s.abs() <= cancellation_floor(terms, m) {
                    *s = 0.0;
                }
            });
            next.push(state);
        }
        states = next;
    }
    slabs
}

pub fn naive_matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (n, m) = a.dim();
    let p = b.ncols();
    let mut out = Array2::zeros((n, p));
    for i in 0..n {
        for j in 0..p {
            let mut s = 0.0;
            for t in 0..m {
                s += a[[i, t]] * b[[t, j]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

pub struct GradCheck {
    pub checked: usize,
    pub worst_absolute: f64,
    pub worst_relative: f64,
    pub failures: Vec<String>,
}

/// Central-difference check of every parameter of a tiny random encoder.
///
/// The instance follows `B=4, G=2, K=2, d_g=3, d=5, C_out=2` with dropout
/// enabled; the same mask stream is replayed for every loss evaluation.
pub fn gradient_check(seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = EncoderConfig {
        hidden_dim: 5,
        conv_out_channels: 2,
        group_mlp_layers: 2,
        fusion_mlp_layers: 2,
        dropout_input: 0.2,
        dropout_hidden: 0.3,
        num_classes: 3,
    };
    let (b, k, dg) = (4, 2, 3);
    let params = EncoderParams::<f64>::init(&cfg, &[dg, dg], k, seed).unwrap();
    let batch: Vec<Vec<Array2<f64>>> = (0..2)
        .map(|_| {
            (0..k)
                .map(|_| Array2::from_shape_simple_fn((b, dg), || StandardNormal.sample(&mut rng)))
                .collect()
        })
        .collect();
    let labels: Vec<usize> = (0..b).map(|_| rng.random_range(0..cfg.num_classes)).collect();
    let mask_seed = rng.random::<u64>();
    let loss_at = |p: &EncoderParams<f64>| {
        loss_and_grads(p, &cfg, &batch, &labels, &mut ChaCha8Rng::seed_from_u64(mask_seed))
            .unwrap()
    };
    let (_, grads) = loss_at(&params);
    let names = params.block_layout();
    let analytic: Vec<Vec<f64>> = grads.blocks().iter().map(|b| b.to_vec()).collect();

    let h = 1e-4;
    let mut out = GradCheck {
        checked: 0,
        worst_absolute: 0.0,
        worst_relative: 0.0,
        failures: Vec::new(),
    };
    for (bi, block) in analytic.iter().enumerate() {
        for (i, &a) in block.iter().enumerate() {
            let mut plus = params.clone();
            plus.blocks_mut()[bi][i] += h;
            let mut minus = params.clone();
            minus.blocks_mut()[bi][i] -= h;
            let numeric = (loss_at(&plus).0 - loss_at(&minus).0) / (2.0 * h);
            let diff = (a - numeric).abs();
            let rel = diff / a.abs().max(numeric.abs()).max(1e-12);
            out.checked += 1;
            out.worst_absolute = out.worst_absolute.max(diff);
            if diff > 1e-6 {
                out.worst_relative = out.worst_relative.max(rel);
                if rel >= 1e-3 {
                    out.failures.push(format!("{}[{i}]: analytic {a:e}, numeric {numeric:e}", names[bi].0));
                }
            }
        }
    }
    out
}

/// Golden provenance tables for the four-type academic schema, as vertex
/// type paths. `(column, rows)` where `rows[k - 1]` is the cell at
/// iteration `k`.
pub fn golden_local() -> Vec<(&'static str, Vec<Vec<&'static str>>)> {
    vec![
        (
            "p→p",
            vec![
                vec!["p→p"],
                vec!["p→p→p", "f→p→p", "a→p→p"],
                vec!["p→p→p→p", "f→p→p→p", "a→p→p→p", "p→f→p→p", "p→a→p→p", "i→a→p→p"],
                vec![
                    "p→p→p→p→p",
                    "f→p→p→p→p",
                    "a→p→p→p→p",
                    "p→f→p→p→p",
                    "p→a→p→p→p",
                    "i→a→p→p→p",
                    "p→p→f→p→p",
                    "f→p→f→p→p",
                    "a→p→f→p→p",
                    "p→p→a→p→p",
                    "f→p→a→p→p",
                    "a→p→a→p→p",
                    "a→i→a→p→p",
                ],
            ],
        ),
        (
            "f→p",
            vec![
                vec!["f→p"],
                vec!["p→f→p"],
                vec!["p→p→f→p", "f→p→f→p", "a→p→f→p"],
                vec![
                    "p→p→p→f→p",
                    "f→p→p→f→p",
                    "a→p→p→f→p",
                    "p→f→p→f→p",
                    "p→a→p→f→p",
                    "i→a→p→f→p",
                ],
            ],
        ),
        (
            "a→p",
            vec![
                vec!["a→p"],
                vec!["p→a→p", "i→a→p"],
                vec!["p→p→a→p", "f→p→a→p", "a→p→a→p", "a→i→a→p"],
                vec![
                    "p→p→p→a→p",
                    "f→p→p→a→p",
                    "a→p→p→a→p",
                    "p→f→p→a→p",
                    "p→a→p→a→p",
                    "i→a→p→a→p",
                    "p→a→i→a→p",
                    "i→a→i→a→p",
                ],
            ],
        ),
    ]
}

/// Row 1 of the even columns is read along the column headers.
pub fn golden_even_odd() -> Vec<(&'static str, Vec<Vec<&'static str>>)> {
    vec![
        (
            "p→p",
            vec![
                vec!["p→p"],
                vec!["p→p→p", "f→p→p", "a→p→p", "p→a→p→p", "p→f→p→p", "p→p→p→p"],
            ],
        ),
        ("f→p", vec![vec!["f→p"], vec!["p→f→p", "f→p→f→p"]]),
        (
            "a→p",
            vec![vec!["a→p"], vec!["p→a→p", "i→a→p", "a→p→a→p", "a→i→a→p"]],
        ),
        (
            "p→p→p",
            vec![
                vec!["p→p→p"],
                vec!["p→p→p→p", "f→p→p→p", "a→p→p→p", "p→a→p→p→p", "p→f→p→p→p", "p→p→p→p→p"],
            ],
        ),
        (
            "p→f→p",
            vec![
                vec!["p→f→p"],
                vec!["p→p→f→p", "f→p→f→p", "a→p→f→p", "p→a→p→f→p", "p→f→p→f→p", "p→p→p→f→p"],
            ],
        ),
        (
            "p→a→p",
            vec![
                vec!["p→a→p"],
                vec!["p→p→a→p", "f→p→a→p", "a→p→a→p", "p→a→p→a→p", "p→f→p→a→p", "p→p→p→a→p"],
            ],
        ),
    ]
}

/// Compares a ledger against a golden table; returns mismatch descriptions.
pub fn compare_ledger(
    ledger: &rphgnn::relations::ProvenanceLedger,
    golden: &[(&str, Vec<Vec<&str>>)],
    labels: &[&str],
) -> Vec<String> {
    let mut errors = Vec::new();
    let mut got_cols: Vec<&str> = ledger.group_type_paths.iter().map(String::as_str).collect();
    let mut want_cols: Vec<&str> = golden.iter().map(|(c, _)| *c).collect();
    got_cols.sort_unstable();
    want_cols.sort_unstable();
    if got_cols != want_cols {
        errors.push(format!("columns {got_cols:?} != {want_cols:?}"));
        return errors;
    }
    if ledger.cells.len() != labels.len() {
        errors.push(format!("{} rows, expected {}", ledger.cells.len(), labels.len()));
        return errors;
    }
    for (col, rows) in golden {
        let g = ledger.group_type_paths.iter().position(|p| p == col).unwrap();
        for (k, want) in rows.iter().enumerate() {
            let cell = &ledger.cells[k][g];
            let got: BTreeSet<&str> = cell.type_paths.iter().map(String::as_str).collect();
            let want_set: BTreeSet<&str> = want.iter().copied().collect();
            if got.len() != cell.type_paths.len() || want_set.len() != want.len() {
                errors.push(format!("duplicate paths in {col} row {}", k + 1));
            }
            if got != want_set {
                errors.push(format!("{col} row {}: {got:?} != {want_set:?}", k + 1));
            }
            if cell.label() != labels[k] {
                errors.push(format!("{col} row {}: label {} != {}", k + 1, cell.label(), labels[k]));
            }
        }
    }
    errors
}

/// Writes the toy academic graph to `dir`.
pub fn write_toy(dir: &Path) {
    rphgnn::synth::academic_toy().write(dir).unwrap();
}
