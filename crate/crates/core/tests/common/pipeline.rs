//! End-to-end runs through the command functions.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rphgnn::cli::{cmd_precompute, cmd_synth, cmd_train, RunManifest, ARCHIVE_FILE, TrainReport};
use rphgnn::hetgraph::io::{write_graph_dir, EdgeTypeEntry, GraphManifest, Split, VertexTypeEntry};
use rphgnn::squashing::RpStrategy;
use rphgnn::synth::SynthConfig;
use rphgnn::Scheme;

/// Writes the default planted-signal dataset with the given signal strength.
pub fn synth_graph(dir: &Path, signal: f64) -> PathBuf {
    let graph = dir.join(format!("synth-{signal}"));
    cmd_synth(&graph, &SynthConfig { signal, ..Default::default() }).unwrap();
    graph
}

pub fn run_manifest(graph: &Path, out: &Path, scheme: Scheme, iterations: usize, seed: u64, rp: RpStrategy) -> RunManifest {
    let mut run = RunManifest::for_graph(graph, out).unwrap().with_seed(seed);
    run.precompute.scheme = scheme;
    run.precompute.iterations = iterations;
    run.precompute.rp.strategy = rp;
    run
}

/// Pre-computes and trains; returns the metrics report.
pub fn run_pipeline(graph: &Path, out: &Path, scheme: Scheme, iterations: usize, seed: u64, rp: RpStrategy) -> TrainReport {
    let run = run_manifest(graph, out, scheme, iterations, seed, rp);
    cmd_precompute(&run).unwrap();
    cmd_train(&out.join(ARCHIVE_FILE), None, None, &run).unwrap()
}

/// Eight vertex types with two edge names between every ordered pair: a
/// handful of relations per type under even-odd, about a thousand under
/// two-hop.
pub fn write_dense_schema(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let types = 8;
    let count = 12;
    let names: Vec<String> = (0..types).map(|i| format!("v{i}")).collect();
    let manifest = GraphManifest {
        vertex_types: names
            .iter()
            .map(|n| VertexTypeEntry {
                name: n.clone(),
                count,
                feature_dim: 4,
                features: Some(format!("{n}.feat")),
            })
            .collect(),
        edge_types: names
            .iter()
            .flat_map(|s| names.iter().map(move |d| (s.clone(), d.clone())))
            .flat_map(|(s, d)| {
                ["x", "y"].map(|tag| EdgeTypeEntry {
                    edges: format!("{s}-{tag}-{d}.bin"),
                    src: s.clone(),
                    name: tag.to_string(),
                    dst: d.clone(),
                    symmetric: false,
                })
            })
            .collect(),
        target: Some("v0".into()),
        num_classes: Some(2),
    };
    let edges: Vec<Vec<(u32, u32)>> = manifest
        .edge_types
        .iter()
        .map(|_| {
            (0..count as u32)
                .flat_map(|u| (0..count as u32).map(move |v| (u, v)))
                .filter(|_| rng.random::<f64>() < 0.3)
                .collect()
        })
        .collect();
    let features: Vec<Option<Array2<f32>>> = (0..types)
        .map(|_| Some(Array2::from_shape_simple_fn((count, 4), || rng.random_range(-1.0..1.0))))
        .collect();
    let labels: Vec<u32> = (0..count as u32).map(|i| i % 2).collect();
    let split = Split {
        train: (0..6).collect(),
        valid: (6..9).collect(),
        test: (9..count).collect(),
    };
    write_graph_dir(dir, &manifest, &edges, &features, Some(&labels), Some(&split)).unwrap();
}
