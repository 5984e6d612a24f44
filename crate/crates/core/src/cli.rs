//! Pipeline commands behind the `rphgnn` binary.
//!
//! Each command reads and writes plain files so stages can run separately.
//! A [`RunManifest`] describes a run; its hashes are embedded in every
//! artifact and checked when a later stage consumes an earlier one.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoder::{save_checkpoint, EncoderConfig};
use crate::error::{Error, Result};
use crate::hetgraph::io::{load_graph_dir, read_labels, GraphManifest, Split, LABELS_FILE, MANIFEST_FILE, SPLIT_FILE};
use crate::precompute::{
    load_groups, relation_sets, run_precompute, save_groups, schema_hash, ArchiveHeader, GroupEntry,
    PrecomputeConfig,
};
use crate::relations::{provenance_ledger, ProvenanceLedger, Scheme};
use crate::seed::hex_digest;
use crate::squashing::rp_seed;
use crate::synth::{generate, SynthConfig};
use crate::trainer::{bench_epoch_time, evaluate, train, write_history_csv, BenchReport, Metrics, TrainConfig};

pub const ARCHIVE_FILE: &str = "groups.rphg";
pub const RUN_MANIFEST_FILE: &str = "manifest.json";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const METRICS_FILE: &str = "metrics.json";
pub const HISTORY_FILE: &str = "history.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub graph: PathBuf,
    pub precompute: PrecomputeConfig,
    pub encoder: EncoderConfig,
    pub train: TrainConfig,
    pub out_dir: PathBuf,
    /// Seeds random embeddings for featureless vertex types.
    pub seed: u64,
}

impl RunManifest {
    /// Defaults for a graph directory; the target and class count come from
    /// its `graph.json` when declared there.
    pub fn for_graph(graph: &Path, out_dir: &Path) -> Result<Self> {
        let gm = read_graph_manifest(graph)?;
        let target = gm
            .target
            .ok_or_else(|| Error::Config(format!("{} declares no target vertex type", graph.display())))?;
        let mut encoder = EncoderConfig::default();
        if let Some(c) = gm.num_classes {
            encoder.num_classes = c;
        }
        Ok(Self {
            graph: graph.to_path_buf(),
            precompute: PrecomputeConfig::new(&target, Scheme::EvenOdd, 2),
            encoder,
            train: TrainConfig::default(),
            out_dir: out_dir.to_path_buf(),
            seed: 0,
        })
    }

    /// Sets every seed in the run from one value.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.precompute.rp.base_seed = seed;
        self.train.seed = seed;
        self
    }

    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_slice(&fs::read(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    /// Hash of everything that determines the run's results; the output
    /// directory is left out.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("manifest serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("out_dir");
        }
        hex_digest(value.to_string().as_bytes())
    }

    /// Hash of the part of the run that determines the archive.
    pub fn precompute_hash(&self) -> String {
        let upstream = serde_json::json!({
            "graph": self.graph,
            "precompute": self.precompute,
            "seed": self.seed,
        });
        hex_digest(upstream.to_string().as_bytes())
    }
}

fn read_graph_manifest(dir: &Path) -> Result<GraphManifest> {
    serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)
        .map_err(|e| Error::Format(format!("{}: {e}", dir.join(MANIFEST_FILE).display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

pub fn cmd_synth(out_dir: &Path, cfg: &SynthConfig) -> Result<()> {
    generate(cfg)?.write(out_dir)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecomputeReport {
    pub manifest_hash: String,
    pub schema_hash: String,
    pub target: String,
    pub scheme: Scheme,
    pub iterations: usize,
    pub groups: Vec<GroupEntry>,
    pub archive: PathBuf,
}

/// Writes `groups.rphg`, `manifest.json` and `precompute.json` to the run's
/// output directory. Labels are not needed.
pub fn cmd_precompute(run: &RunManifest) -> Result<PrecomputeReport> {
    let ds = load_graph_dir(&run.graph, run.seed)?;
    let cfg = &run.precompute;
    cfg.validate()?;
    // Fail on the relation cap before any propagation work.
    relation_sets(&ds.graph, cfg)?;
    let groups = run_precompute(&ds.graph, cfg)?;

    let header = ArchiveHeader {
        schema_hash: schema_hash(&ds.graph),
        manifest_hash: Some(run.precompute_hash()),
        target: cfg.target.clone(),
        scheme: cfg.scheme,
        iterations: cfg.iterations,
        rows: ds.graph.vertex_type(ds.graph.vertex_type_id(&cfg.target)?).count,
        rp: cfg.rp,
        groups: groups
            .iter()
            .map(|g| GroupEntry {
                relation: g.relation.clone(),
                parity: g.parity,
                dim: g.dim(),
                rp_seeds: (1..=cfg.iterations).map(|k| rp_seed(&cfg.rp, &g.relation, k)).collect(),
            })
            .collect(),
    };
    fs::create_dir_all(&run.out_dir)?;
    let archive = run.out_dir.join(ARCHIVE_FILE);
    save_groups(&archive, &header, &groups)?;
    run.save(&run.out_dir.join(RUN_MANIFEST_FILE))?;
    let report = PrecomputeReport {
        manifest_hash: run.precompute_hash(),
        schema_hash: header.schema_hash,
        target: header.target,
        scheme: header.scheme,
        iterations: header.iterations,
        groups: header.groups,
        archive,
    };
    write_json(&run.out_dir.join("precompute.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub manifest_hash: String,
    pub archive_hash: String,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub valid: Metrics,
    pub test: Metrics,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub accuracy: f64,
}

/// Trains on an archive and writes `model.ckpt`, `metrics.json` and
/// `history.csv`. Labels and split default to the files in the run's graph
/// directory.
pub fn cmd_train(archive: &Path, labels: Option<&Path>, split: Option<&Path>, run: &RunManifest) -> Result<TrainReport> {
    let (header, groups) = load_groups(archive)?;
    let expected = run.precompute_hash();
    match &header.manifest_hash {
        Some(found) if *found == expected => {}
        found => {
            return Err(Error::ManifestMismatch {
                expected,
                found: found.clone().unwrap_or_else(|| "none".into()),
            })
        }
    }
    let labels = read_labels(&labels.map_or_else(|| run.graph.join(LABELS_FILE), Path::to_path_buf))?;
    let split_path = split.map_or_else(|| run.graph.join(SPLIT_FILE), Path::to_path_buf);
    let split: Split = serde_json::from_slice(&fs::read(&split_path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", split_path.display())))?;
    if labels.len() != header.rows {
        return Err(Error::Format(format!(
            "{} labels for {} archived rows",
            labels.len(),
            header.rows
        )));
    }

    let outcome = train(&groups, &labels, &split, &run.encoder, &run.train)?;
    let valid = evaluate(&outcome.params, &run.encoder, &groups, &labels, &split.valid)?;
    let test = evaluate(&outcome.params, &run.encoder, &groups, &labels, &split.test)?;

    fs::create_dir_all(&run.out_dir)?;
    let manifest_hash = run.hash();
    let relations: Vec<String> = groups.iter().map(|g| g.relation.clone()).collect();
    save_checkpoint(
        &run.out_dir.join(CHECKPOINT_FILE),
        &run.encoder,
        &relations,
        &outcome.params,
        Some(&manifest_hash),
    )?;
    write_history_csv(&run.out_dir.join(HISTORY_FILE), &outcome.history)?;
    let report = TrainReport {
        manifest_hash,
        archive_hash: hex_digest(&fs::read(archive)?),
        epochs_run: outcome.history.len(),
        best_epoch: outcome.best_epoch,
        valid,
        test,
        macro_f1: test.macro_f1,
        micro_f1: test.micro_f1,
        accuracy: test.accuracy,
    };
    write_json(&run.out_dir.join(METRICS_FILE), &report)?;
    Ok(report)
}

/// Builds the provenance ledger of a graph directory's target type. Writes
/// `ledger.md` and `ledger.json` when `out_dir` is given.
pub fn cmd_ledger(
    graph_dir: &Path,
    target: Option<&str>,
    scheme: Scheme,
    iterations: usize,
    out_dir: Option<&Path>,
) -> Result<ProvenanceLedger> {
    let gm = read_graph_manifest(graph_dir)?;
    let target = target
        .map(str::to_string)
        .or(gm.target)
        .ok_or_else(|| Error::Config("no target vertex type given or declared".into()))?;
    let ds = load_graph_dir(graph_dir, 0)?;
    let ledger = provenance_ledger(&ds.graph, ds.graph.vertex_type_id(&target)?, scheme, iterations)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let compact = ledger.compact_is_unambiguous();
        fs::write(dir.join("ledger.md"), ledger.to_markdown(compact))?;
        fs::write(dir.join("ledger.json"), ledger.to_json()?)?;
    }
    Ok(ledger)
}

/// Epoch timing over iteration counts on an existing archive; writes
/// `bench.json` to the run's output directory.
pub fn cmd_bench(archive: &Path, run: &RunManifest, iterations: &[usize], repeats: usize) -> Result<BenchReport> {
    let (_, groups) = load_groups(archive)?;
    let report = bench_epoch_time(&groups, &run.encoder, &run.train, iterations, repeats)?;
    fs::create_dir_all(&run.out_dir)?;
    write_json(&run.out_dir.join("bench.json"), &report)?;
    Ok(report)
}
