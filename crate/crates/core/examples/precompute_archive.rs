//! Pre-compute group tensors for a synthetic dataset, write them to an
//! archive and read them back.

use rphgnn::hetgraph::io::load_graph_dir;
use rphgnn::precompute::{load_groups, save_groups, schema_hash, ArchiveHeader, GroupEntry};
use rphgnn::squashing::rp_seed;
use rphgnn::synth::{generate, SynthConfig};
use rphgnn::{run_precompute, PrecomputeConfig, Scheme};

fn main() -> rphgnn::Result<()> {
    let dir = std::env::temp_dir().join("rphgnn-precompute-example");
    generate(&SynthConfig::default())?.write(&dir)?;
    let ds = load_graph_dir(&dir, 0)?;
    let cfg = PrecomputeConfig::new("paper", Scheme::EvenOdd, 3);
    let groups = run_precompute(&ds.graph, &cfg)?;

    let header = ArchiveHeader {
        schema_hash: schema_hash(&ds.graph),
        manifest_hash: None,
        target: cfg.target.clone(),
        scheme: cfg.scheme,
        iterations: cfg.iterations,
        rows: groups[0].rows(),
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
    let path = dir.join("groups.rphg");
    save_groups(&path, &header, &groups)?;
    let (loaded_header, loaded) = load_groups(&path)?;
    assert_eq!(loaded, groups);

    println!("{} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    for (entry, g) in loaded_header.groups.iter().zip(&loaded) {
        println!("  {:<40} {:?}  {} x {} x {}", entry.relation, entry.parity, g.iterations(), g.rows(), g.dim());
    }
    Ok(())
}
