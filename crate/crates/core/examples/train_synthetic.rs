//! Generate a planted-signal dataset, pre-compute even-odd groups and train
//! the encoder on them.
//!
//! ```text
//! cargo run --release --example train_synthetic -- [signal] [scheme] [iterations]
//! ```

use std::time::Instant;

use rphgnn::encoder::EncoderConfig;
use rphgnn::hetgraph::io::load_graph_dir;
use rphgnn::synth::{generate, SynthConfig};
use rphgnn::trainer::{evaluate, train, TrainConfig};
use rphgnn::{run_precompute, PrecomputeConfig, Scheme};

fn main() -> rphgnn::Result<()> {
    let mut args = std::env::args().skip(1);
    let signal: f64 = args.next().map_or(1.0, |s| s.parse().expect("signal"));
    let scheme: Scheme = args.next().map_or(Scheme::EvenOdd, |s| s.parse().expect("scheme"));
    let iterations: usize = args.next().map_or(2, |s| s.parse().expect("iterations"));

    let dir = std::env::temp_dir().join(format!("rphgnn-synth-{signal}"));
    generate(&SynthConfig {
        signal,
        ..Default::default()
    })?
    .write(&dir)?;
    let ds = load_graph_dir(&dir, 0)?;

    let started = Instant::now();
    let groups = run_precompute(&ds.graph, &PrecomputeConfig::new("paper", scheme, iterations))?;
    println!("{} groups pre-computed in {:.2?}", groups.len(), started.elapsed());

    let labels = ds.labels.expect("synthetic data is labeled");
    let split = ds.split.expect("synthetic data has a split");
    let enc = EncoderConfig {
        num_classes: 5,
        ..Default::default()
    };
    let started = Instant::now();
    let out = train(&groups, &labels, &split, &enc, &TrainConfig::default())?;
    let test = evaluate(&out.params, &enc, &groups, &labels, &split.test)?;
    println!(
        "{} epochs in {:.2?}, best epoch {} (valid accuracy {:.4})",
        out.history.len(),
        started.elapsed(),
        out.best_epoch,
        out.best_valid
    );
    println!(
        "test: accuracy {:.4}  macro-F1 {:.4}  micro-F1 {:.4}",
        test.accuracy, test.macro_f1, test.micro_f1
    );
    Ok(())
}
