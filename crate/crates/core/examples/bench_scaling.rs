//! Time one training epoch for growing iteration counts and fit a line.
//!
//! ```text
//! cargo run --release --example bench_scaling -- [rows] [dim]
//! ```

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rphgnn::encoder::EncoderConfig;
use rphgnn::relations::Parity;
use rphgnn::trainer::{bench_epoch_time, TrainConfig};
use rphgnn::GroupTensor;

fn main() -> rphgnn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let rows = args.next().unwrap_or(2000);
    let dim = args.next().unwrap_or(32);
    let k_max = 8;
    let groups: Vec<GroupTensor> = (0..6)
        .map(|g| GroupTensor {
            relation: format!("group{g}"),
            parity: Parity::Odd,
            slabs: (0..k_max)
                .map(|_| Array2::from_shape_simple_fn((rows, dim), || rng.random_range(-1.0..1.0)))
                .collect(),
        })
        .collect();
    let enc = EncoderConfig {
        hidden_dim: 8,
        conv_out_channels: 1,
        num_classes: 4,
        ..Default::default()
    };
    let train = TrainConfig {
        batch_size: 1000,
        ..Default::default()
    };
    let report = bench_epoch_time(&groups, &enc, &train, &[1, 2, 4, 8], 5)?;
    for row in &report.timings {
        println!("K = {:>2}: {:>8.2} ms", row.iterations, row.seconds * 1e3);
    }
    println!(
        "slope {:.2} ms/iteration, intercept {:.2} ms, R² {:.4}",
        report.slope * 1e3,
        report.intercept * 1e3,
        report.r_squared
    );
    Ok(())
}
