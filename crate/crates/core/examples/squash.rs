//! Project collected matrices with seeded sparse random weights, normalize
//! rows and sum over relations.

use ndarray::Array2;
use rphgnn::squashing::{make_rp_weights, squash, RpConfig, RpStrategy};
use rphgnn::synth::academic_toy;
use rphgnn::{propagation::rwnc_collect, Scheme};

fn main() -> rphgnn::Result<()> {
    for p_sp in [0.5, 2.0 / 3.0, 0.9] {
        let cfg = RpConfig {
            strategy: RpStrategy::Sparse { p_sp },
            base_seed: 0,
        };
        let w = make_rp_weights(&cfg, "example", 1, 1000, 1000).matrix;
        let n = w.len() as f64;
        let share = |v: f32| w.iter().filter(|&&x| x == v).count() as f64 / n;
        println!(
            "p_sp {p_sp:.3}: zeros {:.4}  +1 {:.4}  -1 {:.4}",
            share(0.0),
            share(1.0),
            share(-1.0)
        );
    }

    let dir = std::env::temp_dir().join("rphgnn-squash-example");
    academic_toy().write(&dir)?;
    let g = rphgnn::hetgraph::io::load_graph_dir(&dir, 1)?.graph;
    let states = g.raw_states()?;
    let paper = g.vertex_type_id("p")?;
    let collected = rwnc_collect(&g, &states, Scheme::EvenOdd, paper)?;
    let dim = states[paper.0].ncols();
    let out = squash(&collected, 4, dim, &RpConfig::default(), 1)?;
    println!("\nsquashed {} relations into {:?}", collected.len(), out.state.dim());
    print_rows(&out.state);
    Ok(())
}

fn print_rows(m: &Array2<f32>) {
    for row in m.rows() {
        let norm = row.iter().map(|v| v * v).sum::<f32>().sqrt();
        println!("  {:>7.3?}  norm {norm:.3}", row.to_vec());
    }
}
