//! Collect neighbor information relation by relation and check it against
//! a dense 64-bit reference.

use ndarray::Array2;
use rphgnn::propagation::rwnc_collect;
use rphgnn::relations::oracle_aggregate;
use rphgnn::synth::academic_toy;
use rphgnn::Scheme;

fn main() -> rphgnn::Result<()> {
    let dir = std::env::temp_dir().join("rphgnn-propagate-example");
    academic_toy().write(&dir)?;
    let g = rphgnn::hetgraph::io::load_graph_dir(&dir, 1)?.graph;
    let states = g.raw_states()?;
    let dense: Vec<Array2<f64>> = states.iter().map(|s| s.mapv(f64::from)).collect();
    let paper = g.vertex_type_id("p")?;

    for scheme in [Scheme::Local, Scheme::EvenOdd] {
        println!("{scheme}:");
        for info in rwnc_collect(&g, &states, scheme, paper)? {
            let reference = oracle_aggregate(&g, &info.relation, &dense)?;
            let err = (&info.matrix.mapv(f64::from) - &reference)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            println!(
                "  {:<32} {:?}  max |diff| vs dense {:.1e}",
                info.relation.key(),
                info.matrix.dim(),
                err
            );
        }
    }
    Ok(())
}
