//! Build a small typed graph in memory and inspect its edge types.
//!
//! Every non-symmetric edge type gets a reverse type named `r.<name>`.

use ndarray::array;
use rphgnn::{build_graph, EdgeSpec};

fn main() -> rphgnn::Result<()> {
    let mut g = build_graph(
        &[("paper", 4), ("author", 3), ("field", 2)],
        vec![
            EdgeSpec::new("paper", "cites", "paper", vec![(0, 1), (1, 2), (2, 3), (3, 0)]),
            EdgeSpec::new("author", "writes", "paper", vec![(0, 0), (0, 1), (1, 1), (2, 2), (2, 3)]),
            EdgeSpec::new("paper", "has_field", "field", vec![(0, 0), (1, 0), (2, 1), (3, 1)]),
        ],
    )?;

    for e in g.edge_type_ids() {
        let adj = g.adjacency(e);
        let degrees: Vec<usize> = (0..adj.rows()).map(|r| adj.degree(r)).collect();
        println!("{:<28} nnz {:>2}  in-degrees {:?}", g.render_edge(e), adj.nnz(), degrees);
    }

    let paper = g.vertex_type_id("paper")?;
    g.attach_features(paper, array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.5]])?;
    for name in ["author", "field"] {
        let vt = g.vertex_type_id(name)?;
        g.attach_random_embeddings(vt, 2, 7)?;
    }
    for vt in g.vertex_type_ids() {
        println!("{}: {} vertices, feature dim {:?}", g.vertex_type(vt).name, g.vertex_type(vt).count, g.feature_dim(vt));
    }
    Ok(())
}
