//! Print which relations are merged into every collected vector, for the
//! local and even-odd schemes on the four-type academic schema.

use rphgnn::relations::provenance_ledger;
use rphgnn::synth::academic_toy;
use rphgnn::Scheme;

fn main() -> rphgnn::Result<()> {
    let dir = std::env::temp_dir().join("rphgnn-ledger-example");
    academic_toy().write(&dir)?;
    let g = rphgnn::hetgraph::io::load_graph_dir(&dir, 0)?.graph;
    let paper = g.vertex_type_id("p")?;
    for (scheme, k) in [(Scheme::Local, 4), (Scheme::EvenOdd, 2)] {
        let ledger = provenance_ledger(&g, paper, scheme, k)?;
        println!("## {scheme}, {k} iterations\n");
        println!("{}", ledger.to_markdown(ledger.compact_is_unambiguous()));
    }
    Ok(())
}
