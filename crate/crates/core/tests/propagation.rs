mod common;

use common::{edge_lists, max_abs_diff, path_oracle, random_graph, to_f64};
use proptest::prelude::*;
use rphgnn::propagation::{collect_even, collect_odd, collect_relation, rwnc_collect};
use rphgnn::relations::{enumerate_relations, oracle_aggregate, Parity};
use rphgnn::Scheme;

fn check_graph(seed: u64) -> Result<(), TestCaseError> {
    let rg = random_graph(seed);
    let g = &rg.graph;
    let states = g.raw_states().unwrap();
    let raw: Vec<_> = states.iter().map(to_f64).collect();
    for vt in g.vertex_type_ids() {
        for info in rwnc_collect(g, &states, Scheme::EvenOdd, vt).unwrap() {
            let dense = oracle_aggregate(g, &info.relation, &raw).unwrap();
            let walks = path_oracle(&rg, &info.relation, &raw);
            let got = to_f64(&info.matrix);
            prop_assert!(max_abs_diff(&got, &dense) <= 1e-5, "{} vs dense", info.relation.key());
            prop_assert!(max_abs_diff(&got, &walks) <= 1e-5, "{} vs walks", info.relation.key());
            prop_assert!(max_abs_diff(&dense, &walks) <= 1e-12);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn odd_and_even_match_both_oracles(seed in any::<u64>()) {
        check_graph(seed)?;
    }

    #[test]
    fn general_relations_match_walks(seed in any::<u64>()) {
        let rg = random_graph(seed);
        let g = &rg.graph;
        let states = g.raw_states().unwrap();
        let raw: Vec<_> = states.iter().map(to_f64).collect();
        for vt in g.vertex_type_ids() {
            for r in enumerate_relations(g, vt, 2).unwrap() {
                let got = to_f64(&collect_relation(g, &r, &states).unwrap().matrix);
                prop_assert!(max_abs_diff(&got, &path_oracle(&rg, &r, &raw)) <= 1e-5);
            }
        }
    }

    /// Rows are convex combinations of source rows, so every entry stays
    /// within the source's column range, and zero-degree rows are zero.
    #[test]
    fn odd_rows_are_convex(seed in any::<u64>()) {
        let rg = random_graph(seed);
        let g = &rg.graph;
        let states = g.raw_states().unwrap();
        let lists = edge_lists(&rg.specs);
        for e in g.edge_type_ids() {
            let et = g.edge_type(e);
            let src = &states[et.src.0];
            let out = collect_odd(g, e, src.view()).unwrap().matrix;
            for (v, row) in out.rows().into_iter().enumerate() {
                let has_in = lists[e.0].iter().any(|&(_, d)| d as usize == v);
                for (c, &x) in row.iter().enumerate() {
                    if !has_in {
                        prop_assert_eq!(x, 0.0);
                        continue;
                    }
                    let col = src.column(c);
                    let lo = col.iter().cloned().fold(f32::INFINITY, f32::min);
                    let hi = col.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
                    prop_assert!(x >= lo - 1e-5 && x <= hi + 1e-5);
                }
            }
        }
    }
}

#[test]
fn even_collection_equals_two_chained_odd_steps() {
    for seed in 0..20 {
        let rg = random_graph(seed);
        let g = &rg.graph;
        let states = g.raw_states().unwrap();
        for e in g.edge_type_ids() {
            let et = g.edge_type(e);
            let even = collect_even(g, e, states[et.dst.0].view()).unwrap();
            assert_eq!(even.relation.parity(), Parity::Even);
            let back = collect_odd(g, et.reverse, states[et.dst.0].view()).unwrap().matrix;
            let there = collect_odd(g, e, back.view()).unwrap().matrix;
            assert_eq!(even.matrix, there);
        }
    }
}

#[test]
fn every_edge_type_has_an_involutive_reverse() {
    for seed in 0..50 {
        let rg = random_graph(seed);
        let g = &rg.graph;
        for e in g.edge_type_ids() {
            let rev = g.edge_type(e).reverse;
            assert_eq!(g.edge_type(rev).reverse, e);
            let mut fwd: Vec<_> = g.adjacency(e).pairs().collect();
            let mut back: Vec<_> = g.adjacency(rev).pairs().map(|(a, b)| (b, a)).collect();
            fwd.sort_unstable();
            back.sort_unstable();
            assert_eq!(fwd, back, "{}", g.render_edge(e));
        }
    }
}
