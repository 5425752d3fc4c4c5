//! Recognize decomposable patterns and print their clique order.

use decomposable_ggm::{DecomposableGraph, Result};

fn adjacency(rows: &[&str]) -> Vec<Vec<bool>> {
    rows.iter().map(|r| r.bytes().map(|b| b == b'1').collect()).collect()
}

fn main() -> Result<()> {
    let chordal = adjacency(&["11100", "11100", "11110", "00111", "00011"]);
    let g = DecomposableGraph::from_pattern(&chordal)?;
    let one_based = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
    for k in 0..g.num_cliques() {
        println!("C{} = {:?}  S{} = {:?}", k + 1, one_based(g.clique(k)), k + 1, one_based(g.separator(k)));
    }
    let (sc, ss) = g.cardinality_sums();
    println!("sum |C| - sum |S| = {sc} - {ss} = {} = p", sc - ss);

    let cycle = adjacency(&["1101", "1110", "0111", "1011"]);
    match DecomposableGraph::from_pattern(&cycle) {
        Ok(_) => println!("4-cycle accepted"),
        Err(e) => println!("4-cycle rejected: {e}"),
    }
    Ok(())
}
