//! Structure of every model kind at its default size.

use decomposable_ggm::{ModelKind, ModelSpec, Result};

fn main() -> Result<()> {
    for name in [
        "block-diagonal",
        "two-coupled-blocks",
        "banded",
        "differential-banded",
        "arrow",
        "multiscale",
        "paper-two-cliques",
        "paper-banded",
        "paper-diffband",
    ] {
        let kind = ModelKind::from_name(name, 24, None)?;
        let p = kind.fixed_dimension().unwrap_or(24);
        let g = ModelSpec::new(kind, p, 0).graph()?;
        let sizes: Vec<usize> = g.cliques().iter().map(Vec::len).collect();
        println!("{name:<20} p = {p:>3}  {:>3} cliques  max size {:>2}  sizes {:?}", g.num_cliques(), g.max_clique_size(), &sizes[..sizes.len().min(8)]);
    }
    Ok(())
}
