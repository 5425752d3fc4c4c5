//! Decomposable (chordal) conditional-independence graphs.
//!
//! A [`DecomposableGraph`] stores its maximal cliques in a perfect
//! elimination order together with the separators
//! `S_k = (C_1 ∪ … ∪ C_{k-1}) ∩ C_k`. Node indices are 0-based in the Rust
//! API; file formats and the CLI use 1-based indices.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposableGraph {
    p: usize,
    cliques: Vec<Vec<usize>>,
    /// `separators[k - 1]` is the separator of clique `k` (0-based), `k >= 1`.
    separators: Vec<Vec<usize>>,
    adjacency: Vec<bool>,
}

impl DecomposableGraph {
    /// Builds a graph from its maximal cliques (0-based node indices),
    /// reordering them into a perfect elimination order.
    ///
    /// The order comes from maximum cardinality search over the clique
    /// hypergraph: repeatedly take the clique sharing the most nodes with the
    /// cliques already placed, breaking ties by the lexicographically smallest
    /// sorted member list (so lowest smallest member first).
    pub fn new(cliques: Vec<Vec<usize>>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidModel("graph must have at least one node".into()));
        }
        if cliques.is_empty() {
            return Err(Error::InvalidModel("clique list is empty".into()));
        }
        let mut sets = Vec::with_capacity(cliques.len());
        for mut c in cliques {
            if c.is_empty() {
                return Err(Error::InvalidModel("empty clique".into()));
            }
            if let Some(&bad) = c.iter().find(|&&i| i >= p) {
                return Err(Error::BadIndex { index: bad + 1, p });
            }
            c.sort_unstable();
            c.dedup();
            sets.push(c);
        }

        for (a, inner) in sets.iter().enumerate() {
            for (b, outer) in sets.iter().enumerate() {
                if a != b && is_subset(inner, outer) && (inner.len() < outer.len() || a > b) {
                    return Err(Error::DuplicateOrNestedClique {
                        inner: one_based(inner),
                        outer: one_based(outer),
                    });
                }
            }
        }

        let mut covered = vec![false; p];
        for c in &sets {
            for &i in c {
                covered[i] = true;
            }
        }
        if let Some(node) = covered.iter().position(|&c| !c) {
            return Err(Error::UncoveredNode { node: node + 1 });
        }

        let mut in_history = vec![false; p];
        let mut placed = vec![false; sets.len()];
        let mut order: Vec<Vec<usize>> = Vec::with_capacity(sets.len());
        let mut separators = Vec::with_capacity(sets.len().saturating_sub(1));
        for _ in 0..sets.len() {
            let next = (0..sets.len())
                .filter(|&k| !placed[k])
                .max_by(|&x, &y| {
                    let wx = sets[x].iter().filter(|&&i| in_history[i]).count();
                    let wy = sets[y].iter().filter(|&&i| in_history[i]).count();
                    wx.cmp(&wy).then_with(|| sets[y].cmp(&sets[x]))
                })
                .expect("an unplaced clique remains");
            placed[next] = true;
            let clique = &sets[next];
            if !order.is_empty() {
                let sep: Vec<usize> = clique.iter().copied().filter(|&i| in_history[i]).collect();
                if !order.iter().any(|earlier| is_subset(&sep, earlier)) {
                    return Err(Error::NotDecomposable(format!(
                        "separator {:?} of clique {:?} is not contained in any earlier clique",
                        one_based(&sep),
                        one_based(clique)
                    )));
                }
                separators.push(sep);
            }
            for &i in clique {
                in_history[i] = true;
            }
            order.push(clique.clone());
        }

        let mut adjacency = vec![false; p * p];
        for c in &order {
            for &i in c {
                for &j in c {
                    adjacency[i * p + j] = true;
                }
            }
        }

        let graph = DecomposableGraph {
            p,
            cliques: order,
            separators,
            adjacency,
        };
        let (sum_c, sum_s) = graph.cardinality_sums();
        if sum_c - sum_s != p {
            return Err(Error::NotDecomposable(format!(
                "cardinality identity fails: {sum_c} - {sum_s} != {p}"
            )));
        }
        Ok(graph)
    }

    /// Same as [`DecomposableGraph::new`] with 1-based node indices.
    pub fn from_one_based(cliques: &[Vec<usize>], p: usize) -> Result<Self> {
        let mut zero = Vec::with_capacity(cliques.len());
        for c in cliques {
            let mut z = Vec::with_capacity(c.len());
            for &i in c {
                if i == 0 || i > p {
                    return Err(Error::BadIndex { index: i, p });
                }
                z.push(i - 1);
            }
            zero.push(z);
        }
        Self::new(zero, p)
    }

    /// Recognizes a chordal pattern and extracts its maximal cliques.
    ///
    /// `pattern` is a symmetric `p x p` adjacency with a true diagonal.
    pub fn from_pattern(pattern: &[Vec<bool>]) -> Result<Self> {
        let p = pattern.len();
        if p == 0 {
            return Err(Error::InvalidModel("empty pattern".into()));
        }
        for (i, row) in pattern.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "pattern row {} has {} entries, expected {p}",
                    i + 1,
                    row.len()
                )));
            }
            if !row[i] {
                return Err(Error::InvalidModel(format!("pattern diagonal entry {} is false", i + 1)));
            }
            for j in 0..i {
                if row[j] != pattern[j][i] {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        asymmetry: 1.0,
                    });
                }
            }
        }
        let adj = |i: usize, j: usize| i != j && pattern[i][j];

        // Maximum cardinality search; ties go to the lowest index.
        let mut weight = vec![0usize; p];
        let mut visited_at = vec![usize::MAX; p];
        let mut order = Vec::with_capacity(p);
        for step in 0..p {
            let v = (0..p)
                .filter(|&v| visited_at[v] == usize::MAX)
                .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
                .expect("an unvisited vertex remains");
            visited_at[v] = step;
            order.push(v);
            for u in 0..p {
                if adj(v, u) && visited_at[u] == usize::MAX {
                    weight[u] += 1;
                }
            }
        }

        let mut candidates = Vec::with_capacity(p);
        for &v in &order {
            let earlier: Vec<usize> = (0..p)
                .filter(|&u| adj(v, u) && visited_at[u] < visited_at[v])
                .collect();
            for (x, &a) in earlier.iter().enumerate() {
                for &b in &earlier[x + 1..] {
                    if !adj(a, b) {
                        return Err(Error::NotChordal {
                            witness: chordless_cycle_witness(pattern, v, a, b),
                        });
                    }
                }
            }
            let mut clique = earlier;
            clique.push(v);
            clique.sort_unstable();
            candidates.push(clique);
        }

        candidates.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let mut maximal: Vec<Vec<usize>> = Vec::new();
        for c in candidates {
            if !maximal.iter().any(|m| is_subset(&c, m)) {
                maximal.push(c);
            }
        }
        let graph = Self::new(maximal, p)?;
        debug_assert!((0..p).all(|i| (0..p).all(|j| graph.has_edge(i, j) == pattern[i][j])));
        Ok(graph)
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_cliques(&self) -> usize {
        self.cliques.len()
    }

    /// Cliques in perfect elimination order.
    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn clique(&self, k: usize) -> &[usize] {
        &self.cliques[k]
    }

    /// Separators `S_2, …, S_K`; entry `k - 1` belongs to clique `k`.
    pub fn separators(&self) -> &[Vec<usize>] {
        &self.separators
    }

    /// Separator of clique `k` (0-based); empty for the first clique.
    pub fn separator(&self, k: usize) -> &[usize] {
        k.checked_sub(1).map_or(&[], |i| &self.separators[i])
    }

    pub fn max_clique_size(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_saturated(&self) -> bool {
        self.cliques.len() == 1
    }

    /// `(Σ_k c_k, Σ_{k>=2} s_k)`.
    pub fn cardinality_sums(&self) -> (usize, usize) {
        let c: usize = self.cliques.iter().map(Vec::len).sum();
        let s: usize = self.separators.iter().map(Vec::len).sum();
        (c, s)
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.p + j]
    }

    /// Unordered edges `(i, j)` with `i <= j`, self-loops included.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.p).flat_map(move |j| (0..=j).filter(move |&i| self.has_edge(i, j)).map(move |i| (i, j)))
    }

    pub fn pattern(&self) -> Vec<Vec<bool>> {
        (0..self.p)
            .map(|i| (0..self.p).map(|j| self.has_edge(i, j)).collect())
            .collect()
    }

    /// Cliques with 1-based indices, in perfect elimination order.
    pub fn cliques_one_based(&self) -> Vec<Vec<usize>> {
        self.cliques.iter().map(|c| one_based(c)).collect()
    }

    pub fn separators_one_based(&self) -> Vec<Vec<usize>> {
        self.separators.iter().map(|c| one_based(c)).collect()
    }

    /// Errors with the first nonzero entry outside the edge set.
    pub fn check_pattern(&self, m: &SymMatrix) -> Result<()> {
        if m.dim() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, graph has {} nodes",
                m.dim(),
                m.dim(),
                self.p
            )));
        }
        for j in 0..self.p {
            for i in 0..j {
                if !self.has_edge(i, j) && m.get(i, j) != 0.0 {
                    return Err(Error::PatternViolation { row: i + 1, col: j + 1 });
                }
            }
        }
        Ok(())
    }

    pub fn conforms(&self, m: &SymMatrix) -> bool {
        self.check_pattern(m).is_ok()
    }

    /// Orthogonal projection onto the pattern subspace: zeroes every
    /// off-pattern entry.
    pub fn restrict_to_pattern(&self, m: &SymMatrix) -> SymMatrix {
        let mut out = m.clone();
        for j in 0..self.p {
            for i in 0..j {
                if !self.has_edge(i, j) {
                    out.set(i, j, 0.0);
                }
            }
        }
        out
    }
}

/// Embeds `block` at rows/columns `a` of a `p x p` zero matrix.
pub fn zero_fill(block: &SymMatrix, a: &[usize], p: usize) -> Result<SymMatrix> {
    if block.dim() != a.len() {
        return Err(Error::DimensionMismatch(format!(
            "block is {}x{} but index set has {} entries",
            block.dim(),
            block.dim(),
            a.len()
        )));
    }
    if let Some(&bad) = a.iter().find(|&&i| i >= p) {
        return Err(Error::BadIndex { index: bad + 1, p });
    }
    let mut out = SymMatrix::zeros(p);
    out.accumulate_block(block, a, 1.0);
    Ok(out)
}

fn is_subset(small: &[usize], large: &[usize]) -> bool {
    small.iter().all(|x| large.binary_search(x).is_ok())
}

fn one_based(set: &[usize]) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

/// Shortest path from `a` to `b` avoiding the closed neighbourhood of `v`
/// (except `a`, `b`) closes a chordless cycle through `v`.
fn chordless_cycle_witness(pattern: &[Vec<bool>], v: usize, a: usize, b: usize) -> String {
    let p = pattern.len();
    let blocked: Vec<bool> = (0..p)
        .map(|u| u == v || (pattern[v][u] && u != a && u != b))
        .collect();
    let mut parent = vec![usize::MAX; p];
    let mut queue = VecDeque::from([a]);
    parent[a] = a;
    while let Some(u) = queue.pop_front() {
        if u == b {
            break;
        }
        for w in 0..p {
            if w != u && pattern[u][w] && !blocked[w] && parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    if parent[b] == usize::MAX {
        return format!(
            "nodes {} and {} are both earlier neighbours of {} but not adjacent",
            a + 1,
            b + 1,
            v + 1
        );
    }
    let mut path = vec![b];
    let mut u = b;
    while u != a {
        u = parent[u];
        path.push(u);
    }
    let mut cycle: Vec<String> = vec![(v + 1).to_string()];
    cycle.extend(path.iter().rev().map(|x| (x + 1).to_string()));
    cycle.push((v + 1).to_string());
    format!("chordless cycle {}", cycle.join("-"))
}
