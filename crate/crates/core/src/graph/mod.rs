//! Undirected simple graphs, labelings and the cyclic antibandwidth objective.
//!
//! Vertices are 0-based internally. Labels are 1-based (`1..=n`), matching how
//! labelings are written down and exchanged.

mod generators;
mod io;

pub use generators::{
    complete, cycle, double_star, from_spec, hypercube, mesh3d, path, random_connected, star,
    caterpillar, complete_binary_tree,
};
pub use io::{parse_edge_list, parse_matrix_market, read_graph_file, to_edge_list};

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// An undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted, each pair stored as `(lo, hi)` with `lo < hi`.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, dropping self-loops and collapsing duplicate edges.
    /// Fails if an endpoint is not in `0..n`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::input(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Smallest-index vertex among those of maximum degree.
    pub fn max_degree_vertex(&self) -> Option<usize> {
        let max = self.max_degree();
        (0..self.n).find(|&v| self.degree(v) == max)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.n
    }
}

/// A bijection from vertices to labels `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling(Vec<usize>);

impl Labeling {
    /// `labels[v]` is the label of vertex `v`; must be a permutation of `1..=n`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        let mut seen = vec![false; n + 1];
        for &l in &labels {
            if l == 0 || l > n {
                return Err(Error::input(format!("label {l} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[l], true) {
                return Err(Error::input(format!("label {l} used twice")));
            }
        }
        Ok(Labeling(labels))
    }

    pub fn identity(n: usize) -> Self {
        Labeling((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn label(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// The mirrored labeling `n + 1 - f`.
    pub fn reversed(&self) -> Self {
        let n = self.0.len();
        Labeling(self.0.iter().map(|&l| n + 1 - l).collect())
    }
}

/// Distance between labels `a` and `b` on a ring of `n` positions.
pub fn cyclic_distance(n: usize, a: usize, b: usize) -> Result<usize> {
    if a == 0 || a > n || b == 0 || b > n {
        return Err(Error::input(format!(
            "labels ({a}, {b}) must lie in 1..={n}"
        )));
    }
    let d = a.abs_diff(b);
    Ok(d.min(n - d))
}

/// Minimum cyclic distance across the edges of `g` under `f`.
pub fn cab_of_labeling(g: &Graph, f: &Labeling) -> Result<usize> {
    if f.len() != g.n() {
        return Err(Error::input(format!(
            "labeling covers {} vertices, graph has {}",
            f.len(),
            g.n()
        )));
    }
    if g.num_edges() == 0 {
        return Err(Error::UndefinedObjective(
            "cyclic antibandwidth of an edgeless graph".into(),
        ));
    }
    let n = g.n();
    let mut best = usize::MAX;
    for &(a, b) in g.edges() {
        best = best.min(cyclic_distance(n, f.label(a), f.label(b))?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_table_for_label_six() {
        assert_eq!(cyclic_distance(8, 6, 1).unwrap(), 3);
        assert_eq!(cyclic_distance(8, 6, 2).unwrap(), 4);
        assert_eq!(cyclic_distance(8, 6, 3).unwrap(), 3);
        assert_eq!(cyclic_distance(8, 6, 4).unwrap(), 2);
        assert_eq!(cyclic_distance(8, 6, 6).unwrap(), 0);
        assert!(cyclic_distance(8, 0, 2).is_err());
        assert!(cyclic_distance(8, 9, 2).is_err());
    }

    #[test]
    fn graph_normalises_edges() {
        let g = Graph::new(3, [(0, 1), (1, 0), (2, 2), (1, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn triangle_has_cab_one() {
        let g = complete(3).unwrap();
        for labels in [[1, 2, 3], [3, 1, 2], [2, 3, 1]] {
            let f = Labeling::new(labels.to_vec()).unwrap();
            assert_eq!(cab_of_labeling(&g, &f).unwrap(), 1);
        }
    }

    #[test]
    fn six_cycle_example() {
        let g = cycle(6).unwrap();
        let f = Labeling::new(vec![1, 4, 2, 6, 3, 5]).unwrap();
        // edge distances: 3, 2, 2, 3, 2, 2
        assert_eq!(cab_of_labeling(&g, &f).unwrap(), 2);
    }

    #[test]
    fn edgeless_and_bad_labelings() {
        let g = Graph::new(3, []).unwrap();
        assert!(matches!(
            cab_of_labeling(&g, &Labeling::identity(3)),
            Err(Error::UndefinedObjective(_))
        ));
        assert!(Labeling::new(vec![1, 1, 2]).is_err());
        assert!(Labeling::new(vec![1, 4, 2]).is_err());
        let p = path(4).unwrap();
        assert!(cab_of_labeling(&p, &Labeling::identity(3)).is_err());
    }

    #[test]
    fn max_degree_vertex_prefers_smallest_index() {
        let g = Graph::new(5, [(0, 1), (2, 3), (2, 4), (1, 3), (1, 4)]).unwrap();
        assert_eq!(g.max_degree_vertex(), Some(1));
    }

    fn graph_and_labeling() -> impl Strategy<Value = (Graph, Labeling)> {
        (2usize..12).prop_flat_map(|n| {
            let pairs = proptest::collection::vec((0..n, 0..n), 1..3 * n);
            let perm = Just((1..=n).collect::<Vec<_>>()).prop_shuffle();
            (pairs, perm).prop_filter_map("needs an edge", move |(pairs, perm)| {
                let g = Graph::new(n, pairs).ok()?;
                (g.num_edges() > 0).then(|| (g, Labeling::new(perm).unwrap()))
            })
        })
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_and_bounded(n in 2usize..200, a in 1usize..200, b in 1usize..200) {
            let (a, b) = ((a - 1) % n + 1, (b - 1) % n + 1);
            let d = cyclic_distance(n, a, b).unwrap();
            prop_assert_eq!(d, cyclic_distance(n, b, a).unwrap());
            prop_assert!(d <= n / 2);
        }

        #[test]
        fn reversal_preserves_cab((g, f) in graph_and_labeling()) {
            prop_assert_eq!(
                cab_of_labeling(&g, &f).unwrap(),
                cab_of_labeling(&g, &f.reversed()).unwrap()
            );
        }
    }
}
