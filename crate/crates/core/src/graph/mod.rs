//! Bipartite graphs with an explicit `(L, R)` bipartition.
//!
//! Vertices are addressed globally as [`Vertex`] values (a side plus a dense
//! index on that side) so left and right indices never collide. Internally
//! some algorithms use a flat numbering where left vertex `i` is `i` and
//! right vertex `j` is `n_left + j`.

mod generate;
mod io;
mod steiner;

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::GraphFamily;

/// Largest terminal set accepted by [`BipartiteGraph::steiner_tree_size`].
pub const MAX_STEINER_TERMINALS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: edge ({left}, {right}) out of range for {n_left}x{n_right} graph")]
    IndexOutOfRange {
        line: usize,
        left: usize,
        right: usize,
        n_left: usize,
        n_right: usize,
    },
    #[error("line {line}: duplicate edge ({left}, {right})")]
    DuplicateEdge {
        line: usize,
        left: usize,
        right: usize,
    },
    #[error("graph has an empty side (n_L = {n_left}, n_R = {n_right})")]
    EmptySide { n_left: usize, n_right: usize },
    #[error("vertex set must be nonempty")]
    EmptySet,
    #[error("vertex {0} does not exist")]
    UnknownVertex(Vertex),
    #[error("steiner tree terminal set of size {0} exceeds the cap of {MAX_STEINER_TERMINALS}")]
    TooManyTerminals(usize),
    #[error("invalid graph family: {0}")]
    InvalidFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub side: Side,
    pub index: usize,
}

impl Vertex {
    pub const fn left(index: usize) -> Self {
        Self {
            side: Side::Left,
            index,
        }
    }

    pub const fn right(index: usize) -> Self {
        Self {
            side: Side::Right,
            index,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Left => write!(f, "L{}", self.index),
            Side::Right => write!(f, "R{}", self.index),
        }
    }
}

/// Degree extremes per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub delta_l_max: usize,
    pub delta_l_min: usize,
    pub delta_r_min: usize,
    pub delta_r_max: usize,
}

/// The parameters `(Δ_L, δ_R, Δ_R)` naming a graph class: left degrees at
/// most `delta_l_max`, right degrees within `[delta_r_min, delta_r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBounds {
    pub delta_l_max: usize,
    pub delta_r_min: usize,
    pub delta_r_max: usize,
}

impl DegreeBounds {
    pub const fn new(delta_l_max: usize, delta_r_min: usize, delta_r_max: usize) -> Self {
        Self {
            delta_l_max,
            delta_r_min,
            delta_r_max,
        }
    }

    pub const fn regular(delta: usize) -> Self {
        Self::new(delta, delta, delta)
    }

    pub const fn biregular(delta_l: usize, delta_r: usize) -> Self {
        Self::new(delta_l, delta_r, delta_r)
    }
}

impl DegreeProfile {
    pub fn bounds(&self) -> DegreeBounds {
        DegreeBounds::new(self.delta_l_max, self.delta_r_min, self.delta_r_max)
    }

    /// Membership in the class named by `bounds`.
    pub fn in_class(&self, bounds: &DegreeBounds) -> bool {
        self.delta_l_max <= bounds.delta_l_max
            && self.delta_r_min >= bounds.delta_r_min
            && self.delta_r_max <= bounds.delta_r_max
    }
}

/// An immutable bipartite graph. Edges are `(left index, right index)` pairs
/// kept in insertion order so serialization is stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    edges: Vec<(usize, usize)>,
    left_adj: Vec<Vec<usize>>,
    right_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(
        n_left: usize,
        n_right: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut builder = Builder::new(n_left, n_right);
        for (k, (u, v)) in edges.into_iter().enumerate() {
            builder.push(u, v, k + 1)?;
        }
        Ok(builder.finish())
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn n_vertices(&self) -> usize {
        self.n_left + self.n_right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Right-side neighbors of left vertex `i`, sorted.
    pub fn left_neighbors(&self, i: usize) -> &[usize] {
        &self.left_adj[i]
    }

    /// Left-side neighbors of right vertex `j`, sorted.
    pub fn right_neighbors(&self, j: usize) -> &[usize] {
        &self.right_adj[j]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        match v.side {
            Side::Left => v.index < self.n_left,
            Side::Right => v.index < self.n_right,
        }
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let (list, side) = match v.side {
            Side::Left => (&self.left_adj[v.index], Side::Right),
            Side::Right => (&self.right_adj[v.index], Side::Left),
        };
        list.iter().map(move |&index| Vertex { side, index })
    }

    pub fn degree(&self, v: Vertex) -> usize {
        match v.side {
            Side::Left => self.left_adj[v.index].len(),
            Side::Right => self.right_adj[v.index].len(),
        }
    }

    /// Flat index: left vertices first, then right vertices.
    pub fn flat_index(&self, v: Vertex) -> usize {
        match v.side {
            Side::Left => v.index,
            Side::Right => self.n_left + v.index,
        }
    }

    pub fn vertex_at(&self, flat: usize) -> Vertex {
        if flat < self.n_left {
            Vertex::left(flat)
        } else {
            Vertex::right(flat - self.n_left)
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        let (nl, nr) = (self.n_left, self.n_right);
        (0..nl).map(Vertex::left).chain((0..nr).map(Vertex::right))
    }

    /// Flat adjacency lists over all vertices.
    pub fn flat_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = Vec::with_capacity(self.n_vertices());
        for nbrs in &self.left_adj {
            adj.push(nbrs.iter().map(|&j| self.n_left + j).collect());
        }
        for nbrs in &self.right_adj {
            adj.push(nbrs.clone());
        }
        adj
    }

    pub fn degree_profile(&self) -> Result<DegreeProfile, GraphError> {
        if self.n_left == 0 || self.n_right == 0 {
            return Err(GraphError::EmptySide {
                n_left: self.n_left,
                n_right: self.n_right,
            });
        }
        let l = self.left_adj.iter().map(Vec::len);
        let r = self.right_adj.iter().map(Vec::len);
        Ok(DegreeProfile {
            delta_l_max: l.clone().max().unwrap_or(0),
            delta_l_min: l.min().unwrap_or(0),
            delta_r_min: r.clone().min().unwrap_or(0),
            delta_r_max: r.max().unwrap_or(0),
        })
    }

    /// Disjoint union; the right-hand graph's indices are shifted past ours.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let (dl, dr) = (self.n_left, self.n_right);
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(u, v)| (u + dl, v + dr)));
        Self::new(dl + other.n_left, dr + other.n_right, edges)
            .expect("disjoint union of valid graphs is valid")
    }

    fn check_vertices(&self, set: &[Vertex]) -> Result<(), GraphError> {
        if set.is_empty() {
            return Err(GraphError::EmptySet);
        }
        match set.iter().find(|v| !self.contains(**v)) {
            Some(v) => Err(GraphError::UnknownVertex(*v)),
            None => Ok(()),
        }
    }

    /// Minimum shortest-path length between the two sets; `None` when no path
    /// exists.
    pub fn distance(&self, a: &[Vertex], b: &[Vertex]) -> Result<Option<usize>, GraphError> {
        self.check_vertices(a)?;
        self.check_vertices(b)?;
        let adj = self.flat_adjacency();
        let sources: Vec<usize> = a.iter().map(|&v| self.flat_index(v)).collect();
        let dist = bfs(&adj, &sources);
        Ok(b.iter()
            .map(|&v| dist[self.flat_index(v)])
            .filter(|&d| d != u32::MAX)
            .min()
            .map(|d| d as usize))
    }
    /// Fewest edges in a connected subgraph containing every vertex of
    /// `terminals`; `None` when they span several components.
    pub fn steiner_tree_size(&self, terminals: &[Vertex]) -> Result<Option<usize>, GraphError> {
        self.check_vertices(terminals)?;
        let mut flat: Vec<usize> = terminals.iter().map(|&v| self.flat_index(v)).collect();
        flat.sort_unstable();
        flat.dedup();
        if flat.len() > MAX_STEINER_TERMINALS {
            return Err(GraphError::TooManyTerminals(flat.len()));
        }
        Ok(steiner::dreyfus_wagner(&self.flat_adjacency(), &flat))
    }

    /// Right vertices sharing at least one left neighbor with `j`, sorted.
    pub fn two_linked_neighbors(&self, j: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.right_adj[j]
            .iter()
            .flat_map(|&i| self.left_adj[i].iter().copied())
            .filter(|&k| k != j)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether the vertex set is independent in the graph.
    pub fn is_independent(&self, set: &[Vertex]) -> bool {
        let members: HashSet<Vertex> = set.iter().copied().collect();
        set.iter()
            .all(|&v| self.neighbors(v).all(|w| !members.contains(&w)))
    }
}

/// BFS distances over flat adjacency lists; `u32::MAX` marks unreachable
/// vertices.
pub(crate) fn bfs(adj: &[Vec<usize>], sources: &[usize]) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

struct Builder {
    n_left: usize,
    n_right: usize,
    edges: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
}

impl Builder {
    fn new(n_left: usize, n_right: usize) -> Self {
        Self {
            n_left,
            n_right,
            edges: Vec::new(),
            seen: HashSet::new(),
        }
    }

    fn push(&mut self, left: usize, right: usize, line: usize) -> Result<(), GraphError> {
        if left >= self.n_left || right >= self.n_right {
            return Err(GraphError::IndexOutOfRange {
                line,
                left,
                right,
                n_left: self.n_left,
                n_right: self.n_right,
            });
        }
        if !self.seen.insert((left, right)) {
            return Err(GraphError::DuplicateEdge { line, left, right });
        }
        self.edges.push((left, right));
        Ok(())
    }

    fn finish(self) -> BipartiteGraph {
        let mut left_adj = vec![Vec::new(); self.n_left];
        let mut right_adj = vec![Vec::new(); self.n_right];
        for &(u, v) in &self.edges {
            left_adj[u].push(v);
            right_adj[v].push(u);
        }
        left_adj.iter_mut().for_each(|l| l.sort_unstable());
        right_adj.iter_mut().for_each(|l| l.sort_unstable());
        BipartiteGraph {
            n_left: self.n_left,
            n_right: self.n_right,
            edges: self.edges,
            left_adj,
            right_adj,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star_l(k: usize) -> BipartiteGraph {
        BipartiteGraph::new(1, k, (0..k).map(|j| (0, j))).unwrap()
    }

    #[test]
    fn degree_profiles() {
        let k11 = BipartiteGraph::new(1, 1, [(0, 0)]).unwrap();
        let p = k11.degree_profile().unwrap();
        assert_eq!((p.delta_l_max, p.delta_r_min, p.delta_r_max), (1, 1, 1));

        let p = star_l(2).degree_profile().unwrap();
        assert_eq!((p.delta_l_max, p.delta_r_min, p.delta_r_max), (2, 1, 1));

        let k35 = GraphFamily::CompleteBipartite { a: 3, b: 5 }
            .generate()
            .unwrap();
        let p = k35.degree_profile().unwrap();
        assert_eq!((p.delta_l_max, p.delta_r_min, p.delta_r_max), (5, 3, 3));
    }

    #[test]
    fn empty_side_is_rejected() {
        let g = BipartiteGraph::new(0, 3, []).unwrap();
        assert!(matches!(
            g.degree_profile(),
            Err(GraphError::EmptySide { .. })
        ));
    }

    #[test]
    fn distances() {
        // u - x - v with u, v on the right.
        let path = star_l(2);
        let d = path
            .distance(&[Vertex::right(0)], &[Vertex::right(1)])
            .unwrap();
        assert_eq!(d, Some(2));
        let d = path
            .distance(&[Vertex::right(0), Vertex::left(0)], &[Vertex::left(0)])
            .unwrap();
        assert_eq!(d, Some(0));

        let two = BipartiteGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap();
        let d = two
            .distance(&[Vertex::left(0)], &[Vertex::right(1)])
            .unwrap();
        assert_eq!(d, None);
        assert_eq!(
            two.distance(&[], &[Vertex::left(0)]),
            Err(GraphError::EmptySet)
        );
    }

    #[test]
    fn steiner_sizes() {
        let star = star_l(3);
        assert_eq!(
            star.steiner_tree_size(&[Vertex::right(1)]).unwrap(),
            Some(0)
        );
        let leaves: Vec<_> = (0..3).map(Vertex::right).collect();
        assert_eq!(star.steiner_tree_size(&leaves).unwrap(), Some(3));
        assert_eq!(star.steiner_tree_size(&leaves[..2]).unwrap(), Some(2));

        let two = BipartiteGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap();
        assert_eq!(
            two.steiner_tree_size(&[Vertex::left(0), Vertex::left(1)])
                .unwrap(),
            None
        );
        let many: Vec<_> = (0..9).map(Vertex::right).collect();
        let big = star_l(9);
        assert_eq!(
            big.steiner_tree_size(&many),
            Err(GraphError::TooManyTerminals(9))
        );
    }

    #[test]
    fn two_linked_neighbors_share_a_left_vertex() {
        assert_eq!(star_l(2).two_linked_neighbors(0), vec![1]);
        let two = BipartiteGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap();
        assert!(two.two_linked_neighbors(0).is_empty());
    }
}
