//! The polymer representation of the bipartite hard-core model.
//!
//! A polymer is a nonempty subset of `R` that is connected in `G²` (every
//! pair of right vertices sharing a left neighbor is joined). Its weight is
//! `λ_R^{|γ|} / (1 + λ_L)^{|N(γ)|}`, and two polymers are incompatible when
//! their union is still 2-linked.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::connected::grow_connected;
use crate::graph::{BipartiteGraph, GraphError};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolymerError {
    #[error("polymer must be nonempty")]
    Empty,
    #[error("right vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("vertex set {0:?} is not 2-linked")]
    NotTwoLinked(Vec<usize>),
    #[error("invalid fugacities: {0}")]
    InvalidFugacities(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The fugacity pair `(λ_L, λ_R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fugacities<T = f64> {
    pub lambda_l: T,
    pub lambda_r: T,
}

impl Fugacities<f64> {
    /// Real fugacities. Both must be finite and nonnegative; zero is allowed
    /// as the degenerate limit.
    pub fn new(lambda_l: f64, lambda_r: f64) -> Result<Self, PolymerError> {
        if !(lambda_l.is_finite() && lambda_r.is_finite() && lambda_l >= 0.0 && lambda_r >= 0.0) {
            return Err(PolymerError::InvalidFugacities(format!(
                "real fugacities must be finite and nonnegative, got ({lambda_l}, {lambda_r})"
            )));
        }
        Ok(Self { lambda_l, lambda_r })
    }

    pub fn to_complex(self) -> Fugacities<Complex64> {
        Fugacities {
            lambda_l: Complex64::new(self.lambda_l, 0.0),
            lambda_r: Complex64::new(self.lambda_r, 0.0),
        }
    }
}

impl Fugacities<Complex64> {
    /// Complex fugacities; requires `1 + λ_L != 0`.
    pub fn complex(lambda_l: Complex64, lambda_r: Complex64) -> Result<Self, PolymerError> {
        if (Complex64::new(1.0, 0.0) + lambda_l).norm() == 0.0
            || !(lambda_l.is_finite() && lambda_r.is_finite())
        {
            return Err(PolymerError::InvalidFugacities(format!(
                "need finite values with 1 + λ_L != 0, got ({lambda_l}, {lambda_r})"
            )));
        }
        Ok(Self { lambda_l, lambda_r })
    }
}

impl<T: Scalar> Fugacities<T> {
    /// `λ_R^size / (1 + λ_L)^neighborhood`.
    pub fn polymer_weight(&self, size: usize, neighborhood: usize) -> T {
        self.lambda_r.powi(size as i32) / (T::one() + self.lambda_l).powi(neighborhood as i32)
    }

    /// `|λ_R| / |1 + λ_L|^{δ_R/Δ_L}`: the per-vertex weight envelope valid for
    /// every polymer of a graph with the given degree extremes.
    pub fn weight_envelope(&self, delta_l_max: usize, delta_r_min: usize) -> f64 {
        let exponent = if delta_l_max == 0 {
            0.0
        } else {
            delta_r_min as f64 / delta_l_max as f64
        };
        let denom = (T::one() + self.lambda_l).modulus();
        self.lambda_r.modulus() / (exponent * denom.ln()).exp()
    }
}

/// `Λ_L, Λ_R > 0` describing the complex set `|λ_R| <= Λ_R`,
/// `|1 + λ_L| >= 1 + Λ_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexRegion {
    pub big_lambda_l: f64,
    pub big_lambda_r: f64,
}

impl ComplexRegion {
    pub fn new(big_lambda_l: f64, big_lambda_r: f64) -> Result<Self, PolymerError> {
        if !(big_lambda_l > 0.0
            && big_lambda_r > 0.0
            && big_lambda_l.is_finite()
            && big_lambda_r.is_finite())
        {
            return Err(PolymerError::InvalidFugacities(format!(
                "region parameters must be positive, got ({big_lambda_l}, {big_lambda_r})"
            )));
        }
        Ok(Self {
            big_lambda_l,
            big_lambda_r,
        })
    }

    pub fn contains(&self, lam: &Fugacities<Complex64>) -> bool {
        lam.lambda_r.norm() <= self.big_lambda_r
            && (Complex64::new(1.0, 0.0) + lam.lambda_l).norm() >= 1.0 + self.big_lambda_l
    }
}

/// Adjacency of `G²` restricted to `R`: right vertices sharing a left
/// neighbor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoLinkedAdjacency {
    adj: Vec<Vec<usize>>,
}

impl TwoLinkedAdjacency {
    pub fn new(graph: &BipartiteGraph) -> Self {
        Self {
            adj: (0..graph.n_right())
                .map(|j| graph.two_linked_neighbors(j))
                .collect(),
        }
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn are_adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub(crate) fn lists(&self) -> &[Vec<usize>] {
        &self.adj
    }

    /// Whether `set` is connected in this adjacency.
    pub fn is_connected(&self, set: &[usize]) -> bool {
        let Some(&first) = set.first() else {
            return false;
        };
        let mut seen = vec![first];
        let mut stack = vec![first];
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if set.contains(&w) && !seen.contains(&w) {
                    seen.push(w);
                    stack.push(w);
                }
            }
        }
        seen.len() == set.len()
    }
}

pub fn two_linked_adjacency(graph: &BipartiteGraph) -> TwoLinkedAdjacency {
    TwoLinkedAdjacency::new(graph)
}

/// A polymer with its cached neighborhood size and weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polymer<T = f64> {
    /// Sorted right-vertex indices.
    pub vertices: Vec<usize>,
    /// `|N(γ)|`, the number of left vertices adjacent to the polymer.
    pub neighborhood_size: usize,
    pub weight: T,
}

impl<T: Scalar> Polymer<T> {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Builds a polymer without checking 2-linkedness. `vertices` must be
    /// sorted and deduplicated.
    pub(crate) fn from_sorted(
        graph: &BipartiteGraph,
        vertices: Vec<usize>,
        lam: &Fugacities<T>,
    ) -> Self {
        let neighborhood_size = neighborhood_size(graph, &vertices);
        let weight = lam.polymer_weight(vertices.len(), neighborhood_size);
        Self {
            vertices,
            neighborhood_size,
            weight,
        }
    }

    /// Canonical order: by size, then lexicographically.
    pub fn canonical_key(&self) -> (usize, &[usize]) {
        (self.vertices.len(), &self.vertices)
    }
}

fn neighborhood_size(graph: &BipartiteGraph, vertices: &[usize]) -> usize {
    let mut seen = vec![false; graph.n_left()];
    let mut count = 0;
    for &v in vertices {
        for &u in graph.right_neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                count += 1;
            }
        }
    }
    count
}

fn checked_vertices(graph: &BipartiteGraph, gamma: &[usize]) -> Result<Vec<usize>, PolymerError> {
    if gamma.is_empty() {
        return Err(PolymerError::Empty);
    }
    if let Some(&v) = gamma.iter().find(|&&v| v >= graph.n_right()) {
        return Err(PolymerError::UnknownVertex(v));
    }
    let mut vertices = gamma.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    Ok(vertices)
}

/// Validates `gamma` as a polymer of `graph` and computes its weight.
pub fn make_polymer<T: Scalar>(
    graph: &BipartiteGraph,
    gamma: &[usize],
    lam: &Fugacities<T>,
) -> Result<Polymer<T>, PolymerError> {
    let vertices = checked_vertices(graph, gamma)?;
    if !TwoLinkedAdjacency::new(graph).is_connected(&vertices) {
        return Err(PolymerError::NotTwoLinked(vertices));
    }
    Ok(Polymer::from_sorted(graph, vertices, lam))
}

pub fn polymer_weight<T: Scalar>(
    graph: &BipartiteGraph,
    gamma: &[usize],
    lam: &Fugacities<T>,
) -> Result<T, PolymerError> {
    make_polymer(graph, gamma, lam).map(|p| p.weight)
}

/// Every polymer containing `root` with at most `k_max` vertices, each once,
/// in canonical order.
pub fn enumerate_polymers<T: Scalar>(
    graph: &BipartiteGraph,
    root: usize,
    k_max: usize,
    lam: &Fugacities<T>,
) -> Result<Vec<Polymer<T>>, PolymerError> {
    if root >= graph.n_right() {
        return Err(PolymerError::UnknownVertex(root));
    }
    let adj = TwoLinkedAdjacency::new(graph);
    let mut out = Vec::new();
    grow_connected(
        adj.lists(),
        root,
        |_| true,
        |_| 1,
        k_max,
        |s| {
            let mut vertices = s.to_vec();
            vertices.sort_unstable();
            out.push(Polymer::from_sorted(graph, vertices, lam));
            true
        },
    );
    out.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));
    Ok(out)
}

/// Whether `γ1 ∪ γ2` is 2-linked. Always true for `γ1 = γ2`.
pub fn incompatible<T: Scalar>(g1: &Polymer<T>, g2: &Polymer<T>, adj: &TwoLinkedAdjacency) -> bool {
    g1.vertices
        .iter()
        .any(|&u| g2.contains(u) || adj.neighbors(u).iter().any(|&w| g2.contains(w)))
}

/// The finite polymer family `{γ : |γ| <= max_size, γ ⊆ allowed}` with its
/// incompatibility graph.
#[derive(Debug, Clone)]
pub struct PolymerSet<T = f64> {
    polymers: Vec<Polymer<T>>,
    /// Sorted ids of incompatible polymers, excluding the polymer itself.
    incompatible: Vec<Vec<usize>>,
    /// Polymer ids containing each right vertex.
    by_vertex: Vec<Vec<usize>>,
    max_size: usize,
}

impl<T: Scalar> PolymerSet<T> {
    pub fn new(graph: &BipartiteGraph, lam: &Fugacities<T>, max_size: usize) -> Self {
        Self::restricted(graph, lam, max_size, None)
    }

    /// Polymers contained in the right-vertex set flagged by `allowed`
    /// (indexed by right vertex); all of `R` when `None`.
    pub fn restricted(
        graph: &BipartiteGraph,
        lam: &Fugacities<T>,
        max_size: usize,
        allowed: Option<&[bool]>,
    ) -> Self {
        let adj = TwoLinkedAdjacency::new(graph);
        let ok = |v: usize| allowed.is_none_or(|a| a[v]);
        let mut polymers = Vec::new();
        for root in (0..graph.n_right()).filter(|&v| ok(v)) {
            grow_connected(
                adj.lists(),
                root,
                |u| u > root && ok(u),
                |_| 1,
                max_size,
                |s| {
                    let mut vertices = s.to_vec();
                    vertices.sort_unstable();
                    polymers.push(Polymer::from_sorted(graph, vertices, lam));
                    true
                },
            );
        }
        polymers.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));

        let n_right = graph.n_right();
        let mut by_vertex = vec![Vec::new(); n_right];
        for (id, p) in polymers.iter().enumerate() {
            for &v in &p.vertices {
                by_vertex[v].push(id);
            }
        }
        let mut mark = vec![usize::MAX; polymers.len()];
        let mut zone = vec![usize::MAX; n_right];
        let incompatible = polymers
            .iter()
            .enumerate()
            .map(|(id, p)| {
                // closed 2-neighborhood of p
                let mut near = Vec::new();
                for &v in &p.vertices {
                    for &u in std::iter::once(&v).chain(adj.neighbors(v)) {
                        if zone[u] != id {
                            zone[u] = id;
                            near.push(u);
                        }
                    }
                }
                let mut list = Vec::new();
                for u in near {
                    for &other in &by_vertex[u] {
                        if other != id && mark[other] != id {
                            mark[other] = id;
                            list.push(other);
                        }
                    }
                }
                list.sort_unstable();
                list
            })
            .collect();
        Self {
            polymers,
            incompatible,
            by_vertex,
            max_size,
        }
    }

    pub fn polymers(&self) -> &[Polymer<T>] {
        &self.polymers
    }

    pub fn len(&self) -> usize {
        self.polymers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polymers.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Ids of polymers incompatible with `id` (excluding `id`).
    pub fn incompatible_with(&self, id: usize) -> &[usize] {
        &self.incompatible[id]
    }

    pub fn are_incompatible(&self, a: usize, b: usize) -> bool {
        a == b || self.incompatible[a].binary_search(&b).is_ok()
    }

    pub fn containing(&self, v: usize) -> &[usize] {
        &self.by_vertex[v]
    }

    pub(crate) fn incompatibility_lists(&self) -> &[Vec<usize>] {
        &self.incompatible
    }
}

/// Outcome of a per-vertex Kotecký–Preiss sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KpVerdict {
    /// partial + tail fits under the bound
    Satisfied,
    /// the partial sum alone exceeds the bound
    Violated,
    /// the tail cannot be bounded, or partial + tail exceeds the bound
    Inconclusive,
}

/// `Σ_{γ∋v} |w_γ| e^{(1/2+η)|γ|}` split into an enumerated head and an
/// analytic tail, against the bound `1 / (2(Δ_R(Δ_L−1)+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpVertexSum {
    pub vertex: usize,
    pub partial: f64,
    /// `None` when the geometric envelope diverges.
    pub tail: Option<f64>,
    pub bound: f64,
    pub verdict: KpVerdict,
}

impl KpVertexSum {
    /// `(partial + tail) / bound`, or infinity when the tail is unbounded.
    pub fn margin(&self) -> f64 {
        match self.tail {
            Some(t) => (self.partial + t) / self.bound,
            None => f64::INFINITY,
        }
    }
}

/// `1 / (2(Δ_R(Δ_L−1)+1))`.
pub fn kp_bound(delta_l_max: usize, delta_r_max: usize) -> f64 {
    1.0 / (2.0 * (delta_r_max * delta_l_max.saturating_sub(1) + 1) as f64)
}

/// Upper bound on the number of 2-linked subsets of size `k` containing a
/// fixed vertex: `(eΔ_R(Δ_L−1))^{k−1} / k^{3/2}`.
pub fn two_linked_count_bound(k: usize, delta_l_max: usize, delta_r_max: usize) -> f64 {
    let base = std::f64::consts::E * (delta_r_max * delta_l_max.saturating_sub(1)) as f64;
    base.powi(k as i32 - 1) / (k as f64).powf(1.5)
}

/// Tail `Σ_{k>k_max} count(k) · envelope^k · e^{(1/2+η)k}`; `None` when the
/// geometric ratio is at least one.
pub(crate) fn kp_tail(
    envelope: f64,
    eta: f64,
    k_max: usize,
    delta_l_max: usize,
    delta_r_max: usize,
) -> Option<f64> {
    let branching = std::f64::consts::E * (delta_r_max * delta_l_max.saturating_sub(1)) as f64;
    let q = envelope * (0.5 + eta).exp();
    if q == 0.0 || branching == 0.0 {
        // only singletons exist (or all weights vanish) and k_max >= 1
        return Some(0.0);
    }
    let ratio = branching * q;
    if ratio >= 1.0 {
        return None;
    }
    let k = k_max as i32;
    Some(q * ratio.powi(k) / ((k_max + 1) as f64).powf(1.5) / (1.0 - ratio))
}

pub fn kp_vertex_sum<T: Scalar>(
    graph: &BipartiteGraph,
    v: usize,
    lam: &Fugacities<T>,
    eta: f64,
    k_max: usize,
) -> Result<KpVertexSum, PolymerError> {
    if eta.is_nan() || eta <= 0.0 || k_max == 0 {
        return Err(PolymerError::InvalidFugacities(format!(
            "need eta > 0 and k_max >= 1, got eta = {eta}, k_max = {k_max}"
        )));
    }
    let profile = graph.degree_profile()?;
    let polymers = enumerate_polymers(graph, v, k_max, lam)?;
    let partial: f64 = polymers
        .iter()
        .map(|p| p.weight.modulus() * ((0.5 + eta) * p.size() as f64).exp())
        .sum();
    let envelope = lam.weight_envelope(profile.delta_l_max, profile.delta_r_min);
    let tail = kp_tail(
        envelope,
        eta,
        k_max,
        profile.delta_l_max,
        profile.delta_r_max,
    );
    let bound = kp_bound(profile.delta_l_max, profile.delta_r_max);
    let verdict = if partial > bound {
        KpVerdict::Violated
    } else {
        match tail {
            Some(t) if partial + t <= bound => KpVerdict::Satisfied,
            _ => KpVerdict::Inconclusive,
        }
    };
    Ok(KpVertexSum {
        vertex: v,
        partial,
        tail,
        bound,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;
    use proptest::prelude::*;

    fn star_l(k: usize) -> BipartiteGraph {
        GraphFamily::StarCenterLeft { k }.generate().unwrap()
    }

    fn k11() -> BipartiteGraph {
        BipartiteGraph::new(1, 1, [(0, 0)]).unwrap()
    }

    fn lam(l: f64, r: f64) -> Fugacities {
        Fugacities::new(l, r).unwrap()
    }

    #[test]
    fn two_linked_examples() {
        let adj = two_linked_adjacency(&star_l(2));
        assert!(adj.are_adjacent(0, 1));
        let two = BipartiteGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap();
        let adj = two_linked_adjacency(&two);
        assert!(adj.neighbors(0).is_empty() && adj.neighbors(1).is_empty());
        let c6 = GraphFamily::EvenCycle { n: 6 }.generate().unwrap();
        let adj = two_linked_adjacency(&c6);
        for v in 0..3 {
            let others: Vec<usize> = (0..3).filter(|&u| u != v).collect();
            assert_eq!(adj.neighbors(v), others.as_slice());
        }
    }

    #[test]
    fn weights() {
        let w = polymer_weight(&k11(), &[0], &lam(10.0, 0.1)).unwrap();
        assert!((w - 0.1 / 11.0).abs() < 1e-15);
        let w = polymer_weight(&star_l(2), &[0, 1], &lam(1.0, 1.0)).unwrap();
        assert_eq!(w, 0.5);
        let w = polymer_weight(&star_l(2), &[0, 1], &lam(3.0, 0.0)).unwrap();
        assert_eq!(w, 0.0);

        let two = BipartiteGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap();
        assert_eq!(
            polymer_weight(&two, &[0, 1], &lam(1.0, 1.0)),
            Err(PolymerError::NotTwoLinked(vec![0, 1]))
        );
        assert_eq!(
            polymer_weight(&two, &[], &lam(1.0, 1.0)),
            Err(PolymerError::Empty)
        );
        assert_eq!(
            polymer_weight(&two, &[5], &lam(1.0, 1.0)),
            Err(PolymerError::UnknownVertex(5))
        );
    }

    #[test]
    fn invalid_fugacities() {
        assert!(Fugacities::new(-1.0, 1.0).is_err());
        assert!(Fugacities::new(1.0, f64::NAN).is_err());
        assert!(Fugacities::complex(Complex64::new(-1.0, 0.0), Complex64::new(0.1, 0.0)).is_err());
        assert!(ComplexRegion::new(0.0, 1.0).is_err());
    }

    fn vertex_lists(ps: &[Polymer]) -> Vec<Vec<usize>> {
        ps.iter().map(|p| p.vertices.clone()).collect()
    }

    #[test]
    fn enumeration_examples() {
        let l = lam(1.0, 1.0);
        assert_eq!(
            vertex_lists(&enumerate_polymers(&k11(), 0, 3, &l).unwrap()),
            vec![vec![0]]
        );
        assert_eq!(
            vertex_lists(&enumerate_polymers(&star_l(2), 0, 2, &l).unwrap()),
            vec![vec![0], vec![0, 1]]
        );
        let c6 = GraphFamily::EvenCycle { n: 6 }.generate().unwrap();
        assert_eq!(
            vertex_lists(&enumerate_polymers(&c6, 0, 2, &l).unwrap()),
            vec![vec![0], vec![0, 1], vec![0, 2]]
        );
    }

    #[test]
    fn incompatibility_examples() {
        let l = lam(1.0, 1.0);
        let g = star_l(2);
        let adj = two_linked_adjacency(&g);
        let r1 = make_polymer(&g, &[0], &l).unwrap();
        let r2 = make_polymer(&g, &[1], &l).unwrap();
        assert!(incompatible(&r1, &r1, &adj));
        assert!(incompatible(&r1, &r2, &adj));

        let two = BipartiteGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap();
        let adj = two_linked_adjacency(&two);
        let a = make_polymer(&two, &[0], &l).unwrap();
        let b = make_polymer(&two, &[1], &l).unwrap();
        assert!(!incompatible(&a, &b, &adj));
    }

    #[test]
    fn kp_sum_examples() {
        let s = kp_vertex_sum(&k11(), 0, &lam(10.0, 0.1), 0.1, 1).unwrap();
        assert!((s.partial - 0.1 / 11.0 * 0.6_f64.exp()).abs() < 1e-15);
        assert!((s.partial - 0.016566).abs() < 5e-6);
        assert_eq!(s.bound, 0.5);
        assert_eq!(s.tail, Some(0.0));
        assert_eq!(s.verdict, KpVerdict::Satisfied);

        let s = kp_vertex_sum(&star_l(2), 0, &lam(4.0, 0.0), 0.1, 3).unwrap();
        assert_eq!(s.partial, 0.0);
        assert_eq!(s.verdict, KpVerdict::Satisfied);

        let s = kp_vertex_sum(&star_l(2), 0, &lam(1.0, 1.0), 0.1, 2).unwrap();
        let expected = 0.5 * 0.6_f64.exp() + 0.5 * 1.2_f64.exp();
        assert!((s.partial - expected).abs() < 1e-12);
        assert!((s.partial - 2.571).abs() < 1e-3);
        // Δ_L = 2, Δ_R = 1
        assert_eq!(s.bound, 0.25);
        assert_eq!(s.verdict, KpVerdict::Violated);
    }

    #[test]
    fn polymer_set_matches_pairwise_relation() {
        let g = GraphFamily::RandomBiregular {
            d_left: 2,
            d_right: 3,
            n_left: 6,
            seed: 3,
        }
        .generate()
        .unwrap();
        let set = PolymerSet::new(&g, &lam(1.0, 1.0), 3);
        let adj = two_linked_adjacency(&g);
        for a in 0..set.len() {
            for b in 0..set.len() {
                let direct = incompatible(&set.polymers()[a], &set.polymers()[b], &adj);
                assert_eq!(set.are_incompatible(a, b), direct);
            }
        }
    }

    fn random_graph(n_left: usize, n_right: usize, bits: &[bool]) -> BipartiteGraph {
        let edges = (0..n_left)
            .flat_map(|u| (0..n_right).map(move |v| (u, v)))
            .filter(|&(u, v)| bits[u * 7 + v]);
        BipartiteGraph::new(n_left, n_right, edges).unwrap()
    }

    proptest! {
        #[test]
        fn enumeration_counts_and_weight_envelope(
            n_left in 1usize..6,
            n_right in 1usize..7,
            bits in proptest::collection::vec(any::<bool>(), 49),
            lambda_l in 0.1f64..20.0,
            lambda_r in 0.01f64..3.0,
        ) {
            let g = random_graph(n_left, n_right, &bits);
            let p = g.degree_profile().unwrap();
            let l = lam(lambda_l, lambda_r);
            let envelope = l.weight_envelope(p.delta_l_max, p.delta_r_min);
            let adj = two_linked_adjacency(&g);
            for v in 0..n_right {
                let ps = enumerate_polymers(&g, v, n_right, &l).unwrap();
                let unique: std::collections::BTreeSet<_> = ps.iter().map(|p| p.vertices.clone()).collect();
                prop_assert_eq!(unique.len(), ps.len());
                for k in 1..=n_right {
                    let count = ps.iter().filter(|p| p.size() == k).count() as f64;
                    let bound = two_linked_count_bound(k, p.delta_l_max, p.delta_r_max).ceil();
                    prop_assert!(count <= bound, "k={} count={} bound={}", k, count, bound);
                }
                for poly in &ps {
                    prop_assert!(poly.contains(v));
                    prop_assert!(adj.is_connected(&poly.vertices));
                    prop_assert!(
                        poly.neighborhood_size as f64 * p.delta_l_max as f64
                            >= (p.delta_r_min * poly.size()) as f64
                    );
                    prop_assert!(poly.weight <= envelope.powi(poly.size() as i32) * (1.0 + 1e-12));
                }
            }
        }

        #[test]
        fn incompatibility_is_symmetric_and_reflexive(
            n_left in 1usize..5,
            n_right in 1usize..6,
            bits in proptest::collection::vec(any::<bool>(), 49),
        ) {
            let g = random_graph(n_left, n_right, &bits);
            let set = PolymerSet::new(&g, &lam(1.0, 1.0), n_right);
            let adj = two_linked_adjacency(&g);
            let ps = set.polymers();
            for a in ps {
                prop_assert!(incompatible(a, a, &adj));
                for b in ps {
                    prop_assert_eq!(incompatible(a, b, &adj), incompatible(b, a, &adj));
                }
            }
        }
    }
}
