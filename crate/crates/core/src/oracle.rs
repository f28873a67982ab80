//! Exact ground truth by enumeration, for small graphs.
//!
//! `Z` is computed by branching `Z(H) = Z(H − v) + λ_v Z(H − N[v])` on a
//! maximum-degree vertex, with connected components factored out first and
//! results memoized on vertex bitmasks. `Ξ` is computed independently from
//! the polymer side by branching on the least free right vertex:
//! `Ξ(F) = Ξ(F∖{v}) + Σ_{γ∋v, γ⊆F} w_γ Ξ(F∖N²[γ])`.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::connected::grow_connected;
use crate::cumulants::{cumulants_from_moments, CumulantError};
use crate::graph::{BipartiteGraph, GraphError, Side, Vertex};
use crate::polymer::{Fugacities, TwoLinkedAdjacency};
use crate::scalar::{log_add_exp, Scalar};

/// Largest graph for real-mode `Z` and marginals.
pub const MAX_EXACT_VERTICES: usize = 30;
/// Largest graph for complex-mode `Z`.
pub const MAX_COMPLEX_VERTICES: usize = 24;
/// Largest graph for full probability tables.
pub const MAX_TABLE_VERTICES: usize = 14;
/// Largest right side for `Ξ` and polymer-configuration tables.
pub const MAX_XI_RIGHT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{what} needs at most {cap} vertices, graph has {n}")]
    TooLarge {
        what: &'static str,
        n: usize,
        cap: usize,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cumulant(#[from] CumulantError),
}

fn ensure(what: &'static str, n: usize, cap: usize) -> Result<(), OracleError> {
    if n > cap {
        return Err(OracleError::TooLarge { what, n, cap });
    }
    Ok(())
}

/// A real number stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLog {
    /// -1, 0, or 1.
    pub sign: i8,
    /// `ln |x|`; negative infinity for zero.
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: Self = Self {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: Self = Self {
        sign: 1,
        ln_abs: 0.0,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    /// The plain value; may overflow to infinity.
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.ln_abs.exp()
    }

    /// `ln x` for positive values.
    pub fn ln(&self) -> Option<f64> {
        (self.sign > 0).then_some(self.ln_abs)
    }
}

impl Mul for SignedLog {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        Self {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }
}

impl Add for SignedLog {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        if self.sign == other.sign {
            return Self {
                sign: self.sign,
                ln_abs: log_add_exp(self.ln_abs, other.ln_abs),
            };
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let diff = small.ln_abs - big.ln_abs;
        if diff == 0.0 {
            return Self::ZERO;
        }
        Self {
            sign: big.sign,
            ln_abs: big.ln_abs + (-diff.exp()).ln_1p(),
        }
    }
}

/// Values the branching recursion can accumulate.
trait Weight: Copy {
    fn one() -> Self;
    fn plus(self, other: Self) -> Self;
    fn times(self, other: Self) -> Self;
}

impl Weight for SignedLog {
    fn one() -> Self {
        Self::ONE
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn times(self, other: Self) -> Self {
        self * other
    }
}

impl Weight for Complex64 {
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn times(self, other: Self) -> Self {
        self * other
    }
}

/// Memoized weighted independent-set sum over induced subgraphs, in the
/// flat numbering (left vertices first).
struct IndependentSetSum<W> {
    adj: Vec<u64>,
    weight: Vec<W>,
    memo: HashMap<u64, W>,
}

impl<W: Weight> IndependentSetSum<W> {
    fn new(graph: &BipartiteGraph, weight_of: impl Fn(Side) -> W) -> Self {
        let adj = graph
            .flat_adjacency()
            .iter()
            .map(|nbrs| nbrs.iter().fold(0u64, |m, &u| m | 1 << u))
            .collect();
        let weight = graph.vertices().map(|v| weight_of(v.side)).collect();
        Self {
            adj,
            weight,
            memo: HashMap::new(),
        }
    }

    fn full(&self) -> u64 {
        match self.adj.len() {
            64 => u64::MAX,
            n => (1u64 << n) - 1,
        }
    }

    fn component_of_lowest(&self, mask: u64) -> u64 {
        let mut comp = mask & mask.wrapping_neg();
        let mut frontier = comp;
        while frontier != 0 {
            let mut next = 0;
            let mut bits = frontier;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                next |= self.adj[v];
            }
            next &= mask & !comp;
            comp |= next;
            frontier = next;
        }
        comp
    }

    fn sum(&mut self, mask: u64) -> W {
        if mask == 0 {
            return W::one();
        }
        if let Some(&w) = self.memo.get(&mask) {
            return w;
        }
        let comp = self.component_of_lowest(mask);
        let value = if comp != mask {
            let a = self.sum(comp);
            let b = self.sum(mask & !comp);
            a.times(b)
        } else {
            let mut best = mask.trailing_zeros() as usize;
            let mut best_degree = 0;
            let mut bits = mask;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let d = (self.adj[v] & mask).count_ones();
                if d > best_degree {
                    best = v;
                    best_degree = d;
                }
            }
            let without = self.sum(mask & !(1 << best));
            let with = self.sum(mask & !(1 << best) & !self.adj[best]);
            without.plus(self.weight[best].times(with))
        };
        self.memo.insert(mask, value);
        value
    }
}

/// `Z(G) = Σ_{I independent} λ_L^{|I∩L|} λ_R^{|I∩R|}` in sign/log form.
pub fn exact_z(graph: &BipartiteGraph, lam: &Fugacities) -> Result<SignedLog, OracleError> {
    ensure("exact Z", graph.n_vertices(), MAX_EXACT_VERTICES)?;
    let mut engine = real_engine(graph, lam);
    let full = engine.full();
    Ok(engine.sum(full))
}

fn real_engine(graph: &BipartiteGraph, lam: &Fugacities) -> IndependentSetSum<SignedLog> {
    IndependentSetSum::new(graph, |side| match side {
        Side::Left => SignedLog::from_f64(lam.lambda_l),
        Side::Right => SignedLog::from_f64(lam.lambda_r),
    })
}

/// `ln Z(G)`; real fugacities are nonnegative, so `Z >= 1`.
pub fn exact_log_z(graph: &BipartiteGraph, lam: &Fugacities) -> Result<f64, OracleError> {
    Ok(exact_z(graph, lam)?
        .ln()
        .expect("Z >= 1 for nonnegative fugacities"))
}

/// `Z(G)` at complex fugacities.
pub fn exact_z_complex(
    graph: &BipartiteGraph,
    lam: &Fugacities<Complex64>,
) -> Result<Complex64, OracleError> {
    ensure("complex exact Z", graph.n_vertices(), MAX_COMPLEX_VERTICES)?;
    let mut engine = IndependentSetSum::new(graph, |side| match side {
        Side::Left => lam.lambda_l,
        Side::Right => lam.lambda_r,
    });
    let full = engine.full();
    Ok(engine.sum(full))
}

/// Bitmask of a vertex set in the flat numbering.
pub fn flat_mask(graph: &BipartiteGraph, set: &[Vertex]) -> u64 {
    set.iter().fold(0, |m, &v| m | 1 << graph.flat_index(v))
}

/// Vertex list of a flat bitmask, left vertices first.
pub fn mask_vertices(graph: &BipartiteGraph, mask: u64) -> Vec<Vertex> {
    (0..graph.n_vertices())
        .filter(|&i| mask >> i & 1 == 1)
        .map(|i| graph.vertex_at(i))
        .collect()
}

/// `μ_A = Pr[A ⊆ I]` for an arbitrary vertex set `A`.
pub fn exact_marginal(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    set: &[Vertex],
) -> Result<f64, OracleError> {
    ensure("exact marginal", graph.n_vertices(), MAX_EXACT_VERTICES)?;
    let mut engine = real_engine(graph, lam);
    marginal_with(&mut engine, graph, lam, set)
}

fn marginal_with(
    engine: &mut IndependentSetSum<SignedLog>,
    graph: &BipartiteGraph,
    lam: &Fugacities,
    set: &[Vertex],
) -> Result<f64, OracleError> {
    for &v in set {
        if !graph.contains(v) {
            return Err(GraphError::UnknownVertex(v).into());
        }
    }
    if !graph.is_independent(set) {
        return Ok(0.0);
    }
    let a = flat_mask(graph, set);
    let closed = set
        .iter()
        .fold(a, |m, &v| m | engine.adj[graph.flat_index(v)]);
    let full = engine.full();
    let z = engine.sum(full);
    let rest = engine.sum(full & !closed);
    let weight = set.iter().fold(SignedLog::ONE, |w, v| {
        w * SignedLog::from_f64(match v.side {
            Side::Left => lam.lambda_l,
            Side::Right => lam.lambda_r,
        })
    });
    let numer = weight * rest;
    if numer.sign == 0 {
        return Ok(0.0);
    }
    Ok((numer.ln_abs - z.ln_abs).exp())
}

/// Probability of every independent set, keyed by flat bitmask, in
/// increasing mask order.
pub fn exact_distribution(
    graph: &BipartiteGraph,
    lam: &Fugacities,
) -> Result<Vec<(u64, f64)>, OracleError> {
    ensure("exact distribution", graph.n_vertices(), MAX_TABLE_VERTICES)?;
    let adj: Vec<u64> = graph
        .flat_adjacency()
        .iter()
        .map(|nbrs| nbrs.iter().fold(0u64, |m, &u| m | 1 << u))
        .collect();
    let n = graph.n_vertices();
    let mut sets = Vec::new();
    // depth-first over vertices in order, keeping blocked vertices out
    let mut stack = vec![(0usize, 0u64, 0u64)];
    while let Some((i, chosen, blocked)) = stack.pop() {
        if i == n {
            sets.push(chosen);
            continue;
        }
        stack.push((i + 1, chosen, blocked));
        if blocked >> i & 1 == 0 {
            stack.push((i + 1, chosen | 1 << i, blocked | adj[i]));
        }
    }
    sets.sort_unstable();
    let ln_l = lam.lambda_l.ln();
    let ln_r = lam.lambda_r.ln();
    let n_left = graph.n_left();
    let left_mask = (1u64 << n_left) - 1;
    let log_weights: Vec<f64> = sets
        .iter()
        .map(|&s| {
            let l = (s & left_mask).count_ones();
            let r = (s >> n_left).count_ones();
            let part = |k: u32, ln: f64| if k == 0 { 0.0 } else { f64::from(k) * ln };
            part(l, ln_l) + part(r, ln_r)
        })
        .collect();
    let ln_z = crate::scalar::log_sum_exp(&log_weights);
    Ok(sets
        .into_iter()
        .zip(log_weights)
        .map(|(s, lw)| (s, (lw - ln_z).exp()))
        .collect())
}

/// Polymer-side enumeration state: 2-linked adjacency as right-vertex
/// bitmasks plus the left neighborhoods needed for weights.
pub(crate) struct PolymerSide<'g, T> {
    graph: &'g BipartiteGraph,
    lam: Fugacities<T>,
    adj: TwoLinkedAdjacency,
    /// Closed 2-neighborhood of each right vertex.
    closed: Vec<u64>,
    memo: HashMap<u64, T>,
}

impl<'g, T: Scalar> PolymerSide<'g, T> {
    pub fn new(graph: &'g BipartiteGraph, lam: &Fugacities<T>) -> Result<Self, OracleError> {
        ensure("polymer enumeration", graph.n_right(), MAX_XI_RIGHT)?;
        let adj = TwoLinkedAdjacency::new(graph);
        let closed = (0..graph.n_right())
            .map(|v| adj.neighbors(v).iter().fold(1u64 << v, |m, &u| m | 1 << u))
            .collect();
        Ok(Self {
            graph,
            lam: *lam,
            adj,
            closed,
            memo: HashMap::new(),
        })
    }

    pub fn full(&self) -> u64 {
        (1u64 << self.graph.n_right()) - 1
    }

    fn weight(&self, gamma: u64) -> T {
        let mut left = vec![false; self.graph.n_left()];
        let mut nbhd = 0;
        let mut bits = gamma;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for &u in self.graph.right_neighbors(v) {
                if !left[u] {
                    left[u] = true;
                    nbhd += 1;
                }
            }
        }
        self.lam.polymer_weight(gamma.count_ones() as usize, nbhd)
    }

    /// Polymers `γ ∋ v` with `γ ⊆ free`, as `(mask, weight)`.
    pub fn polymers_at(&self, v: usize, free: u64) -> Vec<(u64, T)> {
        let mut out = Vec::new();
        grow_connected(
            self.adj.lists(),
            v,
            |u| free >> u & 1 == 1,
            |_| 1,
            usize::MAX,
            |s| {
                out.push(s.iter().fold(0u64, |m, &u| m | 1 << u));
                true
            },
        );
        out.sort_unstable();
        out.into_iter().map(|g| (g, self.weight(g))).collect()
    }

    /// Right vertices equal or 2-linked to some vertex of `gamma`.
    pub fn closed_neighborhood(&self, gamma: u64) -> u64 {
        let mut out = 0;
        let mut bits = gamma;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out |= self.closed[v];
        }
        out
    }

    /// `Ξ` of the polymers contained in `free`.
    pub fn xi(&mut self, free: u64) -> T {
        if free == 0 {
            return T::one();
        }
        if let Some(&x) = self.memo.get(&free) {
            return x;
        }
        let v = free.trailing_zeros() as usize;
        let mut total = self.xi(free & !(1 << v));
        for (gamma, w) in self.polymers_at(v, free) {
            let rest = free & !self.closed_neighborhood(gamma);
            total += w * self.xi(rest);
        }
        self.memo.insert(free, total);
        total
    }
}

/// `Ξ(P) = Σ_{Γ compatible} ∏_{γ∈Γ} w_γ`, the empty collection counting 1.
pub fn exact_xi<T: Scalar>(graph: &BipartiteGraph, lam: &Fugacities<T>) -> Result<T, OracleError> {
    let mut side = PolymerSide::new(graph, lam)?;
    let full = side.full();
    Ok(side.xi(full))
}

/// `ν` over compatible polymer collections. A collection is identified by
/// the union of its polymers (its 2-linked components are the polymers),
/// given as a right-vertex bitmask; entries are in increasing mask order.
pub fn exact_nu(graph: &BipartiteGraph, lam: &Fugacities) -> Result<Vec<(u64, f64)>, OracleError> {
    ensure("polymer configuration table", graph.n_right(), 20)?;
    let side = PolymerSide::new(graph, lam)?;
    let n_right = graph.n_right();
    let mut table = Vec::new();
    let mut total = 0.0;
    for union in 0u64..(1u64 << n_right) {
        // product of component weights
        let mut rest = union;
        let mut weight = 1.0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            let mut comp = 1u64 << v;
            loop {
                let grown = side.closed_neighborhood(comp) & union;
                if grown == comp {
                    break;
                }
                comp = grown;
            }
            weight *= side.weight(comp);
            rest &= !comp;
        }
        total += weight;
        table.push((union, weight));
    }
    Ok(table.into_iter().map(|(u, w)| (u, w / total)).collect())
}

/// Joint cumulant `κ(A)` of the occupation indicators of `A`, from exact
/// moments by partition-lattice inversion.
pub fn exact_cumulant(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    set: &[Vertex],
) -> Result<f64, OracleError> {
    ensure("exact cumulant", graph.n_vertices(), MAX_EXACT_VERTICES)?;
    let mut members = set.to_vec();
    members.sort_unstable();
    members.dedup();
    let moments = exact_moments(graph, lam, &members)?;
    Ok(cumulants_from_moments(&moments, &members)?)
}

/// `μ_S` for every nonempty `S ⊆ set`, keyed by sorted subset.
pub fn exact_moments(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    set: &[Vertex],
) -> Result<BTreeMap<Vec<Vertex>, f64>, OracleError> {
    ensure("exact moments", graph.n_vertices(), MAX_EXACT_VERTICES)?;
    if set.len() > crate::cumulants::MAX_CUMULANT_ORDER {
        return Err(CumulantError::TooLarge(set.len()).into());
    }
    let mut engine = real_engine(graph, lam);
    let mut out = BTreeMap::new();
    for mask in 1u32..(1 << set.len()) {
        let mut subset: Vec<Vertex> = (0..set.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| set[i])
            .collect();
        subset.sort_unstable();
        let mu = marginal_with(&mut engine, graph, lam, &subset)?;
        out.insert(subset, mu);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;

    fn lam(l: f64, r: f64) -> Fugacities {
        Fugacities::new(l, r).unwrap()
    }

    fn k11() -> BipartiteGraph {
        BipartiteGraph::new(1, 1, [(0, 0)]).unwrap()
    }

    #[test]
    fn small_partition_functions() {
        assert!((exact_z(&k11(), &lam(2.0, 3.0)).unwrap().value() - 6.0).abs() < 1e-12);
        let star = GraphFamily::StarCenterLeft { k: 2 }.generate().unwrap();
        assert!((exact_z(&star, &lam(1.0, 1.0)).unwrap().value() - 5.0).abs() < 1e-12);
        assert!((exact_xi(&star, &lam(1.0, 1.0)).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(exact_xi(&star, &lam(4.0, 0.0)).unwrap(), 1.0);
        assert!((exact_xi(&k11(), &lam(10.0, 0.1)).unwrap() - (1.0 + 0.1 / 11.0)).abs() < 1e-15);
    }

    #[test]
    fn components_factor() {
        let a = GraphFamily::EvenCycle { n: 6 }.generate().unwrap();
        let b = GraphFamily::StarCenterRight { k: 3 }.generate().unwrap();
        let l = lam(0.7, 1.3);
        let joint = exact_z(&a.disjoint_union(&b), &l).unwrap().ln_abs;
        let parts = exact_z(&a, &l).unwrap().ln_abs + exact_z(&b, &l).unwrap().ln_abs;
        assert!((joint - parts).abs() < 1e-12);
    }

    #[test]
    fn complex_matches_real() {
        let g = GraphFamily::EvenCycle { n: 8 }.generate().unwrap();
        let l = lam(1.7, 0.4);
        let real = exact_z(&g, &l).unwrap().value();
        let complex = exact_z_complex(&g, &l.to_complex()).unwrap();
        assert!((complex.re - real).abs() < 1e-12 * real && complex.im.abs() < 1e-12);
    }

    #[test]
    fn marginals_and_tables() {
        let g = k11();
        let l = lam(1.0, 1.0);
        assert!((exact_marginal(&g, &l, &[Vertex::right(0)]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            exact_marginal(&g, &l, &[Vertex::right(0), Vertex::left(0)]).unwrap(),
            0.0
        );
        assert!((exact_marginal(&g, &l, &[]).unwrap() - 1.0).abs() < 1e-15);
        let dist = exact_distribution(&g, &l).unwrap();
        assert_eq!(dist.len(), 3);
        for (_, p) in dist {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn signed_log_arithmetic() {
        let a = SignedLog::from_f64(3.0);
        let b = SignedLog::from_f64(-5.0);
        assert!(((a + b).value() + 2.0).abs() < 1e-12);
        assert!(((a * b).value() + 15.0).abs() < 1e-12);
        assert_eq!(a + SignedLog::from_f64(-3.0), SignedLog::ZERO);
        assert_eq!(b.ln(), None);
    }
}
