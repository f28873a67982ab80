//! Ursell function `φ(H) = (1/|V(H)|!) Σ_{A ⊆ E(H) spanning, connected} (−1)^{|A|}`.
//!
//! Three independent routes to the signed connected-subgraph sum
//! `c(H) = Σ (−1)^{|A|}`:
//! - direct enumeration of edge subsets,
//! - deletion–contraction `c(H) = c(H − e) − c(H / e)` on simple graphs
//!   (a parallel class contributes `Σ_{j≥1} C(p,j)(−1)^j = −1`, the same as
//!   a single edge, so parallels are merged after contraction),
//! - a vertex-subset recurrence over the component of a fixed root, which
//!   also works on "blown-up" graphs where each class of identical vertices
//!   forms a clique. Cluster evaluation uses this last one.

use std::collections::HashMap;

use num_rational::Ratio;

use super::ClusterError;

/// Largest graph accepted by [`ursell`].
pub const MAX_URSELL_VERTICES: usize = 12;

/// A small simple graph stored as adjacency bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SmallGraph {
    rows: Vec<u32>,
}

impl SmallGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        assert!(n <= 32, "SmallGraph holds at most 32 vertices");
        let mut rows = vec![0u32; n];
        for &(a, b) in edges {
            assert!(a < n && b < n && a != b, "invalid edge ({a}, {b})");
            rows[a] |= 1 << b;
            rows[b] |= 1 << a;
        }
        Self { rows }
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        Self::new(n, &edges)
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|a| (a, (a + 1) % n)).collect();
        Self::new(n, &edges)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|a| (a - 1, a)).collect();
        Self::new(n, &edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.rows.len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.rows.len();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.rows[a] >> b & 1 == 1)
            .collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    pub fn is_connected(&self) -> bool {
        let n = self.rows.len();
        if n == 0 {
            return false;
        }
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        reach(&self.rows, 1) == full
    }
}

fn reach(rows: &[u32], start: u32) -> u32 {
    let mut seen = start;
    loop {
        let mut next = seen;
        let mut bits = seen;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            next |= rows[v];
        }
        if next == seen {
            return seen;
        }
        seen = next;
    }
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

fn check(h: &SmallGraph) -> Result<(), ClusterError> {
    if h.n_vertices() > MAX_URSELL_VERTICES {
        return Err(ClusterError::TooLarge(h.n_vertices()));
    }
    if !h.is_connected() {
        return Err(ClusterError::Disconnected);
    }
    Ok(())
}

/// Exact `φ(H)`. Edge-subset enumeration for up to six vertices,
/// deletion–contraction beyond.
pub fn ursell(h: &SmallGraph) -> Result<Ratio<i128>, ClusterError> {
    if h.n_vertices() <= 6 {
        ursell_edge_subsets(h)
    } else {
        ursell_deletion_contraction(h)
    }
}

pub fn ursell_edge_subsets(h: &SmallGraph) -> Result<Ratio<i128>, ClusterError> {
    check(h)?;
    let n = h.n_vertices();
    let edges = h.edges();
    if edges.len() > 30 {
        return Err(ClusterError::TooLarge(n));
    }
    let full = (1u32 << n) - 1;
    let mut total: i128 = 0;
    let mut rows = vec![0u32; n];
    for mask in 0u64..(1u64 << edges.len()) {
        rows.iter_mut().for_each(|r| *r = 0);
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rows[a] |= 1 << b;
                rows[b] |= 1 << a;
            }
        }
        if reach(&rows, 1) == full {
            total += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        }
    }
    Ok(Ratio::new(total, factorial(n)))
}

pub fn ursell_deletion_contraction(h: &SmallGraph) -> Result<Ratio<i128>, ClusterError> {
    check(h)?;
    let mut memo = HashMap::new();
    let c = deletion_contraction(h.rows.clone(), &mut memo);
    Ok(Ratio::new(c, factorial(h.n_vertices())))
}

fn deletion_contraction(rows: Vec<u32>, memo: &mut HashMap<Vec<u32>, i128>) -> i128 {
    let n = rows.len();
    if n == 1 {
        return 1;
    }
    let full = (1u32 << n) - 1;
    if reach(&rows, 1) != full {
        return 0;
    }
    if let Some(&c) = memo.get(&rows) {
        return c;
    }
    // pick an edge at vertex 0 (connected, n >= 2, so one exists)
    let b = rows[0].trailing_zeros() as usize;
    let mut deleted = rows.clone();
    deleted[0] &= !(1 << b);
    deleted[b] &= !1;
    let contracted = contract(&rows, 0, b);
    let c = deletion_contraction(deleted, memo) - deletion_contraction(contracted, memo);
    memo.insert(rows, c);
    c
}

/// Merges vertex `b` into `a` (with `a < b`), dropping the loop and merging
/// parallel edges; vertices above `b` shift down by one.
fn contract(rows: &[u32], a: usize, b: usize) -> Vec<u32> {
    let squeeze = |mask: u32| -> u32 {
        let low = mask & ((1 << b) - 1);
        let high = (mask >> (b + 1)) << b;
        low | high
    };
    let mut out = Vec::with_capacity(rows.len() - 1);
    for (v, &row) in rows.iter().enumerate() {
        if v == b {
            continue;
        }
        let mut r = row;
        if r >> b & 1 == 1 {
            r = (r & !(1 << b)) | (1 << a);
        }
        if v == a {
            r |= rows[b] & !(1 << a) & !(1 << b);
        }
        r &= !(1 << v);
        out.push(squeeze(r));
    }
    // fix the self-bit of a after squeeze (a < b, unaffected by shifting)
    out[a] &= !(1 << a);
    out
}

/// Signed connected-subgraph sum of the graph obtained by replacing class
/// `i` with a clique of `mult[i]` vertices and fully joining classes `i` and
/// `j` whenever `joined(i, j)`. `None` if the value overflows `i128`.
pub fn blown_up_connected_sum(joined: impl Fn(usize, usize) -> bool, mult: &[u32]) -> Option<i128> {
    SlotDp::new(mult.len(), joined).eval(mult).exact
}

/// Value of the blown-up recurrence at one count vector `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SlotValue {
    /// `c(n)`, when it fits in `i128`.
    pub exact: Option<i128>,
    /// `c(n) / ∏ n_i!`, accumulated in floating point.
    pub normalized: f64,
}

/// Memoized evaluation of `c` on blown-up graphs sharing one class pattern.
///
/// Uses `c(U) = g(U) − Σ_{root ∈ W ⊊ U} c(W) g(U∖W)`, where `g(U)` is 1 for
/// edgeless `U` and 0 otherwise. `c` only depends on the count vector of
/// `U`; `U∖W` must pick at most one copy from pairwise unjoined classes.
/// The normalized values obey the same recurrence with the combinatorial
/// factor divided through by `∏_{i∈d} n_i`.
#[derive(Debug, Clone)]
pub(crate) struct SlotDp {
    /// Nonempty pairwise-unjoined class subsets, as bitmasks.
    independent: Vec<u64>,
    memo: HashMap<Vec<u32>, SlotValue>,
}

impl SlotDp {
    pub fn new(classes: usize, joined: impl Fn(usize, usize) -> bool) -> Self {
        assert!(classes > 0 && classes <= 64, "class count out of range");
        let mut independent = Vec::new();
        let mut stack: Vec<(u64, usize)> = vec![(0, 0)];
        while let Some((mask, next)) = stack.pop() {
            if mask != 0 {
                independent.push(mask);
            }
            for i in next..classes {
                if !(0..i).any(|j| mask >> j & 1 == 1 && joined(i, j)) {
                    stack.push((mask | 1 << i, i + 1));
                }
            }
        }
        Self {
            independent,
            memo: HashMap::new(),
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn eval(&mut self, counts: &[u32]) -> SlotValue {
        if let Some(&v) = self.memo.get(counts) {
            return v;
        }
        let root = counts
            .iter()
            .position(|&c| c > 0)
            .expect("count vector must be nonzero");
        let support: u64 = counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .fold(0, |m, (i, _)| m | 1 << i);
        let edgeless = counts.iter().all(|&c| c <= 1) && self.independent.contains(&support);
        let base = i128::from(edgeless);
        let mut exact = Some(base);
        let mut normalized = base as f64;
        let mut rest = counts.to_vec();
        for k in 0..self.independent.len() {
            let d = self.independent[k];
            if d & !support != 0 || (d == support && edgeless) {
                continue;
            }
            let root_in_d = d >> root & 1 == 1;
            if root_in_d && counts[root] == 1 {
                continue;
            }
            let mut ways: Option<i128> = Some(1);
            let mut bits = d;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let choices = (counts[i] - u32::from(i == root)) as i128;
                ways = ways.and_then(|w| w.checked_mul(choices));
                rest[i] -= 1;
            }
            let ratio = if root_in_d {
                (counts[root] - 1) as f64 / counts[root] as f64
            } else {
                1.0
            };
            let sub = self.eval(&rest);
            normalized -= ratio * sub.normalized;
            exact = match (exact, ways, sub.exact) {
                (Some(e), Some(w), Some(c)) => w.checked_mul(c).and_then(|t| e.checked_sub(t)),
                _ => None,
            };
            rest.copy_from_slice(counts);
        }
        let value = SlotValue { exact, normalized };
        self.memo.insert(counts.to_vec(), value);
        value
    }
}
