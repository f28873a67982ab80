//! Enumeration of connected vertex subsets by exclusive-neighborhood growth
//! (the ESU scheme). Every connected set reachable from the root through
//! admissible vertices is visited exactly once, without a dedup table.

/// Visits every connected subset `S` of the graph `adj` with `root ∈ S`,
/// `S \ {root}` drawn from vertices satisfying `admissible`, and
/// `Σ_{u∈S} cost(u) <= budget`. Returning `false` from `visit` aborts the
/// walk; the function then returns `false` as well.
pub(crate) fn grow_connected<A, C, V>(
    adj: &[Vec<usize>],
    root: usize,
    admissible: A,
    cost: C,
    budget: usize,
    mut visit: V,
) -> bool
where
    A: Fn(usize) -> bool,
    C: Fn(usize) -> usize,
    V: FnMut(&[usize]) -> bool,
{
    if cost(root) > budget {
        return true;
    }
    let mut walker = Walker {
        adj,
        admissible: &admissible,
        cost: &cost,
        budget,
        cover: vec![0u32; adj.len()],
        subset: vec![root],
    };
    walker.cover_add(root);
    let ext: Vec<usize> = adj[root]
        .iter()
        .copied()
        .filter(|&u| u != root && admissible(u))
        .collect();
    walker.extend(ext, cost(root), &mut visit)
}

struct Walker<'a, A, C> {
    adj: &'a [Vec<usize>],
    admissible: &'a A,
    cost: &'a C,
    budget: usize,
    /// Number of subset vertices equal or adjacent to each vertex.
    cover: Vec<u32>,
    subset: Vec<usize>,
}

impl<A, C> Walker<'_, A, C>
where
    A: Fn(usize) -> bool,
    C: Fn(usize) -> usize,
{
    fn cover_add(&mut self, w: usize) {
        self.cover[w] += 1;
        for &u in &self.adj[w] {
            if u != w {
                self.cover[u] += 1;
            }
        }
    }

    fn cover_remove(&mut self, w: usize) {
        self.cover[w] -= 1;
        for &u in &self.adj[w] {
            if u != w {
                self.cover[u] -= 1;
            }
        }
    }

    fn extend<V: FnMut(&[usize]) -> bool>(
        &mut self,
        mut ext: Vec<usize>,
        spent: usize,
        visit: &mut V,
    ) -> bool {
        if !visit(&self.subset) {
            return false;
        }
        while let Some(w) = ext.pop() {
            let next_cost = spent + (self.cost)(w);
            if next_cost > self.budget {
                continue;
            }
            let mut next_ext = ext.clone();
            for &u in &self.adj[w] {
                if u != w && self.cover[u] == 0 && (self.admissible)(u) {
                    next_ext.push(u);
                }
            }
            self.subset.push(w);
            self.cover_add(w);
            let keep_going = self.extend(next_ext, next_cost, visit);
            self.cover_remove(w);
            self.subset.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn brute(adj: &[Vec<usize>], root: usize, min_root: bool, max: usize) -> BTreeSet<Vec<usize>> {
        let n = adj.len();
        let mut out = BTreeSet::new();
        for mask in 1u32..(1 << n) {
            if mask >> root & 1 == 0 || mask.count_ones() as usize > max {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if min_root && members[0] != root {
                continue;
            }
            let mut seen = 1u32 << root;
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if mask >> w & 1 == 1 && seen >> w & 1 == 0 {
                        seen |= 1 << w;
                        stack.push(w);
                    }
                }
            }
            if seen == mask {
                out.insert(members);
            }
        }
        out
    }

    fn collect(adj: &[Vec<usize>], root: usize, min_root: bool, max: usize) -> Vec<Vec<usize>> {
        let mut found = Vec::new();
        grow_connected(
            adj,
            root,
            |u| !min_root || u > root,
            |_| 1,
            max,
            |s| {
                let mut s = s.to_vec();
                s.sort_unstable();
                found.push(s);
                true
            },
        );
        found
    }

    proptest! {
        #[test]
        fn matches_exhaustive_listing(
            n in 1usize..9,
            bits in proptest::collection::vec(any::<bool>(), 36),
            max in 1usize..9,
            min_root: bool,
        ) {
            let mut adj = vec![Vec::new(); n];
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k % 36] {
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                    k += 1;
                }
            }
            for root in 0..n {
                let found = collect(&adj, root, min_root, max);
                let unique: BTreeSet<_> = found.iter().cloned().collect();
                prop_assert_eq!(unique.len(), found.len(), "duplicate subset");
                prop_assert_eq!(unique, brute(&adj, root, min_root, max));
            }
        }
    }

    #[test]
    fn weighted_budget_and_abort() {
        // path 0-1-2 with costs 1,2,3
        let adj = vec![vec![1], vec![0, 2], vec![1]];
        let mut seen = Vec::new();
        grow_connected(
            &adj,
            0,
            |_| true,
            |u| u + 1,
            3,
            |s| {
                seen.push(s.to_vec());
                true
            },
        );
        assert_eq!(seen, vec![vec![0], vec![0, 1]]);

        let mut calls = 0;
        let finished = grow_connected(
            &adj,
            0,
            |_| true,
            |_| 1,
            3,
            |_| {
                calls += 1;
                calls < 2
            },
        );
        assert!(!finished);
        assert_eq!(calls, 2);
    }
}
