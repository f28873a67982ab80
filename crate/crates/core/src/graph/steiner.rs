//! Dreyfus–Wagner dynamic program over terminal subsets, unit edge costs.

use super::bfs;

const INF: u32 = u32::MAX / 4;

/// Minimum edge count of a connected subgraph spanning `terminals`, or `None`
/// when the terminals lie in different components. `terminals` must be
/// nonempty and deduplicated.
pub(super) fn dreyfus_wagner(adj: &[Vec<usize>], terminals: &[usize]) -> Option<usize> {
    let k = terminals.len();
    if k == 1 {
        return Some(0);
    }
    let n = adj.len();
    let dist: Vec<Vec<u32>> = (0..n)
        .map(|v| {
            bfs(adj, &[v])
                .into_iter()
                .map(|d| if d == u32::MAX { INF } else { d })
                .collect()
        })
        .collect();
    if terminals[1..].iter().any(|&t| dist[terminals[0]][t] >= INF) {
        return None;
    }

    // best[mask][v]: cheapest tree containing the terminals in `mask` and v.
    let full = (1usize << k) - 1;
    let mut best = vec![vec![INF; n]; full + 1];
    for (i, &t) in terminals.iter().enumerate() {
        best[1 << i].clone_from(&dist[t]);
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut merged = vec![INF; n];
        for (v, slot) in merged.iter_mut().enumerate() {
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                let cost = best[sub][v] + best[mask ^ sub][v];
                if cost < *slot {
                    *slot = cost;
                }
                sub = (sub - 1) & mask;
            }
        }
        let row = &mut best[mask];
        for v in 0..n {
            row[v] = (0..n)
                .map(|u| merged[u].saturating_add(dist[u][v]))
                .min()
                .unwrap_or(INF);
        }
    }
    let answer = best[full][terminals[0]];
    (answer < INF).then_some(answer as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smallest edge count over all connected edge subsets covering the
    /// terminals, by exhaustive search.
    fn brute_force(n: usize, edges: &[(usize, usize)], terminals: &[usize]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for mask in 0u32..(1 << edges.len()) {
            let chosen: Vec<_> = (0..edges.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| edges[i])
                .collect();
            // union-find over the chosen edges
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                if p[x] != x {
                    let r = find(p, p[x]);
                    p[x] = r;
                }
                p[x]
            }
            for &(a, b) in &chosen {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
            let root = find(&mut parent, terminals[0]);
            if terminals.iter().all(|&t| find(&mut parent, t) == root) {
                let size = chosen.len();
                best = Some(best.map_or(size, |b: usize| b.min(size)));
            }
        }
        best
    }

    fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        // C_8 with a chord, plus an isolated vertex 8.
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 0),
            (1, 6),
        ];
        let adj = adjacency(9, &edges);
        let cases: [&[usize]; 5] = [&[0, 4], &[0, 3, 5], &[2, 4, 6, 0], &[1, 5], &[3, 7, 2]];
        for t in cases {
            assert_eq!(dreyfus_wagner(&adj, t), brute_force(9, &edges, t), "{t:?}");
        }
        assert_eq!(dreyfus_wagner(&adj, &[0, 8]), None);
    }
}
