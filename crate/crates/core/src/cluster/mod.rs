//! Clusters, the Ursell function, and the truncated cluster expansion
//! `T_m = Σ_{|Γ| < m} φ(H(Γ)) ∏ w_γ`.
//!
//! Clusters are enumerated as unordered multisets of polymers whose
//! incompatibility graph is connected. The ordered clusters of the
//! expansion are recovered through the ordering multiplier `k!/∏ m_γ!`.

mod enumerate;
mod ursell;

use std::io::{self, Write};

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::conditions::KpCertificate;
use crate::graph::BipartiteGraph;
use crate::polymer::{Fugacities, Polymer, PolymerSet};
use crate::scalar::{Compensate, Scalar};

pub use enumerate::{cluster_size_histogram, fold_clusters, ClusterTerm};
pub use ursell::{
    blown_up_connected_sum, ursell, ursell_deletion_contraction, ursell_edge_subsets, SmallGraph,
    MAX_URSELL_VERTICES,
};

/// Default bound on the number of clusters a single expansion may visit.
pub const DEFAULT_CLUSTER_CAP: u64 = 5_000_000;

/// Largest slot count for which exact Ursell values and ordering
/// multipliers are materialized (`k!` must fit in `i128`).
pub const MAX_EXACT_SLOTS: usize = 33;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClusterError {
    #[error("the Ursell function is only defined on connected graphs")]
    Disconnected,
    #[error("graph or cluster with {0} vertices exceeds the exact evaluation limit")]
    TooLarge(usize),
    #[error("cluster count exceeded the cap of {cap} at m = {m}")]
    CapExceeded { cap: u64, m: usize },
    #[error("the cutoff m must be at least 1")]
    InvalidCutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterLimits {
    pub max_clusters: u64,
}

impl Default for ClusterLimits {
    fn default() -> Self {
        Self {
            max_clusters: DEFAULT_CLUSTER_CAP,
        }
    }
}

/// A materialized cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster<T = f64> {
    /// Distinct polymers in canonical order, with multiplicities.
    pub polymers: Vec<(Polymer<T>, u32)>,
    pub total_size: usize,
    /// `φ(H(Γ))` as an exact fraction.
    #[serde(serialize_with = "serialize_ratio")]
    pub ursell: Ratio<i128>,
    /// `k! / ∏ m_γ!` with `k` the number of slots.
    pub ordering_multiplier: u128,
    /// `w(Γ) = φ(H(Γ)) ∏ w_γ` for one ordering.
    pub weight: T,
}

fn serialize_ratio<S: serde::Serializer>(r: &Ratio<i128>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

impl<T: Scalar> Cluster<T> {
    pub fn slots(&self) -> u32 {
        self.polymers.iter().map(|&(_, m)| m).sum()
    }

    /// The cluster's share of the expansion, `ordering_multiplier · w(Γ)`.
    pub fn contribution(&self) -> T {
        self.weight * T::from_real(self.ordering_multiplier as f64)
    }
}

/// `T_m` together with its certified error bound, when one is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionEstimate<T = f64> {
    pub value: T,
    pub m: usize,
    pub eta: Option<f64>,
    /// `n_R e^{−mη}`; `None` means unbounded (no certificate supplied).
    pub error_bound: Option<f64>,
}

/// Every cluster of total size below `m`, in anchor order.
pub fn enumerate_clusters<T: Scalar>(
    graph: &BipartiteGraph,
    lam: &Fugacities<T>,
    m: usize,
    limits: ClusterLimits,
) -> Result<Vec<Cluster<T>>, ClusterError> {
    if m == 0 {
        return Err(ClusterError::InvalidCutoff);
    }
    let set = PolymerSet::new(graph, lam, m - 1);
    enumerate_clusters_in(&set, m, limits)
}

/// Like [`enumerate_clusters`] over an explicit polymer family.
pub fn enumerate_clusters_in<T: Scalar>(
    set: &PolymerSet<T>,
    m: usize,
    limits: ClusterLimits,
) -> Result<Vec<Cluster<T>>, ClusterError> {
    let per_anchor = fold_clusters(set, m, limits, Vec::new, |out: &mut Vec<_>, term| {
        out.push(term.materialize(set));
    })?;
    per_anchor.into_iter().flatten().collect()
}

/// `T_m` over an explicit polymer family, without an error bound.
pub fn expansion_sum<T: Compensate>(
    set: &PolymerSet<T>,
    m: usize,
    limits: ClusterLimits,
) -> Result<T, ClusterError> {
    let per_anchor = fold_clusters(
        set,
        m,
        limits,
        crate::scalar::CompensatedSum::new,
        |acc, term| acc.add(term.contribution()),
    )?;
    let mut total = crate::scalar::CompensatedSum::new();
    for acc in per_anchor {
        total.merge(&acc);
    }
    Ok(total.value())
}

/// `T_m` for the polymer model of `graph`. The error bound `n_R e^{−mη}` is
/// attached only when `certificate` is valid.
pub fn truncated_expansion<T: Compensate>(
    graph: &BipartiteGraph,
    lam: &Fugacities<T>,
    m: usize,
    certificate: Option<&KpCertificate>,
    limits: ClusterLimits,
) -> Result<ExpansionEstimate<T>, ClusterError> {
    if m == 0 {
        return Err(ClusterError::InvalidCutoff);
    }
    let set = PolymerSet::new(graph, lam, m - 1);
    let value = expansion_sum(&set, m, limits)?;
    let certified = certificate.filter(|c| c.is_valid());
    Ok(ExpansionEstimate {
        value,
        m,
        eta: certified.map(|c| c.eta),
        error_bound: certified.map(|c| truncation_error_bound(graph.n_right(), m, c.eta)),
    })
}

/// The largest cutoff `m <= m_max` whose cluster count stays within the
/// cap, or `None` when even `m = 1` is infeasible. Counting is
/// combinatorial; see [`cluster_size_histogram`].
pub fn largest_feasible_cutoff<T: Scalar>(
    graph: &BipartiteGraph,
    lam: &Fugacities<T>,
    m_max: usize,
    limits: ClusterLimits,
) -> Result<Option<usize>, ClusterError> {
    if m_max == 0 {
        return Err(ClusterError::InvalidCutoff);
    }
    let mut probe = m_max;
    loop {
        let set = PolymerSet::new(graph, lam, probe - 1);
        match cluster_size_histogram(&set, probe, limits) {
            Ok(hist) => {
                let mut total = 0u64;
                let mut best = None;
                // clusters of size < m are counted by hist[..m]
                for m in 1..=probe {
                    if m > 1 {
                        total = total.saturating_add(hist[m - 1]);
                    }
                    if total > limits.max_clusters {
                        break;
                    }
                    best = Some(m);
                }
                return Ok(best);
            }
            Err(ClusterError::CapExceeded { .. }) if probe > 1 => {
                probe = (probe * 3 / 4).clamp(1, probe - 1)
            }
            Err(ClusterError::CapExceeded { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
}

/// `n_R e^{−mη}`.
pub fn truncation_error_bound(n_right: usize, m: usize, eta: f64) -> f64 {
    n_right as f64 * (-(m as f64) * eta).exp()
}

/// Writes one cluster per line: multiplicities, polymer sizes, `φ`, and the
/// signed weight `w(Γ)`, tab separated.
pub fn write_cluster_dump<T: Scalar, W: Write>(
    out: &mut W,
    clusters: &[Cluster<T>],
) -> io::Result<()> {
    writeln!(out, "# multiplicities\tsizes\tursell\tweight")?;
    for c in clusters {
        let mults: Vec<String> = c.polymers.iter().map(|(_, m)| m.to_string()).collect();
        let sizes: Vec<String> = c
            .polymers
            .iter()
            .map(|(p, _)| p.size().to_string())
            .collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{:?}",
            mults.join(","),
            sizes.join(","),
            c.ursell,
            c.weight
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;

    fn k11() -> BipartiteGraph {
        BipartiteGraph::new(1, 1, [(0, 0)]).unwrap()
    }

    fn lam(l: f64, r: f64) -> Fugacities {
        Fugacities::new(l, r).unwrap()
    }

    fn shapes(cs: &[Cluster]) -> Vec<Vec<(Vec<usize>, u32)>> {
        cs.iter()
            .map(|c| {
                c.polymers
                    .iter()
                    .map(|(p, m)| (p.vertices.clone(), *m))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn listing_examples() {
        let cs = enumerate_clusters(&k11(), &lam(1.0, 1.0), 3, ClusterLimits::default()).unwrap();
        assert_eq!(shapes(&cs), vec![vec![(vec![0], 1)], vec![(vec![0], 2)]]);
        assert_eq!(cs[1].ursell, Ratio::new(-1, 2));
        assert_eq!(cs[1].ordering_multiplier, 1);
        assert_eq!(cs[1].total_size, 2);

        assert!(
            enumerate_clusters(&k11(), &lam(1.0, 1.0), 1, ClusterLimits::default())
                .unwrap()
                .is_empty()
        );

        let star = GraphFamily::StarCenterLeft { k: 2 }.generate().unwrap();
        let cs = enumerate_clusters(&star, &lam(1.0, 1.0), 2, ClusterLimits::default()).unwrap();
        assert_eq!(shapes(&cs), vec![vec![(vec![0], 1)], vec![(vec![1], 1)]]);
    }

    #[test]
    fn small_value_example() {
        let est = truncated_expansion(&k11(), &lam(10.0, 0.1), 2, None, ClusterLimits::default())
            .unwrap();
        assert!((est.value - 0.1 / 11.0).abs() < 1e-16);
        assert_eq!(est.error_bound, None);
        let exact = (1.0 + 0.1 / 11.0f64).ln();
        assert!((est.value - exact).abs() < 4.2e-5);
    }

    #[test]
    fn single_polymer_series() {
        let w = 0.1 / 11.0;
        for m in 1..=12 {
            let est =
                truncated_expansion(&k11(), &lam(10.0, 0.1), m, None, ClusterLimits::default())
                    .unwrap();
            let series: f64 = (1..m as i32)
                .map(|k| if k % 2 == 1 { 1.0 } else { -1.0 } * w.powi(k) / k as f64)
                .sum();
            assert!((est.value - series).abs() < 1e-15, "m = {m}");
        }
    }

    #[test]
    fn ordering_multiplier_collapses_to_log_series() {
        // two mutually incompatible singletons: K_{1,2}
        let star = GraphFamily::StarCenterLeft { k: 2 }.generate().unwrap();
        let cs = enumerate_clusters(&star, &lam(1.0, 1.0), 6, ClusterLimits::default()).unwrap();
        for k in 1..=5u32 {
            let total: Ratio<i128> = cs
                .iter()
                .filter(|c| {
                    c.polymers.len() == 1 && c.polymers[0].0.vertices == vec![0] && c.slots() == k
                })
                .map(|c| c.ursell * Ratio::from_integer(c.ordering_multiplier as i128))
                .sum();
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert_eq!(total, Ratio::new(sign, k as i128));
        }
    }

    #[test]
    fn zero_right_fugacity_gives_zero() {
        let g = GraphFamily::EvenCycle { n: 8 }.generate().unwrap();
        for m in 1..6 {
            let est =
                truncated_expansion(&g, &lam(2.0, 0.0), m, None, ClusterLimits::default()).unwrap();
            assert_eq!(est.value, 0.0);
        }
    }

    #[test]
    fn cap_is_reported() {
        let g = GraphFamily::EvenCycle { n: 8 }.generate().unwrap();
        let err = truncated_expansion(
            &g,
            &lam(1.0, 1.0),
            8,
            None,
            ClusterLimits { max_clusters: 10 },
        );
        assert_eq!(err, Err(ClusterError::CapExceeded { cap: 10, m: 8 }));
    }

    #[test]
    fn size_histogram_matches_enumeration() {
        let g = GraphFamily::EvenCycle { n: 8 }.generate().unwrap();
        let l = lam(1.0, 1.0);
        let set = PolymerSet::new(&g, &l, 6);
        let hist = cluster_size_histogram(&set, 7, ClusterLimits::default()).unwrap();
        let per_anchor = fold_clusters(
            &set,
            7,
            ClusterLimits::default(),
            || vec![0u64; 7],
            |h, t| h[t.total_size()] += 1,
        )
        .unwrap();
        let mut counted = vec![0u64; 7];
        for h in per_anchor {
            for (c, x) in counted.iter_mut().zip(h) {
                *c += x;
            }
        }
        assert_eq!(hist, counted);

        let total: u64 = hist.iter().sum();
        let limits = ClusterLimits {
            max_clusters: total,
        };
        assert_eq!(largest_feasible_cutoff(&g, &l, 7, limits).unwrap(), Some(7));
        let limits = ClusterLimits {
            max_clusters: total - 1,
        };
        assert_eq!(largest_feasible_cutoff(&g, &l, 7, limits).unwrap(), Some(6));
    }

    #[test]
    fn materialized_ursell_matches_explicit_graph() {
        let g = GraphFamily::RandomBiregular {
            d_left: 2,
            d_right: 3,
            n_left: 6,
            seed: 5,
        }
        .generate()
        .unwrap();
        let l = lam(3.0, 0.5);
        let set = PolymerSet::new(&g, &l, 4);
        let cs = enumerate_clusters_in(&set, 5, ClusterLimits::default()).unwrap();
        assert!(cs.len() > 20);
        for c in &cs {
            // slots in order, each polymer repeated by its multiplicity
            let slots: Vec<&Polymer> = c
                .polymers
                .iter()
                .flat_map(|(p, m)| std::iter::repeat_n(p, *m as usize))
                .collect();
            let adj = crate::polymer::two_linked_adjacency(&g);
            let mut edges = Vec::new();
            for a in 0..slots.len() {
                for b in a + 1..slots.len() {
                    if crate::polymer::incompatible(slots[a], slots[b], &adj) {
                        edges.push((a, b));
                    }
                }
            }
            let h = SmallGraph::new(slots.len(), &edges);
            assert_eq!(ursell(&h).unwrap(), c.ursell);
        }
    }
}
