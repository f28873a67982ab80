//! Joint cumulants of occupation indicators.
//!
//! For `A ⊆ R` the cluster expansion gives
//! `κ(A) = Σ_Γ w(Γ) ∏_{v∈A} Y_v(Γ)` with `Y_v(Γ)` the number of slots of
//! `Γ` containing `v`. Moments and cumulants are related through the
//! partition lattice: `μ_A = Σ_π ∏_{S∈π} κ(S)` and its Möbius inverse
//! `κ(A) = Σ_π (−1)^{|π|−1} (|π|−1)! ∏_{S∈π} μ_S`.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cluster::{fold_clusters, ClusterError, ClusterLimits};
use crate::conditions::KpCertificate;
use crate::graph::{BipartiteGraph, GraphError, Side, Vertex};
use crate::oracle::{self, OracleError};
use crate::polymer::{Fugacities, PolymerSet};

/// Largest set handled by the partition-lattice routines.
pub const MAX_CUMULANT_ORDER: usize = 8;

/// Terms of the decay-constant series below this are dropped once the
/// series is past its peak.
pub const SERIES_CUTOFF: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CumulantError {
    #[error("set of size {0} exceeds the partition-lattice limit of {MAX_CUMULANT_ORDER}")]
    TooLarge(usize),
    #[error("no value supplied for subset {0}")]
    MissingSubset(String),
    #[error("cumulant set must be nonempty")]
    EmptySet,
    #[error("right vertex {0} does not exist")]
    NotRight(usize),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Every set partition of `{0, …, n−1}`, generated from restricted growth
/// strings. Blocks are sorted and listed by least element.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().copied().max().unwrap_or(0) + 1;
        let mut partition = vec![Vec::new(); blocks];
        for (i, &b) in rgs.iter().enumerate() {
            partition[b].push(i);
        }
        out.push(partition);
        // next restricted growth string: a[i] <= 1 + max(a[0..i])
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
            i -= 1;
        }
    }
}

fn normalized<K: Ord + Clone>(set: &[K]) -> Result<Vec<K>, CumulantError> {
    let mut s = set.to_vec();
    s.sort();
    s.dedup();
    if s.is_empty() {
        return Err(CumulantError::EmptySet);
    }
    if s.len() > MAX_CUMULANT_ORDER {
        return Err(CumulantError::TooLarge(s.len()));
    }
    Ok(s)
}

fn lattice_sum<K: Ord + Clone + Debug>(
    values: &BTreeMap<Vec<K>, f64>,
    set: &[K],
    coefficient: impl Fn(usize) -> f64,
) -> Result<f64, CumulantError> {
    let set = normalized(set)?;
    let mut total = 0.0;
    for partition in set_partitions(set.len()) {
        let mut term = coefficient(partition.len());
        for block in &partition {
            let key: Vec<K> = block.iter().map(|&i| set[i].clone()).collect();
            let value = values
                .get(&key)
                .ok_or_else(|| CumulantError::MissingSubset(format!("{key:?}")))?;
            term *= value;
        }
        total += term;
    }
    Ok(total)
}

/// `μ_A = Σ_π ∏_{S∈π} κ(S)`; `kappa` is keyed by sorted subsets.
pub fn moments_from_cumulants<K: Ord + Clone + Debug>(
    kappa: &BTreeMap<Vec<K>, f64>,
    set: &[K],
) -> Result<f64, CumulantError> {
    lattice_sum(kappa, set, |_| 1.0)
}

/// `κ(A) = Σ_π (−1)^{|π|−1} (|π|−1)! ∏_{S∈π} μ_S`; `mu` is keyed by sorted
/// subsets.
pub fn cumulants_from_moments<K: Ord + Clone + Debug>(
    mu: &BTreeMap<Vec<K>, f64>,
    set: &[K],
) -> Result<f64, CumulantError> {
    lattice_sum(mu, set, |blocks| {
        let magnitude: f64 = (1..blocks).map(|k| k as f64).product();
        if blocks % 2 == 1 {
            magnitude
        } else {
            -magnitude
        }
    })
}

/// A truncated cluster-expansion cumulant with its tail bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantQuery {
    /// Right-vertex indices, sorted.
    pub set: Vec<usize>,
    pub m: usize,
    pub value: f64,
    /// Bound on `|κ(A) − value|`; infinite without a valid certificate.
    pub tail_bound: f64,
}

/// `Σ_{y_v ≥ 1} e^{−η Σ(y_v−1)} ∏ y_v` over `a` coordinates, summed
/// numerically. Grouping the `y`-vectors by their excess
/// `t = Σ(y_v − 1)`, the weight `∏ y_v` summed over one group is
/// `C(t+2a−1, 2a−1)`.
pub fn decay_constant(eta: f64, a: usize) -> f64 {
    shifted_decay_series(eta, a, |t| eta * t as f64)
}

/// Closed form of [`decay_constant`]: `(1 − e^{−η})^{−2a}`.
pub fn decay_constant_closed_form(eta: f64, a: usize) -> f64 {
    (-(-eta).exp_m1()).powi(-2 * a as i32)
}

/// `Σ_t C(t+2a−1, 2a−1) e^{−exponent(t)}`, stopping once terms are below
/// [`SERIES_CUTOFF`] relative to the running sum and decreasing.
fn shifted_decay_series(eta: f64, a: usize, exponent: impl Fn(usize) -> f64) -> f64 {
    if a == 0 {
        return (-exponent(0)).exp();
    }
    let r = 2 * a - 1;
    // log of the binomial coefficient C(t + r, r), updated incrementally
    let mut ln_binom = 0.0;
    let mut total = 0.0;
    let mut previous = f64::INFINITY;
    let mut t = 0usize;
    loop {
        let term = (ln_binom - exponent(t)).exp();
        total += term;
        let decreasing = term <= previous;
        if decreasing && term <= SERIES_CUTOFF * total.max(f64::MIN_POSITIVE) && t > r {
            break;
        }
        previous = term;
        t += 1;
        ln_binom += ((t + r) as f64 / t as f64).ln();
        if t > 10_000_000 || !eta.is_finite() {
            break;
        }
    }
    total
}

/// Bound on `Σ |w(Γ)| ∏_{v∈A} Y_v(Γ)` over clusters of size at least `m`
/// containing all of `A`, given `Σ_{Γ∋v} |w(Γ)| e^{η|Γ|} <= 1`: such a
/// cluster with excess `t` has size at least `max(m, MST(A)/2 + t)`.
pub fn cumulant_tail_bound(eta: f64, a: usize, steiner: usize, m: usize) -> f64 {
    let half = steiner as f64 / 2.0;
    shifted_decay_series(eta, a, |t| eta * (m as f64).max(half + t as f64))
}

fn right_vertices(set: &[usize]) -> Vec<Vertex> {
    set.iter().map(|&v| Vertex::right(v)).collect()
}

/// `κ(A)` for several `A ⊆ R` from one pass over the clusters of size
/// below `m`.
pub fn truncated_cumulants(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    sets: &[Vec<usize>],
    m: usize,
    certificate: Option<&KpCertificate>,
    limits: ClusterLimits,
) -> Result<Vec<CumulantQuery>, CumulantError> {
    if m == 0 {
        return Err(ClusterError::InvalidCutoff.into());
    }
    let sets: Vec<Vec<usize>> = sets
        .iter()
        .map(|s| {
            let s = normalized(s)?;
            match s.iter().find(|&&v| v >= graph.n_right()) {
                Some(&v) => Err(CumulantError::NotRight(v)),
                None => Ok(s),
            }
        })
        .collect::<Result<_, _>>()?;
    let set_family = PolymerSet::new(graph, lam, m - 1);
    let n_right = graph.n_right();
    let per_anchor = fold_clusters(
        &set_family,
        m,
        limits,
        || (vec![0.0f64; sets.len()], vec![0u32; n_right]),
        |(acc, occupancy), term| {
            occupancy.iter_mut().for_each(|y| *y = 0);
            for &(id, mult) in term.members() {
                for &v in &set_family.polymers()[id].vertices {
                    occupancy[v] += mult;
                }
            }
            let mut contribution = None;
            for (slot, s) in acc.iter_mut().zip(&sets) {
                let product: f64 = s.iter().map(|&v| f64::from(occupancy[v])).product();
                if product != 0.0 {
                    let c = *contribution.get_or_insert_with(|| term.contribution());
                    *slot += c * product;
                }
            }
        },
    )?;
    let mut values = vec![0.0; sets.len()];
    for (acc, _) in per_anchor {
        for (v, a) in values.iter_mut().zip(acc) {
            *v += a;
        }
    }
    let certified = certificate.filter(|c| c.is_valid());
    sets.into_iter()
        .zip(values)
        .map(|(set, value)| {
            let steiner = graph.steiner_tree_size(&right_vertices(&set))?;
            let tail_bound = match (certified, steiner) {
                // clusters are connected, so none contains all of a split set
                (_, None) => 0.0,
                (Some(c), Some(s)) => cumulant_tail_bound(c.eta, set.len(), s, m),
                (None, Some(_)) => f64::INFINITY,
            };
            Ok(CumulantQuery {
                set,
                m,
                value,
                tail_bound,
            })
        })
        .collect()
}

pub fn truncated_cumulant(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    set: &[usize],
    m: usize,
    certificate: Option<&KpCertificate>,
    limits: ClusterLimits,
) -> Result<CumulantQuery, CumulantError> {
    let mut out = truncated_cumulants(graph, lam, &[set.to_vec()], m, certificate, limits)?;
    Ok(out.remove(0))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecayError {
    #[error("decay bounds need a valid KP certificate")]
    NotCertified,
    #[error(transparent)]
    Cumulant(#[from] CumulantError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DecayQuery {
    /// Truncated cluster cumulant of a right-vertex set.
    Cumulant(Vec<usize>),
    /// Oracle covariance `μ_{A∪B} − μ_A μ_B` of two vertex sets.
    Correlation { a: Vec<Vertex>, b: Vec<Vertex> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub query_id: usize,
    pub kind: &'static str,
    /// Graph distance (correlations) or Steiner tree size (cumulants);
    /// `None` when the sets lie in different components.
    pub distance_or_mst: Option<usize>,
    pub value: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Sum over partitions of `A ∪ B` with a block meeting both sides of
/// `∏_S C_{|S|}`: the constant in front of `e^{−ηD/2}` for sets in `R`.
pub fn right_set_correlation_constant(eta: f64, a: usize, b: usize) -> f64 {
    let n = a + b;
    set_partitions(n)
        .into_iter()
        .filter(|p| {
            p.iter()
                .any(|block| block.iter().any(|&i| i < a) && block.iter().any(|&i| i >= a))
        })
        .map(|p| {
            p.iter()
                .map(|block| decay_constant(eta, block.len()))
                .product::<f64>()
        })
        .sum()
}

/// Constant for general vertex sets: `2^{|N(A_L)|+|N(B_L)|}` times the
/// largest right-set constant over the sizes the reduction can produce,
/// times `e^{η}` for the two steps of distance it may lose.
fn general_correlation_constant(
    graph: &BipartiteGraph,
    eta: f64,
    a: &[Vertex],
    b: &[Vertex],
) -> f64 {
    let left_neighborhood = |s: &[Vertex]| {
        let mut n: Vec<usize> = s
            .iter()
            .filter(|v| v.side == Side::Left)
            .flat_map(|v| graph.left_neighbors(v.index).iter().copied())
            .collect();
        n.sort_unstable();
        n.dedup();
        n.len()
    };
    let right_count = |s: &[Vertex]| s.iter().filter(|v| v.side == Side::Right).count();
    let (na, nb) = (left_neighborhood(a), left_neighborhood(b));
    let (ra, rb) = (right_count(a), right_count(b));
    let mut worst: f64 = 0.0;
    for qa in 0..=na {
        for qb in 0..=nb {
            let (sa, sb) = (qa + ra, qb + rb);
            if sa == 0 || sb == 0 || sa + sb > MAX_CUMULANT_ORDER {
                continue;
            }
            worst = worst.max(right_set_correlation_constant(eta, sa, sb));
        }
    }
    2f64.powi((na + nb) as i32) * worst * eta.exp()
}

/// Evaluates each query against its decay bound `C e^{−(η/2)·D}`.
pub fn decay_experiment(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    queries: &[DecayQuery],
    m: usize,
    certificate: &KpCertificate,
    limits: ClusterLimits,
) -> Result<Vec<DecayRow>, DecayError> {
    if !certificate.is_valid() {
        return Err(DecayError::NotCertified);
    }
    let eta = certificate.eta;
    let cumulant_sets: Vec<Vec<usize>> = queries
        .iter()
        .filter_map(|q| match q {
            DecayQuery::Cumulant(s) => Some(s.clone()),
            DecayQuery::Correlation { .. } => None,
        })
        .collect();
    let mut cumulant_values =
        truncated_cumulants(graph, lam, &cumulant_sets, m, Some(certificate), limits)?.into_iter();
    let oracle_fits = graph.n_vertices() <= oracle::MAX_EXACT_VERTICES;

    let mut pending = Vec::new();
    let mut rows = Vec::new();
    for (query_id, q) in queries.iter().enumerate() {
        match q {
            DecayQuery::Cumulant(_) => {
                let cq = cumulant_values
                    .next()
                    .expect("one value per cumulant query");
                let steiner = graph.steiner_tree_size(&right_vertices(&cq.set))?;
                let c = decay_constant(eta, cq.set.len());
                let bound = match steiner {
                    Some(s) => c * (-eta * s as f64 / 2.0).exp(),
                    None => c,
                };
                rows.push((
                    query_id,
                    DecayRow {
                        query_id,
                        kind: "cumulant",
                        distance_or_mst: steiner,
                        value: cq.value,
                        bound,
                        satisfied: cq.value.abs() <= bound,
                    },
                ));
            }
            DecayQuery::Correlation { a, b } => {
                if a.iter().any(|v| b.contains(v)) || !oracle_fits {
                    continue;
                }
                pending.push((query_id, a.clone(), b.clone()));
            }
        }
    }
    let correlation_rows = pending
        .into_par_iter()
        .map(|(query_id, a, b)| {
            correlation_row(graph, lam, eta, query_id, &a, &b).map(|r| (query_id, r))
        })
        .collect::<Result<Vec<_>, DecayError>>()?;
    rows.extend(correlation_rows);
    rows.sort_by_key(|&(id, _)| id);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

fn correlation_row(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    eta: f64,
    query_id: usize,
    a: &[Vertex],
    b: &[Vertex],
) -> Result<DecayRow, DecayError> {
    let mut union = a.to_vec();
    union.extend_from_slice(b);
    let value = oracle::exact_marginal(graph, lam, &union)?
        - oracle::exact_marginal(graph, lam, a)? * oracle::exact_marginal(graph, lam, b)?;
    let distance = graph.distance(a, b)?;
    let all_right = a.iter().chain(b).all(|v| v.side == Side::Right);
    let constant = if all_right {
        right_set_correlation_constant(eta, a.len(), b.len())
    } else {
        general_correlation_constant(graph, eta, a, b)
    };
    let bound = match distance {
        None => constant,
        // the general reduction needs D > 2; below that |value| <= 1 trivially
        Some(d) if !all_right && d <= 2 => 1.0,
        Some(d) => constant * (-eta * d as f64 / 2.0).exp(),
    };
    Ok(DecayRow {
        query_id,
        kind: "correlation",
        distance_or_mst: distance,
        value,
        bound,
        satisfied: value.abs() <= bound,
    })
}

/// CSV with columns `query_id,kind,distance_or_mst,value,bound,satisfied`;
/// a missing distance is written as `inf`.
pub fn write_decay_csv<W: Write>(out: &mut W, rows: &[DecayRow]) -> io::Result<()> {
    writeln!(out, "query_id,kind,distance_or_mst,value,bound,satisfied")?;
    for r in rows {
        let d = r
            .distance_or_mst
            .map_or_else(|| "inf".to_string(), |d| d.to_string());
        writeln!(
            out,
            "{},{},{},{:e},{:e},{}",
            r.query_id, r.kind, d, r.value, r.bound, r.satisfied
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn partition_counts_are_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(n).len(), b, "n = {n}");
        }
    }

    #[test]
    fn small_lattice_examples() {
        let mut kappa = BTreeMap::new();
        kappa.insert(vec![1], 0.3);
        kappa.insert(vec![2], 0.2);
        kappa.insert(vec![1, 2], 0.05);
        assert_eq!(moments_from_cumulants(&kappa, &[1]).unwrap(), 0.3);
        assert!((moments_from_cumulants(&kappa, &[1, 2]).unwrap() - (0.05 + 0.06)).abs() < 1e-15);

        let mut mu = BTreeMap::new();
        mu.insert(vec![1], 0.3);
        mu.insert(vec![2], 0.2);
        mu.insert(vec![1, 2], 0.06);
        assert!(cumulants_from_moments(&mu, &[1, 2]).unwrap().abs() < 1e-15);
        assert_eq!(cumulants_from_moments(&mu, &[2]).unwrap(), 0.2);

        mu.remove(&vec![2]);
        assert!(matches!(
            cumulants_from_moments(&mu, &[1, 2]),
            Err(CumulantError::MissingSubset(_))
        ));
        assert_eq!(
            cumulants_from_moments(&mu, &[] as &[i32]),
            Err(CumulantError::EmptySet)
        );
    }

    #[test]
    fn decay_constant_series_matches_closed_form() {
        for &eta in &[0.05, 0.1, 0.5, 1.0] {
            for a in 1..=4 {
                let series = decay_constant(eta, a);
                let closed = decay_constant_closed_form(eta, a);
                assert!(
                    (series - closed).abs() <= 1e-10 * closed,
                    "eta {eta} a {a}: {series} vs {closed}"
                );
            }
        }
        // literal sum over y-vectors for two coordinates
        let eta = 0.3;
        let mut literal = 0.0;
        for y1 in 1..400u32 {
            for y2 in 1..400u32 {
                literal += f64::from(y1 * y2) * (-eta * f64::from(y1 + y2 - 2)).exp();
            }
        }
        assert!((literal - decay_constant(eta, 2)).abs() < 1e-9 * literal);
    }

    #[test]
    fn tail_bound_shrinks_with_m() {
        let mut last = f64::INFINITY;
        for m in 1..40 {
            let t = cumulant_tail_bound(0.1, 2, 4, m);
            assert!(t <= last);
            last = t;
        }
        assert!(cumulant_tail_bound(0.1, 1, 0, 1) <= decay_constant(0.1, 1) * (1.0 + 1e-12));
    }

    fn cycle_instance() -> (BipartiteGraph, Fugacities, KpCertificate) {
        let g = crate::graph::GraphFamily::EvenCycle { n: 12 }
            .generate()
            .unwrap();
        let lam = Fugacities::new(50.0, 0.1).unwrap();
        let cert = crate::conditions::certify_kp(&g, &lam, 0.1, 6).unwrap();
        assert!(cert.is_valid());
        (g, lam, cert)
    }

    #[test]
    fn truncated_cumulants_match_oracle_within_tail() {
        let (g, lam, cert) = cycle_instance();
        let sets = vec![
            vec![0],
            vec![0, 1],
            vec![0, 2],
            vec![0, 3],
            vec![0, 1, 2],
            vec![1, 3, 5],
        ];
        let got =
            truncated_cumulants(&g, &lam, &sets, 8, Some(&cert), ClusterLimits::default()).unwrap();
        for q in &got {
            let exact = oracle::exact_cumulant(&g, &lam, &right_vertices(&q.set)).unwrap();
            assert!(
                (q.value - exact).abs() <= q.tail_bound,
                "{:?}: {} vs {} (tail {})",
                q.set,
                q.value,
                exact,
                q.tail_bound
            );
        }
        let uncertified =
            truncated_cumulant(&g, &lam, &[0, 1], 4, None, ClusterLimits::default()).unwrap();
        assert_eq!(uncertified.tail_bound, f64::INFINITY);
    }

    #[test]
    fn split_sets_have_zero_cumulant() {
        let (g, lam, cert) = cycle_instance();
        let two = g.disjoint_union(&g);
        let q = truncated_cumulant(
            &two,
            &lam,
            &[0, 7],
            6,
            Some(&cert),
            ClusterLimits::default(),
        )
        .unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.tail_bound, 0.0);
    }

    #[test]
    fn decay_rows_satisfy_bounds() {
        let (g, lam, cert) = cycle_instance();
        let queries = vec![
            DecayQuery::Cumulant(vec![0, 3]),
            DecayQuery::Correlation {
                a: vec![Vertex::right(0)],
                b: vec![Vertex::right(2)],
            },
            DecayQuery::Correlation {
                a: vec![Vertex::right(0)],
                b: vec![Vertex::right(0)],
            },
            DecayQuery::Correlation {
                a: vec![Vertex::left(0)],
                b: vec![Vertex::left(3), Vertex::right(4)],
            },
        ];
        let rows =
            decay_experiment(&g, &lam, &queries, 8, &cert, ClusterLimits::default()).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.query_id).collect::<Vec<_>>(),
            vec![0, 1, 3]
        );
        assert!(rows.iter().all(|r| r.satisfied), "{rows:?}");
        let mut csv = Vec::new();
        write_decay_csv(&mut csv, &rows).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("query_id,kind,distance_or_mst,value,bound,satisfied\n"));
    }

    proptest! {
        #[test]
        fn lattice_round_trip(values in proptest::collection::vec(-1.0f64..1.0, 63), n in 1usize..=6) {
            let mut mu = BTreeMap::new();
            for mask in 1u32..(1 << n) {
                let key: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                mu.insert(key, values[mask as usize - 1]);
            }
            let mut kappa = BTreeMap::new();
            for key in mu.keys() {
                kappa.insert(key.clone(), cumulants_from_moments(&mu, key).unwrap());
            }
            let full: Vec<usize> = (0..n).collect();
            let back = moments_from_cumulants(&kappa, &full).unwrap();
            prop_assert!((back - mu[&full]).abs() < 1e-10);
        }
    }
}
