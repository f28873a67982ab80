//! Sampling from the polymer measure `ν(Γ) ∝ ∏_{γ∈Γ} w_γ` by
//! self-reduction, and extension to an independent set of `G`.
//!
//! Right vertices are processed in ascending order. The state is the free
//! set `F ⊆ R` of vertices not yet decided and not blocked by a chosen
//! polymer; the polymers still allowed are exactly those contained in `F`.
//! At a free vertex `v`, the polymer `γ ∋ v, γ ⊆ F` is chosen with
//! probability proportional to `w_γ Ξ(F ∖ N²[γ])`, and no polymer with
//! probability proportional to `Ξ(F ∖ {v})`.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cluster::{expansion_sum, largest_feasible_cutoff, ClusterError, ClusterLimits};
use crate::conditions::{certify_kp, ConditionError, KpCertificate};
use crate::connected::grow_connected;
use crate::graph::{BipartiteGraph, Vertex};
use crate::oracle::{OracleError, PolymerSide};
use crate::polymer::{Fugacities, Polymer, PolymerSet, TwoLinkedAdjacency};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("KP certificate not valid; the truncated backend needs one (the exact backend works on small graphs)")]
    NotCertified,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cluster enumeration cannot reach even m = 1")]
    Infeasible,
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerBackend {
    /// Exact `Ξ` of each restricted family by memoized enumeration.
    Exact,
    /// `exp(T_m)` of each restricted family.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub backend: SamplerBackend,
    pub eta: f64,
    pub k_max: usize,
    /// Cutoff override for the truncated backend.
    pub m: Option<usize>,
    /// Largest cutoff the truncated backend will use without an override.
    pub max_m: usize,
    pub limits: ClusterLimits,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            backend: SamplerBackend::Truncated,
            eta: 0.1,
            k_max: 6,
            m: None,
            max_m: 10,
            limits: ClusterLimits::default(),
        }
    }
}

/// A compatible polymer collection.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PolymerConfig {
    /// Chosen polymers as sorted right-vertex lists, in the order chosen.
    pub chosen: Vec<Vec<usize>>,
    /// Right vertices at which a decision was made, in processing order.
    pub decided: Vec<usize>,
}

impl PolymerConfig {
    /// The right vertices covered by the chosen polymers, sorted.
    pub fn union(&self) -> Vec<usize> {
        let mut u: Vec<usize> = self.chosen.iter().flatten().copied().collect();
        u.sort_unstable();
        u
    }

    /// Chosen polymers are 2-linked and pairwise compatible.
    pub fn is_valid(&self, graph: &BipartiteGraph) -> bool {
        let adj = TwoLinkedAdjacency::new(graph);
        let lam = Fugacities::new(1.0, 1.0).expect("unit fugacities are valid");
        let polymers: Vec<Polymer> = self
            .chosen
            .iter()
            .map(|g| Polymer::from_sorted(graph, g.clone(), &lam))
            .collect();
        polymers.iter().all(|p| adj.is_connected(&p.vertices))
            && (0..polymers.len()).all(|i| {
                (i + 1..polymers.len())
                    .all(|j| !crate::polymer::incompatible(&polymers[i], &polymers[j], &adj))
            })
    }
}

/// One decision: outcomes (`None` for no polymer) with the free set each
/// leads to, and cumulative probabilities.
#[derive(Debug, Clone)]
struct Step {
    outcomes: Vec<(Option<Vec<usize>>, FixedBitSet)>,
    cumulative: Vec<f64>,
}

enum Engine<'g> {
    Exact(PolymerSide<'g, f64>),
    Truncated {
        m: usize,
        limits: ClusterLimits,
        log_xi: HashMap<FixedBitSet, f64>,
    },
}

/// Reusable sampler; decision tables are memoized across draws.
pub struct PolymerSampler<'g> {
    graph: &'g BipartiteGraph,
    lam: Fugacities,
    adj: TwoLinkedAdjacency,
    engine: Engine<'g>,
    steps: HashMap<(usize, FixedBitSet), Step>,
    certificate: Option<KpCertificate>,
    m_required: Option<usize>,
    tv_bound: f64,
}

impl<'g> PolymerSampler<'g> {
    pub fn new(
        graph: &'g BipartiteGraph,
        lam: &Fugacities,
        epsilon: f64,
        options: &SamplerOptions,
    ) -> Result<Self, SamplerError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(SamplerError::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        let adj = TwoLinkedAdjacency::new(graph);
        let n_right = graph.n_right();
        let (engine, certificate, m_required, tv_bound) = match options.backend {
            SamplerBackend::Exact => (
                Engine::Exact(PolymerSide::new(graph, lam)?),
                None,
                None,
                0.0,
            ),
            SamplerBackend::Truncated => {
                let certificate = certify_kp(graph, lam, options.eta, options.k_max)?;
                if !certificate.is_valid() {
                    return Err(SamplerError::NotCertified);
                }
                let eta = certificate.eta;
                let m_required = step_cutoff(n_right.max(1), epsilon, eta);
                let target = options.m.unwrap_or(m_required.min(options.max_m)).max(1);
                let m = largest_feasible_cutoff(graph, lam, target, options.limits)?
                    .ok_or(SamplerError::Infeasible)?;
                let engine = Engine::Truncated {
                    m,
                    limits: options.limits,
                    log_xi: HashMap::new(),
                };
                (
                    engine,
                    Some(certificate),
                    Some(m_required),
                    truncated_tv_bound(n_right, m, eta),
                )
            }
        };
        Ok(Self {
            graph,
            lam: *lam,
            adj,
            engine,
            steps: HashMap::new(),
            certificate,
            m_required,
            tv_bound,
        })
    }

    pub fn backend(&self) -> SamplerBackend {
        match self.engine {
            Engine::Exact(_) => SamplerBackend::Exact,
            Engine::Truncated { .. } => SamplerBackend::Truncated,
        }
    }

    /// Cutoff used by the truncated backend.
    pub fn m_used(&self) -> Option<usize> {
        match self.engine {
            Engine::Exact(_) => None,
            Engine::Truncated { m, .. } => Some(m),
        }
    }

    /// Cutoff meeting the per-step budget `ε/(2 n_R)`.
    pub fn m_required(&self) -> Option<usize> {
        self.m_required
    }

    pub fn certificate(&self) -> Option<&KpCertificate> {
        self.certificate.as_ref()
    }

    /// Bound on the total-variation distance between the output law and
    /// `ν` at the cutoff in use; zero for the exact backend.
    pub fn tv_bound(&self) -> f64 {
        self.tv_bound
    }

    fn log_xi(&mut self, free: &FixedBitSet) -> Result<f64, SamplerError> {
        if free.is_clear() {
            return Ok(0.0);
        }
        match &mut self.engine {
            Engine::Exact(side) => Ok(side.xi(to_mask(free)).ln()),
            Engine::Truncated { m, limits, log_xi } => {
                if let Some(&x) = log_xi.get(free) {
                    return Ok(x);
                }
                let allowed: Vec<bool> = (0..self.graph.n_right())
                    .map(|v| free.contains(v))
                    .collect();
                let set = PolymerSet::restricted(self.graph, &self.lam, *m - 1, Some(&allowed));
                let x = expansion_sum(&set, *m, *limits)?;
                log_xi.insert(free.clone(), x);
                Ok(x)
            }
        }
    }

    /// Polymers `γ ∋ v` inside `free`, with weights.
    fn candidates(&self, v: usize, free: &FixedBitSet) -> Vec<(Vec<usize>, f64)> {
        match &self.engine {
            Engine::Exact(side) => side
                .polymers_at(v, to_mask(free))
                .into_iter()
                .map(|(mask, w)| ((0..64).filter(|&i| mask >> i & 1 == 1).collect(), w))
                .collect(),
            Engine::Truncated { m, .. } => {
                let mut out = Vec::new();
                grow_connected(
                    self.adj.lists(),
                    v,
                    |u| free.contains(u),
                    |_| 1,
                    m - 1,
                    |s| {
                        let mut g = s.to_vec();
                        g.sort_unstable();
                        out.push(g);
                        true
                    },
                );
                out.sort_unstable();
                out.into_iter()
                    .map(|g| {
                        let w = Polymer::from_sorted(self.graph, g.clone(), &self.lam).weight;
                        (g, w)
                    })
                    .collect()
            }
        }
    }

    fn closed_neighborhood(&self, gamma: &[usize]) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.graph.n_right());
        for &v in gamma {
            out.insert(v);
            for &u in self.adj.neighbors(v) {
                out.insert(u);
            }
        }
        out
    }

    fn step(&mut self, v: usize, free: &FixedBitSet) -> Result<&Step, SamplerError> {
        let key = (v, free.clone());
        if !self.steps.contains_key(&key) {
            let mut outcomes = Vec::new();
            let mut log_weights = Vec::new();
            let mut without = free.clone();
            without.set(v, false);
            log_weights.push(self.log_xi(&without)?);
            outcomes.push((None, without));
            for (gamma, w) in self.candidates(v, free) {
                if w <= 0.0 {
                    continue;
                }
                let mut rest = free.clone();
                rest.difference_with(&self.closed_neighborhood(&gamma));
                log_weights.push(w.ln() + self.log_xi(&rest)?);
                outcomes.push((Some(gamma), rest));
            }
            let top = log_weights
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let mut acc = 0.0;
            let mut cumulative: Vec<f64> = log_weights
                .iter()
                .map(|lw| {
                    acc += (lw - top).exp();
                    acc
                })
                .collect();
            cumulative.iter_mut().for_each(|c| *c /= acc);
            self.steps.insert(
                key.clone(),
                Step {
                    outcomes,
                    cumulative,
                },
            );
        }
        Ok(&self.steps[&key])
    }

    pub fn sample_config<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<PolymerConfig, SamplerError> {
        let n_right = self.graph.n_right();
        let mut free = FixedBitSet::with_capacity(n_right);
        free.insert_range(..);
        let mut config = PolymerConfig::default();
        for v in 0..n_right {
            if !free.contains(v) {
                continue;
            }
            let u: f64 = rng.gen();
            let step = self.step(v, &free)?;
            let pick = step
                .cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(step.outcomes.len() - 1);
            let (gamma, next) = step.outcomes[pick].clone();
            config.decided.push(v);
            if let Some(g) = gamma {
                config.chosen.push(g);
            }
            free = next;
        }
        Ok(config)
    }

    pub fn sample_set<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<Vec<Vertex>, SamplerError> {
        let config = self.sample_config(rng)?;
        Ok(extend_to_independent_set(
            self.graph,
            &config,
            self.lam.lambda_l,
            rng,
        ))
    }

    /// The exact law of [`Self::sample_config`], as `(union mask, p)` in
    /// increasing mask order. Walks the whole decision tree, so only for
    /// small right sides.
    pub fn config_law(&mut self) -> Result<Vec<(u64, f64)>, SamplerError> {
        let n_right = self.graph.n_right();
        if n_right > 20 {
            return Err(SamplerError::InvalidParameter(format!(
                "decision-tree walk needs n_R <= 20, got {n_right}"
            )));
        }
        let mut law: HashMap<u64, f64> = HashMap::new();
        let mut full = FixedBitSet::with_capacity(n_right);
        full.insert_range(..);
        let mut stack = vec![(0usize, full, 0u64, 1.0f64)];
        while let Some((v, free, union, p)) = stack.pop() {
            let Some(v) = (v..n_right).find(|&u| free.contains(u)) else {
                *law.entry(union).or_default() += p;
                continue;
            };
            let step = self.step(v, &free)?.clone();
            let mut prev = 0.0;
            for ((gamma, next), &c) in step.outcomes.iter().zip(&step.cumulative) {
                let q = c - prev;
                prev = c;
                let added = gamma.iter().flatten().fold(union, |m, &u| m | 1 << u);
                stack.push((v + 1, next.clone(), added, p * q));
            }
        }
        let mut out: Vec<(u64, f64)> = law.into_iter().collect();
        out.sort_unstable_by_key(|&(m, _)| m);
        Ok(out)
    }
}

fn to_mask(free: &FixedBitSet) -> u64 {
    free.ones().fold(0u64, |m, v| m | 1 << v)
}

/// Smallest `m` with `e^{2δ} − 1 <= ε/(2 n_R)` for `δ = n_R e^{−mη}`.
fn step_cutoff(n_right: usize, epsilon: f64, eta: f64) -> usize {
    let n = n_right as f64;
    let delta = (epsilon / (2.0 * n)).ln_1p() / 2.0;
    ((n / delta).ln() / eta).ceil().max(1.0) as usize
}

/// `n_R (e^{2δ} − 1)` for the ratio errors plus `n_R e^{−(1/2+η)m}` for
/// polymers of size `>= m`, which are never proposed; capped at 1.
fn truncated_tv_bound(n_right: usize, m: usize, eta: f64) -> f64 {
    let n = n_right as f64;
    let delta = n * (-(m as f64) * eta).exp();
    let ratio = n * (2.0 * delta).exp_m1();
    let large = n * (-(m as f64) * (0.5 + eta)).exp();
    (ratio + large).min(1.0)
}

/// Adds each left vertex with no neighbor in the union of the chosen
/// polymers independently with probability `λ_L/(1+λ_L)`. The result is
/// sorted, left vertices first.
pub fn extend_to_independent_set<R: Rng + ?Sized>(
    graph: &BipartiteGraph,
    config: &PolymerConfig,
    lambda_l: f64,
    rng: &mut R,
) -> Vec<Vertex> {
    let union = config.union();
    let mut blocked = vec![false; graph.n_left()];
    for &v in &union {
        for &u in graph.right_neighbors(v) {
            blocked[u] = true;
        }
    }
    let p = lambda_l / (1.0 + lambda_l);
    let mut out: Vec<Vertex> = (0..graph.n_left())
        .filter(|&u| !blocked[u] && rng.gen::<f64>() < p)
        .map(Vertex::left)
        .collect();
    out.extend(union.into_iter().map(Vertex::right));
    out
}

pub fn sample_polymer_config(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    epsilon: f64,
    seed: u64,
    options: &SamplerOptions,
) -> Result<PolymerConfig, SamplerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PolymerSampler::new(graph, lam, epsilon, options)?.sample_config(&mut rng)
}

pub fn sample_independent_set(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    epsilon: f64,
    seed: u64,
    options: &SamplerOptions,
) -> Result<Vec<Vertex>, SamplerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PolymerSampler::new(graph, lam, epsilon, options)?.sample_set(&mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;
    use crate::oracle;

    fn lam(l: f64, r: f64) -> Fugacities {
        Fugacities::new(l, r).unwrap()
    }

    fn k11() -> BipartiteGraph {
        BipartiteGraph::new(1, 1, [(0, 0)]).unwrap()
    }

    fn exact() -> SamplerOptions {
        SamplerOptions {
            backend: SamplerBackend::Exact,
            ..SamplerOptions::default()
        }
    }

    #[test]
    fn single_edge_law() {
        let w = 0.1 / 11.0;
        let g = k11();
        for options in [exact(), SamplerOptions::default()] {
            let mut s = PolymerSampler::new(&g, &lam(10.0, 0.1), 0.05, &options).unwrap();
            let law = s.config_law().unwrap();
            assert_eq!(law.len(), 2);
            assert!((law[1].1 - w / (1.0 + w)).abs() < 1e-12, "{law:?}");
        }
    }

    #[test]
    fn single_edge_frequencies() {
        let g = k11();
        let mut s =
            PolymerSampler::new(&g, &lam(10.0, 0.1), 0.05, &SamplerOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| !s.sample_config(&mut rng).unwrap().chosen.is_empty())
            .count();
        let p = 0.1 / 11.1;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() <= 3.0 * se);
    }

    #[test]
    fn zero_right_fugacity_gives_empty() {
        let g = GraphFamily::EvenCycle { n: 8 }.generate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s =
            PolymerSampler::new(&g, &lam(1.0, 0.0), 0.1, &SamplerOptions::default()).unwrap();
        for _ in 0..100 {
            let c = s.sample_config(&mut rng).unwrap();
            assert!(c.chosen.is_empty());
            assert_eq!(c.decided, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn star_exact_law() {
        let star = GraphFamily::StarCenterLeft { k: 2 }.generate().unwrap();
        let l = lam(1.0, 1.0);
        assert_eq!(
            PolymerSampler::new(&star, &l, 0.1, &SamplerOptions::default()).err(),
            Some(SamplerError::NotCertified)
        );
        let mut s = PolymerSampler::new(&star, &l, 0.1, &exact()).unwrap();
        let law = s.config_law().unwrap();
        let expected = [(0b00, 1.0), (0b01, 0.5), (0b10, 0.5), (0b11, 0.5)];
        for ((mask, p), (em, ep)) in law.iter().zip(expected) {
            assert_eq!(*mask, em);
            assert!((p - ep / 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_backend_reproduces_nu() {
        for seed in 0..4 {
            let g = GraphFamily::RandomBiregular {
                d_left: 2,
                d_right: 3,
                n_left: 6,
                seed,
            }
            .generate()
            .unwrap();
            let l = lam(1.5, 0.7);
            let law = PolymerSampler::new(&g, &l, 0.1, &exact())
                .unwrap()
                .config_law()
                .unwrap();
            let nu: Vec<(u64, f64)> = oracle::exact_nu(&g, &l)
                .unwrap()
                .into_iter()
                .filter(|&(_, p)| p > 0.0)
                .collect();
            assert_eq!(law.len(), nu.len());
            for ((a, p), (b, q)) in law.iter().zip(&nu) {
                assert_eq!(a, b);
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extension_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let single = PolymerConfig {
            chosen: vec![vec![0]],
            decided: vec![0],
        };
        assert_eq!(
            extend_to_independent_set(&k11(), &single, 1.0, &mut rng),
            vec![Vertex::right(0)]
        );
        let star = GraphFamily::StarCenterLeft { k: 2 }.generate().unwrap();
        let pair = PolymerConfig {
            chosen: vec![vec![0, 1]],
            decided: vec![0],
        };
        assert_eq!(
            extend_to_independent_set(&star, &pair, 7.0, &mut rng),
            vec![Vertex::right(0), Vertex::right(1)]
        );
        let empty = PolymerConfig::default();
        let n = 20_000;
        let hits = (0..n)
            .filter(|_| !extend_to_independent_set(&k11(), &empty, 1.0, &mut rng).is_empty())
            .count();
        assert!((hits as f64 / n as f64 - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn draws_are_independent_sets_and_reproducible() {
        let g = GraphFamily::EvenCycle { n: 12 }.generate().unwrap();
        let l = lam(50.0, 0.1);
        let a = sample_independent_set(&g, &l, 0.05, 11, &SamplerOptions::default()).unwrap();
        let b = sample_independent_set(&g, &l, 0.05, 11, &SamplerOptions::default()).unwrap();
        assert_eq!(a, b);
        let mut s = PolymerSampler::new(&g, &l, 0.05, &SamplerOptions::default()).unwrap();
        assert!(s.tv_bound() > 0.0 && s.tv_bound() <= 1.0);
        assert!(s.m_used().unwrap() <= s.m_required().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let c = s.sample_config(&mut rng).unwrap();
            assert!(c.is_valid(&g));
            let set = extend_to_independent_set(&g, &c, l.lambda_l, &mut rng);
            assert!(g.is_independent(&set));
        }
    }

    #[test]
    fn truncated_law_is_close_to_nu() {
        let g = GraphFamily::RandomBiregular {
            d_left: 2,
            d_right: 4,
            n_left: 4,
            seed: 1,
        }
        .generate()
        .unwrap();
        let l = lam(50.0, 0.1);
        let mut s = PolymerSampler::new(&g, &l, 0.05, &SamplerOptions::default()).unwrap();
        let law = s.config_law().unwrap();
        let nu = oracle::exact_nu(&g, &l).unwrap();
        let tv: f64 = nu
            .iter()
            .map(|&(mask, q)| {
                let p = law
                    .iter()
                    .find(|&&(m, _)| m == mask)
                    .map_or(0.0, |&(_, p)| p);
                (p - q).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 1e-9, "tv = {tv}");
    }
}
