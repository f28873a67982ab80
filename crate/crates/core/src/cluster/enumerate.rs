//! Canonical enumeration of clusters.
//!
//! For each anchor polymer `a`, the connected sets of distinct polymers
//! `S ∋ a` whose other members are later than `a` in canonical order are
//! grown through the incompatibility graph; every multiplicity vector on `S`
//! with total size below `m` is then one cluster. Each multiset has a unique
//! least polymer, so each is produced exactly once.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_rational::Ratio;
use rayon::prelude::*;

use super::ursell::{SlotDp, SlotValue};
use super::{Cluster, ClusterError, ClusterLimits, MAX_EXACT_SLOTS};
use crate::connected::grow_connected;
use crate::polymer::PolymerSet;
use crate::scalar::Scalar;

/// Number of clusters counted locally before touching the shared counter.
const COUNT_BATCH: u64 = 1024;
/// Cached incompatibility patterns per worker before the cache is dropped.
const CACHE_PATTERNS: usize = 1 << 14;
/// Per-worker bound on memoized count vectors across all patterns.
const CACHE_ENTRIES: usize = 1 << 21;

/// One cluster as seen during enumeration, borrowing its member list.
#[derive(Debug, Clone, Copy)]
pub struct ClusterTerm<'a, T> {
    members: &'a [(usize, u32)],
    total_size: usize,
    value: SlotValue,
    weight_product: T,
}

impl<T: Scalar> ClusterTerm<'_, T> {
    /// `(polymer id, multiplicity)` pairs, ids ascending.
    pub fn members(&self) -> &[(usize, u32)] {
        self.members
    }

    pub fn total_size(&self) -> usize {
        self.total_size
    }

    pub fn slots(&self) -> u32 {
        self.members.iter().map(|&(_, m)| m).sum()
    }

    /// `∏ w_γ^{m_γ}`.
    pub fn weight_product(&self) -> T {
        self.weight_product
    }

    /// `ordering_multiplier · φ(H) = c(H) / ∏ m_γ!`, rounded once from the
    /// exact fraction whenever the signed sum fits in `i128`.
    pub fn coefficient(&self) -> f64 {
        match self.exact_coefficient() {
            Some(r) => *r.numer() as f64 / *r.denom() as f64,
            None => self.value.normalized,
        }
    }

    fn exact_coefficient(&self) -> Option<Ratio<i128>> {
        let c = self.value.exact?;
        if self.slots() as usize > MAX_EXACT_SLOTS {
            return None;
        }
        let denom: i128 = self
            .members
            .iter()
            .map(|&(_, m)| factorial(m as usize))
            .product();
        Some(Ratio::new(c, denom))
    }

    /// Contribution to `T_m`: `coefficient · ∏ w_γ^{m_γ}`.
    pub fn contribution(&self) -> T {
        self.weight_product * T::from_real(self.coefficient())
    }

    /// `Y_v(Γ)`: number of slots whose polymer contains `v`.
    pub fn occupancy(&self, set: &PolymerSet<T>, v: usize) -> u32 {
        self.members
            .iter()
            .filter(|&&(id, _)| set.polymers()[id].contains(v))
            .map(|&(_, m)| m)
            .sum()
    }

    pub fn materialize(&self, set: &PolymerSet<T>) -> Result<Cluster<T>, ClusterError> {
        let k = self.slots() as usize;
        let c = match self.value.exact {
            Some(c) if k <= MAX_EXACT_SLOTS => c,
            _ => return Err(ClusterError::TooLarge(k)),
        };
        let ursell = Ratio::new(c, factorial(k));
        let denom: i128 = self
            .members
            .iter()
            .map(|&(_, m)| factorial(m as usize))
            .product();
        let ordering_multiplier = (factorial(k) / denom) as u128;
        let phi = *ursell.numer() as f64 / *ursell.denom() as f64;
        Ok(Cluster {
            polymers: self
                .members
                .iter()
                .map(|&(id, m)| (set.polymers()[id].clone(), m))
                .collect(),
            total_size: self.total_size,
            ursell,
            ordering_multiplier,
            weight: self.weight_product * T::from_real(phi),
        })
    }
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

/// Folds every cluster of total size below `m` into one accumulator per
/// anchor polymer. Anchors run in parallel; the returned accumulators are
/// in anchor order, so reducing them sequentially is deterministic.
pub fn fold_clusters<T, A, I, F>(
    set: &PolymerSet<T>,
    m: usize,
    limits: ClusterLimits,
    init: I,
    fold: F,
) -> Result<Vec<A>, ClusterError>
where
    T: Scalar,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &ClusterTerm<'_, T>) + Sync + Send,
{
    if m == 0 {
        return Err(ClusterError::InvalidCutoff);
    }
    let budget = m - 1;
    let counted = AtomicU64::new(0);
    let exceeded = AtomicBool::new(false);
    let results: Vec<Option<A>> = (0..set.len())
        .into_par_iter()
        .map_init(PatternCache::default, |cache, anchor| {
            if exceeded.load(Ordering::Relaxed) {
                return None;
            }
            let mut acc = init();
            let mut local = 0u64;
            let mut tick = || {
                local += 1;
                if local == COUNT_BATCH {
                    local = 0;
                    let total = counted.fetch_add(COUNT_BATCH, Ordering::Relaxed) + COUNT_BATCH;
                    if total > limits.max_clusters || exceeded.load(Ordering::Relaxed) {
                        exceeded.store(true, Ordering::Relaxed);
                        return false;
                    }
                }
                true
            };
            let finished = visit_anchor(set, anchor, budget, cache, &mut |term| {
                fold(&mut acc, term);
                tick()
            });
            let total = counted.fetch_add(local, Ordering::Relaxed) + local;
            if !finished || total > limits.max_clusters {
                exceeded.store(true, Ordering::Relaxed);
                return None;
            }
            Some(acc)
        })
        .collect();
    if exceeded.load(Ordering::Relaxed) {
        return Err(ClusterError::CapExceeded {
            cap: limits.max_clusters,
            m,
        });
    }
    Ok(results
        .into_iter()
        .map(|a| a.expect("every anchor finished"))
        .collect())
}

/// `hist[s]` is the number of clusters of total size `s`, for `s < m`.
/// Connected polymer sets are enumerated, but multiplicities are counted
/// combinatorially, so this is far cheaper than [`fold_clusters`]. The cap
/// applies to the number of connected sets visited.
pub fn cluster_size_histogram<T: Scalar>(
    set: &PolymerSet<T>,
    m: usize,
    limits: ClusterLimits,
) -> Result<Vec<u64>, ClusterError> {
    if m == 0 {
        return Err(ClusterError::InvalidCutoff);
    }
    let budget = m - 1;
    let polymers = set.polymers();
    let size = |id: usize| polymers[id].size();
    let visited = AtomicU64::new(0);
    let exceeded = AtomicBool::new(false);
    let hist = (0..set.len())
        .into_par_iter()
        .filter(|&a| !polymers[a].weight.is_zero())
        .fold(
            || vec![0u64; m],
            |mut hist, anchor| {
                if exceeded.load(Ordering::Relaxed) {
                    return hist;
                }
                let mut local = 0u64;
                let mut ways = Vec::new();
                grow_connected(
                    set.incompatibility_lists(),
                    anchor,
                    |u| u > anchor && !polymers[u].weight.is_zero(),
                    size,
                    budget,
                    |ids| {
                        let base: usize = ids.iter().map(|&id| size(id)).sum();
                        let spare = budget - base;
                        // ways[t]: multiplicity vectors adding exactly t to the size
                        ways.clear();
                        ways.resize(spare + 1, 0u64);
                        ways[0] = 1;
                        for &id in ids {
                            let s = size(id);
                            for t in s..=spare {
                                ways[t] = ways[t].saturating_add(ways[t - s]);
                            }
                        }
                        for (t, &w) in ways.iter().enumerate() {
                            hist[base + t] = hist[base + t].saturating_add(w);
                        }
                        local += 1;
                        if local == COUNT_BATCH {
                            local = 0;
                            let total =
                                visited.fetch_add(COUNT_BATCH, Ordering::Relaxed) + COUNT_BATCH;
                            if total > limits.max_clusters || exceeded.load(Ordering::Relaxed) {
                                exceeded.store(true, Ordering::Relaxed);
                                return false;
                            }
                        }
                        true
                    },
                );
                visited.fetch_add(local, Ordering::Relaxed);
                hist
            },
        )
        .reduce(
            || vec![0u64; m],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.saturating_add(y);
                }
                a
            },
        );
    if exceeded.load(Ordering::Relaxed) || visited.load(Ordering::Relaxed) > limits.max_clusters {
        return Err(ClusterError::CapExceeded {
            cap: limits.max_clusters,
            m,
        });
    }
    Ok(hist)
}

fn visit_anchor<T: Scalar>(
    set: &PolymerSet<T>,
    anchor: usize,
    budget: usize,
    cache: &mut PatternCache,
    emit: &mut dyn FnMut(&ClusterTerm<'_, T>) -> bool,
) -> bool {
    let polymers = set.polymers();
    // clusters containing a zero-weight polymer contribute nothing
    if polymers[anchor].weight.is_zero() {
        return true;
    }
    let size = |id: usize| polymers[id].size();
    let mut members: Vec<(usize, u32)> = Vec::new();
    grow_connected(
        set.incompatibility_lists(),
        anchor,
        |u| u > anchor && !polymers[u].weight.is_zero(),
        size,
        budget,
        |s| {
            let mut ids = s.to_vec();
            ids.sort_unstable();
            let base: usize = ids.iter().map(|&id| size(id)).sum();
            if cache.patterns.len() > CACHE_PATTERNS || cache.entries > CACHE_ENTRIES {
                cache.patterns.clear();
                cache.entries = 0;
            }
            let dp = cache
                .patterns
                .entry(pattern_key(set, &ids))
                .or_insert_with(|| {
                    SlotDp::new(ids.len(), |i, j| set.are_incompatible(ids[i], ids[j]))
                });
            let before = dp.memo_len();
            members.clear();
            members.extend(ids.iter().map(|&id| (id, 1)));
            let mut walk = MultiplicityWalk {
                set,
                dp,
                members: &mut members,
                emit: &mut *emit,
            };
            let finished = walk.run(0, base, budget - base);
            cache.entries += dp.memo_len() - before;
            finished
        },
    )
}

/// Slot recurrences keyed by incompatibility pattern.
#[derive(Default)]
struct PatternCache {
    patterns: HashMap<Vec<u64>, SlotDp>,
    entries: usize,
}

/// Class count plus the upper triangle of the incompatibility pattern.
fn pattern_key<T: Scalar>(set: &PolymerSet<T>, ids: &[usize]) -> Vec<u64> {
    let s = ids.len();
    let mut key = vec![s as u64];
    let mut word = 0u64;
    let mut bit = 0;
    for i in 0..s {
        for j in i + 1..s {
            if set.are_incompatible(ids[i], ids[j]) {
                word |= 1 << bit;
            }
            bit += 1;
            if bit == 64 {
                key.push(word);
                word = 0;
                bit = 0;
            }
        }
    }
    key.push(word);
    key
}

struct MultiplicityWalk<'a, 'e, T> {
    set: &'a PolymerSet<T>,
    dp: &'a mut SlotDp,
    members: &'a mut Vec<(usize, u32)>,
    emit: &'a mut (dyn FnMut(&ClusterTerm<'_, T>) -> bool + 'e),
}

impl<T: Scalar> MultiplicityWalk<'_, '_, T> {
    fn run(&mut self, pos: usize, total: usize, spare: usize) -> bool {
        if pos == self.members.len() {
            let counts: Vec<u32> = self.members.iter().map(|&(_, m)| m).collect();
            let value = self.dp.eval(&counts);
            let polymers = self.set.polymers();
            let weight_product = self.members.iter().fold(T::one(), |acc, &(id, m)| {
                acc * polymers[id].weight.powi(m as i32)
            });
            let term = ClusterTerm {
                members: self.members,
                total_size: total,
                value,
                weight_product,
            };
            return (self.emit)(&term);
        }
        let size = self.set.polymers()[self.members[pos].0].size();
        let mut extra = 0;
        while extra * size <= spare {
            self.members[pos].1 = 1 + extra as u32;
            if !self.run(pos + 1, total + extra * size, spare - extra * size) {
                self.members[pos].1 = 1;
                return false;
            }
            extra += 1;
        }
        self.members[pos].1 = 1;
        true
    }
}
