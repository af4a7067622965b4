//! Exact order sampling and direct DAG sampling (DDS).
//!
//! Orders are drawn back to front: the last element with probability
//! `L'(V∖{i}) α'_i(V∖{i}) / L'(V)`, then each earlier element conditioned on
//! the suffix already drawn. A DAG is then drawn for each order by picking one
//! parent set per node from its per-order posterior. Each decision consumes
//! exactly one uniform variate, so cached and freshly built cumulative tables
//! yield identical draws.

use alloc::vec::Vec;

use hashbrown::HashMap;
use rand_core::RngCore;

use crate::dag::{Dag, TotalOrder};
use crate::dp::{order_joint, AlphaTables, DpTables};
use crate::math::exp;
use crate::scores::FamilyScoreTable;
use crate::uniform;
use crate::varset::{bounded_subsets, bounded_unrank, deposit, VarSet};

/// Draws one order from `p(≺ | D)`.
pub fn sample_order<R: RngCore + ?Sized>(tables: &DpTables, rng: &mut R) -> TotalOrder {
    let n = tables.n();
    let alpha = tables.alpha();
    let mut sigma = alloc::vec![0usize; n];
    let mut remaining = VarSet::full(n);
    for pos in (0..n).rev() {
        let total = tables.forward(remaining);
        let u = uniform(rng);
        let mut cum = 0.0;
        let mut chosen = None;
        let mut last_positive = None;
        for i in remaining.iter() {
            let rest = remaining.without(i);
            let p = exp(tables.forward(rest) + alpha.get(i, rest) - total);
            if p > 0.0 {
                last_positive = Some(i);
            }
            cum += p;
            if u < cum {
                chosen = Some(i);
                break;
            }
        }
        // rounding can leave the cumulative sum a hair below u
        let i = chosen.or(last_positive).unwrap_or_else(|| remaining.iter().next().unwrap());
        sigma[pos] = i;
        remaining = remaining.without(i);
    }
    TotalOrder::from_vec_unchecked(sigma)
}

/// Draws `count` independent orders.
pub fn sample_orders<R: RngCore + ?Sized>(tables: &DpTables, count: usize, rng: &mut R) -> Vec<TotalOrder> {
    (0..count).map(|_| sample_order(tables, rng)).collect()
}

/// Stable permutation of `orders` by descending `ln p(≺, D)`.
pub fn sort_by_posterior(orders: &[TotalOrder], alpha: &AlphaTables) -> Vec<usize> {
    let keys: Vec<f64> = orders.iter().map(|o| order_joint(o, alpha)).collect();
    let mut idx: Vec<usize> = (0..orders.len()).collect();
    idx.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]));
    idx
}

/// Cumulative parent-set probabilities of `node` given predecessor set `u`,
/// over the canonical list of eligible parent sets.
pub fn cumulative_parent_probabilities(
    beta: &FamilyScoreTable,
    alpha: &AlphaTables,
    node: usize,
    u: VarSet,
) -> Vec<f64> {
    let norm = alpha.get(node, u);
    let mut cum = 0.0;
    bounded_subsets(u.len() as u32, beta.max_indegree() as u32)
        .map(|c| {
            let pa = VarSet::from_bits(deposit(c, u.bits()));
            cum += exp(beta.log_beta(node, pa) - norm);
            cum
        })
        .collect()
}

/// Index `z` with `cum[z-1] <= x < cum[z]`, never landing on a zero-width interval.
fn locate(cum: &[f64], x: f64) -> usize {
    let z = cum.partition_point(|&c| c <= x);
    if z < cum.len() {
        return z;
    }
    // x beyond the rounded total: take the last interval with positive width
    let mut z = cum.len() - 1;
    while z > 0 && cum[z] <= cum[z - 1] {
        z -= 1;
    }
    z
}

/// Counters describing cache behaviour.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub recycles: u64,
    pub evicted_entries: u64,
}

#[derive(Debug, Clone)]
struct CacheEntry {
    cum: Vec<f64>,
    uses: u64,
    inserted: u64,
}

/// Stored cumulative parent-set sequences keyed by `(node, predecessor set)`.
///
/// Capacity counts interval slots (sequence entries), not sequences. When an
/// insertion would exceed it, the least-used sequences are evicted (ties: the
/// earliest inserted first) until at least `batch` slots are reclaimed and the
/// new sequence fits. A sequence larger than the whole capacity is used once
/// and not stored.
#[derive(Debug, Clone)]
pub struct IntervalCache {
    entries: HashMap<(u32, u32), CacheEntry>,
    capacity: Option<usize>,
    batch: usize,
    stored: usize,
    clock: u64,
    stats: CacheStats,
}

/// Default capacity in interval slots.
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 26;

impl Default for IntervalCache {
    fn default() -> Self {
        Self::new(Some(DEFAULT_CACHE_CAPACITY))
    }
}

impl IntervalCache {
    /// `None` means unbounded. The eviction batch defaults to a quarter of the capacity.
    pub fn new(capacity: Option<usize>) -> Self {
        let batch = capacity.map_or(0, |c| (c / 4).max(1));
        IntervalCache { entries: HashMap::new(), capacity, batch, stored: 0, clock: 0, stats: CacheStats::default() }
    }

    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    /// Interval slots currently stored.
    pub fn stored_intervals(&self) -> usize {
        self.stored
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    pub fn contains(&self, node: usize, u: VarSet) -> bool {
        self.entries.contains_key(&(node as u32, u.bits()))
    }

    /// Usage count of a stored sequence.
    pub fn uses(&self, node: usize, u: VarSet) -> Option<u64> {
        self.entries.get(&(node as u32, u.bits())).map(|e| e.uses)
    }

    /// Looks up (or builds and stores) the sequence for `(node, u)` and returns
    /// the index of the interval containing `x`.
    pub fn locate_with(&mut self, node: usize, u: VarSet, x: f64, build: impl FnOnce() -> Vec<f64>) -> usize {
        let key = (node as u32, u.bits());
        if let Some(e) = self.entries.get_mut(&key) {
            e.uses += 1;
            self.stats.hits += 1;
            return locate(&e.cum, x);
        }
        self.stats.misses += 1;
        let cum = build();
        let z = locate(&cum, x);
        self.insert(key, cum);
        z
    }

    fn insert(&mut self, key: (u32, u32), cum: Vec<f64>) {
        let len = cum.len();
        if let Some(cap) = self.capacity {
            if len > cap {
                return;
            }
            if self.stored + len > cap {
                let need = (self.stored + len - cap).max(self.batch);
                self.recycle(need);
            }
        }
        self.clock += 1;
        self.stored += len;
        self.entries.insert(key, CacheEntry { cum, uses: 1, inserted: self.clock });
    }

    /// Evicts the least-used sequences until at least `slots` interval slots
    /// are reclaimed (or the cache is empty). Returns the number of evicted
    /// sequences.
    pub fn recycle(&mut self, slots: usize) -> usize {
        let mut order: Vec<((u64, u64), (u32, u32))> =
            self.entries.iter().map(|(k, e)| ((e.uses, e.inserted), *k)).collect();
        order.sort_unstable();
        let mut reclaimed = 0;
        let mut evicted = 0;
        for (_, key) in order {
            if reclaimed >= slots {
                break;
            }
            if let Some(e) = self.entries.remove(&key) {
                reclaimed += e.cum.len();
                evicted += 1;
            }
        }
        self.stored -= reclaimed;
        self.stats.recycles += 1;
        self.stats.evicted_entries += evicted as u64;
        evicted
    }
}

/// Draws DAGs given orders, reusing cumulative sequences through an optional cache.
pub struct DagSampler<'a> {
    beta: &'a FamilyScoreTable,
    alpha: &'a AlphaTables,
    cache: Option<IntervalCache>,
}

impl<'a> DagSampler<'a> {
    pub fn new(beta: &'a FamilyScoreTable, alpha: &'a AlphaTables, cache: Option<IntervalCache>) -> Self {
        DagSampler { beta, alpha, cache }
    }

    pub fn cache(&self) -> Option<&IntervalCache> {
        self.cache.as_ref()
    }

    /// One DAG consistent with `order`; one uniform per node.
    pub fn sample<R: RngCore + ?Sized>(&mut self, order: &TotalOrder, rng: &mut R) -> Dag {
        let n = order.len();
        let k = self.beta.max_indegree() as u32;
        let mut parents = alloc::vec![VarSet::EMPTY; n];
        for (v, u) in order.families() {
            let x = uniform(rng);
            let (beta, alpha) = (self.beta, self.alpha);
            let build = || cumulative_parent_probabilities(beta, alpha, v, u);
            let z = match &mut self.cache {
                Some(cache) => cache.locate_with(v, u, x, build),
                None => locate(&build(), x),
            };
            let c = bounded_unrank(z, u.len() as u32, k);
            parents[v] = VarSet::from_bits(deposit(c, u.bits()));
        }
        Dag::from_parents_unchecked(parents)
    }
}

/// Draws one DAG for `order` without a cache.
pub fn sample_dag_given_order<R: RngCore + ?Sized>(
    order: &TotalOrder,
    beta: &FamilyScoreTable,
    alpha: &AlphaTables,
    cache: Option<&mut IntervalCache>,
    rng: &mut R,
) -> Dag {
    match cache {
        Some(c) => {
            let mut s = DagSampler::new(beta, alpha, Some(core::mem::take(c)));
            let d = s.sample(order, rng);
            *c = s.cache.take().unwrap();
            d
        }
        None => DagSampler::new(beta, alpha, None).sample(order, rng),
    }
}

/// Options for [`dds`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DdsConfig {
    pub samples: usize,
    /// `None` disables the interval cache.
    pub cache: Option<CacheSettings>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheSettings {
    pub capacity: Option<usize>,
    pub batch: Option<usize>,
}

impl CacheSettings {
    pub fn build(&self) -> IntervalCache {
        let c = IntervalCache::new(self.capacity);
        match self.batch {
            Some(b) => c.with_batch(b),
            None => c,
        }
    }
}

impl Default for CacheSettings {
    fn default() -> Self {
        CacheSettings { capacity: Some(DEFAULT_CACHE_CAPACITY), batch: None }
    }
}

impl DdsConfig {
    pub fn new(samples: usize) -> Self {
        DdsConfig { samples, cache: Some(CacheSettings::default()) }
    }

    pub fn without_cache(self) -> Self {
        DdsConfig { cache: None, ..self }
    }

    pub fn with_cache(self, settings: CacheSettings) -> Self {
        DdsConfig { cache: Some(settings), ..self }
    }
}

/// One DDS draw.
#[derive(Debug, Clone, PartialEq)]
pub struct DagSample {
    pub dag: Dag,
    /// `ln p⊀(G, D)` with the structure prior equal to ρ.
    pub log_joint: f64,
    /// Position of the generating order in draw sequence.
    pub order_index: usize,
}

#[derive(Debug, Clone)]
pub struct DdsOutput {
    /// Samples in DAG-sampling sequence (orders sorted by descending posterior).
    pub samples: Vec<DagSample>,
    /// Orders in draw sequence.
    pub orders: Vec<TotalOrder>,
    pub cache_stats: Option<CacheStats>,
}

/// Direct DAG sampling: `N_o` orders, sorted by posterior, one DAG each.
pub fn dds<R: RngCore + ?Sized>(
    beta: &FamilyScoreTable,
    tables: &DpTables,
    cfg: &DdsConfig,
    rng: &mut R,
) -> DdsOutput {
    let orders = sample_orders(tables, cfg.samples, rng);
    let perm = sort_by_posterior(&orders, tables.alpha());
    let mut sampler = DagSampler::new(beta, tables.alpha(), cfg.cache.map(|c| c.build()));
    let samples = perm
        .iter()
        .map(|&idx| {
            let dag = sampler.sample(&orders[idx], rng);
            let log_joint = beta.log_joint(dag.parents());
            DagSample { dag, log_joint, order_index: idx }
        })
        .collect();
    DdsOutput { samples, orders, cache_stats: sampler.cache().map(IntervalCache::stats) }
}
