//! Brute-force and independent exact computations for small `n`.
//!
//! Everything here is deliberately simple: enumeration of all DAGs, of all
//! orders, and subset recursions that do not share code with the main
//! dynamic program beyond the score table.

use alloc::vec;
use alloc::vec::Vec;

use crate::dag::{Dag, TotalOrder};
use crate::dp::{AlphaTables, EdgeMatrix};
use crate::error::{Error, Result};
use crate::features::{DagView, FeatureExpr};
use crate::math::{log_add_exp, log_sub_exp, LogAccumulator};
use crate::scores::FamilyScoreTable;
use crate::varset::{bounded_subsets_of, VarSet};

/// Largest `n` accepted by DAG enumeration.
pub const MAX_ENUMERATION_VARIABLES: usize = 6;
/// Largest `n` for order-modular enumeration via linear-extension counts.
pub const MAX_ORDER_MODULAR_VARIABLES: usize = 5;
/// Largest `n` for the (order × DAG) double enumeration.
pub const MAX_DOUBLE_ENUMERATION_VARIABLES: usize = 4;
/// Largest `n` for enumerating all orders.
pub const MAX_ORDER_ENUMERATION_VARIABLES: usize = 9;
/// Largest `n` for the inclusion–exclusion evidence recursion (3^n work).
pub const MAX_INCLUSION_EXCLUSION_VARIABLES: usize = 22;
/// Largest `n` for exact-integer linear-extension counts.
pub const MAX_EXACT_EXTENSION_VARIABLES: usize = 20;
/// Largest `n` for log-mode linear-extension counts.
pub const MAX_LOG_EXTENSION_VARIABLES: usize = 25;

fn guard(what: &'static str, limit: usize, got: usize) -> Result<()> {
    if got > limit {
        Err(Error::Guard { what, limit, got })
    } else {
        Ok(())
    }
}

/// Streams every DAG on `n` nodes with in-degree at most `k`, each once.
///
/// Parent sets are assigned node by node (backtracking); a choice is pruned
/// as soon as it closes a cycle among the nodes assigned so far.
pub struct DagEnumerator {
    n: usize,
    choices: Vec<Vec<VarSet>>,
    idx: Vec<usize>,
    parents: Vec<VarSet>,
    depth: usize,
    started: bool,
    done: bool,
}

/// All DAGs on `n` nodes with in-degree at most `k`.
pub fn enumerate_dags(n: usize, k: usize) -> Result<DagEnumerator> {
    guard("variables for DAG enumeration", MAX_ENUMERATION_VARIABLES, n)?;
    let choices = (0..n)
        .map(|i| bounded_subsets_of(VarSet::full(n).without(i), k).collect())
        .collect();
    Ok(DagEnumerator {
        n,
        choices,
        idx: vec![0; n],
        parents: vec![VarSet::EMPTY; n],
        depth: 0,
        started: false,
        done: n == 0,
    })
}

impl DagEnumerator {
    /// Would giving `node` the parents `pa` close a cycle among assigned nodes?
    fn closes_cycle(&self, node: usize, pa: VarSet) -> bool {
        // walk ancestors of pa through already assigned nodes (< node)
        let mut seen = VarSet::EMPTY;
        let mut stack: Vec<usize> = pa.iter().collect();
        while let Some(v) = stack.pop() {
            if v == node {
                return true;
            }
            if seen.contains(v) {
                continue;
            }
            seen = seen.with(v);
            if v < node {
                stack.extend(self.parents[v].iter());
            }
        }
        false
    }

    /// Advances `idx[depth]` to the next acyclic choice; false when exhausted.
    fn settle(&mut self) -> bool {
        let d = self.depth;
        while self.idx[d] < self.choices[d].len() {
            let pa = self.choices[d][self.idx[d]];
            if !self.closes_cycle(d, pa) {
                self.parents[d] = pa;
                return true;
            }
            self.idx[d] += 1;
        }
        false
    }
}

impl Iterator for DagEnumerator {
    type Item = Dag;

    fn next(&mut self) -> Option<Dag> {
        if self.done {
            return None;
        }
        if self.started {
            // step the deepest level
            self.depth = self.n - 1;
            self.idx[self.depth] += 1;
        } else {
            self.started = true;
            self.depth = 0;
        }
        loop {
            if self.settle() {
                if self.depth + 1 == self.n {
                    return Some(Dag::from_parents_unchecked(self.parents.clone()));
                }
                self.depth += 1;
                self.idx[self.depth] = 0;
            } else {
                if self.depth == 0 {
                    self.done = true;
                    return None;
                }
                self.parents[self.depth] = VarSet::EMPTY;
                self.depth -= 1;
                self.idx[self.depth] += 1;
            }
        }
    }
}

fn weighted_feature_means(
    dags: impl Iterator<Item = (Dag, f64)>,
    features: &[FeatureExpr],
) -> Vec<f64> {
    let mut total = LogAccumulator::new();
    let mut hits = vec![LogAccumulator::new(); features.len()];
    for (g, w) in dags {
        total.add(w);
        let view = DagView::new(&g);
        for (f, acc) in features.iter().zip(hits.iter_mut()) {
            if f.eval_view(&view) {
                acc.add(w);
            }
        }
    }
    let z = total.value();
    hits.iter().map(|a| crate::math::exp(a.value() - z).clamp(0.0, 1.0)).collect()
}

fn check_features(n: usize, features: &[FeatureExpr]) -> Result<()> {
    features.iter().try_for_each(|f| f.validate(n))
}

/// Exact `p⊀(f | D)` for each feature by enumerating all DAGs.
pub fn exact_posterior_structure_modular(beta: &FamilyScoreTable, features: &[FeatureExpr]) -> Result<Vec<f64>> {
    let n = beta.n();
    check_features(n, features)?;
    let dags = enumerate_dags(n, beta.max_indegree())?;
    Ok(weighted_feature_means(
        dags.map(|g| {
            let w = beta.log_joint(g.parents());
            (g, w)
        }),
        features,
    ))
}

/// Exact `p≺(f | D)` for each feature: DAG enumeration weighted by `|≺_G|`.
pub fn exact_posterior_order_modular(beta: &FamilyScoreTable, features: &[FeatureExpr]) -> Result<Vec<f64>> {
    let n = beta.n();
    guard("variables for order-modular enumeration", MAX_ORDER_MODULAR_VARIABLES, n)?;
    check_features(n, features)?;
    let dags = enumerate_dags(n, beta.max_indegree())?;
    Ok(weighted_feature_means(
        dags.map(|g| {
            let w = beta.log_joint(g.parents()) + log_count_linear_extensions(&g).expect("guarded");
            (g, w)
        }),
        features,
    ))
}

/// Exact `p≺(f | D)` by summing over every (order, DAG consistent with it) pair.
pub fn exact_posterior_order_modular_double(beta: &FamilyScoreTable, features: &[FeatureExpr]) -> Result<Vec<f64>> {
    let n = beta.n();
    guard("variables for order × DAG enumeration", MAX_DOUBLE_ENUMERATION_VARIABLES, n)?;
    check_features(n, features)?;
    let k = beta.max_indegree();
    let mut pairs = Vec::new();
    for order in TotalOrder::all(n) {
        let opts: Vec<Vec<VarSet>> = order
            .predecessor_sets()
            .iter()
            .map(|&u| bounded_subsets_of(u, k).collect())
            .collect();
        let mut pick = vec![0usize; n];
        loop {
            let parents: Vec<VarSet> = (0..n).map(|i| opts[i][pick[i]]).collect();
            let w = beta.log_joint(&parents);
            pairs.push((Dag::from_parents_unchecked(parents), w));
            let mut i = 0;
            while i < n {
                pick[i] += 1;
                if pick[i] < opts[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(weighted_feature_means(pairs.into_iter(), features))
}

/// Order-modular edge posteriors by enumerating every order and summing
/// parent sets directly (no subset transforms).
pub fn order_enumeration_edge_posteriors(beta: &FamilyScoreTable) -> Result<EdgeMatrix> {
    let n = beta.n();
    guard("variables for order enumeration", MAX_ORDER_ENUMERATION_VARIABLES, n)?;
    let k = beta.max_indegree();
    let mut total = LogAccumulator::new();
    let mut edge = vec![LogAccumulator::new(); n * n];
    let mut per_node = vec![(0.0f64, vec![f64::NEG_INFINITY; n]); n];
    for order in TotalOrder::all(n) {
        let mut log_joint = 0.0;
        for (i, u) in order.families() {
            let mut all = f64::NEG_INFINITY;
            let with = &mut per_node[i].1;
            with.iter_mut().for_each(|w| *w = f64::NEG_INFINITY);
            for pa in bounded_subsets_of(u, k) {
                let b = beta.log_beta(i, pa);
                all = log_add_exp(all, b);
                for j in pa.iter() {
                    with[j] = log_add_exp(with[j], b);
                }
            }
            per_node[i].0 = all;
            log_joint += all;
        }
        total.add(log_joint);
        for i in 0..n {
            let (all, with) = &per_node[i];
            for j in 0..n {
                if with[j] > f64::NEG_INFINITY {
                    edge[i * n + j].add(log_joint - all + with[j]);
                }
            }
        }
    }
    let z = total.value();
    let mut m = EdgeMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m.set(i, j, crate::math::exp(edge[i * n + j].value() - z).clamp(0.0, 1.0));
            }
        }
    }
    Ok(m)
}

fn extension_guard(g: &Dag, limit: usize) -> Result<()> {
    guard("variables for linear-extension counting", limit, g.n())
}

/// Number of total orders consistent with `g`, exactly.
pub fn count_linear_extensions(g: &Dag) -> Result<u128> {
    extension_guard(g, MAX_EXACT_EXTENSION_VARIABLES)?;
    let children = g.children();
    let n = g.n();
    let mut count = vec![0u128; 1usize << n];
    count[0] = 1;
    for s in 1..(1usize << n) {
        let set = VarSet::from_bits(s as u32);
        count[s] = set
            .iter()
            .filter(|&i| children[i].intersection(set).is_empty())
            .map(|i| count[s & !(1 << i)])
            .sum();
    }
    Ok(count[(1usize << n) - 1])
}

/// `ln |≺_G|` by the same recursion in log space.
pub fn log_count_linear_extensions(g: &Dag) -> Result<f64> {
    extension_guard(g, MAX_LOG_EXTENSION_VARIABLES)?;
    let children = g.children();
    let n = g.n();
    let mut count = vec![f64::NEG_INFINITY; 1usize << n];
    count[0] = 0.0;
    for s in 1..(1usize << n) {
        let set = VarSet::from_bits(s as u32);
        let mut acc = LogAccumulator::new();
        for i in set.iter() {
            if children[i].intersection(set).is_empty() {
                acc.add(count[s & !(1 << i)]);
            }
        }
        count[s] = acc.value();
    }
    Ok(count[(1usize << n) - 1])
}

/// Where an evidence value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvidenceSource {
    Enumeration,
    SubsetDp,
    InclusionExclusion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidenceValue {
    pub log_value: f64,
    pub source: EvidenceSource,
}

/// `ln p⊀(D)` by summing the joint of every DAG.
pub fn evidence_by_enumeration(beta: &FamilyScoreTable) -> Result<EvidenceValue> {
    let mut acc = LogAccumulator::new();
    for g in enumerate_dags(beta.n(), beta.max_indegree())? {
        acc.add(beta.log_joint(g.parents()));
    }
    Ok(EvidenceValue { log_value: acc.value(), source: EvidenceSource::Enumeration })
}

/// `ln p⊀(D)` by inclusion–exclusion over sink sets:
/// `H(S) = Σ_{∅≠T⊆S} (−1)^{|T|+1} Π_{i∈T} α_i(S∖T) · H(S∖T)`, answer `H(V)`.
pub fn evidence_structure_modular(alpha: &AlphaTables) -> Result<EvidenceValue> {
    let n = alpha.n();
    guard("variables for inclusion–exclusion evidence", MAX_INCLUSION_EXCLUSION_VARIABLES, n)?;
    let size = 1usize << n;
    let mut h = vec![f64::NEG_INFINITY; size];
    h[0] = 0.0;
    for s in 1..size {
        let mut pos = LogAccumulator::new();
        let mut neg = LogAccumulator::new();
        // nonempty submasks t of s
        let mut t = s;
        while t != 0 {
            let w = s & !t;
            if h[w] > f64::NEG_INFINITY {
                let ws = VarSet::from_bits(w as u32);
                let term = VarSet::from_bits(t as u32)
                    .iter()
                    .fold(h[w], |acc, i| acc + alpha.get(i, ws));
                if t.count_ones() % 2 == 1 {
                    pos.add(term);
                } else {
                    neg.add(term);
                }
            }
            t = (t - 1) & s;
        }
        let (p, q) = (pos.value(), neg.value());
        if p.is_nan() || q.is_nan() || p < q {
            return Err(Error::Domain("inclusion–exclusion lost all precision".into()));
        }
        h[s] = log_sub_exp(p, q);
    }
    Ok(EvidenceValue { log_value: h[size - 1], source: EvidenceSource::InclusionExclusion })
}

/// Exact `p≺(G | D)` for every DAG, given `ln p≺(D)`.
pub fn order_modular_dag_posteriors(beta: &FamilyScoreTable, log_order_evidence: f64) -> Result<Vec<(Dag, f64)>> {
    guard("variables for order-modular enumeration", MAX_ORDER_MODULAR_VARIABLES, beta.n())?;
    enumerate_dags(beta.n(), beta.max_indegree())?
        .map(|g| {
            let lp = beta.log_joint(g.parents()) + log_count_linear_extensions(&g)? - log_order_evidence;
            Ok((g, lp))
        })
        .collect()
}

/// `ln p⊀(D)` reconstructed from `ln p≺(D)` as
/// `p⊀(D) = p≺(D) · Σ_G p≺(G | D) / |≺_G|`.
pub fn evidence_from_order_modular(beta: &FamilyScoreTable, log_order_evidence: f64) -> Result<EvidenceValue> {
    let mut acc = LogAccumulator::new();
    for (g, lp) in order_modular_dag_posteriors(beta, log_order_evidence)? {
        acc.add(lp - log_count_linear_extensions(&g)?);
    }
    Ok(EvidenceValue { log_value: log_order_evidence + acc.value(), source: EvidenceSource::SubsetDp })
}
