//! Feature-posterior estimators built on DDS output.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::dag::{Dag, TotalOrder};
use crate::dp::{edge_posterior_given_order, AlphaTables, EdgeMatrix};
use crate::features::{DagView, FeatureExpr};
use crate::math::{exp, log_sum_exp_iter, LogAccumulator};
use crate::oracle::log_count_linear_extensions;
use crate::sampler::DagSample;
use crate::error::Result;

/// Slack allowed before an evidence ratio above one is reported.
pub const DELTA_TOLERANCE: f64 = 1e-9;

/// A feature-posterior estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Structure-modular posterior mass covered by the samples, when known.
    pub delta: Option<f64>,
    /// `[Δ·p̂, Δ·p̂ + 1 − Δ]`, present exactly when `delta` is.
    pub interval: Option<(f64, f64)>,
    pub n_samples: usize,
    pub unique_dags: Option<usize>,
    /// Set when the raw ratio exceeded one by more than [`DELTA_TOLERANCE`]
    /// (an inexact evidence value); `delta` is then capped at 1.
    pub delta_clamped: bool,
}

impl Estimate {
    fn plain(value: f64, n_samples: usize) -> Self {
        Estimate { value, delta: None, interval: None, n_samples, unique_dags: None, delta_clamped: false }
    }
}

/// Sample mean of a 0/1 feature over every draw (order-modular).
pub fn estimate_dds(samples: &[DagSample], feature: &FeatureExpr) -> Estimate {
    let hits = samples.iter().filter(|s| feature.eval(&s.dag)).count();
    let value = if samples.is_empty() { 0.0 } else { hits as f64 / samples.len() as f64 };
    Estimate::plain(value, samples.len())
}

/// Sample-mean edge frequencies over DAGs.
pub fn estimate_dds_edges<'a>(n: usize, dags: impl IntoIterator<Item = &'a Dag>) -> EdgeMatrix {
    let mut counts = vec![0u64; n * n];
    let mut total = 0u64;
    for g in dags {
        total += 1;
        for (i, pa) in g.parents().iter().enumerate() {
            for j in pa.iter() {
                counts[i * n + j] += 1;
            }
        }
    }
    let mut m = EdgeMatrix::zeros(n);
    if total > 0 {
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, counts[i * n + j] as f64 / total as f64);
            }
        }
    }
    m
}

/// Mean over sampled orders of the analytic per-order edge posterior.
pub fn estimate_dos_edges(orders: &[TotalOrder], alpha: &AlphaTables) -> EdgeMatrix {
    let n = alpha.n();
    let mut sums = vec![0.0f64; n * n];
    for o in orders {
        for (i, u) in o.families() {
            for j in u.iter() {
                sums[i * n + j] += edge_posterior_given_order(alpha, j, i, u);
            }
        }
    }
    let mut m = EdgeMatrix::zeros(n);
    if !orders.is_empty() {
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, (sums[i * n + j] / orders.len() as f64).clamp(0.0, 1.0));
            }
        }
    }
    m
}

/// One distinct sampled DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectedDag {
    pub dag: Dag,
    /// `ln p⊀(G, D)`.
    pub log_joint: f64,
    pub multiplicity: u64,
}

/// The deduplicated set of sampled DAGs.
#[derive(Debug, Clone, Default)]
pub struct DagCollection {
    entries: Vec<CollectedDag>,
    index: HashMap<Dag, usize>,
    draws: usize,
}

impl DagCollection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dag: &Dag, log_joint: f64) {
        self.draws += 1;
        if let Some(&k) = self.index.get(dag) {
            self.entries[k].multiplicity += 1;
            return;
        }
        self.index.insert(dag.clone(), self.entries.len());
        self.entries.push(CollectedDag { dag: dag.clone(), log_joint, multiplicity: 1 });
    }

    pub fn extend<'a>(&mut self, samples: impl IntoIterator<Item = &'a DagSample>) {
        for s in samples {
            self.insert(&s.dag, s.log_joint);
        }
    }

    /// Merges another collection; the result does not depend on how draws were split.
    pub fn merge(&mut self, other: &DagCollection) {
        for e in &other.entries {
            self.draws += e.multiplicity as usize;
            match self.index.get(&e.dag) {
                Some(&k) => self.entries[k].multiplicity += e.multiplicity,
                None => {
                    self.index.insert(e.dag.clone(), self.entries.len());
                    self.entries.push(e.clone());
                }
            }
        }
    }

    pub fn entries(&self) -> &[CollectedDag] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of draws, counting repeats.
    pub fn draws(&self) -> usize {
        self.draws
    }

    /// `ln Σ_{G∈𝒢} p⊀(G, D)`.
    pub fn log_normalizer(&self) -> f64 {
        log_sum_exp_iter(self.entries.iter().map(|e| e.log_joint))
    }

    /// `Δ = p⊀(𝒢 | D)` given `ln p⊀(D)`, unclamped.
    pub fn raw_delta(&self, log_evidence: f64) -> f64 {
        exp(self.log_normalizer() - log_evidence)
    }
}

/// Deduplicates DDS samples.
pub fn build_collection(samples: &[DagSample]) -> DagCollection {
    let mut c = DagCollection::new();
    c.extend(samples);
    c
}

/// IW-DDS estimate of one feature (structure-modular).
pub fn estimate_iwdds(coll: &DagCollection, feature: &FeatureExpr, log_evidence: Option<f64>) -> Estimate {
    estimate_iwdds_many(coll, core::slice::from_ref(feature), log_evidence)
        .pop()
        .expect("one feature")
}

/// IW-DDS estimates of several features; reachability is computed once per DAG.
pub fn estimate_iwdds_many(coll: &DagCollection, features: &[FeatureExpr], log_evidence: Option<f64>) -> Vec<Estimate> {
    let mut hits = vec![LogAccumulator::new(); features.len()];
    for e in coll.entries() {
        let view = DagView::new(&e.dag);
        for (f, acc) in features.iter().zip(hits.iter_mut()) {
            if f.eval_view(&view) {
                acc.add(e.log_joint);
            }
        }
    }
    let z = coll.log_normalizer();
    hits.iter()
        .map(|acc| {
            let value = if coll.is_empty() { 0.0 } else { exp(acc.value() - z).clamp(0.0, 1.0) };
            let mut est = Estimate {
                value,
                delta: None,
                interval: None,
                n_samples: coll.draws(),
                unique_dags: Some(coll.len()),
                delta_clamped: false,
            };
            if let Some(le) = log_evidence {
                let raw = exp(z - le);
                let delta = raw.clamp(0.0, 1.0);
                est.delta_clamped = raw > 1.0 + DELTA_TOLERANCE;
                // Δ·p̂ is the covered mass of f, computed without the round trip through p̂
                let lo = exp(acc.value() - le).min(delta);
                est.delta = Some(delta);
                est.interval = Some((lo, (lo + 1.0 - delta).min(1.0)));
            }
            est
        })
        .collect()
}

/// Importance-sampling estimate reweighting each draw by `p≺(D) / (p⊀(D) · |≺_G|)`.
///
/// Experimental: counting linear extensions costs `O(n 2^n)` per draw.
pub fn estimate_iw_linear_extensions(
    samples: &[DagSample],
    feature: &FeatureExpr,
    log_order_evidence: f64,
    log_structure_evidence: f64,
) -> Result<Estimate> {
    let mut sum = 0.0;
    for s in samples {
        if feature.eval(&s.dag) {
            sum += exp(log_order_evidence - log_structure_evidence - log_count_linear_extensions(&s.dag)?);
        }
    }
    let value = if samples.is_empty() { 0.0 } else { sum / samples.len() as f64 };
    Ok(Estimate::plain(value, samples.len()))
}
