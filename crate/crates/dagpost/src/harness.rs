//! Validation experiments: Hoeffding violation rates and sampling-distribution checks.
//!
//! Report JSON schema (`ValidationReport`):
//! `{metric, values[], mean, stddev, target, tolerance, passed, timings{dp,orders,dags,total}, notes[]}`.
//! The flat CSV has one row per value: `metric,index,value`.

use std::collections::HashMap;
use std::time::Instant;

use dagpost_core::dp::exact_edge_posteriors;
use dagpost_core::estimators::estimate_dds_edges;
use dagpost_core::metrics::{binomial_cdf, binomial_sf, hoeffding_sample_size, total_variation};
use dagpost_core::oracle::order_modular_dag_posteriors;
use dagpost_core::scores::FamilyScoreTable;
use dagpost_core::{Dag, DpTables, EdgeMatrix, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::pipeline::{parallel_dds, worker_pool, PipelineConfig, StageTimings};

pub const DEFAULT_SIGNIFICANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub metric: String,
    pub values: Vec<f64>,
    pub mean: f64,
    pub stddev: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub timings: StageTimings,
    pub notes: Vec<String>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

impl ValidationReport {
    pub fn new(metric: &str, values: Vec<f64>, target: f64, tolerance: f64, passed: bool) -> Self {
        let (mean, stddev) = mean_sd(&values);
        ValidationReport {
            metric: metric.into(),
            values,
            mean,
            stddev,
            target,
            tolerance,
            passed,
            timings: StageTimings::default(),
            notes: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", self.metric, i, v));
        }
        s
    }
}

/// Violation statistics for one edge `from → to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeViolation {
    pub from: usize,
    pub to: usize,
    pub exact: f64,
    pub violations: u64,
    pub frequency: f64,
    /// `P(X ≥ violations)` under `p_vio = δ`: small values are evidence that `p_vio > δ`.
    pub p_exceeds: f64,
    /// `P(X ≤ violations)` under `p_vio = δ`: small values reject `p_vio ≥ δ`.
    pub p_below: f64,
}

/// Per-edge counts of `|p̂ − p| ≥ ε` across repetitions.
pub fn violation_frequencies(exact: &EdgeMatrix, estimates: &[EdgeMatrix], epsilon: f64, delta: f64) -> Vec<EdgeViolation> {
    let reps = estimates.len() as u64;
    EdgeMatrix::pairs(exact.n())
        .map(|(to, from)| {
            let p = exact.get(to, from);
            let violations = estimates.iter().filter(|e| (e.get(to, from) - p).abs() >= epsilon).count() as u64;
            EdgeViolation {
                from,
                to,
                exact: p,
                violations,
                frequency: if reps == 0 { 0.0 } else { violations as f64 / reps as f64 },
                p_exceeds: binomial_sf(violations, reps, delta),
                p_below: binomial_cdf(violations, reps, delta),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingReport {
    pub report: ValidationReport,
    pub epsilon: f64,
    pub delta: f64,
    pub samples_per_run: usize,
    pub repetitions: usize,
    pub significance: f64,
    pub edges: Vec<EdgeViolation>,
    /// Counts of edges by violation frequency, in bins of width 0.005.
    pub histogram: Vec<u64>,
    /// True when every edge also rejects `p_vio ≥ δ`.
    pub all_reject_at_least_delta: bool,
}

/// Runs DDS `repetitions` times with the Hoeffding sample size and counts
/// per-edge violations of `|p̂ − p| ≥ ε` against the exact edge posteriors.
///
/// Passes when no edge gives significant evidence (one-sided binomial test)
/// that its violation probability exceeds `δ`.
#[allow(clippy::too_many_arguments)]
pub fn run_hoeffding_experiment(
    beta: &FamilyScoreTable,
    tables: &DpTables,
    epsilon: f64,
    delta: f64,
    repetitions: usize,
    seed: u64,
    workers: usize,
    significance: f64,
) -> Result<HoeffdingReport, CliError> {
    let samples = hoeffding_sample_size(epsilon, delta)?;
    let exact = exact_edge_posteriors(beta, tables);
    let pool = worker_pool(workers)?;
    let single = worker_pool(1)?;
    let t = Instant::now();
    let estimates: Vec<EdgeMatrix> = pool.install(|| {
        (0..repetitions)
            .into_par_iter()
            .map(|r| {
                let mut cfg = PipelineConfig::new(samples, seed.wrapping_add(r as u64));
                cfg.cache = Some(Default::default());
                let (out, _, _) = parallel_dds(beta, tables, &cfg, &single).expect("valid config");
                estimate_dds_edges(beta.n(), out.samples.iter().map(|s| &s.dag))
            })
            .collect()
    });
    let elapsed = t.elapsed().as_secs_f64();
    let edges = violation_frequencies(&exact, &estimates, epsilon, delta);
    let freqs: Vec<f64> = edges.iter().map(|e| e.frequency).collect();
    let passed = edges.iter().all(|e| e.p_exceeds >= significance);
    let all_reject = edges.iter().all(|e| e.p_below < significance);
    let max = freqs.iter().copied().fold(0.0, f64::max);
    let mut histogram = vec![0u64; 21];
    for &f in &freqs {
        histogram[((f / 0.005) as usize).min(20)] += 1;
    }
    let mut report = ValidationReport::new("hoeffding_violation_frequency", freqs, delta, max, passed);
    report.timings = StageTimings { total: elapsed, ..Default::default() };
    report.notes.push(format!("max violation frequency {max}"));
    Ok(HoeffdingReport {
        report,
        epsilon,
        delta,
        samples_per_run: samples,
        repetitions,
        significance,
        edges,
        histogram,
        all_reject_at_least_delta: all_reject,
    })
}

/// Largest `n` accepted by [`sampling_distribution_test`].
pub const MAX_DISTRIBUTION_TEST_VARIABLES: usize = 4;

/// Total variation between DDS DAG frequencies and the exact `p≺(G | D)`.
pub fn sampling_distribution_test(
    beta: &FamilyScoreTable,
    tables: &DpTables,
    samples: usize,
    seed: u64,
    threshold: f64,
) -> Result<ValidationReport, CliError> {
    let n = beta.n();
    if n > MAX_DISTRIBUTION_TEST_VARIABLES {
        return Err(Error::Guard { what: "variables for the sampling-distribution test", limit: MAX_DISTRIBUTION_TEST_VARIABLES, got: n }.into());
    }
    let exact = order_modular_dag_posteriors(beta, tables.log_evidence())?;
    let cfg = PipelineConfig::new(samples, seed);
    let (out, t_orders, t_dags) = parallel_dds(beta, tables, &cfg, &worker_pool(1)?)?;
    let mut counts: HashMap<&Dag, u64> = HashMap::new();
    for s in &out.samples {
        *counts.entry(&s.dag).or_default() += 1;
    }
    let p: Vec<f64> = exact.iter().map(|(_, lp)| lp.exp()).collect();
    let q: Vec<f64> = exact
        .iter()
        .map(|(g, _)| counts.get(g).copied().unwrap_or(0) as f64 / samples.max(1) as f64)
        .collect();
    let tv = total_variation(&p, &q)?;
    let mut report = ValidationReport::new("total_variation", vec![tv], 0.0, threshold, tv < threshold);
    report.timings = StageTimings {
        orders: t_orders.as_secs_f64(),
        dags: t_dags.as_secs_f64(),
        total: (t_orders + t_dags).as_secs_f64(),
        ..Default::default()
    };
    report.notes.push(format!("{} DAGs in the model space, {} distinct sampled", exact.len(), counts.len()));
    Ok(report)
}
