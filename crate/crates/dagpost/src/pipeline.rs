//! Parallel builds of the score and DP tables, and block-streamed DDS.
//!
//! Randomness is split into fixed-size blocks: order block `b` draws from
//! ChaCha stream `2b` and DAG block `b` from stream `2b + 1` of the master
//! seed. Workers own whole blocks, so results do not depend on the worker
//! count; the interval caches are per worker and never change a draw.

use std::time::{Duration, Instant};

use dagpost_core::dp::{check_size, AlphaTables};
use dagpost_core::sampler::{sample_orders, sort_by_posterior, CacheSettings, CacheStats, DagSampler, DdsOutput};
use dagpost_core::scores::FamilyScoreTable;
use dagpost_core::{Dataset, DagSample, DpTables, ScoreConfig, SubsetTransform, TotalOrder, DEFAULT_MAX_VARIABLES};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_BLOCK: usize = 1024;

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    /// Scores, α, forward and backward tables.
    pub dp: f64,
    /// Order sampling and sorting.
    pub orders: f64,
    pub dags: f64,
    pub total: f64,
}

pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

/// Seeded generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn build_scores(ds: &Dataset, cfg: &ScoreConfig, pool: &rayon::ThreadPool) -> Result<FamilyScoreTable, CliError> {
    cfg.validate(ds.n())?;
    let nodes = pool.install(|| (0..ds.n()).into_par_iter().map(|i| FamilyScoreTable::build_node(ds, cfg, i)).collect());
    Ok(FamilyScoreTable::from_nodes(ds.n(), cfg.max_indegree, nodes)?)
}

pub fn build_tables(beta: &FamilyScoreTable, limit: usize, pool: &rayon::ThreadPool) -> Result<DpTables, CliError> {
    check_size(beta.n(), limit)?;
    let nodes = pool.install(|| {
        (0..beta.n())
            .into_par_iter()
            .map(|i| AlphaTables::build_node(beta, i, SubsetTransform::Full))
            .collect()
    });
    Ok(DpTables::from_alpha(AlphaTables::from_nodes(beta.n(), nodes)?))
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub samples: usize,
    pub seed: u64,
    pub cache: Option<CacheSettings>,
    pub block: usize,
    pub max_variables: usize,
}

impl PipelineConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        PipelineConfig {
            samples,
            seed,
            cache: Some(CacheSettings::default()),
            block: DEFAULT_BLOCK,
            max_variables: DEFAULT_MAX_VARIABLES,
        }
    }
}

fn blocks(total: usize, block: usize) -> Vec<std::ops::Range<usize>> {
    (0..total.div_ceil(block)).map(|b| b * block..((b + 1) * block).min(total)).collect()
}

fn merge_stats(a: CacheStats, b: CacheStats) -> CacheStats {
    CacheStats {
        hits: a.hits + b.hits,
        misses: a.misses + b.misses,
        recycles: a.recycles + b.recycles,
        evicted_entries: a.evicted_entries + b.evicted_entries,
    }
}

/// DDS given finished tables; returns the output and the order/DAG stage times.
pub fn parallel_dds(
    beta: &FamilyScoreTable,
    tables: &DpTables,
    cfg: &PipelineConfig,
    pool: &rayon::ThreadPool,
) -> Result<(DdsOutput, Duration, Duration), CliError> {
    if cfg.block == 0 {
        return Err(CliError::Usage("block size must be positive".into()));
    }
    let spans = blocks(cfg.samples, cfg.block);

    let t = Instant::now();
    let orders: Vec<TotalOrder> = pool.install(|| {
        spans
            .par_iter()
            .enumerate()
            .flat_map_iter(|(b, r)| sample_orders(tables, r.len(), &mut stream_rng(cfg.seed, 2 * b as u64)))
            .collect()
    });
    let perm = sort_by_posterior(&orders, tables.alpha());
    let t_orders = t.elapsed();

    let t = Instant::now();
    let workers = pool.current_num_threads().clamp(1, spans.len().max(1));
    let per_worker: Vec<(Vec<DagSample>, Option<CacheStats>)> = pool.install(|| {
        (0..workers)
            .into_par_iter()
            .map(|w| {
                let mine = spans.len() * w / workers..spans.len() * (w + 1) / workers;
                let mut sampler = DagSampler::new(beta, tables.alpha(), cfg.cache.map(|c| c.build()));
                let mut out = Vec::new();
                for b in mine {
                    let mut rng = stream_rng(cfg.seed, 2 * b as u64 + 1);
                    for &idx in &perm[spans[b].clone()] {
                        let dag = sampler.sample(&orders[idx], &mut rng);
                        let log_joint = beta.log_joint(dag.parents());
                        out.push(DagSample { dag, log_joint, order_index: idx });
                    }
                }
                (out, sampler.cache().map(|c| c.stats()))
            })
            .collect()
    });
    let t_dags = t.elapsed();

    let mut samples = Vec::with_capacity(cfg.samples);
    let mut stats: Option<CacheStats> = None;
    for (s, st) in per_worker {
        samples.extend(s);
        stats = match (stats, st) {
            (Some(a), Some(b)) => Some(merge_stats(a, b)),
            (None, b) => b,
            (a, None) => a,
        };
    }
    Ok((DdsOutput { samples, orders, cache_stats: stats }, t_orders, t_dags))
}

/// Everything produced by a full run from data.
pub struct PipelineRun {
    pub beta: FamilyScoreTable,
    pub tables: DpTables,
    pub output: DdsOutput,
    pub timings: StageTimings,
}

/// Scores → DP → orders → DAGs.
pub fn run_dds(ds: &Dataset, score: &ScoreConfig, cfg: &PipelineConfig, pool: &rayon::ThreadPool) -> Result<PipelineRun, CliError> {
    let start = Instant::now();
    check_size(ds.n(), cfg.max_variables)?;
    let beta = build_scores(ds, score, pool)?;
    let tables = build_tables(&beta, cfg.max_variables, pool)?;
    let dp = start.elapsed();
    let (output, t_orders, t_dags) = parallel_dds(&beta, &tables, cfg, pool)?;
    let timings = StageTimings {
        dp: dp.as_secs_f64(),
        orders: t_orders.as_secs_f64(),
        dags: t_dags.as_secs_f64(),
        total: start.elapsed().as_secs_f64(),
    };
    Ok(PipelineRun { beta, tables, output, timings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dagpost_core::synth::random_dataset;

    #[test]
    fn worker_count_does_not_change_samples() {
        let ds = random_dataset(6, 80, 2, &mut stream_rng(1, 0)).unwrap();
        let score = ScoreConfig::k2(2);
        let mut cfg = PipelineConfig::new(700, 42);
        cfg.block = 64;
        let one = run_dds(&ds, &score, &cfg, &worker_pool(1).unwrap()).unwrap();
        let four = run_dds(&ds, &score, &cfg, &worker_pool(4).unwrap()).unwrap();
        assert_eq!(one.output.samples, four.output.samples);
        assert_eq!(one.output.orders, four.output.orders);
    }

    #[test]
    fn parallel_builds_match_sequential() {
        let ds = random_dataset(5, 60, 3, &mut stream_rng(2, 0)).unwrap();
        let score = ScoreConfig::bdeu(1.0, 3);
        let pool = worker_pool(3).unwrap();
        let beta = build_scores(&ds, &score, &pool).unwrap();
        assert_eq!(beta, FamilyScoreTable::build(&ds, &score).unwrap());
        let t = build_tables(&beta, 25, &pool).unwrap();
        assert_eq!(t, DpTables::new(&beta, SubsetTransform::Full).unwrap());
    }

    #[test]
    fn zero_samples() {
        let ds = random_dataset(3, 10, 2, &mut stream_rng(3, 0)).unwrap();
        let run = run_dds(&ds, &ScoreConfig::k2(2), &PipelineConfig::new(0, 1), &worker_pool(1).unwrap()).unwrap();
        assert!(run.output.samples.is_empty());
    }
}
