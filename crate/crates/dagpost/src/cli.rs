//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dagpost_core::dp::exact_edge_posteriors;
use dagpost_core::estimators::{build_collection, estimate_dds_edges, estimate_dos_edges, estimate_iwdds_many};
use dagpost_core::features::parse_feature;
use dagpost_core::oracle::{
    evidence_structure_modular, exact_posterior_order_modular, exact_posterior_structure_modular,
    MAX_ENUMERATION_VARIABLES, MAX_INCLUSION_EXCLUSION_VARIABLES, MAX_ORDER_MODULAR_VARIABLES,
};
use dagpost_core::sampler::CacheSettings;
use dagpost_core::scores::FamilyScoreTable;
use dagpost_core::{Dataset, DpTables, FeatureExpr, RhoMode, ScoreConfig, HARD_MAX_VARIABLES};
use serde::Serialize;

use crate::csv_io::{load_csv, CsvOptions};
use crate::error::{CliError, EXIT_USAGE};
use crate::formats::{self, EdgeMatrixRecord, EstimateRecord, ScoreDump};
use crate::harness::{run_hoeffding_experiment, sampling_distribution_test, DEFAULT_SIGNIFICANCE};
use crate::pipeline::{build_scores, build_tables, parallel_dds, worker_pool, PipelineConfig, PipelineRun, StageTimings};

const FEATURE_HELP: &str = "Feature expression, repeatable. Grammar: edge(A,B), path(A,B), \
pathlen(A,B,L), parents(A,{B,C}), combined with & (and), | (or), ! (not) and parentheses; \
names are column headers. Examples: 'path(X,Y) & path(Y,Z)', 'path(X,Y) & !path(X,Z)'";

#[derive(Parser, Debug)]
#[command(name = "dagpost", version, about = "Exact and sampled Bayesian-network structure posteriors for discrete data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact edge posteriors under the order-modular prior.
    ExactEdges {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Direct DAG sampling; writes one JSON sample per line.
    Dds {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON (timings, cache counters, edge estimates).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Importance-weighted DDS estimates with sound intervals.
    Iwdds {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        est: EstimateArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-estimate features from an existing sample dump.
    Estimate {
        #[command(flatten)]
        data: DataArgs,
        /// Sample dump written by `dds`.
        #[arg(long)]
        samples_file: PathBuf,
        #[command(flatten)]
        est: EstimateArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact values by enumeration (small n).
    Oracle {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, help = FEATURE_HELP)]
        feature: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validation experiments.
    Validate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value = "hoeffding")]
        kind: ValidationKind,
        #[arg(long, default_value_t = 0.02)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 400)]
        repetitions: usize,
        /// Draws for the sampling-distribution test.
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
        significance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flat CSV of the per-item values.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write the local-score table for reuse by other commands.
    ScoreDump {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreArg {
    K2,
    Bdeu,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoArg {
    Uniform,
    Invbinom,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationKind {
    Hoeffding,
    Sampling,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// CSV file of categorical data, one column per variable.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The first row is data, not column names.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, value_enum, default_value = "bdeu")]
    pub score: ScoreArg,
    /// BDeu equivalent sample size.
    #[arg(long, default_value_t = 1.0)]
    pub ess: f64,
    /// Maximum number of parents per node (default: min(3, n-1)).
    #[arg(long)]
    pub max_indegree: Option<usize>,
    /// Parent-set prior (default: invbinom for k2, uniform for bdeu).
    #[arg(long, value_enum)]
    pub rho: Option<RhoArg>,
    /// Score dump to reuse when its content key matches, refreshed otherwise.
    #[arg(long)]
    pub score_cache: Option<PathBuf>,
    #[arg(long, default_value_t = dagpost_core::DEFAULT_MAX_VARIABLES)]
    pub max_variables: usize,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Interval-cache capacity in stored interval slots; 0 disables the cache.
    #[arg(long)]
    pub cache_capacity: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct EstimateArgs {
    #[arg(long, help = FEATURE_HELP, required = true)]
    pub feature: Vec<String>,
    /// Known ln p(D) under the structure-modular prior.
    #[arg(long, allow_hyphen_values = true)]
    pub log_evidence: Option<f64>,
    /// Compute the evidence automatically only up to this many variables.
    #[arg(long, default_value_t = 16)]
    pub evidence_limit: usize,
}

impl DataArgs {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.ess.is_finite() && self.ess > 0.0) {
            return Err(CliError::Usage(format!("--ess must be positive, got {}", self.ess)));
        }
        if !self.delimiter.is_ascii() {
            return Err(CliError::Usage("--delimiter must be a single ASCII character".into()));
        }
        if self.max_variables == 0 || self.max_variables > HARD_MAX_VARIABLES {
            return Err(CliError::Usage(format!("--max-variables must be in 1..={HARD_MAX_VARIABLES}")));
        }
        Ok(())
    }

    pub fn score_config(&self, n: usize) -> ScoreConfig {
        let k = self.max_indegree.unwrap_or(3.min(n.saturating_sub(1)));
        let base = match self.score {
            ScoreArg::K2 => ScoreConfig::k2(k),
            ScoreArg::Bdeu => ScoreConfig::bdeu(self.ess, k),
        };
        match self.rho {
            Some(RhoArg::Uniform) => base.with_rho(RhoMode::Uniform),
            Some(RhoArg::Invbinom) => base.with_rho(RhoMode::InvBinomial),
            None => base,
        }
    }

    fn load(&self) -> Result<Dataset, CliError> {
        let ds = load_csv(&self.data, CsvOptions { delimiter: self.delimiter as u8, has_header: !self.no_header })?;
        if ds.n() > self.max_variables {
            return Err(dagpost_core::Error::Guard { what: "number of variables", limit: self.max_variables, got: ds.n() }.into());
        }
        self.score_config(ds.n()).validate(ds.n())?;
        Ok(ds)
    }

    fn scores(&self, ds: &Dataset, pool: &rayon::ThreadPool) -> Result<FamilyScoreTable, CliError> {
        let cfg = self.score_config(ds.n());
        let Some(path) = &self.score_cache else {
            return build_scores(ds, &cfg, pool);
        };
        let key = formats::content_key(ds, &cfg);
        if path.exists() {
            if let Ok(dump) = ScoreDump::read(path) {
                if dump.key == key {
                    return dump.table();
                }
            }
        }
        let beta = build_scores(ds, &cfg, pool)?;
        ScoreDump::new(ds, &cfg, &beta).write(path)?;
        Ok(beta)
    }
}

impl RunArgs {
    fn validate(&self) -> Result<(), CliError> {
        if self.samples == 0 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        Ok(())
    }

    fn pipeline(&self, data: &DataArgs) -> PipelineConfig {
        let mut cfg = PipelineConfig::new(self.samples, self.seed);
        cfg.max_variables = data.max_variables;
        cfg.cache = match self.cache_capacity {
            Some(0) => None,
            Some(c) => Some(CacheSettings { capacity: Some(c), batch: None }),
            None => Some(CacheSettings::default()),
        };
        cfg
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, v: &T) -> Result<(), CliError> {
    let mut s = formats::to_json_string(v);
    s.push('\n');
    emit(out, &s)
}

fn parse_features(texts: &[String], names: &[String]) -> Result<Vec<FeatureExpr>, CliError> {
    texts.iter().map(|t| Ok(parse_feature(t, names)?)).collect()
}

fn structure_evidence(tables: &DpTables, est: &EstimateArgs) -> Result<Option<f64>, CliError> {
    if let Some(v) = est.log_evidence {
        return Ok(Some(v));
    }
    if tables.n() > est.evidence_limit.min(MAX_INCLUSION_EXCLUSION_VARIABLES) {
        return Ok(None);
    }
    Ok(Some(evidence_structure_modular(tables.alpha())?.log_value))
}

fn estimate_records(
    features: &[FeatureExpr],
    texts: &[String],
    samples: &[dagpost_core::DagSample],
    log_evidence: Option<f64>,
    seed: Option<u64>,
) -> Vec<EstimateRecord> {
    let coll = build_collection(samples);
    let est = estimate_iwdds_many(&coll, features, log_evidence);
    for (t, e) in texts.iter().zip(&est) {
        if e.delta_clamped {
            eprintln!("warning: {t}: sampled mass exceeds the supplied evidence; delta capped at 1");
        }
    }
    texts.iter().zip(&est).map(|(t, e)| EstimateRecord::new(t.trim().to_string(), e, seed)).collect()
}

#[derive(Serialize)]
struct DdsSummary {
    n_samples: usize,
    unique_dags: usize,
    log_evidence_order: f64,
    timings: StageTimings,
    cache: Option<CacheSummary>,
    edges_dds: EdgeMatrixRecord,
    edges_dos: EdgeMatrixRecord,
}

#[derive(Serialize)]
struct CacheSummary {
    hits: u64,
    misses: u64,
    recycles: u64,
    evicted_entries: u64,
}

#[derive(Serialize)]
struct OracleFeature {
    feature: String,
    structure_modular: Option<f64>,
    order_modular: Option<f64>,
}

#[derive(Serialize)]
struct OracleOutput {
    log_evidence_order: f64,
    log_evidence_structure: f64,
    edges_order_modular: EdgeMatrixRecord,
    features: Vec<OracleFeature>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ExactEdges { data, out } => {
            data.validate()?;
            let ds = data.load()?;
            let pool = worker_pool(1)?;
            let beta = data.scores(&ds, &pool)?;
            let tables = build_tables(&beta, data.max_variables, &pool)?;
            let m = exact_edge_posteriors(&beta, &tables);
            emit_json(out.as_deref(), &EdgeMatrixRecord::new(ds.names(), &m, Some(tables.log_evidence())))
        }
        Command::Dds { data, run, out, summary } => {
            data.validate()?;
            run.validate()?;
            let ds = data.load()?;
            let pool = worker_pool(run.workers)?;
            let start = std::time::Instant::now();
            let beta = data.scores(&ds, &pool)?;
            let tables = build_tables(&beta, data.max_variables, &pool)?;
            let dp = start.elapsed();
            let (output, t_orders, t_dags) = parallel_dds(&beta, &tables, &run.pipeline(&data), &pool)?;
            let timings = StageTimings {
                dp: dp.as_secs_f64(),
                orders: t_orders.as_secs_f64(),
                dags: t_dags.as_secs_f64(),
                total: start.elapsed().as_secs_f64(),
            };
            let r = PipelineRun { beta, tables, output, timings };
            let mut buf = Vec::new();
            formats::write_samples(&mut buf, &r.output.samples)?;
            emit(out.as_deref(), std::str::from_utf8(&buf).expect("utf-8"))?;
            if let Some(path) = summary {
                let s = DdsSummary {
                    n_samples: r.output.samples.len(),
                    unique_dags: build_collection(&r.output.samples).len(),
                    log_evidence_order: r.tables.log_evidence(),
                    timings: r.timings,
                    cache: r.output.cache_stats.map(|c| CacheSummary {
                        hits: c.hits,
                        misses: c.misses,
                        recycles: c.recycles,
                        evicted_entries: c.evicted_entries,
                    }),
                    edges_dds: EdgeMatrixRecord::new(
                        ds.names(),
                        &estimate_dds_edges(ds.n(), r.output.samples.iter().map(|s| &s.dag)),
                        None,
                    ),
                    edges_dos: EdgeMatrixRecord::new(ds.names(), &estimate_dos_edges(&r.output.orders, r.tables.alpha()), None),
                };
                emit_json(Some(&path), &s)?;
            }
            Ok(())
        }
        Command::Iwdds { data, run, est, out } => {
            data.validate()?;
            run.validate()?;
            let ds = data.load()?;
            let features = parse_features(&est.feature, ds.names())?;
            let pool = worker_pool(run.workers)?;
            let beta = data.scores(&ds, &pool)?;
            let tables = build_tables(&beta, data.max_variables, &pool)?;
            let (output, _, _) = parallel_dds(&beta, &tables, &run.pipeline(&data), &pool)?;
            let le = structure_evidence(&tables, &est)?;
            let recs = estimate_records(&features, &est.feature, &output.samples, le, Some(run.seed));
            emit_json(out.as_deref(), &recs)
        }
        Command::Estimate { data, samples_file, est, out } => {
            data.validate()?;
            let ds = data.load()?;
            let features = parse_features(&est.feature, ds.names())?;
            let samples = formats::read_samples(&samples_file)?;
            if samples.iter().any(|s| s.dag.n() != ds.n()) {
                return Err(CliError::Data(format!("{}: samples do not match the dataset width", samples_file.display())));
            }
            let le = if est.log_evidence.is_some() || ds.n() <= est.evidence_limit.min(MAX_INCLUSION_EXCLUSION_VARIABLES) {
                let pool = worker_pool(1)?;
                let beta = data.scores(&ds, &pool)?;
                let tables = build_tables(&beta, data.max_variables, &pool)?;
                structure_evidence(&tables, &est)?
            } else {
                None
            };
            let recs = estimate_records(&features, &est.feature, &samples, le, None);
            emit_json(out.as_deref(), &recs)
        }
        Command::Oracle { data, feature, out } => {
            data.validate()?;
            let ds = data.load()?;
            if ds.n() > MAX_ENUMERATION_VARIABLES {
                return Err(dagpost_core::Error::Guard {
                    what: "variables for enumeration",
                    limit: MAX_ENUMERATION_VARIABLES,
                    got: ds.n(),
                }
                .into());
            }
            let features = parse_features(&feature, ds.names())?;
            let pool = worker_pool(1)?;
            let beta = data.scores(&ds, &pool)?;
            let tables = build_tables(&beta, data.max_variables, &pool)?;
            let structure = exact_posterior_structure_modular(&beta, &features)?;
            let order = if ds.n() <= MAX_ORDER_MODULAR_VARIABLES {
                Some(exact_posterior_order_modular(&beta, &features)?)
            } else {
                None
            };
            let o = OracleOutput {
                log_evidence_order: tables.log_evidence(),
                log_evidence_structure: evidence_structure_modular(tables.alpha())?.log_value,
                edges_order_modular: EdgeMatrixRecord::new(ds.names(), &exact_edge_posteriors(&beta, &tables), None),
                features: feature
                    .iter()
                    .enumerate()
                    .map(|(k, t)| OracleFeature {
                        feature: t.trim().to_string(),
                        structure_modular: Some(structure[k]),
                        order_modular: order.as_ref().map(|o| o[k]),
                    })
                    .collect(),
            };
            emit_json(out.as_deref(), &o)
        }
        Command::Validate {
            data,
            kind,
            epsilon,
            delta,
            repetitions,
            samples,
            threshold,
            significance,
            seed,
            workers,
            out,
            csv,
        } => {
            data.validate()?;
            if workers == 0 {
                return Err(CliError::Usage("--workers must be at least 1".into()));
            }
            if !(significance > 0.0 && significance < 1.0) {
                return Err(CliError::Usage("--significance must lie in (0, 1)".into()));
            }
            dagpost_core::metrics::hoeffding_sample_size(epsilon, delta)?;
            let ds = data.load()?;
            let pool = worker_pool(workers)?;
            let beta = data.scores(&ds, &pool)?;
            let tables = build_tables(&beta, data.max_variables, &pool)?;
            let (report, json) = match kind {
                ValidationKind::Hoeffding => {
                    let r = run_hoeffding_experiment(&beta, &tables, epsilon, delta, repetitions, seed, workers, significance)?;
                    (r.report.clone(), formats::to_json_string(&r))
                }
                ValidationKind::Sampling => {
                    let r = sampling_distribution_test(&beta, &tables, samples, seed, threshold)?;
                    (r.clone(), formats::to_json_string(&r))
                }
            };
            emit(out.as_deref(), &(json + "\n"))?;
            if let Some(p) = csv {
                emit(Some(&p), &report.to_csv())?;
            }
            if !report.passed {
                eprintln!("validation failed: {}", report.metric);
            }
            Ok(())
        }
        Command::ScoreDump { data, out } => {
            data.validate()?;
            let ds = data.load()?;
            let cfg = data.score_config(ds.n());
            let beta = build_scores(&ds, &cfg, &worker_pool(1)?)?;
            ScoreDump::new(&ds, &cfg, &beta).write(&out)
        }
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
