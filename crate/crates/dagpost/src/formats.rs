//! On-disk formats: score dumps, sample dumps, estimates and edge matrices.
//!
//! All files are JSON (samples: one JSON object per line). Floats are written
//! with shortest round-trip formatting, so equal inputs give equal bytes.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use dagpost_core::estimators::Estimate;
use dagpost_core::sampler::DagSample;
use dagpost_core::scores::FamilyScoreTable;
use dagpost_core::{Dag, Dataset, EdgeMatrix, RhoMode, ScoreConfig, ScoreFamily, VarSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCORE_DUMP_FORMAT: &str = "dagpost-scores/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    K2,
    Bdeu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoName {
    Uniform,
    Invbinom,
}

/// Serializable mirror of [`ScoreConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSpec {
    pub family: FamilyName,
    pub ess: Option<f64>,
    pub max_indegree: usize,
    pub rho: RhoName,
}

impl From<&ScoreConfig> for ScoreSpec {
    fn from(c: &ScoreConfig) -> Self {
        let (family, ess) = match c.family {
            ScoreFamily::K2 => (FamilyName::K2, None),
            ScoreFamily::BDeu { ess } => (FamilyName::Bdeu, Some(ess)),
        };
        let rho = match c.rho {
            RhoMode::Uniform => RhoName::Uniform,
            RhoMode::InvBinomial => RhoName::Invbinom,
        };
        ScoreSpec { family, ess, max_indegree: c.max_indegree, rho }
    }
}

impl ScoreSpec {
    pub fn to_config(&self) -> Result<ScoreConfig, CliError> {
        let family = match (self.family, self.ess) {
            (FamilyName::K2, _) => ScoreFamily::K2,
            (FamilyName::Bdeu, Some(ess)) => ScoreFamily::BDeu { ess },
            (FamilyName::Bdeu, None) => return Err(CliError::Usage("bdeu requires an equivalent sample size".into())),
        };
        let rho = match self.rho {
            RhoName::Uniform => RhoMode::Uniform,
            RhoName::Invbinom => RhoMode::InvBinomial,
        };
        Ok(ScoreConfig { family, max_indegree: self.max_indegree, rho })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over the encoded dataset and the score configuration.
pub fn content_key(ds: &Dataset, cfg: &ScoreConfig) -> String {
    let mut h = Sha256::new();
    h.update((ds.n() as u64).to_le_bytes());
    h.update((ds.m() as u64).to_le_bytes());
    for c in 0..ds.n() {
        h.update(ds.names()[c].as_bytes());
        h.update([0u8]);
        h.update(ds.arity()[c].to_le_bytes());
    }
    for row in ds.rows() {
        for &v in row {
            h.update(v.to_le_bytes());
        }
    }
    let spec = serde_json::to_string(&ScoreSpec::from(cfg)).expect("serializable");
    h.update(spec.as_bytes());
    hex(&h.finalize())
}

/// Local scores (already folded with ρ) plus enough metadata to reuse them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDump {
    pub format: String,
    pub key: String,
    pub names: Vec<String>,
    pub score: ScoreSpec,
    /// Per node, `ln β'` over parent sets in canonical (size, then numeric) order
    /// of the other nodes.
    pub nodes: Vec<Vec<f64>>,
}

impl ScoreDump {
    pub fn new(ds: &Dataset, cfg: &ScoreConfig, beta: &FamilyScoreTable) -> Self {
        ScoreDump {
            format: SCORE_DUMP_FORMAT.into(),
            key: content_key(ds, cfg),
            names: ds.names().to_vec(),
            score: cfg.into(),
            nodes: (0..beta.n()).map(|i| beta.node_entries(i).to_vec()).collect(),
        }
    }

    pub fn table(&self) -> Result<FamilyScoreTable, CliError> {
        Ok(FamilyScoreTable::from_nodes(self.names.len(), self.score.max_indegree, self.nodes.clone())?)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let d: ScoreDump = serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if d.format != SCORE_DUMP_FORMAT {
            return Err(CliError::Data(format!("{}: unknown format {}", path.display(), d.format)));
        }
        Ok(d)
    }
}

/// One line of a sample dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Position in DAG-sampling sequence.
    pub rank: usize,
    /// Position of the generating order in draw sequence.
    pub order_index: usize,
    pub log_joint: f64,
    /// Parent lists, one per node.
    pub parents: Vec<Vec<usize>>,
}

impl SampleRecord {
    pub fn from_sample(rank: usize, s: &DagSample) -> Self {
        SampleRecord {
            rank,
            order_index: s.order_index,
            log_joint: s.log_joint,
            parents: s.dag.parents().iter().map(|p| p.iter().collect()).collect(),
        }
    }

    pub fn to_sample(&self) -> Result<DagSample, CliError> {
        let parents = self.parents.iter().map(|p| p.iter().copied().collect::<VarSet>()).collect();
        Ok(DagSample { dag: Dag::new(parents)?, log_joint: self.log_joint, order_index: self.order_index })
    }
}

pub fn write_samples<W: Write>(out: W, samples: &[DagSample]) -> Result<(), CliError> {
    let mut w = BufWriter::new(out);
    for (rank, s) in samples.iter().enumerate() {
        serde_json::to_writer(&mut w, &SampleRecord::from_sample(rank, s)).map_err(|e| CliError::Data(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| CliError::io("<samples>", e))?;
    }
    w.flush().map_err(|e| CliError::io("<samples>", e))
}

pub fn read_samples(path: &Path) -> Result<Vec<DagSample>, CliError> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec.to_sample()?);
    }
    Ok(out)
}

/// A feature estimate as written by `iwdds` and `estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub feature: String,
    pub value: f64,
    pub delta: Option<f64>,
    pub interval: Option<[f64; 2]>,
    pub n_samples: usize,
    pub unique_dags: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub delta_clamped: bool,
}

impl EstimateRecord {
    pub fn new(feature: String, e: &Estimate, seed: Option<u64>) -> Self {
        EstimateRecord {
            feature,
            value: e.value,
            delta: e.delta,
            interval: e.interval.map(|(lo, hi)| [lo, hi]),
            n_samples: e.n_samples,
            unique_dags: e.unique_dags,
            seed,
            delta_clamped: e.delta_clamped,
        }
    }
}

/// Edge posteriors; `p_edge[from][to]`, zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeMatrixRecord {
    pub names: Vec<String>,
    pub log_evidence: Option<f64>,
    pub p_edge: Vec<Vec<f64>>,
}

impl EdgeMatrixRecord {
    pub fn new(names: &[String], m: &EdgeMatrix, log_evidence: Option<f64>) -> Self {
        let n = m.n();
        let p_edge = (0..n).map(|from| (0..n).map(|to| if from == to { 0.0 } else { m.get(to, from) }).collect()).collect();
        EdgeMatrixRecord { names: names.to_vec(), log_evidence, p_edge }
    }

    pub fn matrix(&self) -> Result<EdgeMatrix, CliError> {
        let n = self.p_edge.len();
        let rows = (0..n).map(|to| (0..n).map(|from| self.p_edge[from][to]).collect()).collect();
        Ok(EdgeMatrix::from_rows(rows)?)
    }
}

pub fn to_json_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    let mut s = to_json_string(v);
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds() -> Dataset {
        Dataset::from_codes_unnamed(vec![2, 2, 3], vec![vec![0, 1, 2], vec![1, 1, 0], vec![0, 0, 1]]).unwrap()
    }

    #[test]
    fn key_depends_on_data_and_config() {
        let d = ds();
        let a = content_key(&d, &ScoreConfig::k2(2));
        assert_eq!(a, content_key(&d, &ScoreConfig::k2(2)));
        assert_ne!(a, content_key(&d, &ScoreConfig::k2(1)));
        assert_ne!(a, content_key(&d, &ScoreConfig::bdeu(1.0, 2)));
        let other = Dataset::from_codes_unnamed(vec![2, 2, 3], vec![vec![0, 1, 2], vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert_ne!(a, content_key(&other, &ScoreConfig::k2(2)));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn score_dump_round_trip() {
        let d = ds();
        let cfg = ScoreConfig::bdeu(2.5, 2);
        let beta = FamilyScoreTable::build(&d, &cfg).unwrap();
        let dump = ScoreDump::new(&d, &cfg, &beta);
        let back: ScoreDump = serde_json::from_str(&to_json_string(&dump)).unwrap();
        assert_eq!(back, dump);
        assert_eq!(back.table().unwrap(), beta);
        assert_eq!(back.score.to_config().unwrap(), cfg);
    }

    #[test]
    fn sample_record_round_trip() {
        let g = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let s = DagSample { dag: g, log_joint: -12.345678901234567, order_index: 4 };
        let r = SampleRecord::from_sample(0, &s);
        let back: SampleRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back.to_sample().unwrap(), s);
    }

    #[test]
    fn edge_record_orientation() {
        let mut m = EdgeMatrix::zeros(2);
        m.set(1, 0, 0.7); // 0 → 1
        let r = EdgeMatrixRecord::new(&["A".into(), "B".into()], &m, None);
        assert_eq!(r.p_edge, vec![vec![0.0, 0.7], vec![0.0, 0.0]]);
        assert_eq!(r.matrix().unwrap(), m);
    }
}
