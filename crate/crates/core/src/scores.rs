//! Local marginal likelihoods and the family score (β) tables.

use alloc::format;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::math::{ln_binomial, ln_gamma};
use crate::varset::{bounded_rank, bounded_subset_count, bounded_subsets, compress_without, expand_without, VarSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreFamily {
    /// Cooper–Herskovits score (uniform Dirichlet, all hyperparameters 1).
    K2,
    /// Bayesian Dirichlet equivalent uniform with the given equivalent sample size.
    BDeu { ess: f64 },
}

/// Modular prior factor ρ_i(Pa) folded into the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMode {
    /// ρ ≡ 1.
    Uniform,
    /// ρ(Pa) = 1 / C(n-1, |Pa|).
    InvBinomial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    pub family: ScoreFamily,
    pub max_indegree: usize,
    pub rho: RhoMode,
}

impl ScoreConfig {
    /// K2 paired with the inverse-binomial prior.
    pub fn k2(max_indegree: usize) -> Self {
        ScoreConfig { family: ScoreFamily::K2, max_indegree, rho: RhoMode::InvBinomial }
    }

    /// BDeu paired with the uniform prior.
    pub fn bdeu(ess: f64, max_indegree: usize) -> Self {
        ScoreConfig { family: ScoreFamily::BDeu { ess }, max_indegree, rho: RhoMode::Uniform }
    }

    pub fn with_rho(self, rho: RhoMode) -> Self {
        ScoreConfig { rho, ..self }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::NoColumns);
        }
        if self.max_indegree > n - 1 {
            return Err(Error::InvalidConfig(format!(
                "max in-degree {} exceeds n-1 = {}",
                self.max_indegree,
                n - 1
            )));
        }
        if let ScoreFamily::BDeu { ess } = self.family {
            if !(ess > 0.0 && ess.is_finite()) {
                return Err(Error::InvalidConfig(format!("equivalent sample size must be positive, got {ess}")));
            }
        }
        Ok(())
    }
}

/// Log marginal likelihood `ln score_i(Pa : D)`.
pub fn local_score(ds: &Dataset, family: ScoreFamily, child: usize, parents: VarSet) -> f64 {
    let counts = ds.family_counts(child, parents);
    let r = counts.child_arity as f64;
    let mut total = 0.0;
    match family {
        ScoreFamily::K2 => {
            let lg_r = ln_gamma(r);
            for cfg in &counts.configs {
                let nij: u32 = cfg.counts.iter().sum();
                total += lg_r - ln_gamma(nij as f64 + r);
                total += cfg.counts.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>();
            }
        }
        ScoreFamily::BDeu { ess } => {
            let a_j = ess / counts.parent_configs;
            let a_jk = a_j / r;
            let lg_aj = ln_gamma(a_j);
            let lg_ajk = ln_gamma(a_jk);
            for cfg in &counts.configs {
                let nij: u32 = cfg.counts.iter().sum();
                total += lg_aj - ln_gamma(a_j + nij as f64);
                for &c in &cfg.counts {
                    if c > 0 {
                        total += ln_gamma(a_jk + c as f64) - lg_ajk;
                    }
                }
            }
        }
    }
    total
}

/// `ln ρ_i(Pa)` for a node among `n` variables.
pub fn log_rho(rho: RhoMode, n: usize, parent_count: usize) -> f64 {
    match rho {
        RhoMode::Uniform => 0.0,
        RhoMode::InvBinomial => -ln_binomial((n - 1) as u32, parent_count as u32),
    }
}

/// Per-node `ln β'_i(Pa) = ln ρ_i(Pa) + ln score_i(Pa : D)` for every parent set
/// with at most `k` members.
///
/// Entries of node `i` are stored in canonical (size, encoding) order over the
/// `n-1` variables other than `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyScoreTable {
    n: usize,
    k: usize,
    nodes: Vec<Vec<f64>>,
}

impl FamilyScoreTable {
    pub fn build(ds: &Dataset, cfg: &ScoreConfig) -> Result<Self> {
        let n = ds.n();
        cfg.validate(n)?;
        let nodes = (0..n).map(|i| Self::build_node(ds, cfg, i)).collect();
        Ok(FamilyScoreTable { n, k: cfg.max_indegree, nodes })
    }

    /// Entries of a single node, in canonical order. Exposed so that callers
    /// can parallelize construction over nodes.
    pub fn build_node(ds: &Dataset, cfg: &ScoreConfig, i: usize) -> Vec<f64> {
        let n = ds.n();
        bounded_subsets((n - 1) as u32, cfg.max_indegree as u32)
            .map(|c| {
                let pa = VarSet::from_bits(expand_without(c, i));
                log_rho(cfg.rho, n, pa.len()) + local_score(ds, cfg.family, i, pa)
            })
            .collect()
    }

    /// Assembles a table from per-node entry vectors in canonical order.
    pub fn from_nodes(n: usize, k: usize, nodes: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || nodes.len() != n || k > n - 1 {
            return Err(Error::Shape(format!("{} node tables for n = {n}, k = {k}", nodes.len())));
        }
        let expect = bounded_subset_count((n - 1) as u32, k as u32);
        for (i, t) in nodes.iter().enumerate() {
            if t.len() != expect {
                return Err(Error::Shape(format!("node {i} has {} entries, expected {expect}", t.len())));
            }
        }
        Ok(FamilyScoreTable { n, k, nodes })
    }

    /// Table with every entry given by `f(node, parents)`.
    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(usize, VarSet) -> f64) -> Self {
        let nodes = (0..n)
            .map(|i| {
                bounded_subsets((n - 1) as u32, k as u32)
                    .map(|c| f(i, VarSet::from_bits(expand_without(c, i))))
                    .collect()
            })
            .collect();
        FamilyScoreTable { n, k, nodes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_indegree(&self) -> usize {
        self.k
    }

    /// Domain size per node: `Σ_{j ≤ k} C(n-1, j)`.
    pub fn domain_len(&self) -> usize {
        self.nodes.first().map_or(0, Vec::len)
    }

    /// `ln β'_i(Pa)`; `-inf` for parent sets outside the domain (too large or
    /// containing `i`).
    #[inline]
    pub fn log_beta(&self, i: usize, parents: VarSet) -> f64 {
        if parents.contains(i) || parents.len() > self.k {
            return f64::NEG_INFINITY;
        }
        let c = compress_without(parents.bits(), i);
        self.nodes[i][bounded_rank(c, (self.n - 1) as u32)]
    }

    /// Raw entries of node `i` in canonical order.
    pub fn node_entries(&self, i: usize) -> &[f64] {
        &self.nodes[i]
    }

    /// `(parent set, ln β')` pairs of node `i` in canonical order.
    pub fn iter_node(&self, i: usize) -> impl Iterator<Item = (VarSet, f64)> + '_ {
        bounded_subsets((self.n - 1) as u32, self.k as u32)
            .zip(self.nodes[i].iter().copied())
            .map(move |(c, v)| (VarSet::from_bits(expand_without(c, i)), v))
    }

    /// Sum of `ln β'` over the families of a DAG, i.e. the log joint under a
    /// structure-modular prior equal to ρ.
    pub fn log_joint(&self, parents: &[VarSet]) -> f64 {
        parents.iter().enumerate().map(|(i, &p)| self.log_beta(i, p)).sum()
    }
}
