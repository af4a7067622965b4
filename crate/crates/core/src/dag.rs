//! Total orders and DAGs in parent-vector form.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::varset::VarSet;

/// A total order `(σ_1, …, σ_n)` stored as the permutation vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TotalOrder {
    sigma: Vec<usize>,
}

impl TotalOrder {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut seen = VarSet::EMPTY;
        for &v in &sigma {
            if v >= n || seen.contains(v) {
                return Err(Error::InvalidConfig(alloc::format!("{sigma:?} is not a permutation")));
            }
            seen = seen.with(v);
        }
        Ok(TotalOrder { sigma })
    }

    pub fn identity(n: usize) -> Self {
        TotalOrder { sigma: (0..n).collect() }
    }

    pub(crate) fn from_vec_unchecked(sigma: Vec<usize>) -> Self {
        TotalOrder { sigma }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sigma
    }

    /// `(σ_j, U_{σ_j})` pairs in order position.
    pub fn families(&self) -> impl Iterator<Item = (usize, VarSet)> + '_ {
        self.sigma.iter().scan(VarSet::EMPTY, |u, &v| {
            let pred = *u;
            *u = u.with(v);
            Some((v, pred))
        })
    }

    /// Predecessor set of every node, indexed by node.
    pub fn predecessor_sets(&self) -> Vec<VarSet> {
        let mut out = alloc::vec![VarSet::EMPTY; self.sigma.len()];
        for (v, u) in self.families() {
            out[v] = u;
        }
        out
    }

    /// Lexicographic successor permutation, for exhaustive enumeration.
    pub fn next_permutation(&self) -> Option<TotalOrder> {
        let mut s = self.sigma.clone();
        let n = s.len();
        if n < 2 {
            return None;
        }
        let mut i = n - 1;
        while i > 0 && s[i - 1] >= s[i] {
            i -= 1;
        }
        if i == 0 {
            return None;
        }
        let mut j = n - 1;
        while s[j] <= s[i - 1] {
            j -= 1;
        }
        s.swap(i - 1, j);
        s[i..].reverse();
        Some(TotalOrder { sigma: s })
    }

    /// All `n!` orders in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = TotalOrder> {
        core::iter::successors(Some(TotalOrder::identity(n)), TotalOrder::next_permutation)
    }
}

/// A DAG as its parent-set vector `(Pa_1, …, Pa_n)`.
///
/// The parent vector is also the canonical identity used for hashing and
/// deduplication.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dag {
    parents: Vec<VarSet>,
}

impl Dag {
    /// Validates self-loops, range and acyclicity.
    pub fn new(parents: Vec<VarSet>) -> Result<Self> {
        let n = parents.len();
        let full = VarSet::full(n);
        for (i, p) in parents.iter().enumerate() {
            if p.contains(i) || !p.is_subset_of(full) {
                return Err(Error::InvalidConfig(alloc::format!("invalid parent set {p:?} for node {i}")));
            }
        }
        let dag = Dag { parents };
        if dag.topological_order().is_none() {
            return Err(Error::InvalidConfig("graph has a directed cycle".into()));
        }
        Ok(dag)
    }

    pub(crate) fn from_parents_unchecked(parents: Vec<VarSet>) -> Self {
        Dag { parents }
    }

    pub fn empty(n: usize) -> Self {
        Dag { parents: alloc::vec![VarSet::EMPTY; n] }
    }

    /// Builds a DAG from `(from, to)` edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut parents = alloc::vec![VarSet::EMPTY; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidConfig(alloc::format!("edge ({a}, {b}) out of range")));
            }
            parents[b] = parents[b].with(a);
        }
        Dag::new(parents)
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self) -> &[VarSet] {
        &self.parents
    }

    pub fn parents_of(&self, i: usize) -> VarSet {
        self.parents[i]
    }

    #[inline]
    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(from)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    pub fn max_indegree(&self) -> usize {
        self.parents.iter().map(|p| p.len()).max().unwrap_or(0)
    }

    /// Children set of every node.
    pub fn children(&self) -> Vec<VarSet> {
        let mut ch = alloc::vec![VarSet::EMPTY; self.n()];
        for (i, p) in self.parents.iter().enumerate() {
            for j in p.iter() {
                ch[j] = ch[j].with(i);
            }
        }
        ch
    }

    /// Kahn's algorithm; `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut placed = VarSet::EMPTY;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let next = (0..n).find(|&i| !placed.contains(i) && self.parents[i].is_subset_of(placed))?;
            placed = placed.with(next);
            out.push(next);
        }
        Some(out)
    }

    /// `Pa_i ⊆ U_i` for every node.
    pub fn is_consistent_with(&self, order: &TotalOrder) -> bool {
        order.families().all(|(v, u)| self.parents[v].is_subset_of(u))
    }
}
