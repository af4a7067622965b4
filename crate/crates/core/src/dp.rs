//! Subset-lattice dynamic programming over variable orders.
//!
//! With `q ≡ 1`, for every node `i` and predecessor set `S ⊆ V∖{i}`:
//!
//! * `α_i(S) = Σ_{Pa ⊆ S, |Pa| ≤ k} β'_i(Pa)` (a truncated subset-sum transform),
//! * `L(S) = Σ_{i∈S} α_i(S∖{i}) L(S∖{i})`, `L(∅) = 1` (forward contribution),
//! * `R(T) = Σ_{i∈T} α_i(V∖T) R(T∖{i})`, `R(∅) = 1` (backward contribution).
//!
//! `L(V) = R(V)` is the order-modular evidence `p≺(D)`. All tables hold
//! natural logarithms.

use alloc::vec;
use alloc::vec::Vec;

use crate::dag::TotalOrder;
use crate::error::{Error, Result};
use crate::math::{exp, exp_m1, ln, log_add_exp, LogAccumulator};
use crate::scores::FamilyScoreTable;
use crate::varset::{bounded_subsets, compress_without, expand_without, VarSet};
use crate::{DEFAULT_MAX_VARIABLES, HARD_MAX_VARIABLES};

/// Largest spread of finite log values for which a transform runs in linear
/// space after a single max-shift; wider spreads fall back to log space.
const LINEAR_RANGE: f64 = 600.0;

/// How the truncated subset sums behind α are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsetTransform {
    /// One full zeta transform over β zero-extended beyond size `k`.
    #[default]
    Full,
    /// Per-size layers `a_j(S) = Σ_{T⊆S,|T|=j} β(T)`, built from
    /// `a_j(S) = Σ_{i∈S} a_j(S∖{i}) / (|S| - j)` and summed over `j ≤ k`.
    SizeLayered,
}

trait Arith {
    const ZERO: f64;
    fn add(a: f64, b: f64) -> f64;
    fn div(a: f64, c: f64) -> f64;
}

struct Linear;
struct LogSpace;

impl Arith for Linear {
    const ZERO: f64 = 0.0;
    #[inline]
    fn add(a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline]
    fn div(a: f64, c: f64) -> f64 {
        a / c
    }
}

impl Arith for LogSpace {
    const ZERO: f64 = f64::NEG_INFINITY;
    #[inline]
    fn add(a: f64, b: f64) -> f64 {
        log_add_exp(a, b)
    }
    #[inline]
    fn div(a: f64, c: f64) -> f64 {
        a - ln(c)
    }
}

fn zeta_subset<A: Arith>(v: &mut [f64]) {
    let mut bit = 1;
    while bit < v.len() {
        for s in 0..v.len() {
            if s & bit != 0 {
                v[s] = A::add(v[s], v[s ^ bit]);
            }
        }
        bit <<= 1;
    }
}

fn zeta_superset<A: Arith>(v: &mut [f64]) {
    let mut bit = 1;
    while bit < v.len() {
        for s in 0..v.len() {
            if s & bit == 0 {
                v[s] = A::add(v[s], v[s | bit]);
            }
        }
        bit <<= 1;
    }
}

/// `v` holds size-`j` entries at popcount `j` (others ignored); on return it
/// holds `a_j(S)` for every `S`.
fn size_layer<A: Arith>(v: &mut [f64], j: u32) {
    for s in 0..v.len() {
        let size = (s as u32).count_ones();
        if size < j {
            v[s] = A::ZERO;
        } else if size > j {
            let mut acc = A::ZERO;
            let mut rest = s;
            while rest != 0 {
                let b = rest & rest.wrapping_neg();
                acc = A::add(acc, v[s ^ b]);
                rest ^= b;
            }
            v[s] = A::div(acc, (size - j) as f64);
        }
    }
}

/// Applies `op` to log values, in linear space when their spread allows it.
fn in_best_space(v: &mut [f64], linear: impl FnOnce(&mut [f64]), log: impl FnOnce(&mut [f64])) {
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for &x in v.iter() {
        if x > f64::NEG_INFINITY {
            max = max.max(x);
            min = min.min(x);
        }
    }
    if max == f64::NEG_INFINITY {
        return;
    }
    if max - min <= LINEAR_RANGE {
        for x in v.iter_mut() {
            *x = exp(*x - max);
        }
        linear(v);
        for x in v.iter_mut() {
            *x = ln(*x) + max;
        }
    } else {
        log(v);
    }
}

/// Log subset sums `out[S] = ln Σ_{T ⊆ S} e^{v[T]}` in place.
pub fn log_subset_sums(v: &mut [f64]) {
    in_best_space(v, zeta_subset::<Linear>, zeta_subset::<LogSpace>);
}

/// Log superset sums `out[S] = ln Σ_{T ⊇ S} e^{v[T]}` in place.
pub fn log_superset_sums(v: &mut [f64]) {
    in_best_space(v, zeta_superset::<Linear>, zeta_superset::<LogSpace>);
}

/// `ln α'_i(S)` for every node and every `S ⊆ V∖{i}`.
///
/// Node `i`'s table is indexed by `S` with bit `i` removed (`n-1` bits).
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTables {
    n: usize,
    tables: Vec<Vec<f64>>,
}

impl AlphaTables {
    pub fn build(beta: &FamilyScoreTable, transform: SubsetTransform) -> Self {
        let tables = (0..beta.n()).map(|i| Self::build_node(beta, i, transform)).collect();
        AlphaTables { n: beta.n(), tables }
    }

    /// α table of a single node (for callers parallelizing over nodes).
    pub fn build_node(beta: &FamilyScoreTable, i: usize, transform: SubsetTransform) -> Vec<f64> {
        let u = (beta.n() - 1) as u32;
        let k = beta.max_indegree() as u32;
        let mut v = vec![f64::NEG_INFINITY; 1usize << u];
        for (c, &b) in bounded_subsets(u, k).zip(beta.node_entries(i)) {
            v[c as usize] = b;
        }
        match transform {
            SubsetTransform::Full => log_subset_sums(&mut v),
            SubsetTransform::SizeLayered => {
                let mut total = vec![f64::NEG_INFINITY; v.len()];
                let mut layer = vec![0.0; v.len()];
                for j in 0..=k.min(u) {
                    layer.copy_from_slice(&v);
                    in_best_space(
                        &mut layer,
                        |x| size_layer::<Linear>(x, j),
                        |x| size_layer::<LogSpace>(x, j),
                    );
                    for (t, &l) in total.iter_mut().zip(&layer) {
                        *t = log_add_exp(*t, l);
                    }
                }
                v = total;
            }
        }
        v
    }

    pub fn from_nodes(n: usize, tables: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || tables.len() != n || tables.iter().any(|t| t.len() != 1usize << (n - 1)) {
            return Err(Error::Shape(alloc::format!("alpha tables do not match n = {n}")));
        }
        Ok(AlphaTables { n, tables })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `ln α'_i(S)`; `S` must not contain `i`.
    #[inline]
    pub fn get(&self, i: usize, s: VarSet) -> f64 {
        debug_assert!(!s.contains(i));
        self.tables[i][compress_without(s.bits(), i) as usize]
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.tables[i]
    }

    pub fn len(&self) -> usize {
        self.tables.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Forward contributions `ln L'(S)` for every `S ⊆ V`.
pub fn build_forward(alpha: &AlphaTables) -> Vec<f64> {
    let n = alpha.n();
    let mut f = vec![0.0; 1usize << n];
    let mut terms = [0.0f64; 32];
    for s in 1..f.len() {
        let set = s as u32;
        let mut cnt = 0;
        let mut max = f64::NEG_INFINITY;
        let mut rest = set;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = set & !(1 << i);
            let t = alpha.tables[i][compress_without(prev, i) as usize] + f[prev as usize];
            max = max.max(t);
            terms[cnt] = t;
            cnt += 1;
        }
        f[s] = sum_terms(&terms[..cnt], max);
    }
    f
}

/// Backward contributions `ln R'(T)` for every `T ⊆ V`.
pub fn build_backward(alpha: &AlphaTables) -> Vec<f64> {
    let n = alpha.n();
    let full = VarSet::full(n).bits();
    let mut b = vec![0.0; 1usize << n];
    let mut terms = [0.0f64; 32];
    for t in 1..b.len() {
        let set = t as u32;
        let base = full & !set;
        let mut cnt = 0;
        let mut max = f64::NEG_INFINITY;
        let mut rest = set;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let x = alpha.tables[i][compress_without(base, i) as usize] + b[(set & !(1 << i)) as usize];
            max = max.max(x);
            terms[cnt] = x;
            cnt += 1;
        }
        b[t] = sum_terms(&terms[..cnt], max);
    }
    b
}

#[inline]
fn sum_terms(terms: &[f64], max: f64) -> f64 {
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = terms.iter().map(|&t| exp(t - max)).sum();
    max + ln(s)
}

/// α, L and R for one dataset and configuration. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DpTables {
    alpha: AlphaTables,
    forward: Vec<f64>,
    backward: Vec<f64>,
}

impl DpTables {
    /// Runs the whole DP, refusing `n` above the default variable cap.
    pub fn new(beta: &FamilyScoreTable, transform: SubsetTransform) -> Result<Self> {
        Self::with_limit(beta, transform, DEFAULT_MAX_VARIABLES)
    }

    /// Like [`DpTables::new`] with an explicit variable cap (at most
    /// [`HARD_MAX_VARIABLES`]).
    pub fn with_limit(beta: &FamilyScoreTable, transform: SubsetTransform, limit: usize) -> Result<Self> {
        check_size(beta.n(), limit)?;
        Ok(Self::from_alpha(AlphaTables::build(beta, transform)))
    }

    pub fn from_alpha(alpha: AlphaTables) -> Self {
        let forward = build_forward(&alpha);
        let backward = build_backward(&alpha);
        DpTables { alpha, forward, backward }
    }

    pub fn n(&self) -> usize {
        self.alpha.n()
    }

    pub fn alpha(&self) -> &AlphaTables {
        &self.alpha
    }

    /// `ln L'(S)`.
    #[inline]
    pub fn forward(&self, s: VarSet) -> f64 {
        self.forward[s.bits() as usize]
    }

    /// `ln R'(T)`.
    #[inline]
    pub fn backward(&self, t: VarSet) -> f64 {
        self.backward[t.bits() as usize]
    }

    pub fn forward_table(&self) -> &[f64] {
        &self.forward
    }

    pub fn backward_table(&self) -> &[f64] {
        &self.backward
    }

    /// `ln p≺(D) = ln L'(V)`.
    pub fn log_evidence(&self) -> f64 {
        self.forward[self.forward.len() - 1]
    }

    /// Number of stored log values: `n·2^{n-1} + 2·2^n`.
    pub fn stored_values(&self) -> usize {
        self.alpha.len() + self.forward.len() + self.backward.len()
    }

    /// `ln P((v, U) | D)`: posterior probability that `v` sits right after
    /// exactly the predecessor set `U` in a random order.
    pub fn cell_log_probability(&self, v: usize, u: VarSet) -> f64 {
        let rest = VarSet::full(self.n()).difference(u).without(v);
        self.alpha.get(v, u) + self.forward(u) + self.backward(rest) - self.log_evidence()
    }
}

/// Refuses `n` beyond `limit` (and beyond the hard representation limit).
pub fn check_size(n: usize, limit: usize) -> Result<()> {
    let limit = limit.min(HARD_MAX_VARIABLES);
    if n > limit {
        return Err(Error::Guard { what: "number of variables", limit, got: n });
    }
    if n == 0 {
        return Err(Error::NoColumns);
    }
    Ok(())
}

/// `ln p(≺, D) = Σ_i ln α'_i(U_i)`.
pub fn order_joint(order: &TotalOrder, alpha: &AlphaTables) -> f64 {
    order.families().map(|(v, u)| alpha.get(v, u)).sum()
}

/// `ln p((i, Pa) | ≺, D) = ln β'_i(Pa) − ln α'_i(U)` for the predecessor set `U` of `i`.
pub fn parent_posterior_given_order(
    beta: &FamilyScoreTable,
    alpha: &AlphaTables,
    i: usize,
    parents: VarSet,
    predecessors: VarSet,
) -> Result<f64> {
    if predecessors.contains(i) || !parents.is_subset_of(predecessors) {
        return Err(Error::NotInPredecessors);
    }
    Ok(beta.log_beta(i, parents) - alpha.get(i, predecessors))
}

/// `p(j → i | ≺, D) = 1 − α'_i(U∖{j}) / α'_i(U)`; zero when `j ∉ U`.
pub fn edge_posterior_given_order(alpha: &AlphaTables, j: usize, i: usize, predecessors: VarSet) -> f64 {
    if !predecessors.contains(j) || predecessors.contains(i) {
        return 0.0;
    }
    let without = alpha.get(i, predecessors.without(j));
    let with = alpha.get(i, predecessors);
    if with == f64::NEG_INFINITY {
        return 0.0;
    }
    (-exp_m1(without - with)).clamp(0.0, 1.0)
}

/// Square matrix of edge probabilities; row = child, column = parent.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMatrix {
    n: usize,
    values: Vec<f64>,
}

impl EdgeMatrix {
    pub fn zeros(n: usize) -> Self {
        EdgeMatrix { n, values: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("edge matrix rows must all have length n".into()));
        }
        Ok(EdgeMatrix { n, values: rows.into_iter().flatten().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of `parent → child`.
    #[inline]
    pub fn get(&self, child: usize, parent: usize) -> f64 {
        self.values[child * self.n + parent]
    }

    #[inline]
    pub fn set(&mut self, child: usize, parent: usize, p: f64) {
        self.values[child * self.n + parent] = p;
    }

    pub fn row(&self, child: usize) -> &[f64] {
        &self.values[child * self.n..(child + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n.max(1)).take(self.n)
    }

    /// Off-diagonal `(child, parent)` pairs.
    pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..n).flat_map(move |c| (0..n).filter(move |&p| p != c).map(move |p| (c, p)))
    }
}

/// Exact `p≺(j → i | D)` for all ordered pairs.
///
/// For each child `i`, `Γ_i(Pa) = Σ_{U ⊇ Pa} L'(U) R'(V∖U∖{i})` is obtained by one
/// superset-sum transform; then `p≺(j → i, D) = Σ_{Pa ∋ j} β'_i(Pa) Γ_i(Pa)`.
pub fn exact_edge_posteriors(beta: &FamilyScoreTable, tables: &DpTables) -> EdgeMatrix {
    let n = beta.n();
    let mut out = EdgeMatrix::zeros(n);
    for i in 0..n {
        let row = edge_posteriors_for_child(beta, tables, i);
        for (j, p) in row.into_iter().enumerate() {
            out.set(i, j, p);
        }
    }
    out
}

/// One row of [`exact_edge_posteriors`]: `p≺(j → child | D)` for every `j`.
pub fn edge_posteriors_for_child(beta: &FamilyScoreTable, tables: &DpTables, child: usize) -> Vec<f64> {
    let n = beta.n();
    let u = (n - 1) as u32;
    let full = VarSet::full(n).bits();
    let mut gamma: Vec<f64> = (0..1u32 << u)
        .map(|c| {
            let pred = expand_without(c, child);
            let rest = full & !pred & !(1 << child);
            tables.forward[pred as usize] + tables.backward[rest as usize]
        })
        .collect();
    log_superset_sums(&mut gamma);
    let mut acc = vec![LogAccumulator::new(); n];
    for (c, &b) in bounded_subsets(u, beta.max_indegree() as u32).zip(beta.node_entries(child)) {
        let term = b + gamma[c as usize];
        for j in VarSet::from_bits(expand_without(c, child)).iter() {
            acc[j].add(term);
        }
    }
    let evidence = tables.log_evidence();
    acc.iter()
        .enumerate()
        .map(|(j, a)| if j == child { 0.0 } else { exp(a.value() - evidence).clamp(0.0, 1.0) })
        .collect()
}
