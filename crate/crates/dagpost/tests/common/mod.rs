#![allow(dead_code)]

use dagpost_core::scores::FamilyScoreTable;
use dagpost_core::{Dag, FeatureExpr, VarSet};

/// Every parent vector with in-degree ≤ k that passes a Kahn acyclicity check.
pub fn all_dags(n: usize, k: usize) -> Vec<Dag> {
    let options: Vec<Vec<VarSet>> = (0..n)
        .map(|i| {
            (0u32..1 << n)
                .filter(|s| s & (1 << i) == 0 && s.count_ones() as usize <= k)
                .map(VarSet::from_bits)
                .collect()
        })
        .collect();
    let mut pick = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        let parents: Vec<VarSet> = (0..n).map(|i| options[i][pick[i]]).collect();
        if acyclic(&parents) {
            out.push(Dag::new(parents).unwrap());
        }
        let mut i = 0;
        while i < n {
            pick[i] += 1;
            if pick[i] < options[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

fn acyclic(parents: &[VarSet]) -> bool {
    let n = parents.len();
    let mut placed = 0u32;
    for _ in 0..n {
        match (0..n).find(|&v| placed & (1 << v) == 0 && parents[v].bits() & !placed == 0) {
            Some(v) => placed |= 1 << v,
            None => return false,
        }
    }
    true
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn consistent(g: &Dag, order: &[usize]) -> bool {
    let mut pos = vec![0; order.len()];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    (0..g.n()).all(|i| g.parents_of(i).iter().all(|j| pos[j] < pos[i]))
}

pub fn brute_extensions(g: &Dag) -> u64 {
    permutations(g.n()).iter().filter(|p| consistent(g, p)).count() as u64
}

fn lse(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln Σ_G p⊀(G, D)` over an explicit DAG list.
pub fn brute_structure_evidence(beta: &FamilyScoreTable, dags: &[Dag]) -> f64 {
    lse(dags.iter().map(|g| beta.log_joint(g.parents())))
}

/// Structure-modular posterior of each feature over an explicit DAG list.
pub fn brute_structure_posteriors(beta: &FamilyScoreTable, dags: &[Dag], features: &[FeatureExpr]) -> Vec<f64> {
    let z = brute_structure_evidence(beta, dags);
    features
        .iter()
        .map(|f| dags.iter().filter(|g| f.eval(g)).map(|g| (beta.log_joint(g.parents()) - z).exp()).sum())
        .collect()
}

/// `p≺(G | D)` for each DAG: joint times the number of consistent orders, normalized.
pub fn brute_order_dag_posteriors(beta: &FamilyScoreTable, dags: &[Dag]) -> Vec<f64> {
    let w: Vec<f64> = dags.iter().map(|g| beta.log_joint(g.parents()) + (brute_extensions(g) as f64).ln()).collect();
    let z = lse(w.iter().copied());
    w.iter().map(|x| (x - z).exp()).collect()
}

/// Order-modular edge posteriors by enumerating orders and parent sets directly;
/// returns `p[from][to]`.
pub fn brute_order_edges(beta: &FamilyScoreTable) -> Vec<Vec<f64>> {
    let n = beta.n();
    let k = beta.max_indegree();
    let mut joint = Vec::new();
    let mut edge_terms: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n]; n];
    for order in permutations(n) {
        let mut total = 0.0;
        let mut fam = Vec::new();
        for (pos, &i) in order.iter().enumerate() {
            let pred: u32 = order[..pos].iter().map(|&v| 1u32 << v).sum();
            let sets: Vec<u32> = (0..=pred).filter(|s| s & !pred == 0 && s.count_ones() as usize <= k).collect();
            let all = lse(sets.iter().map(|&s| beta.log_beta(i, VarSet::from_bits(s))));
            total += all;
            fam.push((i, sets, all));
        }
        joint.push(total);
        for (i, sets, all) in &fam {
            for j in 0..n {
                let with = lse(sets.iter().filter(|&&s| s & (1 << j) != 0).map(|&s| beta.log_beta(*i, VarSet::from_bits(s))));
                if with > f64::NEG_INFINITY {
                    edge_terms[j][*i].push(total - all + with);
                }
            }
        }
    }
    let z = lse(joint.iter().copied());
    (0..n)
        .map(|j| (0..n).map(|i| (lse(edge_terms[j][i].iter().copied()) - z).exp()).collect())
        .collect()
}
