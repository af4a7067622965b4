#![allow(dead_code)]

use dagpost_core::scores::FamilyScoreTable;
use dagpost_core::synth::random_dataset;
use dagpost_core::{Dag, ScoreConfig, VarSet};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// β table with arbitrary values drawn from a seed.
pub fn random_beta(n: usize, k: usize, seed: u64, spread: f64) -> FamilyScoreTable {
    let mut r = rng(seed);
    FamilyScoreTable::from_fn(n, k, |_, _| -spread * dagpost_core::uniform(&mut r))
}

/// β table scored from random binary data.
pub fn data_beta(n: usize, m: usize, cfg: ScoreConfig, seed: u64) -> FamilyScoreTable {
    let ds = random_dataset(n, m, 2, &mut rng(seed)).unwrap();
    FamilyScoreTable::build(&ds, &cfg).unwrap()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..left.len() {
            let v = left.remove(k);
            prefix.push(v);
            rec(prefix, left, out);
            prefix.pop();
            left.insert(k, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

/// Subsets of `within` (as bitmasks) of size at most `k`, by plain scan.
pub fn subsets_up_to(within: u32, k: usize) -> Vec<u32> {
    (0..=within).filter(|&s| s & !within == 0 && s.count_ones() as usize <= k).collect()
}

/// Direct `Σ_{Pa⊆S, |Pa|≤k} β'_i(Pa)` in linear space (relative to `shift`).
pub fn direct_alpha(beta: &FamilyScoreTable, i: usize, s: u32) -> f64 {
    subsets_up_to(s, beta.max_indegree())
        .into_iter()
        .map(|pa| beta.log_beta(i, VarSet::from_bits(pa)).exp())
        .sum()
}

/// Linear extensions by filtering all permutations.
pub fn brute_extensions(g: &Dag) -> u64 {
    permutations(g.n())
        .into_iter()
        .filter(|p| {
            let mut pos = vec![0; p.len()];
            for (k, &v) in p.iter().enumerate() {
                pos[v] = k;
            }
            (0..g.n()).all(|i| g.parents_of(i).iter().all(|j| pos[j] < pos[i]))
        })
        .count() as u64
}

/// Reachability by boolean adjacency powers.
pub fn closure_by_powers(g: &Dag) -> Vec<Vec<bool>> {
    let n = g.n();
    let adj: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| g.has_edge(a, b)).collect()).collect();
    let mut reach = vec![vec![false; n]; n];
    let mut power = adj.clone();
    for _ in 0..n {
        for a in 0..n {
            for b in 0..n {
                reach[a][b] |= power[a][b];
            }
        }
        let mut next = vec![vec![false; n]; n];
        for a in 0..n {
            for c in 0..n {
                if power[a][c] {
                    for b in 0..n {
                        next[a][b] |= adj[c][b];
                    }
                }
            }
        }
        power = next;
    }
    reach
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}
