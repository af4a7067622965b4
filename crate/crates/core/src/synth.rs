//! Random discrete Bayesian networks and forward sampling, for tests and benchmarks.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::dag::Dag;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::math::ln;
use crate::uniform;
use crate::varset::VarSet;

/// A DAG with conditional probability tables.
#[derive(Debug, Clone)]
pub struct BayesNet {
    pub dag: Dag,
    pub arity: Vec<u16>,
    /// `cpt[i][config * arity[i] + value]`, parent configurations in mixed
    /// radix with the lowest-index parent most significant.
    pub cpt: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct NetworkSpec {
    pub n: usize,
    pub arity: u16,
    pub max_indegree: usize,
    /// Probability that each candidate parent is kept (before truncation to `max_indegree`).
    pub edge_probability: f64,
    /// Dirichlet-like sharpness of the CPT rows; smaller means more deterministic.
    pub concentration: f64,
}

impl NetworkSpec {
    pub fn binary(n: usize, max_indegree: usize) -> Self {
        NetworkSpec { n, arity: 2, max_indegree, edge_probability: 0.5, concentration: 0.5 }
    }
}

fn shuffle<R: RngCore + ?Sized>(v: &mut [usize], rng: &mut R) {
    for i in (1..v.len()).rev() {
        let j = (uniform(rng) * (i + 1) as f64) as usize;
        v.swap(i, j.min(i));
    }
}

/// Gamma(shape, 1) draw (Marsaglia–Tsang, with the shape < 1 boost).
fn gamma<R: RngCore + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u = uniform(rng).max(f64::MIN_POSITIVE);
        return gamma(shape + 1.0, rng) * libm::pow(u, 1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / libm::sqrt(9.0 * d);
    loop {
        // Box–Muller normal
        let u1 = uniform(rng).max(f64::MIN_POSITIVE);
        let u2 = uniform(rng);
        let z = libm::sqrt(-2.0 * ln(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2);
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = uniform(rng).max(f64::MIN_POSITIVE);
        if ln(u) < 0.5 * z * z + d - d * v + d * ln(v) {
            return d * v;
        }
    }
}

/// Draws a random network: random topological order, random parents, Dirichlet CPT rows.
pub fn random_network<R: RngCore + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<BayesNet> {
    if spec.n == 0 || spec.n > 30 || spec.arity < 2 {
        return Err(Error::InvalidConfig(alloc::format!("bad network spec {spec:?}")));
    }
    let n = spec.n;
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, rng);
    let mut parents = vec![VarSet::EMPTY; n];
    for (pos, &v) in order.iter().enumerate() {
        let mut cands: Vec<usize> = order[..pos].to_vec();
        shuffle(&mut cands, rng);
        for &c in &cands {
            if parents[v].len() >= spec.max_indegree {
                break;
            }
            if uniform(rng) < spec.edge_probability {
                parents[v] = parents[v].with(c);
            }
        }
    }
    let dag = Dag::new(parents)?;
    let arity = vec![spec.arity; n];
    let cpt = (0..n)
        .map(|i| {
            let configs: usize = dag.parents_of(i).iter().map(|p| arity[p] as usize).product();
            let r = arity[i] as usize;
            let mut t = Vec::with_capacity(configs * r);
            for _ in 0..configs {
                let row: Vec<f64> = (0..r).map(|_| gamma(spec.concentration, rng) + 1e-12).collect();
                let s: f64 = row.iter().sum();
                t.extend(row.iter().map(|x| x / s));
            }
            t
        })
        .collect();
    Ok(BayesNet { dag, arity, cpt })
}

impl BayesNet {
    /// Binary noisy-OR network: a child is the OR of its parents, flipped with
    /// probability `flip`; roots are fair coins.
    pub fn noisy_or(dag: Dag, flip: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&flip) {
            return Err(Error::InvalidConfig(alloc::format!("flip probability {flip} outside [0, 0.5]")));
        }
        let cpt = (0..dag.n())
            .map(|i| {
                let k = dag.parents_of(i).len();
                if k == 0 {
                    return vec![0.5, 0.5];
                }
                (0..1usize << k)
                    .flat_map(|c| if c == 0 { [1.0 - flip, flip] } else { [flip, 1.0 - flip] })
                    .collect()
            })
            .collect();
        Ok(BayesNet { arity: vec![2; dag.n()], dag, cpt })
    }

    /// Forward-samples `m` rows.
    pub fn sample<R: RngCore + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Dataset> {
        let n = self.dag.n();
        let topo = self.dag.topological_order().expect("acyclic");
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let mut row = vec![0u16; n];
            for &v in &topo {
                let mut config = 0usize;
                for p in self.dag.parents_of(v).iter() {
                    config = config * self.arity[p] as usize + row[p] as usize;
                }
                let r = self.arity[v] as usize;
                let probs = &self.cpt[v][config * r..(config + 1) * r];
                let u = uniform(rng);
                let mut cum = 0.0;
                let mut val = r - 1;
                for (k, &p) in probs.iter().enumerate() {
                    cum += p;
                    if u < cum {
                        val = k;
                        break;
                    }
                }
                row[v] = val as u16;
            }
            rows.push(row);
        }
        Dataset::from_codes_unnamed(self.arity.clone(), rows)
    }
}

/// Uniformly random categorical data with no structure.
pub fn random_dataset<R: RngCore + ?Sized>(n: usize, m: usize, arity: u16, rng: &mut R) -> Result<Dataset> {
    let rows = (0..m)
        .map(|_| (0..n).map(|_| ((uniform(rng) * arity as f64) as u16).min(arity - 1)).collect())
        .collect();
    Dataset::from_codes_unnamed(vec![arity; n], rows)
}
