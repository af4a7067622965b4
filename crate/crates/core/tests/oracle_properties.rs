mod common;

use common::*;
use dagpost_core::features::DagView;
use dagpost_core::oracle::*;
use dagpost_core::{Dag, DpTables, FeatureExpr, ScoreConfig, SubsetTransform, VarSet};
use proptest::prelude::*;

fn arb_dag(max_n: usize) -> impl Strategy<Value = Dag> {
    (1..=max_n, any::<u64>()).prop_map(|(n, seed)| {
        let mut r = rng(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (dagpost_core::uniform(&mut r) * (i + 1) as f64) as usize;
            perm.swap(i, j);
        }
        let mut parents = vec![VarSet::EMPTY; n];
        for a in 0..n {
            for b in 0..a {
                if dagpost_core::uniform(&mut r) < 0.4 {
                    parents[perm[a]] = parents[perm[a]].with(perm[b]);
                }
            }
        }
        Dag::new(parents).unwrap()
    })
}

fn arb_feature(n: usize) -> BoxedStrategy<FeatureExpr> {
    let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
    let leaf = prop_oneof![
        pair.clone().prop_map(|(a, b)| FeatureExpr::edge(a, b)),
        pair.clone().prop_map(|(a, b)| FeatureExpr::path(a, b)),
        (pair, 1..4usize).prop_map(|((a, b), l)| FeatureExpr::path_len(a, b, l)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            inner.prop_map(FeatureExpr::not),
        ]
    })
    .boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extension_counts_match_permutation_filter(g in arb_dag(7)) {
        let c = count_linear_extensions(&g).unwrap();
        prop_assert_eq!(c as u64, brute_extensions(&g));
        prop_assert!(c >= 1);
        let factorial: u128 = (1..=g.n() as u128).product();
        prop_assert_eq!(c == factorial, g.edge_count() == 0);
        prop_assert!((log_count_linear_extensions(&g).unwrap() - (c as f64).ln()).abs() < 1e-10);
    }

    #[test]
    fn path_matches_adjacency_powers(g in arb_dag(6)) {
        let reach = closure_by_powers(&g);
        let view = DagView::new(&g);
        for a in 0..g.n() {
            for b in 0..g.n() {
                if a != b {
                    prop_assert_eq!(FeatureExpr::path(a, b).eval_view(&view), reach[a][b]);
                    prop_assert_eq!(FeatureExpr::path_len(a, b, 1).eval(&g), g.has_edge(a, b));
                }
            }
        }
    }

    #[test]
    fn negation_is_complement(g in arb_dag(4), f in arb_feature(4)) {
        prop_assume!(f.validate(g.n()).is_ok());
        prop_assert_eq!(f.clone().not().eval(&g), !f.eval(&g));
    }

    #[test]
    fn evidence_sources_agree(n in 1usize..=5, k in 0usize..5, seed in any::<u64>(), m in 1usize..60) {
        let k = k.min(n - 1);
        let beta = data_beta(n, m, ScoreConfig::bdeu(1.0, k), seed);
        let t = DpTables::new(&beta, SubsetTransform::Full).unwrap();
        let e = evidence_by_enumeration(&beta).unwrap().log_value;
        let ie = evidence_structure_modular(t.alpha()).unwrap().log_value;
        let via = evidence_from_order_modular(&beta, t.log_evidence()).unwrap().log_value;
        // 1e-9 relative in linear space
        prop_assert!((ie - e).abs() < 1e-9, "{} {}", ie, e);
        prop_assert!((via - e).abs() < 1e-9, "{} {}", via, e);
    }

    #[test]
    fn bias_relation_holds(n in 1usize..=4, seed in any::<u64>()) {
        let beta = random_beta(n, n - 1, seed, 8.0);
        let t = DpTables::new(&beta, SubsetTransform::Full).unwrap();
        let lp_prec = t.log_evidence();
        let lp_nprec = evidence_by_enumeration(&beta).unwrap().log_value;
        for (g, lp_order_g) in order_modular_dag_posteriors(&beta, lp_prec).unwrap() {
            let lp_struct_g = beta.log_joint(g.parents()) - lp_nprec;
            let rhs = lp_nprec - lp_prec + log_count_linear_extensions(&g).unwrap() + lp_struct_g;
            prop_assert!((lp_order_g.exp() - rhs.exp()).abs() <= 1e-9 * lp_order_g.exp().max(1e-300));
        }
    }

    #[test]
    fn order_modular_routes_agree(n in 1usize..=4, seed in any::<u64>(), f in arb_feature(4)) {
        prop_assume!(f.validate(n).is_ok());
        let beta = random_beta(n, n.saturating_sub(2).max(1).min(n - 1), seed, 6.0);
        let fs = [f, FeatureExpr::Const(true)];
        let a = exact_posterior_order_modular(&beta, &fs).unwrap();
        let b = exact_posterior_order_modular_double(&beta, &fs).unwrap();
        prop_assert!((a[0] - b[0]).abs() < 1e-9);
        prop_assert!((a[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modular_edge_equals_edge(g in arb_dag(5), a in 0usize..5, b in 0usize..5) {
        prop_assume!(a < g.n() && b < g.n() && a != b);
        prop_assert_eq!(FeatureExpr::modular_edge(g.n(), a, b).eval(&g), FeatureExpr::edge(a, b).eval(&g));
    }
}

#[test]
fn six_node_dag_count() {
    assert_eq!(enumerate_dags(6, 5).unwrap().count(), 3_781_503);
}

#[test]
fn bounded_indegree_counts_match_filter() {
    for n in 1..=4 {
        for k in 0..n {
            let all = enumerate_dags(n, n - 1).unwrap().filter(|g| g.max_indegree() <= k).count();
            assert_eq!(enumerate_dags(n, k).unwrap().count(), all);
        }
    }
}

#[test]
fn evidence_agrees_at_six_nodes() {
    let beta = data_beta(6, 40, ScoreConfig::k2(2), 11);
    let t = DpTables::new(&beta, SubsetTransform::Full).unwrap();
    let e = evidence_by_enumeration(&beta).unwrap().log_value;
    let ie = evidence_structure_modular(t.alpha()).unwrap().log_value;
    assert!((e - ie).abs() < 1e-9, "{e} {ie}");
}

#[test]
fn constant_features_under_structure_prior() {
    let beta = random_beta(3, 2, 5, 4.0);
    let p = exact_posterior_structure_modular(&beta, &[FeatureExpr::Const(true), FeatureExpr::Const(false)]).unwrap();
    assert!((p[0] - 1.0).abs() < 1e-12);
    assert_eq!(p[1], 0.0);
}

#[test]
fn two_node_single_row_by_hand() {
    // one binary row, K2: every family scores ln(1/2) regardless of parents
    let ds = dagpost_core::Dataset::from_codes_unnamed(vec![2, 2], vec![vec![0, 1]]).unwrap();
    let cfg = ScoreConfig::k2(1).with_rho(dagpost_core::RhoMode::Uniform);
    let beta = dagpost_core::FamilyScoreTable::build(&ds, &cfg).unwrap();
    let p = exact_posterior_structure_modular(&beta, &[FeatureExpr::edge(0, 1), FeatureExpr::edge(1, 0)]).unwrap();
    assert!((p[0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
    // the order prior doubles the empty graph's weight: 2 : 1 : 1
    let q = exact_posterior_order_modular(&beta, &[FeatureExpr::edge(0, 1)]).unwrap();
    assert!((q[0] - 0.25).abs() < 1e-12);
}
