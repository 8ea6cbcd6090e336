mod common;

use std::collections::BTreeSet;

use common::*;
use hyperbench::dyadic::{fit_matcomp, DyadScorer};
use hyperbench::ergm::{fit_mple, ErgmScorer, ErgmSpec, MpleOptions};
use hyperbench::evaluation::{f1_mcc, roc_auc};
use hyperbench::graph::{emit_edgelist, parse_edgelist, project_messages, EdgelistFormat, MessageLog, MessageRecord};
use hyperbench::hypergraph::derive_hypergraph;
use hyperbench::masking::{hp_candidates, lp_candidates, mask, missing_count, observed_graph, Mechanism};
use hyperbench::Graph;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn labelled_edges(g: &Graph) -> BTreeSet<(String, String)> {
    g.edges()
        .map(|(u, v)| {
            let (a, b) = (g.label(u).to_string(), g.label(v).to_string());
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

fn permuted(g: &Graph, perm: &[usize]) -> Graph {
    Graph::from_unlabeled_edges(g.n(), g.edges().map(|(u, v)| (perm[u], perm[v]))).unwrap()
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2usize..=max_n, 0.05f64..0.95, any::<u64>()).prop_map(|(n, p, seed)| random_graph(&mut rng(seed), n, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emit_then_parse_preserves_edges(g in graph_strategy(20)) {
        prop_assume!(g.edge_count() > 0);
        let once = parse_edgelist(&emit_edgelist(&g), EdgelistFormat::Plain).unwrap().graph;
        prop_assert_eq!(labelled_edges(&once), labelled_edges(&g));
        let touched = (0..g.n()).filter(|&v| g.degree(v) > 0).count();
        prop_assert_eq!(once.n(), touched);
    }

    #[test]
    fn triangle_count_is_trace_of_cube_over_six(g in graph_strategy(16)) {
        let a = adjacency(&g);
        let n = g.n();
        let mut trace = 0u64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if a[i][j] && a[j][k] && a[k][i] {
                        trace += 1;
                    }
                }
            }
        }
        prop_assert_eq!(g.triangle_count(), trace / 6);
    }

    #[test]
    fn projection_ignores_record_order(
        raw in prop::collection::vec((0u8..8, 0u8..8, 1u64..5), 1..40),
        seed in any::<u64>(),
    ) {
        let records: Vec<MessageRecord> = raw
            .iter()
            .map(|&(s, r, w)| MessageRecord {
                sender: format!("n{s}"),
                recipient: format!("n{r}"),
                weight: w,
                timestamp: None,
            })
            .collect();
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut rng(seed));
        let a = project_messages(&MessageLog { records });
        let b = project_messages(&MessageLog { records: shuffled });
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.graph, b.graph);
                prop_assert_eq!(a.volumes, b.volumes);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn scorers_are_permutation_equivariant(g in graph_strategy(10), seed in any::<u64>()) {
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng(seed));
        let gp = permuted(&g, &perm);
        let exact = [
            (DyadScorer::CommonNeighbors(&g), DyadScorer::CommonNeighbors(&gp)),
            (DyadScorer::AdamicAdar(&g), DyadScorer::AdamicAdar(&gp)),
            (DyadScorer::Null, DyadScorer::Null),
        ];
        let full_rank = (
            DyadScorer::MatComp(fit_matcomp(&g, n).unwrap()),
            DyadScorer::MatComp(fit_matcomp(&gp, n).unwrap()),
        );
        let spec = ErgmSpec::default();
        let ergm = match (fit_mple(&g, &spec, &MpleOptions::default()), fit_mple(&gp, &spec, &MpleOptions::default())) {
            (Ok(a), Ok(b)) => Some((
                DyadScorer::Ergm(ErgmScorer::new(a, &g).unwrap()),
                DyadScorer::Ergm(ErgmScorer::new(b, &gp).unwrap()),
            )),
            (a, b) => {
                prop_assert_eq!(a.is_err(), b.is_err());
                None
            }
        };
        for i in 0..n {
            for j in i + 1..n {
                for (s, sp) in &exact {
                    prop_assert_eq!(s.score(i, j).unwrap(), sp.score(perm[i], perm[j]).unwrap());
                }
                let (m, mp) = &full_rank;
                prop_assert!((m.score(i, j).unwrap() - mp.score(perm[i], perm[j]).unwrap()).abs() < 1e-9);
                if let Some((e, ep)) = &ergm {
                    prop_assert!((e.score(i, j).unwrap() - ep.score(perm[i], perm[j]).unwrap()).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn cn_and_aa_vanish_beyond_distance_two(g in graph_strategy(14)) {
        for i in 0..g.n() {
            for j in i + 1..g.n() {
                if g.common_neighbors(i, j).is_empty() {
                    prop_assert_eq!(DyadScorer::CommonNeighbors(&g).score(i, j).unwrap(), 0.0);
                    prop_assert_eq!(DyadScorer::AdamicAdar(&g).score(i, j).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn auc_is_rank_based(
        raw in prop::collection::vec((-100.0f64..100.0, any::<bool>()), 2..50),
    ) {
        let labels: Vec<bool> = raw.iter().map(|r| r.1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let scores: Vec<f64> = raw.iter().map(|r| r.0).collect();
        let base = roc_auc(&scores, &labels).unwrap();
        let transformed: Vec<f64> = scores.iter().map(|s| (s / 50.0).exp() * 3.0 + 1.0).collect();
        prop_assert!((roc_auc(&transformed, &labels).unwrap() - base).abs() < 1e-12);
        let distinct: BTreeSet<u64> = scores.iter().map(|s| s.to_bits()).collect();
        if distinct.len() == scores.len() {
            let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
            prop_assert!((base + roc_auc(&negated, &labels).unwrap() - 1.0).abs() < 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn mcc_symmetric_under_joint_flip(
        raw in prop::collection::vec((0.0f64..1.0, any::<bool>()), 2..50),
    ) {
        let labels: Vec<bool> = raw.iter().map(|r| r.1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let scores: Vec<f64> = raw.iter().map(|r| r.0).collect();
        let (f1, mcc) = f1_mcc(&scores, &labels, 0.5).unwrap();
        // Flip both the labels and the predictions (score >= 0.5 <=> 1 - score <= 0.5).
        let flipped_labels: Vec<bool> = labels.iter().map(|l| !l).collect();
        let flipped_scores: Vec<f64> = scores.iter().map(|s| if *s >= 0.5 { 0.0 } else { 1.0 }).collect();
        let (_, mcc_flipped) = f1_mcc(&flipped_scores, &flipped_labels, 0.5).unwrap();
        prop_assert!((mcc - mcc_flipped).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&f1));
        prop_assert!((-1.0..=1.0).contains(&mcc));
    }

    #[test]
    fn masking_partitions_and_candidates_are_consistent(
        g in graph_strategy(14),
        rho in 0.1f64..0.6,
        mnar in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let h = derive_hypergraph(&g).unwrap();
        let mech = if mnar { Mechanism::Mnar } else { Mechanism::Mcar };
        let m = missing_count(h.len(), rho);
        let split = match mask(&h, rho, mech, seed) {
            Ok(s) => s,
            Err(_) => {
                prop_assert!(h.len() < 2 || m == 0 || m == h.len());
                return Ok(());
            }
        };
        prop_assert_eq!(split.missing.len(), m);
        let mut all: Vec<usize> = split.observed.iter().chain(&split.missing).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..h.len()).collect::<Vec<_>>());
        prop_assert_eq!(&mask(&h, rho, mech, seed).unwrap(), &split);

        let g_obs = observed_graph(&g, &h, &split);
        prop_assert_eq!(g_obs.n(), g.n());
        for (u, v) in g_obs.edges() {
            prop_assert!(g.has_edge(u, v));
        }
        for &id in &split.observed {
            let e = h.edge(id);
            prop_assert!(e.iter().all(|&u| e.iter().all(|&v| u == v || g_obs.has_edge(u, v))));
        }

        if let Ok(cs) = hp_candidates(&h, &split, 1, seed) {
            let pos: Vec<&Vec<usize>> = cs.items.iter().filter(|c| c.label).map(|c| &c.nodes).collect();
            let neg: Vec<&Vec<usize>> = cs.items.iter().filter(|c| !c.label).map(|c| &c.nodes).collect();
            prop_assert_eq!(pos.len(), m);
            prop_assert_eq!(neg.len(), m);
            let mut pos_sizes: Vec<usize> = pos.iter().map(|p| p.len()).collect();
            let mut neg_sizes: Vec<usize> = neg.iter().map(|p| p.len()).collect();
            pos_sizes.sort_unstable();
            neg_sizes.sort_unstable();
            prop_assert_eq!(pos_sizes, neg_sizes);
            for nset in neg {
                prop_assert!(!h.contains(nset));
            }
        }
        if let Ok(cs) = lp_candidates(&g, &h, &split, 1, seed) {
            for c in &cs.items {
                prop_assert_eq!(c.nodes.len(), 2);
                prop_assert_eq!(g.has_edge(c.nodes[0], c.nodes[1]), c.label);
                if c.label {
                    prop_assert!(!g_obs.has_edge(c.nodes[0], c.nodes[1]) || h.edges().iter().any(|e| e.len() > 2 && e.contains(&c.nodes[0]) && e.contains(&c.nodes[1])));
                }
            }
        }
    }
}
