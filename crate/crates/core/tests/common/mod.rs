//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use hyperbench::cheshire::CheshireModel;
use hyperbench::{Graph, Hypergraph};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Graph::from_unlabeled_edges(n, edges).unwrap()
}

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.n()]; g.n()];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// Every subset (as a bitmask) that is a clique and cannot be extended.
pub fn brute_force_maximal_cliques(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    assert!(n <= 20);
    let a = adjacency(g);
    let is_clique = |mask: u32| {
        (0..n).all(|i| mask & (1 << i) == 0 || (i + 1..n).all(|j| mask & (1 << j) == 0 || a[i][j]))
    };
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        if !is_clique(mask) {
            continue;
        }
        let extendable = (0..n).any(|v| mask & (1 << v) == 0 && is_clique(mask | (1 << v)));
        if !extendable {
            out.push((0..n).filter(|&i| mask & (1 << i) != 0).collect::<Vec<_>>());
        }
    }
    out.sort();
    out
}

/// Mean over ordered pairs `u != v`; equal to the unordered mean for symmetric scores.
pub fn brute_lift(set: &[usize], score: impl Fn(usize, usize) -> f64) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for &u in set {
        for &v in set {
            if u != v {
                total += score(u.min(v), u.max(v));
                count += 1;
            }
        }
    }
    total / count as f64
}

/// AUC as the exact fraction `(2·wins + ties) / (2·n₊·n₋)`.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> (u64, u64) {
    let mut num = 0u64;
    let mut pos = 0u64;
    let mut neg = 0u64;
    for (i, &li) in labels.iter().enumerate() {
        if li {
            pos += 1;
        } else {
            neg += 1;
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            if scores[i] > scores[j] {
                num += 2;
            } else if scores[i] == scores[j] {
                num += 1;
            }
        }
    }
    (num, 2 * pos * neg)
}

fn gw(k: usize, tau: f64) -> f64 {
    let r = 1.0 - (-tau).exp();
    let mut pow = 1.0;
    for _ in 0..k {
        pow *= r;
    }
    tau.exp() * (1.0 - pow)
}

/// Global statistics from degree and edgewise-shared-partner histograms of a
/// boolean adjacency matrix: `[edges, gwdegree(τ_d), gwesp(τ_e)]`.
pub fn histogram_stats(a: &[Vec<bool>], tau_d: f64, tau_e: f64) -> [f64; 3] {
    let n = a.len();
    let mut degree_hist = vec![0usize; n];
    let mut esp_hist = vec![0usize; n];
    let mut edges = 0usize;
    for i in 0..n {
        degree_hist[(0..n).filter(|&j| a[i][j]).count()] += 1;
        for j in i + 1..n {
            if a[i][j] {
                edges += 1;
                esp_hist[(0..n).filter(|&w| a[i][w] && a[j][w]).count()] += 1;
            }
        }
    }
    let weighted = |hist: &[usize], tau: f64| -> f64 {
        hist.iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| gw(k, tau) * c as f64)
            .sum()
    };
    [edges as f64, weighted(&degree_hist, tau_d), weighted(&esp_hist, tau_e)]
}

/// `s(G with ij) − s(G without ij)` by recomputing both graphs globally.
pub fn toggle_change(g: &Graph, i: usize, j: usize, tau_d: f64, tau_e: f64) -> [f64; 3] {
    let mut a = adjacency(g);
    a[i][j] = true;
    a[j][i] = true;
    let plus = histogram_stats(&a, tau_d, tau_e);
    a[i][j] = false;
    a[j][i] = false;
    let minus = histogram_stats(&a, tau_d, tau_e);
    [plus[0] - minus[0], plus[1] - minus[1], plus[2] - minus[2]]
}

/// Planted communities: `communities` blocks of `block` nodes, with `edges`
/// distinct hyperedges of size 3 or 4, each inside a single block.
pub fn planted_hypergraph(seed: u64, communities: usize, block: usize, edges: usize) -> Hypergraph {
    let mut r = rng(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < edges {
        let c = out.len() % communities;
        let size = r.gen_range(3..=4);
        let mut members: Vec<usize> = (c * block..(c + 1) * block).collect();
        members.shuffle(&mut r);
        let mut e = members[..size].to_vec();
        e.sort_unstable();
        if seen.insert(e.clone()) {
            out.push(e);
        }
    }
    Hypergraph::new(communities * block, out).unwrap()
}

/// 2-section of a hypergraph: one edge per co-occurring pair.
pub fn two_section(h: &Hypergraph) -> Graph {
    let mut pairs = Vec::new();
    for e in h.edges() {
        for (a, &u) in e.iter().enumerate() {
            for &v in &e[a + 1..] {
                pairs.push((u, v));
            }
        }
    }
    Graph::from_unlabeled_edges(h.n(), pairs).unwrap()
}

/// Ten hyperedges on eight nodes.
pub fn toy_hypergraph() -> Hypergraph {
    let edges = vec![
        vec![0, 1],
        vec![0, 1, 2],
        vec![1, 3],
        vec![2, 3, 4],
        vec![3, 5],
        vec![4, 5, 6],
        vec![5, 7],
        vec![0, 6, 7],
        vec![2, 6],
        vec![1, 4, 7],
    ];
    Hypergraph::new(8, edges).unwrap()
}

/// Toy positives plus a few hand-picked non-hyperedges.
pub fn toy_batch(h: &Hypergraph) -> Vec<(Vec<usize>, bool)> {
    let mut batch: Vec<(Vec<usize>, bool)> = h.edges().iter().map(|e| (e.clone(), true)).collect();
    for neg in [vec![0, 5], vec![3, 6, 7], vec![0, 2, 4, 6], vec![1, 5, 6]] {
        batch.push((neg, false));
    }
    batch
}

/// Largest relative deviation between analytic and central-difference
/// gradients, with the parameter index where it occurs. The denominator is
/// floored at 1e-6 so vanishing components compare absolutely.
pub fn max_fd_relative_error(model: &mut CheshireModel, batch: &[(Vec<usize>, bool)], eps: f64) -> (f64, usize) {
    let (_, analytic) = model.loss_and_gradient(batch).unwrap();
    let base = model.weights.flatten();
    let mut worst = (0.0f64, 0usize);
    for i in 0..base.len() {
        let mut probe = base.clone();
        probe[i] = base[i] + eps;
        model.weights.unflatten(&probe).unwrap();
        let lp = model.loss(batch).unwrap();
        probe[i] = base[i] - eps;
        model.weights.unflatten(&probe).unwrap();
        let lm = model.loss(batch).unwrap();
        let numeric = (lp - lm) / (2.0 * eps);
        let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
        if rel > worst.0 || rel.is_nan() {
            worst = (rel, i);
        }
    }
    model.weights.unflatten(&base).unwrap();
    worst
}

pub fn chebyshev_value(m: usize, lambda: f64) -> f64 {
    (m as f64 * lambda.clamp(-1.0, 1.0).acos()).cos()
}

/// Builds the clique's normalised Laplacian explicitly, eigendecomposes the
/// rescaled operator and filters in the spectral domain.
pub fn spectral_conv(xs: &DMatrix<f64>, w_conv: &[DMatrix<f64>]) -> DMatrix<f64> {
    let s = xs.nrows();
    let a = DMatrix::from_fn(s, s, |i, j| if i == j { 0.0 } else { 1.0 });
    let d_inv_sqrt = 1.0 / ((s - 1) as f64).sqrt();
    let lap = DMatrix::identity(s, s) - a * (d_inv_sqrt * d_inv_sqrt);
    let lambda_max = SymmetricEigen::new(lap.clone()).eigenvalues.max();
    let rescaled = lap * (2.0 / lambda_max) - DMatrix::identity(s, s);
    let eig = SymmetricEigen::new(rescaled);
    let mut pre = DMatrix::zeros(s, w_conv[0].nrows());
    for (k, w) in w_conv.iter().enumerate() {
        let filt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| chebyshev_value(k, l)));
        let zk = &eig.eigenvectors * filt * eig.eigenvectors.transpose() * xs;
        pre += zk * w.transpose();
    }
    pre.map(f64::tanh)
}

