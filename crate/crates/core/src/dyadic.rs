//! Dyad scores computed on the observed graph, and their mean lift to node sets.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::ergm::ErgmScorer;
use crate::{Error, Graph, Result};

/// Score of the constant null model.
pub const NULL_SCORE: f64 = 0.5;

fn check_pair(g: &Graph, i: usize, j: usize) -> Result<()> {
    if i >= g.n() {
        return Err(Error::NodeOutOfRange(i));
    }
    if j >= g.n() {
        return Err(Error::NodeOutOfRange(j));
    }
    if i == j {
        return Err(Error::InvalidArgument(format!("dyad ({i}, {i}) is a self-pair")));
    }
    Ok(())
}

/// Common neighbours `|N(i) ∩ N(j)|`.
pub fn score_cn(g: &Graph, i: usize, j: usize) -> Result<f64> {
    check_pair(g, i, j)?;
    Ok(g.common_neighbors(i, j).len() as f64)
}

/// Adamic–Adar `Σ_{w ∈ N(i) ∩ N(j)} 1 / ln deg(w)`. Every common neighbour
/// has degree at least two, so each term is finite. Terms are added in
/// ascending order so the result does not depend on node numbering.
pub fn score_aa(g: &Graph, i: usize, j: usize) -> Result<f64> {
    check_pair(g, i, j)?;
    let mut terms: Vec<f64> = g
        .common_neighbors(i, j)
        .into_iter()
        .map(|w| 1.0 / (g.degree(w) as f64).ln())
        .collect();
    terms.sort_by(f64::total_cmp);
    Ok(terms.into_iter().sum())
}

pub fn score_null() -> f64 {
    NULL_SCORE
}

/// Rank-`r` truncated eigendecomposition `Â = U diag(λ) Uᵀ` of a symmetric
/// adjacency matrix, keeping the `r` eigenvalues of largest magnitude.
#[derive(Clone, Debug)]
pub struct LowRank {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

impl LowRank {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Reconstructed entry `Â_ij` (unclamped).
    pub fn reconstruct(&self, i: usize, j: usize) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &l)| l * self.vectors[(i, k)] * self.vectors[(j, k)])
            .sum()
    }

    /// `Â_ij` clamped to `[0, 1]`.
    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.reconstruct(i, j).clamp(0.0, 1.0)
    }
}

pub fn default_rank(n: usize) -> usize {
    16.min(n.saturating_sub(1)).max(1)
}

pub fn adjacency_matrix(g: &Graph) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(g.n(), g.n());
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

/// Truncated spectral reconstruction of the observed adjacency matrix.
/// Magnitude ties (e.g. the `±λ` pair of a bipartite graph) keep the positive
/// eigenvalue first.
pub fn fit_matcomp(g: &Graph, rank: usize) -> Result<LowRank> {
    let n = g.n();
    if rank == 0 || rank > n {
        return Err(Error::InvalidArgument(format!("rank {rank} outside 1..={n}")));
    }
    let eig = SymmetricEigen::new(adjacency_matrix(g));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs())).max(1.0);
    let key = |l: f64| ((l.abs() / scale) * 1e9).round() as i64;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        key(lb).cmp(&key(la)).then(lb.total_cmp(&la)).then(a.cmp(&b))
    });
    order.truncate(rank);
    let vectors = DMatrix::from_fn(n, rank, |i, k| eig.eigenvectors[(i, order[k])]);
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    Ok(LowRank { vectors, values })
}

/// Mean of `pair_score` over all unordered pairs of `set`.
pub fn lift_with<F>(set: &[usize], mut pair_score: F) -> Result<f64>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let k = set.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("lift needs |S| >= 2, got {k}")));
    }
    let mut total = 0.0;
    for (a, &u) in set.iter().enumerate() {
        for &v in &set[a + 1..] {
            total += pair_score(u, v)?;
        }
    }
    Ok(total / (k * (k - 1) / 2) as f64)
}

/// A dyad scorer bound to the observed graph it was built from.
pub enum DyadScorer<'a> {
    CommonNeighbors(&'a Graph),
    AdamicAdar(&'a Graph),
    Null,
    MatComp(LowRank),
    Ergm(ErgmScorer<'a>),
}

impl DyadScorer<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            DyadScorer::CommonNeighbors(_) => "CN",
            DyadScorer::AdamicAdar(_) => "AA",
            DyadScorer::Null => "Null",
            DyadScorer::MatComp(_) => "MatComp",
            DyadScorer::Ergm(_) => "ERGM",
        }
    }

    pub fn score(&self, i: usize, j: usize) -> Result<f64> {
        match self {
            DyadScorer::CommonNeighbors(g) => score_cn(g, i, j),
            DyadScorer::AdamicAdar(g) => score_aa(g, i, j),
            DyadScorer::Null => {
                if i == j {
                    return Err(Error::InvalidArgument("self-pair".into()));
                }
                Ok(score_null())
            }
            DyadScorer::MatComp(lr) => {
                let n = lr.vectors.nrows();
                if i >= n || j >= n {
                    return Err(Error::NodeOutOfRange(i.max(j)));
                }
                if i == j {
                    return Err(Error::InvalidArgument("self-pair".into()));
                }
                Ok(lr.score(i, j))
            }
            DyadScorer::Ergm(s) => s.score(i, j),
        }
    }

    /// Mean-lifted score of a node set.
    pub fn lift(&self, set: &[usize]) -> Result<f64> {
        lift_with(set, |u, v| self.score(u, v))
    }

    /// Whether scores already live on a probability scale.
    pub fn is_probability(&self) -> bool {
        matches!(self, DyadScorer::Null | DyadScorer::Ergm(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_unlabeled_edges(n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn common_neighbours() {
        let path = g(3, &[(0, 1), (1, 2)]);
        assert_eq!(score_cn(&path, 0, 2).unwrap(), 1.0);
        let star = g(3, &[(0, 1), (0, 2)]);
        assert_eq!(score_cn(&star, 1, 2).unwrap(), 1.0);
        let two = g(4, &[(0, 1), (2, 3)]);
        assert_eq!(score_cn(&two, 0, 2).unwrap(), 0.0);
        assert!(score_cn(&two, 1, 1).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn adamic_adar() {
        let k3 = g(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!((score_aa(&k3, 0, 1).unwrap() - 1.442695).abs() < 1e-6);
        let star4 = g(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert!((score_aa(&star4, 1, 2).unwrap() - 0.721348).abs() < 1e-6);
        let two = g(4, &[(0, 1), (2, 3)]);
        assert_eq!(score_aa(&two, 0, 3).unwrap(), 0.0);
        assert!(score_aa(&two, 2, 2).is_err());
    }

    #[test]
    fn null_and_lift() {
        assert_eq!(score_null(), 0.5);
        assert_eq!(DyadScorer::Null.lift(&[0, 4, 7, 9]).unwrap(), 0.5);
        let scores = |u: usize, v: usize| Ok(match (u, v) {
            (0, 1) => 1.0,
            (0, 2) => 2.0,
            _ => 3.0,
        });
        assert_eq!(lift_with(&[0, 1, 2], scores).unwrap(), 2.0);
        let star = g(3, &[(0, 1), (0, 2)]);
        let cn = DyadScorer::CommonNeighbors(&star);
        assert_eq!(cn.lift(&[1, 2]).unwrap(), cn.score(1, 2).unwrap());
        assert!(cn.lift(&[1]).is_err());
    }

    #[test]
    fn full_rank_matcomp_is_exact() {
        let gr = g(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)]);
        let lr = fit_matcomp(&gr, 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if gr.has_edge(i, j) { 1.0 } else { 0.0 };
                assert!((lr.reconstruct(i, j) - want).abs() < 1e-9);
            }
        }
        assert!(fit_matcomp(&gr, 6).is_err());
        assert!(fit_matcomp(&gr, 0).is_err());
    }

    #[test]
    fn star_rank_one_takes_positive_eigenvalue() {
        let star4 = g(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let lr = fit_matcomp(&star4, 1).unwrap();
        assert!((lr.eigenvalues()[0] - 2.0).abs() < 1e-12);
        assert!((lr.score(1, 2) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn default_rank_bounds() {
        assert_eq!(default_rank(100), 16);
        assert_eq!(default_rank(9), 8);
        assert_eq!(default_rank(1), 1);
    }
}
