//! Hyperedge missingness, observed-graph reconstruction and candidate sets.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{stream, STREAM_CANDIDATES, STREAM_MASK};
use crate::{Error, Graph, Hypergraph, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mechanism {
    /// Every hyperedge equally likely to be hidden.
    Mcar,
    /// Hyperedges touching high-degree nodes are preferentially hidden.
    Mnar,
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::Mcar => "MCAR",
            Mechanism::Mnar => "MNAR",
        })
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcar" => Ok(Mechanism::Mcar),
            "mnar" => Ok(Mechanism::Mnar),
            _ => Err(Error::InvalidArgument(format!("unknown mechanism '{s}' (mcar|mnar)"))),
        }
    }
}

/// Partition of hyperedge ids into observed and held-out parts.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskSplit {
    /// Observed hyperedge ids, ascending.
    pub observed: Vec<usize>,
    /// Held-out hyperedge ids, ascending.
    pub missing: Vec<usize>,
    pub rho: f64,
    pub mechanism: Mechanism,
    pub seed: u64,
}

/// Number of hyperedges hidden for a given `rho`.
pub fn missing_count(total: usize, rho: f64) -> usize {
    (rho * total as f64).round() as usize
}

/// Degree of every node in the 2-section of `h` (pairs co-occurring in some
/// hyperedge). For clique hypergraphs this is the degree in the source graph.
pub fn two_section_degrees(h: &Hypergraph) -> Vec<usize> {
    let mut nb: Vec<HashSet<usize>> = vec![HashSet::new(); h.n()];
    for e in h.edges() {
        for (a, &u) in e.iter().enumerate() {
            for &v in &e[a + 1..] {
                nb[u].insert(v);
                nb[v].insert(u);
            }
        }
    }
    nb.iter().map(HashSet::len).collect()
}

/// MNAR inclusion weight of each hyperedge: `max_{v in S} deg(v)^exponent`.
pub fn mnar_weights(h: &Hypergraph, exponent: f64) -> Vec<f64> {
    let deg = two_section_degrees(h);
    h.edges()
        .iter()
        .map(|e| {
            let d = e.iter().map(|&v| deg[v]).max().unwrap_or(0).max(1);
            (d as f64).powf(exponent)
        })
        .collect()
}

/// Draws exactly `m` distinct indices, sequentially proportional to `weights`
/// (exponential-key formulation of weighted sampling without replacement).
pub fn weighted_sample<R: Rng>(rng: &mut R, weights: &[f64], m: usize) -> Vec<usize> {
    let mut keys: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = 1.0 - rng.gen::<f64>();
            (u.ln() / w, i)
        })
        .collect();
    keys.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut chosen: Vec<usize> = keys[..m].iter().map(|&(_, i)| i).collect();
    chosen.sort_unstable();
    chosen
}

/// Hides exactly `round(rho * |E|)` hyperedges. MNAR uses weight
/// `max_{v in S} deg(v)`.
pub fn mask(h: &Hypergraph, rho: f64, mechanism: Mechanism, seed: u64) -> Result<MaskSplit> {
    mask_with_exponent(h, rho, mechanism, seed, 1.0)
}

pub fn mask_with_exponent(
    h: &Hypergraph,
    rho: f64,
    mechanism: Mechanism,
    seed: u64,
    mnar_exponent: f64,
) -> Result<MaskSplit> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("rho must lie in (0, 1), got {rho}")));
    }
    let total = h.len();
    if total < 2 {
        return Err(Error::DegenerateSplit(format!("only {total} hyperedge(s)")));
    }
    let m = missing_count(total, rho);
    if m == 0 || m == total {
        return Err(Error::DegenerateSplit(format!(
            "rho={rho} hides {m} of {total} hyperedges"
        )));
    }
    let weights = match mechanism {
        Mechanism::Mcar => vec![1.0; total],
        Mechanism::Mnar => mnar_weights(h, mnar_exponent),
    };
    let mut rng = stream(seed, STREAM_MASK);
    let missing = weighted_sample(&mut rng, &weights, m);
    let mut hidden = vec![false; total];
    for &i in &missing {
        hidden[i] = true;
    }
    let observed = (0..total).filter(|&i| !hidden[i]).collect();
    Ok(MaskSplit {
        observed,
        missing,
        rho,
        mechanism,
        seed,
    })
}

/// Graph whose edges are the pairs covered by at least one observed
/// hyperedge; the node set (and labels) of `g` are kept.
pub fn observed_graph(g: &Graph, h: &Hypergraph, split: &MaskSplit) -> Graph {
    let mut pairs = Vec::new();
    for &id in &split.observed {
        let e = h.edge(id);
        for (a, &u) in e.iter().enumerate() {
            for &v in &e[a + 1..] {
                pairs.push((u, v));
            }
        }
    }
    Graph::from_edges(g.labels().to_vec(), pairs).expect("hyperedge members are valid node ids")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    HeldOut,
    Sampled,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::HeldOut => "held-out",
            Provenance::Sampled => "sampled",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    /// Sorted node ids.
    pub nodes: Vec<usize>,
    pub label: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateSet {
    pub items: Vec<Candidate>,
}

impl CandidateSet {
    pub fn labels(&self) -> Vec<bool> {
        self.items.iter().map(|c| c.label).collect()
    }

    pub fn positives(&self) -> usize {
        self.items.iter().filter(|c| c.label).count()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn from_parts(positives: Vec<Vec<usize>>, negatives: Vec<Vec<usize>>) -> Self {
        let pos = positives.into_iter().map(|nodes| Candidate {
            nodes,
            label: true,
            provenance: Provenance::HeldOut,
        });
        let neg = negatives.into_iter().map(|nodes| Candidate {
            nodes,
            label: false,
            provenance: Provenance::Sampled,
        });
        CandidateSet {
            items: pos.chain(neg).collect(),
        }
    }
}

const ATTEMPTS_PER_NEGATIVE: usize = 10_000;

fn sample_negatives_with<R: Rng>(
    rng: &mut R,
    h: &Hypergraph,
    positives: &[Vec<usize>],
    ratio: usize,
) -> Result<Vec<Vec<usize>>> {
    if positives.is_empty() {
        return Err(Error::InvalidArgument("no positives to match".into()));
    }
    if ratio == 0 {
        return Err(Error::InvalidArgument("negative ratio must be >= 1".into()));
    }
    let n = h.n();
    let mut emitted: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::with_capacity(positives.len() * ratio);
    for p in positives {
        let k = p.len();
        if k > n {
            return Err(Error::SamplingExhausted(format!("size {k} exceeds {n} nodes")));
        }
        let budget = ATTEMPTS_PER_NEGATIVE * ratio;
        let mut attempts = 0;
        let mut made = 0;
        while made < ratio {
            if attempts == budget {
                return Err(Error::SamplingExhausted(format!(
                    "no fresh non-hyperedge of size {k} after {budget} attempts"
                )));
            }
            attempts += 1;
            let mut s = index::sample(rng, n, k).into_vec();
            s.sort_unstable();
            if h.contains(&s) || emitted.contains(&s) {
                continue;
            }
            emitted.insert(s.clone());
            out.push(s);
            made += 1;
        }
    }
    Ok(out)
}

/// For every positive of size `k`, draws `ratio` uniform `k`-subsets of the
/// node set that are neither hyperedges of `h` nor previously drawn.
pub fn sample_negatives(
    h: &Hypergraph,
    positives: &[Vec<usize>],
    ratio: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    sample_negatives_with(&mut stream(seed, STREAM_CANDIDATES), h, positives, ratio)
}

/// Hyperlink task: held-out hyperedges against size-matched random sets.
pub fn hp_candidates(h: &Hypergraph, split: &MaskSplit, ratio: usize, seed: u64) -> Result<CandidateSet> {
    let positives: Vec<Vec<usize>> = split.missing.iter().map(|&i| h.edge(i).to_vec()).collect();
    let negatives = sample_negatives(h, &positives, ratio, seed)?;
    Ok(CandidateSet::from_parts(positives, negatives))
}

/// Link task: held-out dyadic hyperedges against uniformly drawn non-edges of `g`.
pub fn lp_candidates(
    g: &Graph,
    h: &Hypergraph,
    split: &MaskSplit,
    ratio: usize,
    seed: u64,
) -> Result<CandidateSet> {
    let positives: Vec<Vec<usize>> = split
        .missing
        .iter()
        .map(|&i| h.edge(i))
        .filter(|e| e.len() == 2)
        .map(<[usize]>::to_vec)
        .collect();
    if positives.is_empty() {
        return Err(Error::InvalidArgument("no dyadic hyperedges held out".into()));
    }
    let want = ratio * positives.len();
    let n = g.n();
    let non_edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !g.has_edge(i, j))
        .collect();
    if non_edges.len() < want {
        return Err(Error::SamplingExhausted(format!(
            "{want} non-edges requested, {} available",
            non_edges.len()
        )));
    }
    let mut rng = stream(seed, STREAM_CANDIDATES);
    let mut picks = index::sample(&mut rng, non_edges.len(), want).into_vec();
    picks.sort_unstable();
    let negatives = picks
        .into_iter()
        .map(|p| vec![non_edges[p].0, non_edges[p].1])
        .collect();
    Ok(CandidateSet::from_parts(positives, negatives))
}

/// Debug dump, `set;label;provenance` with `|`-joined node labels.
pub fn dump_candidates(cs: &CandidateSet, labels: &[String]) -> String {
    let mut out = String::from("set;label;provenance\n");
    for c in &cs.items {
        let names: Vec<&str> = c.nodes.iter().map(|&v| labels[v].as_str()).collect();
        out.push_str(&format!("{};{};{}\n", names.join("|"), u8::from(c.label), c.provenance));
    }
    out
}
