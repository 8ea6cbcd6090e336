//! Clique hypergraphs: every edge becomes a dyadic hyperedge and every
//! maximal clique of size at least three becomes a higher-order hyperedge.

use std::collections::HashMap;

use crate::{Error, Graph, Result};

pub const DEFAULT_CLIQUE_CAP: usize = 1_000_000;

/// Hypergraph over nodes `0..n` whose hyperedges are sorted, duplicate-free
/// node lists of size at least two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl Hypergraph {
    /// Canonicalises (sorts) each hyperedge and validates the invariants.
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut canon = Vec::with_capacity(edges.len());
        let mut index = HashMap::with_capacity(edges.len());
        for mut e in edges {
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!("hyperedge {e:?} repeats a node")));
            }
            if e.len() < 2 {
                return Err(Error::InvalidArgument(format!("hyperedge {e:?} has fewer than 2 nodes")));
            }
            if let Some(&v) = e.last().filter(|&&v| v >= n) {
                return Err(Error::NodeOutOfRange(v));
            }
            if index.insert(e.clone(), canon.len()).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate hyperedge {e:?}")));
            }
            canon.push(e);
        }
        Ok(Hypergraph { n, edges: canon, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &[usize] {
        &self.edges[id]
    }

    /// Id of the hyperedge equal to `set` (which must be sorted).
    pub fn find(&self, set: &[usize]) -> Option<usize> {
        self.index.get(set).copied()
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        self.index.contains_key(set)
    }

    /// Hypergraph made of the listed hyperedge ids, in the given order.
    pub fn restrict(&self, ids: &[usize]) -> Hypergraph {
        let edges: Vec<Vec<usize>> = ids.iter().map(|&i| self.edges[i].clone()).collect();
        let index = edges.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Hypergraph { n: self.n, edges, index }
    }

    /// Degree of each node in the dyadic (size-2) part.
    pub fn dyadic_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in self.edges.iter().filter(|e| e.len() == 2) {
            deg[e[0]] += 1;
            deg[e[1]] += 1;
        }
        deg
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn intersect_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Smallest-last (degeneracy) ordering.
fn degeneracy_order(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[deg[v]].push(v);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut d = 0;
    while order.len() < n {
        d = d.min(max_deg);
        while buckets[d].is_empty() {
            d += 1;
        }
        let v = buckets[d].pop().unwrap();
        if removed[v] || deg[v] != d {
            continue;
        }
        removed[v] = true;
        order.push(v);
        for &u in g.neighbors(v) {
            if !removed[u] {
                deg[u] -= 1;
                buckets[deg[u]].push(u);
            }
        }
        d = d.saturating_sub(1);
    }
    order
}

struct Enumerator<'a> {
    g: &'a Graph,
    cap: usize,
    out: Vec<Vec<usize>>,
}

impl Enumerator<'_> {
    fn expand(&mut self, r: &mut Vec<usize>, p: Vec<usize>, x: Vec<usize>) -> Result<()> {
        if p.is_empty() {
            if x.is_empty() {
                if self.out.len() >= self.cap {
                    return Err(Error::CliqueCap(self.cap));
                }
                let mut c = r.clone();
                c.sort_unstable();
                self.out.push(c);
            }
            return Ok(());
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| (intersect_count(&p, self.g.neighbors(u)), std::cmp::Reverse(u)))
            .unwrap();
        let pivot_nb = self.g.neighbors(pivot);
        let candidates: Vec<usize> = p
            .iter()
            .copied()
            .filter(|v| pivot_nb.binary_search(v).is_err())
            .collect();
        let mut p = p;
        let mut x = x;
        for v in candidates {
            let nb = self.g.neighbors(v);
            r.push(v);
            self.expand(r, intersect(&p, nb), intersect(&x, nb))?;
            r.pop();
            p.retain(|&u| u != v);
            let at = x.binary_search(&v).unwrap_or_else(|e| e);
            x.insert(at, v);
        }
        Ok(())
    }
}

/// All maximal cliques (isolated nodes appear as singletons), each sorted,
/// listed in lexicographic order.
pub fn maximal_cliques(g: &Graph) -> Result<Vec<Vec<usize>>> {
    maximal_cliques_capped(g, DEFAULT_CLIQUE_CAP)
}

/// As [`maximal_cliques`], failing once more than `cap` cliques are found.
pub fn maximal_cliques_capped(g: &Graph, cap: usize) -> Result<Vec<Vec<usize>>> {
    let order = degeneracy_order(g);
    let mut position = vec![0; g.n()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut en = Enumerator { g, cap, out: Vec::new() };
    for &v in &order {
        let (mut p, mut x) = (Vec::new(), Vec::new());
        for &u in g.neighbors(v) {
            if position[u] > position[v] {
                p.push(u);
            } else {
                x.push(u);
            }
        }
        en.expand(&mut vec![v], p, x)?;
    }
    let mut out = en.out;
    out.sort_unstable();
    Ok(out)
}

/// Dyadic hyperedges for every edge (in edge order) followed by maximal
/// cliques of size at least three (in lexicographic order).
pub fn derive_hypergraph(g: &Graph) -> Result<Hypergraph> {
    derive_hypergraph_capped(g, DEFAULT_CLIQUE_CAP)
}

pub fn derive_hypergraph_capped(g: &Graph, cap: usize) -> Result<Hypergraph> {
    let mut edges: Vec<Vec<usize>> = g.edges().map(|(u, v)| vec![u, v]).collect();
    edges.extend(maximal_cliques_capped(g, cap)?.into_iter().filter(|c| c.len() >= 3));
    Hypergraph::new(g.n(), edges)
}

/// Sparse 0/1 node-by-hyperedge incidence matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n_nodes: usize,
    n_edges: usize,
    rows: Vec<Vec<usize>>,
}

impl IncidenceMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.n_nodes, self.n_edges)
    }

    /// Hyperedge ids containing node `i` (the support of row `h_i`), ascending.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, e: usize) -> u8 {
        u8::from(self.rows[i].binary_search(&e).is_ok())
    }

    pub fn column_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.n_edges];
        for row in &self.rows {
            for &e in row {
                sums[e] += 1;
            }
        }
        sums
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut r = vec![0u8; self.n_edges];
                for &e in row {
                    r[e] = 1;
                }
                r
            })
            .collect()
    }
}

pub fn incidence(h: &Hypergraph) -> Result<IncidenceMatrix> {
    if h.is_empty() {
        return Err(Error::EmptyInput("hypergraph has no hyperedges".into()));
    }
    let mut rows = vec![Vec::new(); h.n()];
    for (e, members) in h.edges().iter().enumerate() {
        for &v in members {
            rows[v].push(e);
        }
    }
    Ok(IncidenceMatrix {
        n_nodes: h.n(),
        n_edges: h.len(),
        rows,
    })
}

/// One hyperedge per line as comma-separated node labels.
pub fn export_hypergraph(h: &Hypergraph, labels: &[String]) -> String {
    let mut out = String::new();
    for e in h.edges() {
        let names: Vec<&str> = e.iter().map(|&v| labels[v].as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
    }
    out
}
