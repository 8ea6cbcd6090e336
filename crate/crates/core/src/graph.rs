//! Simple undirected graphs, edgelist/message-log ingestion and summary statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::{Error, Result};

/// Simple undirected graph over dense node ids `0..n` with string labels.
///
/// Neighbour lists are kept sorted so that membership tests and
/// common-neighbour merges are logarithmic / linear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl Graph {
    /// Graph with the given node labels and no edges.
    pub fn empty(labels: Vec<String>) -> Self {
        let n = labels.len();
        Graph {
            labels,
            adj: vec![Vec::new(); n],
            edges: 0,
        }
    }

    /// Builds a graph from an edge iterator. Duplicate and reversed pairs
    /// collapse; self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = labels.len();
        let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (u, v) in edges {
            if u >= n {
                return Err(Error::NodeOutOfRange(u));
            }
            if v >= n {
                return Err(Error::NodeOutOfRange(v));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
            }
            sets[u].insert(v);
            sets[v].insert(u);
        }
        let adj: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let edges = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Ok(Graph { labels, adj, edges })
    }

    /// Unlabelled graph; nodes are labelled by their decimal id.
    pub fn from_unlabeled_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn degrees(&self) -> Vec<u64> {
        self.adj.iter().map(|a| a.len() as u64).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.adj[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Sorted common neighbours of `i` and `j`.
    pub fn common_neighbors(&self, i: usize, j: usize) -> Vec<usize> {
        let (a, b) = (&self.adj[i], &self.adj[j]);
        let (mut x, mut y) = (0, 0);
        let mut out = Vec::new();
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[x]);
                    x += 1;
                    y += 1;
                }
            }
        }
        out
    }

    /// Subgraph induced on `nodes` (kept in the given order, which must be duplicate-free).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut remap = vec![usize::MAX; self.n()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let labels = nodes.iter().map(|&i| self.labels[i].clone()).collect();
        let edges = self
            .edges()
            .filter(|&(u, v)| remap[u] != usize::MAX && remap[v] != usize::MAX)
            .map(|(u, v)| (remap[u], remap[v]));
        Graph::from_edges(labels, edges).expect("induced subgraph of a valid graph is valid")
    }

    pub fn triangle_count(&self) -> u64 {
        let mut t = 0u64;
        for (u, v) in self.edges() {
            t += self
                .common_neighbors(u, v)
                .into_iter()
                .filter(|&w| w > v)
                .count() as u64;
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgelistFormat {
    /// Whitespace-separated tokens.
    Plain,
    /// Comma-separated tokens with an optional header line.
    Csv,
}

/// Result of parsing an edgelist, with counts of collapsed input lines.
#[derive(Clone, Debug)]
pub struct ParsedEdgelist {
    pub graph: Graph,
    pub self_loops: usize,
    pub duplicates: usize,
}

const HEADER_TOKENS: &[&str] = &[
    "source", "target", "from", "to", "src", "dst", "node1", "node2", "u", "v", "sender",
    "recipient",
];

fn is_header(tokens: &[&str]) -> bool {
    tokens
        .iter()
        .all(|t| HEADER_TOKENS.contains(&t.to_ascii_lowercase().as_str()))
}

/// Parses an edgelist into a simple graph.
///
/// Node ids are assigned in order of first appearance. `#` lines and blank
/// lines are skipped. Reversed and repeated pairs collapse to one edge;
/// self-loops are dropped (and do not introduce their node).
pub fn parse_edgelist(text: &str, format: EdgelistFormat) -> Result<ParsedEdgelist> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut pairs = BTreeSet::new();
    let mut self_loops = 0;
    let mut duplicates = 0;
    let mut seen_data = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = match format {
            EdgelistFormat::Plain => line.split_whitespace().collect(),
            EdgelistFormat::Csv => line.split(',').map(str::trim).collect(),
        };
        if tokens.len() != 2 || tokens.iter().any(|t| t.is_empty()) {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected 2 node tokens, found {}", tokens.len()),
            });
        }
        if format == EdgelistFormat::Csv && !seen_data && is_header(&tokens) {
            seen_data = true;
            continue;
        }
        seen_data = true;
        if tokens[0] == tokens[1] {
            self_loops += 1;
            continue;
        }
        let mut id = |t: &str| -> usize {
            if let Some(&i) = ids.get(t) {
                return i;
            }
            let i = labels.len();
            labels.push(t.to_string());
            ids.insert(t.to_string(), i);
            i
        };
        let (u, v) = (id(tokens[0]), id(tokens[1]));
        if !pairs.insert((u.min(v), u.max(v))) {
            duplicates += 1;
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput("edgelist has no edges".into()));
    }
    if self_loops > 0 || duplicates > 0 {
        log::warn!("edgelist: dropped {self_loops} self-loop(s), collapsed {duplicates} duplicate edge(s)");
    }
    let graph = Graph::from_edges(labels, pairs)?;
    Ok(ParsedEdgelist {
        graph,
        self_loops,
        duplicates,
    })
}

/// Plain edgelist, one `label label` line per edge.
pub fn emit_edgelist(g: &Graph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        out.push_str(g.label(u));
        out.push(' ');
        out.push_str(g.label(v));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageRecord {
    pub sender: String,
    pub recipient: String,
    pub weight: u64,
    pub timestamp: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessageLog {
    pub records: Vec<MessageRecord>,
}

/// Parses a CSV message log with header `sender,recipient,weight[,timestamp]`.
pub fn parse_message_log(text: &str) -> Result<MessageLog> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let expect = ["sender", "recipient", "weight"];
    if headers.len() < 3 || headers.iter().take(3).ne(expect.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header sender,recipient,weight[,timestamp]".into(),
        });
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.len() < 3 || row.len() > 4 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 or 4 fields, found {}", row.len()),
            });
        }
        let weight: u64 = row[2].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("weight '{}' is not a positive integer", &row[2]),
        })?;
        if weight == 0 || row[0].is_empty() || row[1].is_empty() {
            return Err(Error::Parse {
                line,
                msg: "weight must be >= 1 and endpoints non-empty".into(),
            });
        }
        records.push(MessageRecord {
            sender: row[0].to_string(),
            recipient: row[1].to_string(),
            weight,
            timestamp: row.get(3).filter(|t| !t.is_empty()).map(str::to_string),
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("message log has no records".into()));
    }
    Ok(MessageLog { records })
}

/// Undirected projection of a message log with per-node message volumes.
#[derive(Clone, Debug)]
pub struct Projection {
    pub graph: Graph,
    /// Total sent + received weight, indexed by node id.
    pub volumes: Vec<u64>,
    pub self_messages: usize,
}

/// Time-aggregated undirected projection: `{i, j}` is an edge iff a message
/// was sent in either direction. Node ids follow lexicographic label order,
/// so the result does not depend on record order.
pub fn project_messages(log: &MessageLog) -> Result<Projection> {
    if log.records.is_empty() {
        return Err(Error::EmptyInput("message log has no records".into()));
    }
    let mut volume: BTreeMap<&str, u64> = BTreeMap::new();
    let mut self_messages = 0;
    for r in &log.records {
        if r.sender == r.recipient {
            self_messages += 1;
            continue;
        }
        *volume.entry(&r.sender).or_default() += r.weight;
        *volume.entry(&r.recipient).or_default() += r.weight;
    }
    let index: HashMap<&str, usize> = volume.keys().enumerate().map(|(i, &l)| (l, i)).collect();
    let edges: Vec<(usize, usize)> = log
        .records
        .iter()
        .filter(|r| r.sender != r.recipient)
        .map(|r| (index[r.sender.as_str()], index[r.recipient.as_str()]))
        .collect();
    let labels = volume.keys().map(|s| s.to_string()).collect();
    let volumes = volume.values().copied().collect();
    Ok(Projection {
        graph: Graph::from_edges(labels, edges)?,
        volumes,
        self_messages,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SummaryStats {
    pub nodes: usize,
    pub edges: usize,
    /// Exact density `2|E| / (n(n-1))`.
    pub density: f64,
    pub triangles: u64,
}

impl SummaryStats {
    /// Density as printed in summary tables: four significant decimals,
    /// zero-padded to six (`0.228571` is shown as `0.228600`).
    pub fn density_display(&self) -> String {
        format!("{:.6}", (self.density * 1e4).round() / 1e4)
    }
}

impl fmt::Display for SummaryStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nodes={} edges={} density={} triangles={}",
            self.nodes,
            self.edges,
            self.density_display(),
            self.triangles
        )
    }
}

pub fn graph_stats(g: &Graph) -> Result<SummaryStats> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("graph_stats needs n >= 2, got {n}")));
    }
    let m = g.edge_count();
    Ok(SummaryStats {
        nodes: n,
        edges: m,
        density: 2.0 * m as f64 / (n as f64 * (n as f64 - 1.0)),
        triangles: g.triangle_count(),
    })
}

/// Subgraph induced on the `k` highest-volume nodes; ties go to the
/// lexicographically smaller label. Returns `g` unchanged when `n <= k`.
pub fn core_k(g: &Graph, volumes: &[u64], k: usize) -> Result<Graph> {
    if k == 0 {
        return Err(Error::InvalidArgument("core size k must be >= 1".into()));
    }
    if volumes.len() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "{} volumes for {} nodes",
            volumes.len(),
            g.n()
        )));
    }
    if g.n() <= k {
        return Ok(g.clone());
    }
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| {
        volumes[b]
            .cmp(&volumes[a])
            .then_with(|| g.label(a).cmp(g.label(b)))
    });
    let mut keep = order[..k].to_vec();
    keep.sort_unstable();
    Ok(g.induced_subgraph(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(s: &str) -> ParsedEdgelist {
        parse_edgelist(s, EdgelistFormat::Plain).unwrap()
    }

    #[test]
    fn path_graph() {
        let p = plain("a b\nb c");
        assert_eq!((p.graph.n(), p.graph.edge_count()), (3, 2));
    }

    #[test]
    fn reversed_duplicates_collapse() {
        let p = plain("a b\nb a\na b");
        assert_eq!((p.graph.n(), p.graph.edge_count()), (2, 1));
        assert_eq!(p.duplicates, 2);
    }

    #[test]
    fn self_loop_dropped_without_its_node() {
        let p = plain("a a\nb c");
        assert_eq!((p.graph.n(), p.graph.edge_count(), p.self_loops), (2, 1, 1));
        assert_eq!(p.graph.labels(), &["b".to_string(), "c".to_string()]);
    }

    #[test]
    fn comments_blank_lines_and_csv_header() {
        let p = parse_edgelist("# hi\nsource,target\n\nx, y\ny,z\n", EdgelistFormat::Csv).unwrap();
        assert_eq!((p.graph.n(), p.graph.edge_count()), (3, 2));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse_edgelist("a b\nb c d\n", EdgelistFormat::Plain) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_edgelist("a,b\nc\n", EdgelistFormat::Csv),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse_edgelist("# only\n\n", EdgelistFormat::Plain), Err(Error::EmptyInput(_))));
        assert!(matches!(parse_edgelist("a a\n", EdgelistFormat::Plain), Err(Error::EmptyInput(_))));
    }

    fn log(records: &[(&str, &str, u64)]) -> MessageLog {
        MessageLog {
            records: records
                .iter()
                .map(|&(s, r, w)| MessageRecord {
                    sender: s.into(),
                    recipient: r.into(),
                    weight: w,
                    timestamp: None,
                })
                .collect(),
        }
    }

    #[test]
    fn projection_symmetrises_and_sums_volume() {
        let p = project_messages(&log(&[("a", "b", 3), ("b", "a", 1)])).unwrap();
        assert_eq!(p.graph.edge_count(), 1);
        assert_eq!(p.volumes, vec![4, 4]);

        let p = project_messages(&log(&[("a", "b", 1), ("a", "c", 1)])).unwrap();
        assert_eq!(p.graph.edge_count(), 2);
        assert_eq!(p.volumes[p.graph.index_of("a").unwrap()], 2);

        let p = project_messages(&log(&[("a", "a", 5)])).unwrap();
        assert_eq!(p.graph.edge_count(), 0);
        assert_eq!(p.self_messages, 1);
    }

    #[test]
    fn message_log_csv() {
        let l = parse_message_log("sender,recipient,weight,timestamp\na,b,2,2001-01-01\nb,c,1\n").unwrap();
        assert_eq!(l.records.len(), 2);
        assert_eq!(l.records[0].timestamp.as_deref(), Some("2001-01-01"));
        assert!(parse_message_log("sender,recipient,weight\na,b,0\n").is_err());
        assert!(parse_message_log("from,to,w\na,b,1\n").is_err());
        assert!(parse_message_log("sender,recipient,weight\n").is_err());
    }

    #[test]
    fn stats_of_k4() {
        let g = Graph::from_unlabeled_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let s = graph_stats(&g).unwrap();
        assert_eq!((s.nodes, s.edges, s.density, s.triangles), (4, 6, 1.0, 4));
        assert_eq!(s.density_display(), "1.000000");
        assert!(graph_stats(&Graph::empty(vec!["x".into()])).is_err());
    }

    #[test]
    fn density_display_matches_table_rounding() {
        let s = SummaryStats { nodes: 15, edges: 24, density: 24.0 / 105.0, triangles: 22 };
        assert_eq!(s.density_display(), "0.228600");
    }

    #[test]
    fn core_k_rules() {
        let g = Graph::from_unlabeled_edges(50, (1..50).map(|i| (0, i))).unwrap();
        assert_eq!(core_k(&g, &g.degrees(), 100).unwrap(), g);

        let mut vol = vec![1u64; 50];
        vol[0] = 10;
        let hub = core_k(&g, &vol, 1).unwrap();
        assert_eq!((hub.n(), hub.edge_count(), hub.label(0)), (1, 0, "0"));

        let labels: Vec<String> = ["d", "b", "a", "c"].iter().map(|s| s.to_string()).collect();
        let g = Graph::from_edges(labels, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let c = core_k(&g, &[5, 5, 5, 5], 2).unwrap();
        let mut got: Vec<&str> = c.labels().iter().map(String::as_str).collect();
        got.sort();
        assert_eq!(got, vec!["a", "b"]);
        assert_eq!(c.edge_count(), 1);
        assert!(core_k(&g, &[1, 2], 1).is_err());
        assert!(core_k(&g, &[1, 1, 1, 1], 0).is_err());
    }
}
