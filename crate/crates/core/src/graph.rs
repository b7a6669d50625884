//! Undirected simple graphs with dense node indices.
//!
//! Adjacency is stored in compressed sparse row form with each neighbor list
//! sorted ascending. Everything downstream (scores, cascades, distances)
//! iterates neighbors in that order, which is what makes results reproducible.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Builds a graph on `node_count` nodes. Self-loops and repeated pairs
    /// (in either orientation) are dropped.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= node_count {
                    return Err(Error::NodeOutOfRange { node, node_count });
                }
            }
            if u != v {
                pairs.push((u.min(v), u.max(v)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::from_canonical_pairs(node_count, &pairs))
    }

    /// `pairs` must be sorted, deduplicated, with `u < v`.
    fn from_canonical_pairs(node_count: usize, pairs: &[(usize, usize)]) -> Self {
        let mut degree = vec![0usize; node_count];
        for &(u, v) in pairs {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..node_count].to_vec();
        let mut targets = vec![0usize; 2 * pairs.len()];
        for &(u, v) in pairs {
            targets[fill[u]] = v;
            fill[u] += 1;
            targets[fill[v]] = u;
            fill[v] += 1;
        }
        for v in 0..node_count {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Graph { offsets, targets }
    }

    pub fn empty(node_count: usize) -> Self {
        Self::from_canonical_pairs(node_count, &[])
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn nodes(&self) -> std::ops::Range<usize> {
        0..self.node_count()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: v,
                node_count: self.node_count(),
            })
        }
    }

    /// FNV-1a hash of the node count and canonical edge list.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_u64(self.node_count() as u64);
        for (u, v) in self.edges() {
            h.write_u64(u as u64);
            h.write_u64(v as u64);
        }
        h.finish()
    }

    /// Applies `new_index[v]` to every node. `new_index` must be a permutation.
    pub fn relabel(&self, new_index: &[usize]) -> Result<Graph> {
        if new_index.len() != self.node_count() {
            return Err(Error::SizeMismatch {
                what: "permutation",
                got: new_index.len(),
                expected: self.node_count(),
            });
        }
        Graph::from_edges(
            self.node_count(),
            self.edges().map(|(u, v)| (new_index[u], new_index[v])),
        )
    }
}

pub(crate) struct Fnv(u64);

impl Fnv {
    pub(crate) fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write_u64(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

/// Bijection between external node labels and dense internal indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeLabelMap {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeLabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Labels `"0"`, `"1"`, ... matching the internal indices.
    pub fn identity(node_count: usize) -> Self {
        let mut map = Self::new();
        for v in 0..node_count {
            map.intern(&v.to_string());
        }
        map
    }

    /// Returns the index for `label`, assigning the next free one if unseen.
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub comment_prefixes: Vec<char>,
    /// Treat a reversed repeat `v u` of an earlier `u v` as the same
    /// undirected edge (counted as merged rather than as a duplicate).
    pub directed_as_undirected: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            comment_prefixes: vec!['#', '%'],
            directed_as_undirected: false,
        }
    }
}

/// Cleanup counts from [`load_edge_list`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines_read: usize,
    pub edge_lines: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
    pub reciprocal_merged: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub labels: NodeLabelMap,
    pub report: LoadReport,
}

fn split_tokens(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Reads a whitespace- or comma-separated edge list. Labels are assigned
/// indices in first-seen order.
pub fn load_edge_list<R: BufRead>(reader: R, options: &LoadOptions) -> Result<LoadedGraph> {
    let mut labels = NodeLabelMap::new();
    let mut report = LoadReport::default();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut arcs: HashSet<(usize, usize)> = HashSet::new();
    let mut pairs = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        report.lines_read += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(options.comment_prefixes.as_slice()) {
            continue;
        }
        let tokens = split_tokens(trimmed);
        if tokens.len() != 2 || tokens.iter().any(|t| t.is_empty()) {
            return Err(Error::Parse {
                line: i + 1,
                found: tokens.iter().filter(|t| !t.is_empty()).count(),
            });
        }
        report.edge_lines += 1;
        let u = labels.intern(tokens[0]);
        let v = labels.intern(tokens[1]);
        if u == v {
            report.self_loops_dropped += 1;
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            pairs.push(key);
            arcs.insert((u, v));
        } else if options.directed_as_undirected && !arcs.contains(&(u, v)) {
            arcs.insert((u, v));
            report.reciprocal_merged += 1;
        } else {
            report.duplicates_dropped += 1;
        }
    }

    pairs.sort_unstable();
    let graph = Graph::from_canonical_pairs(labels.len(), &pairs);
    Ok(LoadedGraph {
        graph,
        labels,
        report,
    })
}

/// Writes one `u v` line per edge, using `labels` when given.
pub fn write_edge_list<W: Write>(
    graph: &Graph,
    labels: Option<&NodeLabelMap>,
    mut out: W,
) -> Result<()> {
    for (u, v) in graph.edges() {
        match labels {
            Some(map) => writeln!(out, "{} {}", map.label(u), map.label(v))?,
            None => writeln!(out, "{u} {v}")?,
        }
    }
    Ok(())
}

/// Barabási–Albert preferential attachment.
///
/// The core is `m_attach` isolated nodes; node `m_attach` links to all of
/// them, and every later node links to `m_attach` distinct existing nodes
/// drawn with probability proportional to degree. The result is connected
/// with exactly `m_attach * (n - m_attach)` edges.
pub fn generate_ba(n: usize, m_attach: usize, rng_seed: u64) -> Result<Graph> {
    if m_attach < 1 || n <= m_attach {
        return Err(invalid(format!(
            "BA generator needs n > m_attach >= 1 (n={n}, m_attach={m_attach})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut pairs = Vec::with_capacity(m_attach * (n - m_attach));
    // every endpoint occurrence, so uniform draws are degree-proportional
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * m_attach * (n - m_attach));
    let mut targets: Vec<usize> = (0..m_attach).collect();
    let mut chosen = HashSet::with_capacity(m_attach);

    for source in m_attach..n {
        for &t in &targets {
            pairs.push((t.min(source), t.max(source)));
            endpoints.push(t);
            endpoints.push(source);
        }
        chosen.clear();
        targets.clear();
        while targets.len() < m_attach {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if chosen.insert(t) {
                targets.push(t);
            }
        }
    }
    pairs.sort_unstable();
    Ok(Graph::from_canonical_pairs(n, &pairs))
}

/// Hop distances from `source`; `None` marks unreachable nodes.
pub fn bfs_distances(graph: &Graph, source: usize) -> Result<Vec<Option<usize>>> {
    graph.check_node(source)?;
    let mut dist = vec![None; graph.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u].unwrap() + 1;
        for &v in graph.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}
