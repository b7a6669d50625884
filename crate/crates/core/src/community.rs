//! Leiden community detection.
//!
//! Each pass runs the three Leiden phases: fast local moving of nodes,
//! refinement of every community into well-connected sub-communities, and
//! aggregation of the refined communities into a smaller weighted network
//! whose initial partition comes from the unrefined communities. Passes
//! repeat from the previous result until quality stops improving.

use std::collections::VecDeque;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::graph::{Fnv, Graph, NodeLabelMap};

/// Minimum improvement for a local move to count as better than staying.
const MOVE_EPS: f64 = 1e-10;
/// Randomness of the refinement merge (θ).
const REFINE_RANDOMNESS: f64 = 0.01;
/// A full pass must gain at least this much quality to trigger another pass.
const PASS_MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityFunction {
    Modularity,
    /// Constant Potts model: Σ_c [ L_c − γ·n_c(n_c − 1)/2 ].
    Cpm,
}

impl std::str::FromStr for QualityFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "modularity" => Ok(QualityFunction::Modularity),
            "cpm" => Ok(QualityFunction::Cpm),
            other => Err(invalid(format!("unknown quality function {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QualityConfig {
    pub quality: QualityFunction,
    pub resolution: f64,
    pub rng_seed: u64,
    pub max_iterations: usize,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            quality: QualityFunction::Modularity,
            resolution: 1.0,
            rng_seed: 0,
            max_iterations: 100,
        }
    }
}

impl QualityConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(invalid(format!("resolution must be > 0, got {}", self.resolution)));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be positive"));
        }
        Ok(())
    }
}

/// Node → community assignment with dense ids, numbered in order of first
/// appearance when scanning nodes by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    community_count: usize,
}

impl Partition {
    /// Relabels arbitrary ids densely in first-seen order.
    pub fn from_assignment(raw: &[usize]) -> Self {
        let max = raw.iter().copied().max().map_or(0, |m| m + 1);
        let mut remap = vec![usize::MAX; max];
        let mut next = 0;
        let assignment = raw
            .iter()
            .map(|&c| {
                if remap[c] == usize::MAX {
                    remap[c] = next;
                    next += 1;
                }
                remap[c]
            })
            .collect();
        Partition {
            assignment,
            community_count: next,
        }
    }

    pub fn singletons(node_count: usize) -> Self {
        Partition {
            assignment: (0..node_count).collect(),
            community_count: node_count,
        }
    }

    pub fn whole(node_count: usize) -> Self {
        Partition {
            assignment: vec![0; node_count],
            community_count: usize::from(node_count > 0),
        }
    }

    pub fn community_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    /// Members of each community, ascending.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_u64(self.assignment.len() as u64);
        for &c in &self.assignment {
            h.write_u64(c as u64);
        }
        h.finish()
    }

    pub(crate) fn check_graph(&self, graph: &Graph) -> Result<()> {
        if self.assignment.len() != graph.node_count() {
            return Err(Error::SizeMismatch {
                what: "partition",
                got: self.assignment.len(),
                expected: graph.node_count(),
            });
        }
        Ok(())
    }

    /// Splits every community into its connected components. Never lowers
    /// modularity or CPM quality.
    pub fn split_disconnected(&self, graph: &Graph) -> Partition {
        let n = graph.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in graph.neighbors(u) {
                    if label[v] == usize::MAX && self.assignment[v] == self.assignment[s] {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        Partition::from_assignment(&label)
    }

    /// CSV with header `node_label,community_id`.
    pub fn write_csv<W: Write>(&self, labels: &NodeLabelMap, mut out: W) -> Result<()> {
        writeln!(out, "node_label,community_id")?;
        for (v, c) in self.assignment.iter().enumerate() {
            writeln!(out, "{},{}", labels.label(v), c)?;
        }
        Ok(())
    }
}

/// Newman–Girvan modularity or CPM value of `partition`.
///
/// Modularity of an edgeless graph is taken as 0.
pub fn quality(graph: &Graph, partition: &Partition, cfg: &QualityConfig) -> Result<f64> {
    partition.check_graph(graph)?;
    cfg.validate()?;
    let k = partition.community_count();
    let mut internal = vec![0.0f64; k];
    for (u, v) in graph.edges() {
        let c = partition.community_of(u);
        if c == partition.community_of(v) {
            internal[c] += 1.0;
        }
    }
    let mut weight = vec![0.0f64; k];
    for v in graph.nodes() {
        weight[partition.community_of(v)] += match cfg.quality {
            QualityFunction::Modularity => graph.degree(v) as f64,
            QualityFunction::Cpm => 1.0,
        };
    }
    Ok(match cfg.quality {
        QualityFunction::Modularity => {
            let m = graph.edge_count() as f64;
            if m == 0.0 {
                return Ok(0.0);
            }
            internal
                .iter()
                .zip(&weight)
                .map(|(l, kc)| l / m - cfg.resolution * (kc / (2.0 * m)).powi(2))
                .sum()
        }
        QualityFunction::Cpm => internal
            .iter()
            .zip(&weight)
            .map(|(l, nc)| l - cfg.resolution * nc * (nc - 1.0) / 2.0)
            .sum(),
    })
}

#[derive(Debug, Clone)]
pub struct LeidenRun {
    pub partition: Partition,
    /// Quality of the singleton start followed by the result of each pass.
    pub quality_trace: Vec<f64>,
    pub passes: usize,
}

pub fn leiden(graph: &Graph, cfg: &QualityConfig) -> Result<Partition> {
    leiden_traced(graph, cfg).map(|run| run.partition)
}

pub fn leiden_traced(graph: &Graph, cfg: &QualityConfig) -> Result<LeidenRun> {
    cfg.validate()?;
    if graph.node_count() == 0 {
        return Err(invalid("leiden requires a non-empty graph"));
    }
    let mut current = Partition::singletons(graph.node_count());
    let mut best_quality = quality(graph, &current, cfg)?;
    let mut trace = vec![best_quality];
    if graph.edge_count() == 0 {
        return Ok(LeidenRun {
            partition: current,
            quality_trace: trace,
            passes: 0,
        });
    }

    let base = Network::from_graph(graph, cfg.quality);
    let scale = match cfg.quality {
        QualityFunction::Modularity => cfg.resolution / (2.0 * graph.edge_count() as f64),
        QualityFunction::Cpm => cfg.resolution,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut passes = 0;
    while passes < cfg.max_iterations {
        passes += 1;
        let raw = leiden_pass(&base, current.assignment(), scale, &mut rng);
        let candidate = Partition::from_assignment(&raw).split_disconnected(graph);
        let q = quality(graph, &candidate, cfg)?;
        if q < best_quality {
            break;
        }
        let gain = q - best_quality;
        trace.push(q);
        current = candidate;
        best_quality = q;
        if gain < PASS_MIN_GAIN {
            break;
        }
    }
    Ok(LeidenRun {
        partition: current,
        quality_trace: trace,
        passes,
    })
}

/// Weighted network used internally; self-loops are not stored since they
/// never change move gains, but they stay folded into `node_weight`.
struct Network {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    node_weight: Vec<f64>,
}

impl Network {
    fn from_graph(graph: &Graph, quality: QualityFunction) -> Self {
        let mut offsets = vec![0];
        let mut targets = Vec::with_capacity(2 * graph.edge_count());
        for v in graph.nodes() {
            targets.extend_from_slice(graph.neighbors(v));
            offsets.push(targets.len());
        }
        let node_weight = graph
            .nodes()
            .map(|v| match quality {
                QualityFunction::Modularity => graph.degree(v) as f64,
                QualityFunction::Cpm => 1.0,
            })
            .collect();
        Network {
            weights: vec![1.0; targets.len()],
            offsets,
            targets,
            node_weight,
        }
    }

    fn len(&self) -> usize {
        self.node_weight.len()
    }

    fn arcs(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    /// Collapses each cluster of `membership` (dense ids) into one node.
    fn aggregate(&self, membership: &[usize], cluster_count: usize) -> Network {
        let mut node_weight = vec![0.0; cluster_count];
        let mut members = vec![Vec::new(); cluster_count];
        for (v, &c) in membership.iter().enumerate() {
            node_weight[c] += self.node_weight[v];
            members[c].push(v);
        }
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut acc = vec![0.0f64; cluster_count];
        let mut touched = Vec::new();
        for (c, group) in members.iter().enumerate() {
            for &v in group {
                for (u, w) in self.arcs(v) {
                    let d = membership[u];
                    if d == c {
                        continue;
                    }
                    if acc[d] == 0.0 {
                        touched.push(d);
                    }
                    acc[d] += w;
                }
            }
            touched.sort_unstable();
            for &d in &touched {
                targets.push(d);
                weights.push(acc[d]);
                acc[d] = 0.0;
            }
            touched.clear();
            offsets.push(targets.len());
        }
        Network {
            offsets,
            targets,
            weights,
            node_weight,
        }
    }
}

/// Scratch accumulator of edge weight from one node to each cluster.
struct ClusterWeights {
    weight: Vec<f64>,
    seen: Vec<bool>,
    clusters: Vec<usize>,
}

impl ClusterWeights {
    fn new(n: usize) -> Self {
        ClusterWeights {
            weight: vec![0.0; n],
            seen: vec![false; n],
            clusters: Vec::new(),
        }
    }

    fn add(&mut self, cluster: usize, w: f64) {
        if !self.seen[cluster] {
            self.seen[cluster] = true;
            self.clusters.push(cluster);
        }
        self.weight[cluster] += w;
    }

    fn reset(&mut self) {
        for &c in &self.clusters {
            self.weight[c] = 0.0;
            self.seen[c] = false;
        }
        self.clusters.clear();
    }
}

fn densify(assign: &[usize]) -> (Vec<usize>, usize) {
    let p = Partition::from_assignment(assign);
    let count = p.community_count();
    (p.assignment, count)
}

/// One Leiden pass starting from `initial` (ids < node count). Returns a
/// cluster id per node of the base network.
fn leiden_pass(base: &Network, initial: &[usize], scale: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut level_of: Vec<usize> = (0..base.len()).collect();
    let mut owned: Option<Network> = None;
    let mut assign = initial.to_vec();

    loop {
        let net = owned.as_ref().unwrap_or(base);
        move_nodes(net, &mut assign, scale, rng);
        let (dense, clusters) = densify(&assign);
        if clusters == net.len() {
            return level_of.iter().map(|&a| dense[a]).collect();
        }
        let refined = refine(net, &dense, clusters, scale, rng);
        let (refined, refined_count) = densify(&refined);
        let (membership, count) = if refined_count < net.len() {
            (refined, refined_count)
        } else {
            (dense.clone(), clusters)
        };
        let mut next_assign = vec![0; count];
        for (v, &r) in membership.iter().enumerate() {
            next_assign[r] = dense[v];
        }
        let next = net.aggregate(&membership, count);
        for a in level_of.iter_mut() {
            *a = membership[*a];
        }
        assign = next_assign;
        owned = Some(next);
    }
}

/// Queue-based local moving. Ties keep the current cluster, otherwise the
/// lowest cluster id wins; a fresh empty cluster is the last resort.
fn move_nodes(net: &Network, assign: &mut [usize], scale: f64, rng: &mut ChaCha8Rng) {
    let n = net.len();
    let mut cluster_weight = vec![0.0f64; n];
    let mut cluster_size = vec![0usize; n];
    for (v, &c) in assign.iter().enumerate() {
        cluster_weight[c] += net.node_weight[v];
        cluster_size[c] += 1;
    }
    let mut unused: Vec<usize> = (0..n).rev().filter(|&c| cluster_size[c] == 0).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut queue: VecDeque<usize> = order.into();
    let mut queued = vec![true; n];
    let mut to_cluster = ClusterWeights::new(n);

    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let current = assign[v];
        let wv = net.node_weight[v];
        cluster_weight[current] -= wv;
        cluster_size[current] -= 1;

        for (u, w) in net.arcs(v) {
            to_cluster.add(assign[u], w);
        }
        to_cluster.clusters.sort_unstable();

        let mut best = current;
        let mut best_gain = to_cluster.weight[current] - wv * cluster_weight[current] * scale;
        for &c in &to_cluster.clusters {
            if c == current {
                continue;
            }
            let gain = to_cluster.weight[c] - wv * cluster_weight[c] * scale;
            if gain > best_gain + MOVE_EPS {
                best = c;
                best_gain = gain;
            }
        }
        if cluster_size[current] > 0 && 0.0 > best_gain + MOVE_EPS {
            best = unused.pop().expect("an empty cluster exists while a cluster holds 2+ nodes");
        }
        to_cluster.reset();

        assign[v] = best;
        cluster_weight[best] += wv;
        cluster_size[best] += 1;
        if best != current {
            if cluster_size[current] == 0 {
                unused.push(current);
            }
            for (u, _) in net.arcs(v) {
                if !queued[u] && assign[u] != best {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
}

/// Refines each cluster of `assign` by merging singletons into
/// well-connected sub-clusters, chosen at random with weight exp(gain/θ).
fn refine(
    net: &Network,
    assign: &[usize],
    clusters: usize,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let n = net.len();
    let mut refined: Vec<usize> = (0..n).collect();
    let mut sub_weight = net.node_weight.clone();
    let mut singleton = vec![true; n];
    // edge weight from each refined cluster to the rest of its parent cluster
    let mut external = vec![0.0f64; n];
    let mut parent_weight = vec![0.0f64; clusters];
    let mut members = vec![Vec::new(); clusters];
    for v in 0..n {
        parent_weight[assign[v]] += net.node_weight[v];
        members[assign[v]].push(v);
        external[v] = net
            .arcs(v)
            .filter(|&(u, _)| assign[u] == assign[v])
            .map(|(_, w)| w)
            .sum();
    }
    let node_external = external.clone();

    let mut to_cluster = ClusterWeights::new(n);
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    for group in members.iter_mut() {
        group.shuffle(rng);
        let total = parent_weight[assign[group[0]]];
        for &v in group.iter() {
            let wv = net.node_weight[v];
            if !singleton[v] || node_external[v] < wv * (total - wv) * scale {
                continue;
            }
            let own = refined[v];
            sub_weight[own] = 0.0;
            external[own] = 0.0;

            to_cluster.add(own, 0.0);
            for (u, w) in net.arcs(v) {
                if assign[u] == assign[v] {
                    to_cluster.add(refined[u], w);
                }
            }
            to_cluster.clusters.sort_unstable();

            candidates.clear();
            let mut best_gain = f64::NEG_INFINITY;
            for &c in &to_cluster.clusters {
                let well_connected = external[c] >= sub_weight[c] * (total - sub_weight[c]) * scale;
                if !well_connected {
                    continue;
                }
                let gain = to_cluster.weight[c] - wv * sub_weight[c] * scale;
                if gain >= 0.0 {
                    candidates.push((c, gain));
                    best_gain = best_gain.max(gain);
                }
            }
            let chosen = pick_weighted(&candidates, best_gain, rng).unwrap_or(own);
            let link = to_cluster.weight[chosen];
            to_cluster.reset();

            refined[v] = chosen;
            sub_weight[chosen] += wv;
            external[chosen] += node_external[v] - 2.0 * link;
            if chosen != own {
                singleton[chosen] = false;
            }
        }
    }
    refined
}

fn pick_weighted(candidates: &[(usize, f64)], max_gain: f64, rng: &mut ChaCha8Rng) -> Option<usize> {
    if candidates.is_empty() {
        return None;
    }
    let weights: Vec<f64> = candidates
        .iter()
        .map(|&(_, g)| ((g - max_gain) / REFINE_RANDOMNESS).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (&(c, _), w) in candidates.iter().zip(&weights) {
        if r < *w {
            return Some(c);
        }
        r -= w;
    }
    candidates.last().map(|&(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::bfs_distances;
    use proptest::prelude::*;

    fn two_cliques() -> Graph {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j));
                }
            }
        }
        edges.push((3, 4));
        Graph::from_edges(8, edges).unwrap()
    }

    fn disjoint_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap()
    }

    /// Restricted-growth enumeration of every set partition of `n` nodes.
    fn all_partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for c in 0..=max + 1 {
                cur.push(c);
                rec(i + 1, n, cur, max.max(c), out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            let mut cur = vec![0];
            rec(1, n, &mut cur, 0, &mut out);
        }
        out
    }

    /// Modularity straight from the pairwise definition.
    fn modularity_pairwise(g: &Graph, assign: &[usize]) -> f64 {
        let m = g.edge_count() as f64;
        let mut q = 0.0;
        for i in g.nodes() {
            for j in g.nodes() {
                if assign[i] == assign[j] {
                    let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
                    q += a - (g.degree(i) * g.degree(j)) as f64 / (2.0 * m);
                }
            }
        }
        q / (2.0 * m)
    }

    fn brute_force_best(g: &Graph) -> (f64, Vec<usize>) {
        all_partitions(g.node_count())
            .into_iter()
            .map(|p| (modularity_pairwise(g, &p), p))
            .fold((f64::NEG_INFINITY, vec![]), |a, b| if b.0 > a.0 { b } else { a })
    }

    fn assert_connected_communities(g: &Graph, p: &Partition) {
        for members in p.communities() {
            assert!(!members.is_empty());
            let sub = Graph::from_edges(
                g.node_count(),
                g.edges().filter(|&(u, v)| {
                    p.community_of(u) == p.community_of(members[0])
                        && p.community_of(v) == p.community_of(members[0])
                }),
            )
            .unwrap();
            let d = bfs_distances(&sub, members[0]).unwrap();
            assert!(members.iter().all(|&v| d[v].is_some()), "disconnected community");
        }
    }

    #[test]
    fn quality_closed_forms() {
        let cfg = QualityConfig::default();
        let g = disjoint_triangles();
        let natural = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        assert!((quality(&g, &natural, &cfg).unwrap() - 0.5).abs() < 1e-12);
        assert!(quality(&g, &Partition::whole(6), &cfg).unwrap().abs() < 1e-12);

        let g = two_cliques();
        let m = g.edge_count() as f64;
        let expected: f64 = -g.nodes().map(|v| (g.degree(v) as f64 / (2.0 * m)).powi(2)).sum::<f64>();
        let q = quality(&g, &Partition::singletons(8), &cfg).unwrap();
        assert!((q - expected).abs() < 1e-12);
    }

    #[test]
    fn quality_matches_pairwise_definition() {
        let g = two_cliques();
        let cfg = QualityConfig::default();
        for assign in all_partitions(8).into_iter().step_by(37) {
            let p = Partition::from_assignment(&assign);
            let a = quality(&g, &p, &cfg).unwrap();
            assert!((a - modularity_pairwise(&g, &assign)).abs() < 1e-12);
        }
    }

    #[test]
    fn quality_rejects_mismatched_partition() {
        let g = disjoint_triangles();
        assert!(quality(&g, &Partition::singletons(5), &QualityConfig::default()).is_err());
    }

    #[test]
    fn cpm_quality() {
        let cfg = QualityConfig {
            quality: QualityFunction::Cpm,
            resolution: 0.5,
            ..Default::default()
        };
        let g = disjoint_triangles();
        let natural = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        // 2 × (3 − 0.5·3)
        assert!((quality(&g, &natural, &cfg).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_cliques_match_brute_force() {
        let g = two_cliques();
        let (best_q, best) = brute_force_best(&g);
        let best = Partition::from_assignment(&best);
        for seed in 0..10 {
            let p = leiden(&g, &QualityConfig::default().with_seed(seed)).unwrap();
            assert_eq!(p, best);
            let q = quality(&g, &p, &QualityConfig::default()).unwrap();
            assert!((q - best_q).abs() < 1e-9);
        }
    }

    #[test]
    fn disjoint_triangles_match_brute_force() {
        let g = disjoint_triangles();
        let (best_q, _) = brute_force_best(&g);
        let p = leiden(&g, &QualityConfig::default()).unwrap();
        assert_eq!(p.community_count(), 2);
        assert!((quality(&g, &p, &QualityConfig::default()).unwrap() - best_q).abs() < 1e-9);
    }

    #[test]
    fn edgeless_graph_gives_singletons() {
        let g = Graph::empty(5);
        let p = leiden(&g, &QualityConfig::default()).unwrap();
        assert_eq!(p.community_count(), 5);
        let cpm = QualityConfig {
            quality: QualityFunction::Cpm,
            ..Default::default()
        };
        assert_eq!(leiden(&g, &cpm).unwrap().community_count(), 5);
    }

    #[test]
    fn isolated_nodes_stay_alone() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let p = leiden(&g, &QualityConfig::default()).unwrap();
        assert_eq!(p.community_count(), 4);
        assert_eq!(p.community_of(0), p.community_of(2));
    }

    #[test]
    fn invalid_configs_rejected() {
        let g = disjoint_triangles();
        let bad = QualityConfig {
            resolution: 0.0,
            ..Default::default()
        };
        assert!(leiden(&g, &bad).is_err());
        assert!(leiden(&Graph::empty(0), &QualityConfig::default()).is_err());
    }

    #[test]
    fn ba_graph_properties() {
        let g = crate::graph::generate_ba(600, 3, 5).unwrap();
        let cfg = QualityConfig::default().with_seed(3);
        let run = leiden_traced(&g, &cfg).unwrap();
        assert!(run.quality_trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(run.quality_trace.last().unwrap() > &0.3);
        assert_connected_communities(&g, &run.partition);
        assert_eq!(run.partition, leiden(&g, &cfg).unwrap());
    }

    #[test]
    fn cpm_separates_cliques() {
        let g = two_cliques();
        let cfg = QualityConfig {
            quality: QualityFunction::Cpm,
            resolution: 0.5,
            ..Default::default()
        };
        let p = leiden(&g, &cfg).unwrap();
        assert_eq!(p, Partition::from_assignment(&[0, 0, 0, 0, 1, 1, 1, 1]));
    }

    #[test]
    fn partition_csv() {
        let p = Partition::from_assignment(&[5, 5, 2]);
        let mut buf = Vec::new();
        p.write_csv(&NodeLabelMap::identity(3), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "node_label,community_id\n0,0\n1,0\n2,1\n");
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..60).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n), 0..4 * n)
                .prop_map(move |edges| Graph::from_edges(n, edges).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn leiden_invariants(g in arb_graph(), seed in 0u64..1000) {
            let cfg = QualityConfig::default().with_seed(seed);
            let run = leiden_traced(&g, &cfg).unwrap();
            let p = &run.partition;
            prop_assert_eq!(p.node_count(), g.node_count());
            let mut sizes = vec![0; p.community_count()];
            for &c in p.assignment() {
                sizes[c] += 1;
            }
            prop_assert!(sizes.iter().all(|&s| s > 0));
            prop_assert!(run.quality_trace.windows(2).all(|w| w[1] >= w[0]));
            let singleton_q = quality(&g, &Partition::singletons(g.node_count()), &cfg).unwrap();
            prop_assert!(quality(&g, p, &cfg).unwrap() >= singleton_q - 1e-12);
            assert_connected_communities(&g, p);
            prop_assert_eq!(p, &leiden(&g, &cfg).unwrap());
        }

        #[test]
        fn modularity_in_range(g in arb_graph(), raw in prop::collection::vec(0usize..5, 60)) {
            prop_assume!(g.edge_count() > 0);
            let p = Partition::from_assignment(&raw[..g.node_count()]);
            let q = quality(&g, &p, &QualityConfig::default()).unwrap();
            prop_assert!((-0.5..=1.0).contains(&q));
        }
    }
}
