//! Reference rankers: degree, H-index, PageRank and a CD-only stand-in for
//! community-based spreader ranking.

use crate::community::Partition;
use crate::diversity::{community_diversity, ScoreTable};
use crate::error::{invalid, Result};
use crate::graph::Graph;

pub fn degree_rank(graph: &Graph) -> Result<ScoreTable> {
    let scores = graph.nodes().map(|v| graph.degree(v) as f64).collect();
    ScoreTable::new("DEG", scores, graph, None)
}

/// Largest `h` such that at least `h` neighbors have degree >= `h`.
pub fn h_index(graph: &Graph, v: usize) -> usize {
    let mut degrees: Vec<usize> = graph.neighbors(v).iter().map(|&u| graph.degree(u)).collect();
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    degrees
        .iter()
        .enumerate()
        .take_while(|&(i, &d)| d > i)
        .count()
}

pub fn h_index_rank(graph: &Graph) -> Result<ScoreTable> {
    let scores = graph.nodes().map(|v| h_index(graph, v) as f64).collect();
    ScoreTable::new("HI", scores, graph, None)
}

#[derive(Debug, Clone, Copy)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tolerance: 1e-10,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PageRank {
    pub scores: ScoreTable,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration of the undirected random walk with uniform teleport.
/// Isolated nodes spread their mass uniformly.
pub fn pagerank_rank(graph: &Graph, cfg: &PageRankConfig) -> Result<PageRank> {
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(invalid(format!("damping must be in (0, 1), got {}", cfg.damping)));
    }
    if cfg.tolerance.is_nan() || cfg.tolerance <= 0.0 || cfg.max_iterations == 0 {
        return Err(invalid("pagerank needs a positive tolerance and iteration cap"));
    }
    let n = graph.node_count();
    if n == 0 {
        return Ok(PageRank {
            scores: ScoreTable::new("PR", Vec::new(), graph, None)?,
            iterations: 0,
            converged: true,
        });
    }
    let d = cfg.damping;
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let dangling: f64 = graph
            .nodes()
            .filter(|&v| graph.degree(v) == 0)
            .map(|v| rank[v])
            .sum();
        let base = (1.0 - d) * uniform + d * dangling * uniform;
        for v in graph.nodes() {
            let inflow: f64 = graph
                .neighbors(v)
                .iter()
                .map(|&u| rank[u] / graph.degree(u) as f64)
                .sum();
            next[v] = base + d * inflow;
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    Ok(PageRank {
        scores: ScoreTable::new("PR", rank, graph, None)?,
        iterations,
        converged,
    })
}

/// Community-diversity-only proxy for CSR, registered as `CSR-CD`.
pub fn cd_rank(graph: &Graph, partition: &Partition) -> Result<ScoreTable> {
    Ok(community_diversity(graph, partition)?.renamed("CSR-CD"))
}
