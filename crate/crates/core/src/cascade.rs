//! Independent Cascade diffusion.
//!
//! Each newly infected node gets one Bernoulli(p) attempt on every neighbor
//! that is still susceptible. Rounds process the frontier in ascending node
//! order and each node's neighbors in ascending order, drawing one coin per
//! attempt; already-infected targets consume no coin. Run `i` of an estimate
//! uses ChaCha8 stream `i` of the configured seed, so results do not depend
//! on how runs are scheduled across threads.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::graph::Graph;

/// Largest graph `exact_spread` will enumerate.
pub const EXACT_EDGE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeConfig {
    pub activation_probability: f64,
    pub runs: usize,
    pub rng_seed: u64,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            activation_probability: 0.1,
            runs: 100,
            rng_seed: 0,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        check_probability(self.activation_probability)?;
        if self.runs == 0 {
            return Err(invalid("runs must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    pub per_run_infected_count: Vec<usize>,
    pub mean_infected: f64,
    pub mean_final_infected_scale: f64,
    /// Standard error of `mean_infected` (sample deviation / sqrt(runs)).
    pub std_error: f64,
}

impl CascadeOutcome {
    fn from_counts(counts: Vec<usize>, node_count: usize) -> Self {
        let runs = counts.len() as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / runs;
        let std_error = if counts.len() > 1 {
            let var = counts
                .iter()
                .map(|&c| (c as f64 - mean).powi(2))
                .sum::<f64>()
                / (runs - 1.0);
            (var / runs).sqrt()
        } else {
            0.0
        };
        CascadeOutcome {
            per_run_infected_count: counts,
            mean_infected: mean,
            mean_final_infected_scale: mean / node_count as f64,
            std_error,
        }
    }

    /// `method,dataset,fraction,p,runs,mean_infected,scale,std_error`
    pub fn write_csv_row<W: Write>(
        &self,
        method: &str,
        dataset: &str,
        fraction: f64,
        cfg: &CascadeConfig,
        mut out: W,
    ) -> Result<()> {
        writeln!(
            out,
            "{method},{dataset},{fraction},{},{},{},{},{}",
            cfg.activation_probability,
            cfg.runs,
            self.mean_infected,
            self.mean_final_infected_scale,
            self.std_error
        )?;
        Ok(())
    }
}

pub const CASCADE_CSV_HEADER: &str = "method,dataset,fraction,p,runs,mean_infected,scale,std_error";

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("activation probability must be in [0, 1], got {p}")))
    }
}

fn check_seeds(graph: &Graph, seeds: &[usize]) -> Result<()> {
    if seeds.is_empty() {
        return Err(invalid("seed set is empty"));
    }
    seeds.iter().try_for_each(|&s| graph.check_node(s))
}

/// Runs a cascade where `attempt(u, v)` decides whether infected `u`
/// infects susceptible `v`. `descending` reverses both the frontier and the
/// neighbor processing order.
pub(crate) fn cascade_with<F>(
    graph: &Graph,
    seeds: &[usize],
    descending: bool,
    mut attempt: F,
) -> Vec<bool>
where
    F: FnMut(usize, usize) -> bool,
{
    let mut infected = vec![false; graph.node_count()];
    let mut frontier: Vec<usize> = Vec::with_capacity(seeds.len());
    for &s in seeds {
        if !infected[s] {
            infected[s] = true;
            frontier.push(s);
        }
    }
    let mut next = Vec::new();
    while !frontier.is_empty() {
        frontier.sort_unstable();
        if descending {
            frontier.reverse();
        }
        for &u in &frontier {
            let neighbors = graph.neighbors(u);
            let mut visit = |v: usize| {
                if !infected[v] && attempt(u, v) {
                    infected[v] = true;
                    next.push(v);
                }
            };
            if descending {
                neighbors.iter().rev().for_each(|&v| visit(v));
            } else {
                neighbors.iter().for_each(|&v| visit(v));
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    infected
}

/// One cascade; returns the infected flag of every node.
pub fn simulate_once<R: Rng + ?Sized>(
    graph: &Graph,
    seeds: &[usize],
    p: f64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    check_seeds(graph, seeds)?;
    check_probability(p)?;
    Ok(cascade_with(graph, seeds, false, |_, _| rng.gen::<f64>() < p))
}

/// The RNG for run `run` of an estimate seeded with `seed`.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

pub fn estimate_spread(graph: &Graph, seeds: &[usize], cfg: &CascadeConfig) -> Result<CascadeOutcome> {
    cfg.validate()?;
    check_seeds(graph, seeds)?;
    let p = cfg.activation_probability;
    let counts: Vec<usize> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(cfg.rng_seed, run);
            cascade_with(graph, seeds, false, |_, _| rng.gen::<f64>() < p)
                .iter()
                .filter(|&&x| x)
                .count()
        })
        .collect();
    Ok(CascadeOutcome::from_counts(counts, graph.node_count()))
}

/// Exact expected number of infected nodes, by enumerating every live-edge
/// subgraph (each edge kept with probability `p`).
pub fn exact_spread(graph: &Graph, seeds: &[usize], p: f64) -> Result<f64> {
    check_seeds(graph, seeds)?;
    check_probability(p)?;
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    if edges.len() > EXACT_EDGE_LIMIT {
        return Err(invalid(format!(
            "exact spread enumerates 2^|E| subgraphs; {} edges exceeds the limit of {EXACT_EDGE_LIMIT}",
            edges.len()
        )));
    }
    let n = graph.node_count();
    let m = edges.len();
    let mut total = 0.0;
    let mut adjacency = vec![Vec::new(); n];
    let mut reached = vec![false; n];
    let mut stack = Vec::new();
    for mask in 0u32..(1u32 << m) {
        let live = mask.count_ones() as i32;
        let weight = p.powi(live) * (1.0 - p).powi(m as i32 - live);
        if weight == 0.0 {
            continue;
        }
        adjacency.iter_mut().for_each(Vec::clear);
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask & (1 << i) != 0 {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        reached.iter_mut().for_each(|r| *r = false);
        let mut count = 0usize;
        for &s in seeds {
            if !reached[s] {
                reached[s] = true;
                count += 1;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &v in &adjacency[u] {
                if !reached[v] {
                    reached[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        total += weight * count as f64;
    }
    Ok(total)
}
