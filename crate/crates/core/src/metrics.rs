//! Evaluation metrics for one (method, dataset, fraction) cell.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::cascade::CascadeOutcome;
use crate::diversity::ScoreTable;
use crate::error::{invalid, Result};
use crate::graph::{bfs_distances, Graph};
use crate::ranking::{Method, RankingParams};

pub const METRIC_CSV_HEADER: &str = "method,dataset,fraction,scale,ls,unreachable,ranking_seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricCell {
    pub method: String,
    pub dataset: String,
    pub fraction: f64,
    pub final_infected_scale: f64,
    /// `None` when no seed pair is connected (or fewer than two seeds).
    pub avg_spreader_distance: Option<f64>,
    pub unreachable_pairs: usize,
    pub ranking_seconds: Option<f64>,
}

impl MetricCell {
    /// One row in `METRIC_CSV_HEADER` order; undefined values are blank.
    pub fn write_csv_row<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            self.method,
            self.dataset,
            self.fraction,
            self.final_infected_scale,
            opt(self.avg_spreader_distance),
            self.unreachable_pairs,
            opt(self.ranking_seconds),
        )?;
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn final_infected_scale(outcome: &CascadeOutcome, node_count: usize) -> Result<f64> {
    if node_count == 0 {
        return Err(invalid("final infected scale needs a non-empty graph"));
    }
    Ok(outcome.mean_infected / node_count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreaderDistance {
    /// Mean hop distance over connected seed pairs.
    pub mean: Option<f64>,
    pub connected_pairs: usize,
    pub unreachable_pairs: usize,
}

/// Mean shortest-path length over unordered seed pairs. Disconnected pairs
/// are counted separately and left out of the mean.
pub fn avg_spreader_distance(graph: &Graph, seeds: &[usize]) -> Result<SpreaderDistance> {
    if seeds.len() < 2 {
        return Err(invalid("average spreader distance needs at least two seeds"));
    }
    seeds.iter().try_for_each(|&s| graph.check_node(s))?;
    let per_source: Vec<(usize, usize, usize)> = (0..seeds.len() - 1)
        .into_par_iter()
        .map(|i| -> Result<(usize, usize, usize)> {
            let dist = bfs_distances(graph, seeds[i])?;
            let mut sum = 0;
            let mut connected = 0;
            let mut unreachable = 0;
            for &t in &seeds[i + 1..] {
                match dist[t] {
                    Some(d) => {
                        sum += d;
                        connected += 1;
                    }
                    None => unreachable += 1,
                }
            }
            Ok((sum, connected, unreachable))
        })
        .collect::<Result<_>>()?;
    let (sum, connected, unreachable) = per_source
        .iter()
        .fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(SpreaderDistance {
        mean: (connected > 0).then(|| sum as f64 / connected as f64),
        connected_pairs: connected,
        unreachable_pairs: unreachable,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingStats {
    pub samples: Vec<Duration>,
}

impl TimingStats {
    pub fn min(&self) -> Duration {
        self.samples.iter().copied().min().unwrap_or_default()
    }

    pub fn max(&self) -> Duration {
        self.samples.iter().copied().max().unwrap_or_default()
    }

    /// Lower median for an even sample count.
    pub fn median(&self) -> Duration {
        let mut sorted = self.samples.clone();
        sorted.sort_unstable();
        sorted.get((sorted.len().max(1) - 1) / 2).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone)]
pub struct TimedRanking {
    pub scores: ScoreTable,
    pub timing: TimingStats,
}

/// Wall-clock time of the full ranking pipeline, run `repetitions` times
/// back to back. Returns the last score table.
pub fn time_ranking(
    method: Method,
    graph: &Graph,
    params: &RankingParams,
    repetitions: usize,
) -> Result<TimedRanking> {
    if repetitions == 0 {
        return Err(invalid("repetitions must be at least 1"));
    }
    let mut samples = Vec::with_capacity(repetitions);
    let mut last = None;
    for _ in 0..repetitions {
        let start = Instant::now();
        let table = method.rank(graph, params)?;
        samples.push(start.elapsed());
        last = Some(table);
    }
    Ok(TimedRanking {
        scores: last.expect("at least one repetition"),
        timing: TimingStats { samples },
    })
}
