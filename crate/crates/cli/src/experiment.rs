//! Runs every (dataset, method, fraction) cell and writes the output tree:
//!
//! ```text
//! <output_dir>/
//!   results.csv            one metric row per cell
//!   cascades.csv           cascade summary per cell
//!   errors.csv             failed cells, only when there are any
//!   scores/<dataset>_<method>.csv
//!   plots/<dataset>_<metric>.csv
//!   stats/<metric>_ranks.csv, stats/<metric>_holm.csv, stats/summary.md
//! ```

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::{info, warn};
use mcd_core::cascade::{estimate_spread, CascadeConfig, CascadeOutcome, CASCADE_CSV_HEADER};
use mcd_core::diversity::{select_top_k, ScoreTable};
use mcd_core::graph::{generate_ba, load_edge_list, Graph, LoadOptions, NodeLabelMap};
use mcd_core::metrics::{avg_spreader_distance, final_infected_scale, time_ranking, MetricCell, METRIC_CSV_HEADER};
use mcd_core::ranking::Method;
use rayon::prelude::*;

use crate::config::{DatasetSource, DatasetSpec, ExperimentConfig, Fractions};
use crate::report::{emit_plot_data, read_results, write_stats};

pub const SMALL_FRACTIONS: [f64; 9] = [0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1];
pub const LARGE_FRACTIONS: [f64; 8] = [0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04];
/// Graphs with at least this many nodes use [`LARGE_FRACTIONS`].
pub const LARGE_GRAPH_NODES: usize = 2000;

pub fn auto_fractions(node_count: usize) -> Vec<f64> {
    if node_count >= LARGE_GRAPH_NODES {
        LARGE_FRACTIONS.to_vec()
    } else {
        SMALL_FRACTIONS.to_vec()
    }
}

pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub labels: NodeLabelMap,
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let (graph, labels) = match &spec.source {
        DatasetSource::File {
            path,
            directed_as_undirected,
        } => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let options = LoadOptions {
                directed_as_undirected: *directed_as_undirected,
                ..Default::default()
            };
            let loaded = load_edge_list(BufReader::new(file), &options)
                .with_context(|| format!("parsing {}", path.display()))?;
            (loaded.graph, loaded.labels)
        }
        DatasetSource::Ba { n, m, seed } => {
            let g = generate_ba(*n, *m, *seed)?;
            let labels = NodeLabelMap::identity(g.node_count());
            (g, labels)
        }
    };
    if graph.node_count() == 0 {
        anyhow::bail!("graph has no nodes");
    }
    Ok(Dataset {
        name: spec.name.clone(),
        graph,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellError {
    pub dataset: String,
    pub method: String,
    pub fraction: f64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub output_dir: PathBuf,
    pub cells: Vec<MetricCell>,
    pub errors: Vec<CellError>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Cascade seed of one cell. Keyed by seed count rather than fraction, so
/// two fractions that round to the same seed set repeat the same cascades.
pub fn cell_seed(rng_seed: u64, dataset: &str, method: Method, k: usize) -> u64 {
    let mut h = splitmix(rng_seed);
    h = splitmix(h ^ fnv1a(dataset));
    h = splitmix(h ^ fnv1a(method.name()));
    splitmix(h ^ k as u64)
}

struct CellRecord {
    cell: MetricCell,
    outcome: CascadeOutcome,
}

fn run_cell(
    cfg: &ExperimentConfig,
    data: &Dataset,
    method: Method,
    scores: &ScoreTable,
    fraction: f64,
    ranking_seconds: Option<f64>,
) -> mcd_core::Result<CellRecord> {
    let seeds = select_top_k(scores, fraction)?;
    let cascade = CascadeConfig {
        activation_probability: cfg.activation_probability,
        runs: cfg.runs,
        rng_seed: cell_seed(cfg.rng_seed, &data.name, method, seeds.k()),
    };
    let outcome = estimate_spread(&data.graph, seeds.nodes(), &cascade)?;
    let (ls, unreachable) = if seeds.k() >= 2 {
        let d = avg_spreader_distance(&data.graph, seeds.nodes())?;
        (d.mean, d.unreachable_pairs)
    } else {
        (None, 0)
    };
    Ok(CellRecord {
        cell: MetricCell {
            method: method.name().into(),
            dataset: data.name.clone(),
            fraction,
            final_infected_scale: final_infected_scale(&outcome, data.graph.node_count())?,
            avg_spreader_distance: ls,
            unreachable_pairs: unreachable,
            ranking_seconds,
        },
        outcome,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let datasets = cfg
        .datasets
        .iter()
        .map(|spec| load_dataset(spec).with_context(|| format!("dataset {:?}", spec.name)))
        .collect::<Result<Vec<_>>>()?;

    let out = &cfg.output_dir;
    for sub in ["scores", "plots", "stats"] {
        fs::create_dir_all(out.join(sub)).with_context(|| format!("creating {}", out.display()))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("building worker pool")?;
    let cascade_cfg = CascadeConfig {
        activation_probability: cfg.activation_probability,
        runs: cfg.runs,
        rng_seed: cfg.rng_seed,
    };

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for data in &datasets {
        let fractions = match &cfg.fractions {
            Fractions::Auto => auto_fractions(data.graph.node_count()),
            Fractions::List(list) => list.clone(),
        };
        info!(
            "{}: {} nodes, {} edges, {} fractions",
            data.name,
            data.graph.node_count(),
            data.graph.edge_count(),
            fractions.len()
        );
        for &method in &cfg.methods {
            // rankings run one at a time so timings are not disturbed
            let ranked = if cfg.timing {
                time_ranking(method, &data.graph, &cfg.ranking, cfg.timing_repetitions)
                    .map(|t| (t.scores, Some(t.timing.median().as_secs_f64())))
            } else {
                pool.install(|| method.rank(&data.graph, &cfg.ranking)).map(|s| (s, None))
            };
            let (scores, seconds) = match ranked {
                Ok(r) => r,
                Err(e) => {
                    warn!("{} / {}: ranking failed: {e}", data.name, method);
                    errors.extend(fractions.iter().map(|&fraction| CellError {
                        dataset: data.name.clone(),
                        method: method.name().into(),
                        fraction,
                        message: e.to_string(),
                    }));
                    continue;
                }
            };
            let path = out.join("scores").join(format!("{}_{}.csv", data.name, method));
            let mut w = create(&path)?;
            scores.write_csv(&data.labels, &mut w)?;
            w.flush()?;

            let results: Vec<_> = pool.install(|| {
                fractions
                    .par_iter()
                    .map(|&f| run_cell(cfg, data, method, &scores, f, seconds))
                    .collect()
            });
            for (&fraction, r) in fractions.iter().zip(results) {
                match r {
                    Ok(rec) => records.push(rec),
                    Err(e) => {
                        warn!("{} / {} / {fraction}: {e}", data.name, method);
                        errors.push(CellError {
                            dataset: data.name.clone(),
                            method: method.name().into(),
                            fraction,
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
    }

    let mut w = create(&out.join("results.csv"))?;
    writeln!(w, "{METRIC_CSV_HEADER}")?;
    for r in &records {
        r.cell.write_csv_row(&mut w)?;
    }
    w.flush()?;

    let mut w = create(&out.join("cascades.csv"))?;
    writeln!(w, "{CASCADE_CSV_HEADER}")?;
    for r in &records {
        r.outcome
            .write_csv_row(&r.cell.method, &r.cell.dataset, r.cell.fraction, &cascade_cfg, &mut w)?;
    }
    w.flush()?;

    let errors_path = out.join("errors.csv");
    if errors.is_empty() {
        if errors_path.exists() {
            fs::remove_file(&errors_path)?;
        }
    } else {
        let mut w = csv::Writer::from_path(&errors_path)?;
        w.write_record(["dataset", "method", "fraction", "error"])?;
        for e in &errors {
            w.write_record([&e.dataset, &e.method, &e.fraction.to_string(), &e.message])?;
        }
        w.flush()?;
    }

    // downstream reports see exactly what was written
    let cells = read_results(&out.join("results.csv"))?;
    let method_names: Vec<String> = cfg.methods.iter().map(|m| m.name().to_string()).collect();
    emit_plot_data(&cells, &method_names, &out.join("plots"))?;
    write_stats(&cells, &method_names, &out.join("stats"))?;

    Ok(ExperimentOutput {
        output_dir: out.clone(),
        cells,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_sets() {
        let small = auto_fractions(62);
        assert_eq!(small.len(), 9);
        assert_eq!(small[0], 0.02);
        assert_eq!(auto_fractions(1999), small);
        let large = auto_fractions(2000);
        assert_eq!(large.len(), 8);
        assert_eq!(large[0], 0.005);
        assert_eq!(auto_fractions(22687), large);
    }

    #[test]
    fn full_protocol_cell_count() {
        // node counts of the eight benchmark networks
        let sizes = [2000, 10_638, 198, 7126, 5242, 62, 6100, 22_687];
        let per_method: usize = sizes.iter().map(|&n| auto_fractions(n).len()).sum();
        assert_eq!(per_method, 9 * 2 + 8 * 6);
    }

    #[test]
    fn cell_seeds_differ() {
        let a = cell_seed(7, "d", Method::Mcd, 3);
        assert_eq!(a, cell_seed(7, "d", Method::Mcd, 3));
        assert_ne!(a, cell_seed(7, "d", Method::Degree, 3));
        assert_ne!(a, cell_seed(7, "d", Method::Mcd, 4));
        assert_ne!(a, cell_seed(7, "e", Method::Mcd, 3));
        assert_ne!(a, cell_seed(8, "d", Method::Mcd, 3));
    }
}
