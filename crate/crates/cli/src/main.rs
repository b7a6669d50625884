use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use mcd_cli::config::ExperimentConfig;
use mcd_cli::experiment::run_experiment;
use mcd_cli::report::{methods_in, read_results, write_stats, MetricReport};
use mcd_core::cascade::{estimate_spread, CascadeConfig, CASCADE_CSV_HEADER};
use mcd_core::community::{leiden, QualityConfig, QualityFunction};
use mcd_core::diversity::select_top_k;
use mcd_core::graph::{generate_ba, load_edge_list, write_edge_list, LoadOptions, LoadedGraph};
use mcd_core::ranking::{Method, RankingParams};

#[derive(Parser)]
#[command(name = "mcd", version, about = "Influential spreader ranking by modified community diversity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the nodes of a graph with one method
    Score {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value = "MCD")]
        method: Method,
        #[command(flatten)]
        leiden: LeidenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect communities with Leiden
    Communities {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        leiden: LeidenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate independent cascade spread from a seed set
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        /// File with one seed label per line
        #[arg(long, conflicts_with_all = ["method", "fraction"])]
        seeds: Option<PathBuf>,
        /// Select seeds with this method instead of reading them
        #[arg(long, requires = "fraction")]
        method: Option<Method>,
        #[arg(long, requires = "method")]
        fraction: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        prob: f64,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        /// Seeds both the cascades and, with --method, community detection
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment from a TOML config
    Experiment { config: PathBuf },
    /// Recompute the statistical reports of an experiment output directory
    Stats {
        bundle: PathBuf,
        /// Defaults to <bundle>/stats
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a Barabási–Albert graph as an edge list
    GenBa {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list, whitespace or comma separated
    #[arg(long)]
    graph: PathBuf,
    /// Merge reversed duplicate lines `v u` into the edge `u v`
    #[arg(long)]
    directed_as_undirected: bool,
}

#[derive(Args)]
struct LeidenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "modularity")]
    quality: QualityFunction,
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
}

impl LeidenArgs {
    fn config(&self) -> QualityConfig {
        QualityConfig {
            quality: self.quality,
            resolution: self.resolution,
            rng_seed: self.seed,
            ..Default::default()
        }
    }
}

fn load(args: &GraphArgs) -> Result<LoadedGraph> {
    let file = File::open(&args.graph).with_context(|| format!("opening {}", args.graph.display()))?;
    let options = LoadOptions {
        directed_as_undirected: args.directed_as_undirected,
        ..Default::default()
    };
    let loaded = load_edge_list(BufReader::new(file), &options)
        .with_context(|| format!("parsing {}", args.graph.display()))?;
    info!(
        "{}: {} nodes, {} edges ({:?})",
        args.graph.display(),
        loaded.graph.node_count(),
        loaded.graph.edge_count(),
        loaded.report
    );
    Ok(loaded)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_seed_labels(path: &Path, loaded: &LoadedGraph) -> Result<Vec<usize>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut seeds = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        let label = line.trim();
        if label.is_empty() || label.starts_with('#') {
            continue;
        }
        match loaded.labels.index_of(label) {
            Some(v) => seeds.push(v),
            None => bail!("seed {label:?} is not a node of the graph"),
        }
    }
    Ok(seeds)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score {
            graph,
            method,
            leiden,
            out,
        } => {
            let loaded = load(&graph)?;
            let params = RankingParams {
                leiden: leiden.config(),
                ..Default::default()
            };
            let table = method.rank(&loaded.graph, &params)?;
            let mut w = output(&out)?;
            table.write_csv(&loaded.labels, &mut w)?;
            w.flush()?;
        }
        Command::Communities { graph, leiden: args, out } => {
            let loaded = load(&graph)?;
            let partition = leiden(&loaded.graph, &args.config())?;
            info!("{} communities", partition.community_count());
            let mut w = output(&out)?;
            partition.write_csv(&loaded.labels, &mut w)?;
            w.flush()?;
        }
        Command::Simulate {
            graph,
            seeds,
            method,
            fraction,
            prob,
            runs,
            seed,
            out,
        } => {
            let loaded = load(&graph)?;
            let (nodes, label, frac) = match (seeds, method, fraction) {
                (Some(path), _, _) => {
                    let nodes = read_seed_labels(&path, &loaded)?;
                    let frac = nodes.len() as f64 / loaded.graph.node_count().max(1) as f64;
                    (nodes, "seeds".to_string(), frac)
                }
                (None, Some(m), Some(f)) => {
                    let params = RankingParams {
                        leiden: QualityConfig::default().with_seed(seed),
                        ..Default::default()
                    };
                    let table = m.rank(&loaded.graph, &params)?;
                    (select_top_k(&table, f)?.nodes().to_vec(), m.name().to_string(), f)
                }
                _ => bail!("give either --seeds FILE or --method and --fraction"),
            };
            let cfg = CascadeConfig {
                activation_probability: prob,
                runs,
                rng_seed: seed,
            };
            let outcome = estimate_spread(&loaded.graph, &nodes, &cfg)?;
            let dataset = graph
                .graph
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let mut w = output(&out)?;
            writeln!(w, "{CASCADE_CSV_HEADER}")?;
            outcome.write_csv_row(&label, &dataset, frac, &cfg, &mut w)?;
            w.flush()?;
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let result = run_experiment(&cfg)?;
            info!(
                "{} cells, {} errors, written to {}",
                result.cells.len(),
                result.errors.len(),
                result.output_dir.display()
            );
            if !result.errors.is_empty() {
                eprintln!(
                    "warning: {} cells failed; see {}",
                    result.errors.len(),
                    result.output_dir.join("errors.csv").display()
                );
            }
        }
        Command::Stats { bundle, out } => {
            let cells = read_results(&bundle.join("results.csv"))?;
            let dir = out.unwrap_or_else(|| bundle.join("stats"));
            for r in write_stats(&cells, &methods_in(&cells), &dir)? {
                if let MetricReport::Skipped { metric, reason } = r {
                    eprintln!("{}: not tested ({reason})", metric.column());
                }
            }
        }
        Command::GenBa { n, m, seed, out } => {
            let g = generate_ba(n, m, seed)?;
            let mut w = output(&out)?;
            write_edge_list(&g, None, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
