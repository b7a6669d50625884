//! Experiment configuration, read from a versioned TOML document.
//!
//! ```toml
//! version = 1
//! methods = ["MCD", "CSR-CD", "PR", "HI", "DEG"]
//! fractions = "auto"            # or a list such as [0.02, 0.05]
//! activation_probability = 0.1
//! runs = 100
//! rng_seed = 7
//! output_dir = "out"            # relative to the config file
//! timing = false
//! timing_repetitions = 1
//! workers = 0                   # 0 = one per core
//!
//! [leiden]
//! quality = "modularity"        # or "cpm"
//! resolution = 1.0
//! max_iterations = 100
//! # seed = 3                    # defaults to rng_seed
//!
//! [[datasets]]
//! name = "dolphins"
//! path = "data/dolphins.txt"
//!
//! [[datasets]]
//! name = "ba2000"
//! generator = { kind = "ba", n = 2000, m = 5, seed = 1 }
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mcd_core::community::{QualityConfig, QualityFunction};
use mcd_core::ranking::{Method, RankingParams};
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    File {
        path: PathBuf,
        directed_as_undirected: bool,
    },
    Ba {
        n: usize,
        m: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub source: DatasetSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fractions {
    Auto,
    List(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub methods: Vec<Method>,
    pub fractions: Fractions,
    pub activation_probability: f64,
    pub runs: usize,
    pub rng_seed: u64,
    pub output_dir: PathBuf,
    /// Record ranking wall-clock time. Off by default because timings are
    /// the one output that differs between otherwise identical runs.
    pub timing: bool,
    pub timing_repetitions: usize,
    pub workers: usize,
    pub ranking: RankingParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    datasets: Vec<RawDataset>,
    methods: Vec<String>,
    #[serde(default)]
    fractions: Option<RawFractions>,
    #[serde(default = "default_probability")]
    activation_probability: f64,
    #[serde(default = "default_runs")]
    runs: usize,
    #[serde(default)]
    rng_seed: u64,
    output_dir: PathBuf,
    #[serde(default)]
    timing: bool,
    #[serde(default = "default_repetitions")]
    timing_repetitions: usize,
    #[serde(default)]
    workers: usize,
    #[serde(default)]
    leiden: RawLeiden,
}

fn default_probability() -> f64 {
    0.1
}

fn default_runs() -> usize {
    100
}

fn default_repetitions() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: String,
    path: Option<PathBuf>,
    generator: Option<RawGenerator>,
    #[serde(default)]
    directed_as_undirected: bool,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawGenerator {
    Ba { n: usize, m: usize, seed: u64 },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawFractions {
    Keyword(String),
    List(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLeiden {
    #[serde(default = "default_quality")]
    quality: String,
    #[serde(default = "default_resolution")]
    resolution: f64,
    #[serde(default = "default_max_iterations")]
    max_iterations: usize,
    seed: Option<u64>,
}

fn default_quality() -> String {
    "modularity".into()
}

fn default_resolution() -> f64 {
    1.0
}

fn default_max_iterations() -> usize {
    100
}

impl Default for RawLeiden {
    fn default() -> Self {
        RawLeiden {
            quality: default_quality(),
            resolution: default_resolution(),
            max_iterations: default_max_iterations(),
            seed: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&text, base).with_context(|| format!("in config {}", path.display()))
    }

    /// Parses a config; relative paths are taken relative to `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        if raw.version != CONFIG_VERSION {
            bail!("unsupported config version {} (expected {CONFIG_VERSION})", raw.version);
        }
        let datasets = raw
            .datasets
            .into_iter()
            .map(|d| {
                let source = match (d.path, d.generator) {
                    (Some(p), None) => DatasetSource::File {
                        path: base_dir.join(p),
                        directed_as_undirected: d.directed_as_undirected,
                    },
                    (None, Some(RawGenerator::Ba { n, m, seed })) => DatasetSource::Ba { n, m, seed },
                    _ => bail!("dataset {:?} needs exactly one of `path` or `generator`", d.name),
                };
                Ok(DatasetSpec {
                    name: d.name,
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let methods = raw
            .methods
            .iter()
            .map(|m| m.parse::<Method>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?;
        let fractions = match raw.fractions {
            None => Fractions::Auto,
            Some(RawFractions::Keyword(k)) if k == "auto" => Fractions::Auto,
            Some(RawFractions::Keyword(k)) => bail!("fractions must be \"auto\" or a list, got {k:?}"),
            Some(RawFractions::List(list)) => Fractions::List(list),
        };
        let quality: QualityFunction = raw.leiden.quality.parse()?;
        let cfg = ExperimentConfig {
            datasets,
            methods,
            fractions,
            activation_probability: raw.activation_probability,
            runs: raw.runs,
            rng_seed: raw.rng_seed,
            output_dir: base_dir.join(raw.output_dir),
            timing: raw.timing,
            timing_repetitions: raw.timing_repetitions,
            workers: raw.workers,
            ranking: RankingParams {
                leiden: QualityConfig {
                    quality,
                    resolution: raw.leiden.resolution,
                    rng_seed: raw.leiden.seed.unwrap_or(raw.rng_seed),
                    max_iterations: raw.leiden.max_iterations,
                },
                ..Default::default()
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            bail!("at least one dataset is required");
        }
        let mut names = HashSet::new();
        for d in &self.datasets {
            if d.name.is_empty() || d.name.contains([',', '/', '\\']) {
                bail!("dataset name {:?} must be non-empty without ',', '/' or '\\'", d.name);
            }
            if !names.insert(d.name.as_str()) {
                bail!("duplicate dataset name {:?}", d.name);
            }
        }
        if self.methods.is_empty() {
            bail!("at least one method is required");
        }
        let unique: HashSet<_> = self.methods.iter().collect();
        if unique.len() != self.methods.len() {
            bail!("methods must not repeat");
        }
        if let Fractions::List(list) = &self.fractions {
            if list.is_empty() {
                bail!("fraction list is empty");
            }
            if let Some(f) = list.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
                bail!("fraction {f} is outside (0, 1]");
            }
        }
        if !(0.0..=1.0).contains(&self.activation_probability) {
            bail!("activation_probability must be in [0, 1]");
        }
        if self.runs == 0 {
            bail!("runs must be at least 1");
        }
        if self.timing_repetitions == 0 {
            bail!("timing_repetitions must be at least 1");
        }
        Ok(())
    }
}
