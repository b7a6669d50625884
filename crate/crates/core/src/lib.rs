//! Influential spreader ranking by modified community diversity, with
//! Leiden community detection, baseline rankers, independent cascade
//! simulation and rank-based significance tests.

pub mod baselines;
pub mod cascade;
pub mod community;
pub mod diversity;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod ranking;
pub mod stats;

pub use community::{leiden, Partition, QualityConfig, QualityFunction};
pub use diversity::{diversity_scores, select_top_k, DiversityScores, ScoreTable, SeedSet};
pub use error::{Error, Result};
pub use graph::{Graph, NodeLabelMap};
pub use ranking::{Method, RankingParams};
