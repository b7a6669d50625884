//! Named ranking methods, each running its full pipeline from a graph.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{cd_rank, degree_rank, h_index_rank, pagerank_rank, PageRankConfig};
use crate::community::{leiden, QualityConfig};
use crate::diversity::{diversity_scores, ScoreTable};
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Mcd,
    CsrCd,
    PageRank,
    HIndex,
    Degree,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mcd,
        Method::CsrCd,
        Method::PageRank,
        Method::HIndex,
        Method::Degree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mcd => "MCD",
            Method::CsrCd => "CSR-CD",
            Method::PageRank => "PR",
            Method::HIndex => "HI",
            Method::Degree => "DEG",
        }
    }

    pub fn needs_partition(self) -> bool {
        matches!(self, Method::Mcd | Method::CsrCd)
    }

    /// Runs the whole method, including community detection where needed.
    pub fn rank(self, graph: &Graph, params: &RankingParams) -> Result<ScoreTable> {
        match self {
            Method::Mcd => {
                let partition = leiden(graph, &params.leiden)?;
                Ok(diversity_scores(graph, &partition)?.mcd)
            }
            Method::CsrCd => cd_rank(graph, &leiden(graph, &params.leiden)?),
            Method::PageRank => {
                let pr = pagerank_rank(graph, &params.pagerank)?;
                if !pr.converged {
                    return Err(invalid(format!(
                        "pagerank did not converge within {} iterations",
                        pr.iterations
                    )));
                }
                Ok(pr.scores)
            }
            Method::HIndex => h_index_rank(graph),
            Method::Degree => degree_rank(graph),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown method {s:?} (expected MCD, CSR-CD, PR, HI or DEG)")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RankingParams {
    pub leiden: QualityConfig,
    pub pagerank: PageRankConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("csr-cd".parse::<Method>().unwrap(), Method::CsrCd);
        assert!("GLR".parse::<Method>().is_err());
    }

    #[test]
    fn every_method_ranks_a_ba_graph() {
        let g = crate::graph::generate_ba(300, 3, 2).unwrap();
        let params = RankingParams::default();
        for m in Method::ALL {
            let table = m.rank(&g, &params).unwrap();
            assert_eq!(table.len(), 300);
            assert_eq!(table.method(), m.name());
            assert_eq!(table.generated_from().1.is_some(), m.needs_partition());
        }
    }
}
