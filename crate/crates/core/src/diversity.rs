//! Community diversity scores and top-k seed selection.
//!
//! * CD: Shannon entropy of the community labels among a node's neighbors.
//! * ECD: a node's CD plus the CD of each neighbor.
//! * MCD: `-P ln P` with `P = CD / ECD`.
//!
//! All sums run over the sorted neighbor lists so results do not depend on
//! evaluation order. Entropy terms use `0 ln 0 = 0`, `0/0` is taken as 0, and
//! isolated nodes score 0 everywhere.

use std::cmp::Ordering;
use std::io::Write;

use crate::community::Partition;
use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, NodeLabelMap};

/// Per-node scores produced by one ranking method.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    method: String,
    scores: Vec<f64>,
    graph_fingerprint: u64,
    partition_fingerprint: Option<u64>,
}

impl ScoreTable {
    pub fn new(
        method: impl Into<String>,
        scores: Vec<f64>,
        graph: &Graph,
        partition: Option<&Partition>,
    ) -> Result<Self> {
        if scores.len() != graph.node_count() {
            return Err(Error::SizeMismatch {
                what: "score table",
                got: scores.len(),
                expected: graph.node_count(),
            });
        }
        if let Some(v) = scores.iter().position(|s| !s.is_finite()) {
            return Err(invalid(format!("non-finite score {} at node {v}", scores[v])));
        }
        Ok(ScoreTable {
            method: method.into(),
            scores,
            graph_fingerprint: graph.fingerprint(),
            partition_fingerprint: partition.map(Partition::fingerprint),
        })
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, v: usize) -> f64 {
        self.scores[v]
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `(graph, partition)` fingerprints the table was computed from.
    pub fn generated_from(&self) -> (u64, Option<u64>) {
        (self.graph_fingerprint, self.partition_fingerprint)
    }

    pub fn renamed(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }

    /// Node indices by descending score, ties by ascending index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| by_score_desc(&self.scores, a, b));
        order
    }

    /// `node_label,score` rows in ranking order, preceded by a
    /// `# method: <name>` comment line.
    pub fn write_csv<W: Write>(&self, labels: &NodeLabelMap, mut out: W) -> Result<()> {
        writeln!(out, "# method: {}", self.method)?;
        writeln!(out, "node_label,score")?;
        for v in self.ranking() {
            writeln!(out, "{},{}", labels.label(v), self.scores[v])?;
        }
        Ok(())
    }
}

fn by_score_desc(scores: &[f64], a: usize, b: usize) -> Ordering {
    scores[b]
        .partial_cmp(&scores[a])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

/// The top-k nodes of a score table, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    seeds: Vec<usize>,
    spreader_fraction: f64,
}

impl SeedSet {
    pub fn nodes(&self) -> &[usize] {
        &self.seeds
    }

    pub fn k(&self) -> usize {
        self.seeds.len()
    }

    pub fn spreader_fraction(&self) -> f64 {
        self.spreader_fraction
    }

    /// One label per line.
    pub fn write<W: Write>(&self, labels: &NodeLabelMap, mut out: W) -> Result<()> {
        for &v in &self.seeds {
            writeln!(out, "{}", labels.label(v))?;
        }
        Ok(())
    }
}

impl AsRef<[usize]> for SeedSet {
    fn as_ref(&self) -> &[usize] {
        &self.seeds
    }
}

/// `max(1, round_half_even(fraction * node_count))`.
pub fn seed_count(node_count: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("spreader fraction must be in (0, 1], got {fraction}")));
    }
    if node_count == 0 {
        return Err(invalid("cannot select seeds from an empty graph"));
    }
    let k = (fraction * node_count as f64).round_ties_even() as usize;
    Ok(k.clamp(1, node_count))
}

pub fn select_top_k(scores: &ScoreTable, fraction: f64) -> Result<SeedSet> {
    let k = seed_count(scores.len(), fraction)?;
    let mut seeds = scores.ranking();
    seeds.truncate(k);
    Ok(SeedSet {
        seeds,
        spreader_fraction: fraction,
    })
}

fn entropy_term(p: f64, log: impl Fn(f64) -> f64) -> f64 {
    if p > 0.0 {
        // p = 1 gives -0.0, which would sort below 0.0
        -p * log(p) + 0.0
    } else {
        0.0
    }
}

fn log_fn(base: f64) -> Result<impl Fn(f64) -> f64> {
    if !(base > 0.0 && base != 1.0 && base.is_finite()) {
        return Err(invalid(format!("invalid logarithm base {base}")));
    }
    let ln_base = base.ln();
    Ok(move |x: f64| x.ln() / ln_base)
}

pub fn community_diversity(graph: &Graph, partition: &Partition) -> Result<ScoreTable> {
    community_diversity_with_base(graph, partition, std::f64::consts::E)
}

/// CD with logarithms in `base`.
pub fn community_diversity_with_base(
    graph: &Graph,
    partition: &Partition,
    base: f64,
) -> Result<ScoreTable> {
    partition.check_graph(graph)?;
    let log = log_fn(base)?;
    let mut counts = vec![0usize; partition.community_count()];
    let mut present = Vec::new();
    let scores = graph
        .nodes()
        .map(|v| {
            let neighbors = graph.neighbors(v);
            if neighbors.is_empty() {
                return 0.0;
            }
            for &u in neighbors {
                let c = partition.community_of(u);
                if counts[c] == 0 {
                    present.push(c);
                }
                counts[c] += 1;
            }
            let degree = neighbors.len() as f64;
            // sum in count order so equal neighborhoods give equal bits
            for c in present.iter_mut() {
                let k = counts[*c];
                counts[*c] = 0;
                *c = k;
            }
            present.sort_unstable();
            present
                .drain(..)
                .map(|k| entropy_term(k as f64 / degree, &log))
                .sum::<f64>()
        })
        .collect();
    ScoreTable::new("CD", scores, graph, Some(partition))
}

pub fn extended_community_diversity(graph: &Graph, cd: &ScoreTable) -> Result<ScoreTable> {
    if cd.len() != graph.node_count() {
        return Err(Error::SizeMismatch {
            what: "CD table",
            got: cd.len(),
            expected: graph.node_count(),
        });
    }
    let mut terms = Vec::new();
    let scores = graph
        .nodes()
        .map(|v| {
            terms.clear();
            terms.push(cd.score(v));
            terms.extend(graph.neighbors(v).iter().map(|&u| cd.score(u)));
            terms.sort_unstable_by(f64::total_cmp);
            terms.iter().sum()
        })
        .collect();
    Ok(ScoreTable {
        method: "ECD".into(),
        scores,
        graph_fingerprint: cd.graph_fingerprint,
        partition_fingerprint: cd.partition_fingerprint,
    })
}

pub fn modified_community_diversity(cd: &ScoreTable, ecd: &ScoreTable) -> Result<ScoreTable> {
    modified_community_diversity_with_base(cd, ecd, std::f64::consts::E)
}

pub fn modified_community_diversity_with_base(
    cd: &ScoreTable,
    ecd: &ScoreTable,
    base: f64,
) -> Result<ScoreTable> {
    if cd.len() != ecd.len() || cd.generated_from() != ecd.generated_from() {
        return Err(invalid("CD and ECD tables come from different inputs"));
    }
    let log = log_fn(base)?;
    let scores = cd
        .scores()
        .iter()
        .zip(ecd.scores())
        .map(|(&c, &e)| {
            let p = if e > 0.0 { c / e } else { 0.0 };
            entropy_term(p, &log)
        })
        .collect();
    Ok(ScoreTable {
        method: "MCD".into(),
        scores,
        graph_fingerprint: cd.graph_fingerprint,
        partition_fingerprint: cd.partition_fingerprint,
    })
}

/// All three tables for one partition.
#[derive(Debug, Clone)]
pub struct DiversityScores {
    pub cd: ScoreTable,
    pub ecd: ScoreTable,
    pub mcd: ScoreTable,
}

pub fn diversity_scores(graph: &Graph, partition: &Partition) -> Result<DiversityScores> {
    let cd = community_diversity(graph, partition)?;
    let ecd = extended_community_diversity(graph, &cd)?;
    let mcd = modified_community_diversity(&cd, &ecd)?;
    Ok(DiversityScores { cd, ecd, mcd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// x–y bridge; x also touches a, b and y touches c, d.
    /// Nodes: x=0, y=1, a=2, b=3, c=4, d=5. Communities: {x,a,c} {y,b,d}.
    fn six_node_fixture() -> (Graph, Partition) {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)]).unwrap();
        let p = Partition::from_assignment(&[0, 1, 0, 1, 0, 1]);
        (g, p)
    }

    #[test]
    fn cd_examples() {
        // node 0 with 4 neighbors split 2/2
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let p = Partition::from_assignment(&[0, 0, 0, 1, 1]);
        let cd = community_diversity(&g, &p).unwrap();
        assert_abs_diff_eq!(cd.score(0), std::f64::consts::LN_2, epsilon = 1e-12);

        let p = Partition::from_assignment(&[1, 0, 0, 0, 0]);
        assert_eq!(community_diversity(&g, &p).unwrap().score(0), 0.0);

        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let p = Partition::from_assignment(&[0, 0, 1, 1]);
        let cd = community_diversity(&g, &p).unwrap();
        assert_abs_diff_eq!(cd.score(0), 0.636514, epsilon = 1e-6);
    }

    #[test]
    fn ecd_examples() {
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        let cd = community_diversity(&g, &Partition::singletons(4)).unwrap();
        let ecd = extended_community_diversity(&g, &cd).unwrap();
        assert_eq!(ecd.score(3), 0.0);

        // hub x with leaves a, b and a supplied CD table
        let g = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let cd = ScoreTable::new("CD", vec![0.636514, 0.0, 0.0], &g, None).unwrap();
        let ecd = extended_community_diversity(&g, &cd).unwrap();
        for v in 0..3 {
            assert_abs_diff_eq!(ecd.score(v), 0.636514, epsilon = 1e-12);
        }
    }

    #[test]
    fn six_node_fixture_values() {
        let (g, p) = six_node_fixture();
        let s = diversity_scores(&g, &p).unwrap();
        let cd_bridge = -(1.0f64 / 3.0) * (1.0f64 / 3.0).ln() - (2.0f64 / 3.0) * (2.0f64 / 3.0).ln();
        for v in [0, 1] {
            assert_abs_diff_eq!(s.cd.score(v), cd_bridge, epsilon = 1e-12);
            assert_abs_diff_eq!(s.ecd.score(v), 2.0 * cd_bridge, epsilon = 1e-12);
            assert_abs_diff_eq!(s.mcd.score(v), 0.5 * std::f64::consts::LN_2, epsilon = 1e-12);
        }
        for v in 2..6 {
            assert_eq!(s.cd.score(v), 0.0);
            assert_eq!(s.mcd.score(v), 0.0);
        }
        assert_abs_diff_eq!(s.mcd.score(0), 0.346574, epsilon = 1e-6);
    }

    #[test]
    fn mcd_degenerate_ratios() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        // P = 1 at node 0, P = 0 at node 1, 0/0 at node 2
        let cd = ScoreTable::new("CD", vec![0.5, 0.0, 0.0], &g, None).unwrap();
        let ecd = extended_community_diversity(&g, &cd).unwrap();
        let mcd = modified_community_diversity(&cd, &ecd).unwrap();
        assert_eq!(mcd.scores(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn mcd_rejects_mismatched_tables() {
        let (g, p) = six_node_fixture();
        let cd = community_diversity(&g, &p).unwrap();
        let other = community_diversity(&g, &Partition::singletons(6)).unwrap();
        let ecd = extended_community_diversity(&g, &other).unwrap();
        assert!(modified_community_diversity(&cd, &ecd).is_err());
    }

    #[test]
    fn top_k_rounding_and_ties() {
        assert_eq!(seed_count(62, 0.05).unwrap(), 3);
        assert_eq!(seed_count(10, 0.01).unwrap(), 1);
        assert_eq!(seed_count(10, 0.25).unwrap(), 2); // 2.5 rounds to even
        assert_eq!(seed_count(10, 0.35).unwrap(), 4); // 3.5 rounds to even
        assert!(seed_count(10, 0.0).is_err());
        assert!(seed_count(10, 1.5).is_err());
        assert!(seed_count(0, 0.5).is_err());

        let g = Graph::empty(10);
        let flat = ScoreTable::new("X", vec![1.0; 10], &g, None).unwrap();
        assert_eq!(select_top_k(&flat, 0.1).unwrap().nodes(), &[0]);

        let scores = ScoreTable::new("X", vec![0.1, 0.5, 0.5, 0.9], &Graph::empty(4), None).unwrap();
        let all = select_top_k(&scores, 1.0).unwrap();
        assert_eq!(all.nodes(), &[3, 1, 2, 0]);
        assert_eq!(all.k(), 4);
    }

    #[test]
    fn score_table_rejects_non_finite() {
        let g = Graph::empty(2);
        assert!(ScoreTable::new("X", vec![0.0, f64::NAN], &g, None).is_err());
        assert!(ScoreTable::new("X", vec![0.0], &g, None).is_err());
    }

    #[test]
    fn csv_is_ranked() {
        let g = Graph::empty(3);
        let t = ScoreTable::new("DEG", vec![1.0, 3.0, 2.0], &g, None).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&NodeLabelMap::identity(3), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# method: DEG\nnode_label,score\n1,3\n2,2\n0,1\n"
        );
    }
}
