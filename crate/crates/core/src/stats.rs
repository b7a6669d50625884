//! Friedman test with the Iman–Davenport correction, and control-vs-others
//! comparisons with Holm adjusted p-values.
//!
//! Rows of a [`RankMatrix`] are problems (dataset × fraction cells), columns
//! are methods. Rank 1 is the best value in a row; tied values share the
//! average of the ranks they span.

use std::cmp::Ordering;
use std::io::Write;

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    methods: Vec<String>,
    problems: Vec<String>,
    values: Vec<Vec<f64>>,
    ranks: Vec<Vec<f64>>,
    direction: Direction,
}

impl RankMatrix {
    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn problems(&self) -> &[String] {
        &self.problems
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn ranks(&self) -> &[Vec<f64>] {
        &self.ranks
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// R_j: mean rank of each method over all problems.
    pub fn average_ranks(&self) -> Vec<f64> {
        let n = self.ranks.len() as f64;
        (0..self.methods.len())
            .map(|j| self.ranks.iter().map(|row| row[j]).sum::<f64>() / n)
            .collect()
    }
}

fn rank_row(row: &[f64], direction: Direction) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = row[a].total_cmp(&row[b]);
        match direction {
            Direction::HigherIsBetter => ord.reverse(),
            Direction::LowerIsBetter => ord,
        }
    });
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &j in &order[start..end] {
            ranks[j] = shared;
        }
        start = end;
    }
    ranks
}

pub fn rank_rows(
    methods: Vec<String>,
    problems: Vec<String>,
    values: Vec<Vec<f64>>,
    direction: Direction,
) -> Result<RankMatrix> {
    if methods.is_empty() || values.is_empty() {
        return Err(invalid("rank matrix needs at least one method and one problem"));
    }
    if problems.len() != values.len() {
        return Err(invalid(format!(
            "{} problem names for {} rows",
            problems.len(),
            values.len()
        )));
    }
    for (i, row) in values.iter().enumerate() {
        if row.len() != methods.len() {
            return Err(invalid(format!(
                "row {i} has {} values for {} methods",
                row.len(),
                methods.len()
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("row {i} ({}) has a missing value", problems[i])));
        }
    }
    let ranks = values.iter().map(|row| rank_row(row, direction)).collect();
    Ok(RankMatrix {
        methods,
        problems,
        values,
        ranks,
        direction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImanDavenport {
    Value { statistic: f64, p_value: f64 },
    /// `n(k-1) - F_f <= 0`: every problem ranks the methods identically.
    Saturated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Friedman {
    pub problems: usize,
    pub methods: usize,
    pub avg_ranks: Vec<f64>,
    /// F_f, chi-square with k-1 degrees of freedom.
    pub statistic: f64,
    pub p_value: f64,
    pub iman_davenport: ImanDavenport,
}

/// F_f = 12n / (k(k+1)) · [Σ R_j² − k(k+1)²/4].
pub fn friedman_statistic(avg_ranks: &[f64], problems: usize) -> f64 {
    let k = avg_ranks.len() as f64;
    let n = problems as f64;
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0).powi(2) / 4.0)
}

/// F_id = (n−1)·F_f / (n(k−1) − F_f), F-distributed with (k−1, (n−1)(k−1)).
pub fn iman_davenport(friedman_statistic: f64, problems: usize, methods: usize) -> ImanDavenport {
    let n = problems as f64;
    let k = methods as f64;
    let denominator = n * (k - 1.0) - friedman_statistic;
    if denominator <= 0.0 {
        return ImanDavenport::Saturated;
    }
    let statistic = (n - 1.0) * friedman_statistic / denominator;
    let p_value = FisherSnedecor::new(k - 1.0, (n - 1.0) * (k - 1.0))
        .map(|f| f.sf(statistic))
        .unwrap_or(f64::NAN);
    ImanDavenport::Value { statistic, p_value }
}

pub fn friedman(rm: &RankMatrix) -> Result<Friedman> {
    let k = rm.methods.len();
    let n = rm.ranks.len();
    if k < 2 || n < 2 {
        return Err(invalid(format!(
            "Friedman test needs at least 2 methods and 2 problems (got {k} and {n})"
        )));
    }
    let avg_ranks = rm.average_ranks();
    let statistic = friedman_statistic(&avg_ranks, n);
    let p_value = ChiSquared::new(k as f64 - 1.0)
        .map(|c| c.sf(statistic.max(0.0)))
        .unwrap_or(f64::NAN);
    Ok(Friedman {
        problems: n,
        methods: k,
        avg_ranks,
        statistic,
        p_value,
        iman_davenport: iman_davenport(statistic, n, k),
    })
}

/// Holm step-down adjustment: APV_i = min(max_{j<=i} (k−j)·p_j, 1), for
/// `raw_p` sorted ascending (1-based j) and `methods` = k including the
/// control.
pub fn holm_adjust(raw_p: &[f64], methods: usize) -> Result<Vec<f64>> {
    if raw_p.len() + 1 != methods {
        return Err(invalid(format!(
            "{} p-values given for {methods} methods (expected {})",
            raw_p.len(),
            methods.saturating_sub(1)
        )));
    }
    if raw_p.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid("p-values must lie in [0, 1]"));
    }
    if raw_p.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("p-values must be sorted ascending"));
    }
    let mut running = 0.0f64;
    Ok(raw_p
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            running = running.max((methods - (i + 1)) as f64 * p);
            running.min(1.0)
        })
        .collect())
}

/// Φ(z) through the complementary error function, accurate far into the
/// lower tail.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard error of a difference of average ranks: sqrt(k(k+1) / (6n)).
pub fn rank_difference_se(methods: usize, problems: usize) -> f64 {
    let k = methods as f64;
    (k * (k + 1.0) / (6.0 * problems as f64)).sqrt()
}

/// z = (R_control − R_j) / SE; negative when method j ranks worse.
pub fn control_z(control_rank: f64, method_rank: f64, methods: usize, problems: usize) -> f64 {
    (control_rank - method_rank) / rank_difference_se(methods, problems)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub method: String,
    pub avg_rank: f64,
    pub z_score: f64,
    /// One-sided Φ(z).
    pub p_value: f64,
    pub adjusted_p: f64,
}

impl Comparison {
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.adjusted_p < alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub control: String,
    pub alpha: f64,
    pub methods: Vec<String>,
    pub friedman: Friedman,
    /// Every non-control method, ascending by raw p-value.
    pub comparisons: Vec<Comparison>,
}

pub fn compare_with_control(rm: &RankMatrix, control: &str) -> Result<TestReport> {
    let c = rm
        .methods
        .iter()
        .position(|m| m == control)
        .ok_or_else(|| invalid(format!("control method {control:?} not in rank matrix")))?;
    let fr = friedman(rm)?;
    let (k, n) = (fr.methods, fr.problems);
    let mut comparisons: Vec<Comparison> = rm
        .methods
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != c)
        .map(|(j, name)| {
            let z = control_z(fr.avg_ranks[c], fr.avg_ranks[j], k, n);
            Comparison {
                method: name.clone(),
                avg_rank: fr.avg_ranks[j],
                z_score: z,
                p_value: normal_cdf(z),
                adjusted_p: f64::NAN,
            }
        })
        .collect();
    comparisons.sort_by(|a, b| a.p_value.partial_cmp(&b.p_value).unwrap_or(Ordering::Equal));
    let raw: Vec<f64> = comparisons.iter().map(|x| x.p_value).collect();
    for (cmp, apv) in comparisons.iter_mut().zip(holm_adjust(&raw, k)?) {
        cmp.adjusted_p = apv;
    }
    Ok(TestReport {
        control: control.to_owned(),
        alpha: DEFAULT_ALPHA,
        methods: rm.methods.clone(),
        friedman: fr,
        comparisons,
    })
}

impl TestReport {
    /// `position,method,average_rank`, best first.
    pub fn write_rank_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "position,method,average_rank")?;
        let mut order: Vec<usize> = (0..self.methods.len()).collect();
        order.sort_by(|&a, &b| {
            self.friedman.avg_ranks[a]
                .total_cmp(&self.friedman.avg_ranks[b])
                .then(a.cmp(&b))
        });
        for (pos, j) in order.into_iter().enumerate() {
            writeln!(out, "{},{},{}", pos + 1, self.methods[j], self.friedman.avg_ranks[j])?;
        }
        Ok(())
    }

    /// `position,method,z_score,p_value,apv`, ascending by p-value.
    pub fn write_holm_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "position,method,z_score,p_value,apv")?;
        for (pos, c) in self.comparisons.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{:e},{:e}",
                pos + 1,
                c.method,
                c.z_score,
                c.p_value,
                c.adjusted_p
            )?;
        }
        Ok(())
    }
}
