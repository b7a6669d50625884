//! Plot-data files and statistical reports, both built only from the rows
//! of `results.csv`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use log::warn;
use mcd_core::metrics::MetricCell;
use mcd_core::stats::{compare_with_control, rank_rows, Direction, ImanDavenport, TestReport};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Scale,
    SpreaderDistance,
    RankingTime,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Scale, Metric::SpreaderDistance, Metric::RankingTime];

    /// Column name in `results.csv`.
    pub fn column(self) -> &'static str {
        match self {
            Metric::Scale => "scale",
            Metric::SpreaderDistance => "ls",
            Metric::RankingTime => "ranking_seconds",
        }
    }

    /// Larger spreader distance counts as better.
    pub fn direction(self) -> Direction {
        match self {
            Metric::Scale | Metric::SpreaderDistance => Direction::HigherIsBetter,
            Metric::RankingTime => Direction::LowerIsBetter,
        }
    }

    pub fn value(self, cell: &MetricCell) -> Option<f64> {
        match self {
            Metric::Scale => Some(cell.final_infected_scale),
            Metric::SpreaderDistance => cell.avg_spreader_distance,
            Metric::RankingTime => cell.ranking_seconds,
        }
    }
}

#[derive(Deserialize)]
struct ResultRow {
    method: String,
    dataset: String,
    fraction: f64,
    scale: f64,
    ls: Option<f64>,
    unreachable: usize,
    ranking_seconds: Option<f64>,
}

pub fn read_results(path: &Path) -> Result<Vec<MetricCell>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    reader
        .deserialize()
        .map(|row| {
            let r: ResultRow = row.with_context(|| format!("reading {}", path.display()))?;
            Ok(MetricCell {
                method: r.method,
                dataset: r.dataset,
                fraction: r.fraction,
                final_infected_scale: r.scale,
                avg_spreader_distance: r.ls,
                unreachable_pairs: r.unreachable,
                ranking_seconds: r.ranking_seconds,
            })
        })
        .collect()
}

/// Methods in order of first appearance.
pub fn methods_in(cells: &[MetricCell]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in cells {
        if !out.contains(&c.method) {
            out.push(c.method.clone());
        }
    }
    out
}

/// (dataset, fraction) problems in order of first appearance.
fn problems_in(cells: &[MetricCell]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for c in cells {
        if !out.iter().any(|(d, f)| *d == c.dataset && *f == c.fraction) {
            out.push((c.dataset.clone(), c.fraction));
        }
    }
    out
}

fn lookup(cells: &[MetricCell]) -> HashMap<(&str, &str, u64), &MetricCell> {
    cells
        .iter()
        .map(|c| ((c.dataset.as_str(), c.method.as_str(), c.fraction.to_bits()), c))
        .collect()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One `plots/<dataset>_<metric>.csv` per dataset and metric, with a
/// `fraction` column and one column per method. Missing cells are blank.
/// Ranking time is only written when it was recorded.
pub fn emit_plot_data(cells: &[MetricCell], methods: &[String], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let index = lookup(cells);
    let mut datasets: Vec<&str> = Vec::new();
    for c in cells {
        if !datasets.contains(&c.dataset.as_str()) {
            datasets.push(&c.dataset);
        }
    }
    for metric in Metric::ALL {
        if metric == Metric::RankingTime && cells.iter().all(|c| c.ranking_seconds.is_none()) {
            continue;
        }
        for &dataset in &datasets {
            let mut fractions: Vec<f64> = Vec::new();
            for c in cells.iter().filter(|c| c.dataset == dataset) {
                if !fractions.contains(&c.fraction) {
                    fractions.push(c.fraction);
                }
            }
            fractions.sort_by(f64::total_cmp);
            let path = dir.join(format!("{dataset}_{}.csv", metric.column()));
            let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
            writeln!(w, "fraction,{}", methods.join(","))?;
            let mut missing = 0;
            for &f in &fractions {
                let row: Vec<String> = methods
                    .iter()
                    .map(|m| {
                        let v = index
                            .get(&(dataset, m.as_str(), f.to_bits()))
                            .and_then(|c| metric.value(c));
                        missing += v.is_none() as usize;
                        fmt_opt(v)
                    })
                    .collect();
                writeln!(w, "{f},{}", row.join(","))?;
            }
            w.flush()?;
            if missing > 0 && metric == Metric::Scale {
                warn!("{}: {missing} missing cells", path.display());
            }
        }
    }
    Ok(())
}

/// Outcome of the ranking analysis of one metric.
#[derive(Debug, Clone)]
pub enum MetricReport {
    Tested {
        metric: Metric,
        used_problems: usize,
        dropped_problems: usize,
        report: TestReport,
    },
    Skipped {
        metric: Metric,
        reason: String,
    },
}

/// Control-vs-others analysis of one metric. Problems where any method
/// lacks a value are left out.
pub fn analyse_metric(cells: &[MetricCell], methods: &[String], metric: Metric) -> MetricReport {
    let index = lookup(cells);
    let mut names = Vec::new();
    let mut rows = Vec::new();
    let mut dropped = 0;
    for (dataset, fraction) in problems_in(cells) {
        let row: Option<Vec<f64>> = methods
            .iter()
            .map(|m| {
                index
                    .get(&(dataset.as_str(), m.as_str(), fraction.to_bits()))
                    .and_then(|c| metric.value(c))
            })
            .collect();
        match row {
            Some(r) => {
                names.push(format!("{dataset}@{fraction}"));
                rows.push(r);
            }
            None => dropped += 1,
        }
    }
    let skip = |reason: String| MetricReport::Skipped { metric, reason };
    if methods.len() < 2 {
        return skip("fewer than two methods".into());
    }
    if rows.len() < 2 {
        return skip(format!("{} complete problems, at least 2 needed", rows.len()));
    }
    let control = if methods.iter().any(|m| m == "MCD") {
        "MCD".to_string()
    } else {
        methods[0].clone()
    };
    let used = rows.len();
    let result = rank_rows(methods.to_vec(), names, rows, metric.direction())
        .and_then(|rm| compare_with_control(&rm, &control));
    match result {
        Ok(report) => MetricReport::Tested {
            metric,
            used_problems: used,
            dropped_problems: dropped,
            report,
        },
        Err(e) => skip(e.to_string()),
    }
}

fn summary_section(out: &mut String, r: &MetricReport) {
    match r {
        MetricReport::Skipped { metric, reason } => {
            let _ = writeln!(out, "## {}\n\nNot tested: {reason}.\n", metric.column());
        }
        MetricReport::Tested {
            metric,
            used_problems,
            dropped_problems,
            report,
        } => {
            let fr = &report.friedman;
            let _ = writeln!(out, "## {}\n", metric.column());
            let _ = writeln!(
                out,
                "{used_problems} problems, {} methods ({dropped_problems} incomplete problems dropped). \
                 Control: {}.\n",
                fr.methods, report.control
            );
            let _ = writeln!(out, "- Friedman F_f = {:.4}, p = {:.3e}", fr.statistic, fr.p_value);
            match fr.iman_davenport {
                ImanDavenport::Value { statistic, p_value } => {
                    let _ = writeln!(out, "- Iman-Davenport F_id = {statistic:.4}, p = {p_value:.3e}\n");
                }
                ImanDavenport::Saturated => {
                    let _ = writeln!(out, "- Iman-Davenport: saturated (identical ranking on every problem)\n");
                }
            }
            let _ = writeln!(out, "| method | average rank |\n|---|---|");
            let mut order: Vec<usize> = (0..report.methods.len()).collect();
            order.sort_by(|&a, &b| fr.avg_ranks[a].total_cmp(&fr.avg_ranks[b]).then(a.cmp(&b)));
            for j in order {
                let _ = writeln!(out, "| {} | {:.3} |", report.methods[j], fr.avg_ranks[j]);
            }
            let _ = writeln!(out, "\n| i | method | z | p | Holm APV | reject at {} |\n|---|---|---|---|---|---|", report.alpha);
            for (i, c) in report.comparisons.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.3} | {:.3e} | {:.3e} | {} |",
                    i + 1,
                    c.method,
                    c.z_score,
                    c.p_value,
                    c.adjusted_p,
                    if c.rejects_at(report.alpha) { "yes" } else { "no" }
                );
            }
            let _ = writeln!(out);
        }
    }
}

/// Writes `<metric>_ranks.csv` and `<metric>_holm.csv` for every testable
/// metric, plus `summary.md` covering all of them.
pub fn write_stats(cells: &[MetricCell], methods: &[String], dir: &Path) -> Result<Vec<MetricReport>> {
    fs::create_dir_all(dir)?;
    let mut summary = String::from("# Ranking comparison\n\n");
    let mut reports = Vec::new();
    for metric in Metric::ALL {
        if metric == Metric::RankingTime && cells.iter().all(|c| c.ranking_seconds.is_none()) {
            continue;
        }
        let r = analyse_metric(cells, methods, metric);
        if let MetricReport::Tested { report, .. } = &r {
            let name = metric.column();
            let mut w = BufWriter::new(File::create(dir.join(format!("{name}_ranks.csv")))?);
            report.write_rank_csv(&mut w)?;
            w.flush()?;
            let mut w = BufWriter::new(File::create(dir.join(format!("{name}_holm.csv")))?);
            report.write_holm_csv(&mut w)?;
            w.flush()?;
        }
        summary_section(&mut summary, &r);
        reports.push(r);
    }
    fs::write(dir.join("summary.md"), summary)?;
    Ok(reports)
}
