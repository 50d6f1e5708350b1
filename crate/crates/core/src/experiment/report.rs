//! Per-group summary tables over run records.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::RunRecord;

pub const BASELINES: [&str; 3] = ["blind", "gc", "ff"];

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub domain: String,
    pub config: String,
    pub runs: usize,
    pub solved: usize,
    pub coverage: f64,
    pub median_expansions: Option<f64>,
    pub median_expansions_per_sec: Option<f64>,
    pub median_runtime: Option<f64>,
}

/// Median of the values; mean of the middle pair for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

pub fn summarize(records: &[RunRecord]) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<(&str, &str), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.domain, &r.config)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((domain, config), rs)| {
            let solved: Vec<&&RunRecord> = rs.iter().filter(|r| r.solved()).collect();
            let exps: Vec<f64> = solved.iter().map(|r| r.expansions as f64).collect();
            let runtimes: Vec<f64> = solved.iter().map(|r| r.total_secs()).collect();
            let rates: Vec<f64> = rs
                .iter()
                .filter(|r| r.search_secs > 0.0)
                .map(|r| r.expansions as f64 / r.search_secs)
                .collect();
            GroupSummary {
                domain: domain.to_string(),
                config: config.to_string(),
                runs: rs.len(),
                solved: solved.len(),
                coverage: 100.0 * solved.len() as f64 / rs.len() as f64,
                median_expansions: median(&exps),
                median_expansions_per_sec: median(&rates),
                median_runtime: median(&runtimes),
            }
        })
        .collect()
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "—".to_string(), |x| format!("{x:.decimals$}"))
}

const HEADER: [&str; 7] = ["domain", "config", "runs", "coverage", "median_exp", "median_exp_per_s", "median_time_s"];

fn rows(groups: &[GroupSummary]) -> Vec<[String; 7]> {
    groups
        .iter()
        .map(|g| {
            [
                g.domain.clone(),
                g.config.clone(),
                g.runs.to_string(),
                format!("{:.1}", g.coverage),
                cell(g.median_expansions, 1),
                cell(g.median_expansions_per_sec, 1),
                cell(g.median_runtime, 3),
            ]
        })
        .collect()
}

fn aligned(header: &[String], body: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(body.iter().map(Vec::as_slice)) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                if i < 2 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn render_text(groups: &[GroupSummary]) -> String {
    let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    let body: Vec<Vec<String>> = rows(groups).into_iter().map(Vec::from).collect();
    aligned(&header, &body)
}

/// Same table as CSV; missing medians are empty fields.
pub fn render_csv(groups: &[GroupSummary]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for g in groups {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            g.domain,
            g.config,
            g.runs,
            g.coverage,
            opt(g.median_expansions),
            opt(g.median_expansions_per_sec),
            opt(g.median_runtime)
        );
    }
    out
}

/// For each non-baseline config and each baseline present, the number of
/// domains where the config's coverage is strictly higher.
pub fn ablation_pivot(groups: &[GroupSummary]) -> Vec<(String, Vec<(String, usize)>)> {
    let mut cov: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for g in groups {
        cov.entry(&g.config).or_default().insert(&g.domain, g.coverage);
    }
    let present: Vec<&str> = BASELINES.iter().copied().filter(|b| cov.contains_key(b)).collect();
    cov.iter()
        .filter(|(c, _)| !BASELINES.contains(c))
        .map(|(config, doms)| {
            let counts = present
                .iter()
                .map(|b| {
                    let base = &cov[b];
                    let n = doms
                        .iter()
                        .filter(|(d, c)| base.get(*d).is_some_and(|bc| *c > bc))
                        .count();
                    (format!("> {b}"), n)
                })
                .collect();
            (config.to_string(), counts)
        })
        .collect()
}

pub fn render_pivot(pivot: &[(String, Vec<(String, usize)>)]) -> String {
    let Some((_, first)) = pivot.first() else {
        return String::new();
    };
    let mut header = vec!["config".to_string()];
    header.extend(first.iter().map(|(b, _)| b.clone()));
    let body: Vec<Vec<String>> = pivot
        .iter()
        .map(|(c, counts)| {
            let mut row = vec![c.clone()];
            row.extend(counts.iter().map(|(_, n)| n.to_string()));
            row
        })
        .collect();
    aligned(&header, &body)
}

/// Flat per-run CSV.
pub fn records_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "instance,domain,config,status,sampling_s,training_s,search_s,expansions,generated,evaluations,plan_length,samples\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.instance,
            r.domain,
            r.config,
            r.status.as_str(),
            r.sampling_secs,
            r.training_secs,
            r.search_secs,
            r.expansions,
            r.generated,
            r.evaluations,
            r.plan_length.map_or_else(String::new, |n| n.to_string()),
            r.samples
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{PipelineConfig, RunStatus};

    fn rec(config: &str, status: RunStatus, exp: u64, secs: f64) -> RunRecord {
        let mut r = RunRecord::empty("i", &PipelineConfig {
            domain: "d".into(),
            config_id: config.into(),
            ..PipelineConfig::default()
        });
        r.status = status;
        r.expansions = exp;
        r.search_secs = secs;
        r
    }

    #[test]
    fn coverage_and_medians() {
        let rs = vec![
            rec("nn", RunStatus::Solved, 10, 1.0),
            rec("nn", RunStatus::Solved, 30, 1.0),
            rec("nn", RunStatus::OutOfBudget, 500, 2.0),
            rec("nn", RunStatus::Unsolvable, 7, 1.0),
        ];
        let g = &summarize(&rs)[0];
        assert_eq!(g.coverage, 50.0);
        assert_eq!(g.median_expansions, Some(20.0));
        assert_eq!(g.median_runtime, Some(1.0));
    }

    #[test]
    fn nothing_solved_prints_dash() {
        let rs = vec![rec("nn", RunStatus::OutOfBudget, 5, 1.0)];
        let g = summarize(&rs);
        assert_eq!(g[0].median_expansions, None);
        assert!(render_text(&g).contains('—'));
    }

    #[test]
    fn pivot_counts_strict_wins() {
        let rs = vec![
            rec("nn", RunStatus::Solved, 1, 1.0),
            rec("gc", RunStatus::OutOfBudget, 1, 1.0),
            rec("ff", RunStatus::Solved, 1, 1.0),
        ];
        let p = ablation_pivot(&summarize(&rs));
        assert_eq!(p, vec![("nn".to_string(), vec![("> gc".to_string(), 1), ("> ff".to_string(), 0)])]);
    }
}
