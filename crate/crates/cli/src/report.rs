//! Plain-text tables for summaries and for plain-vs-adaptive comparisons.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::experiment::Summary;

/// Per-functional table of a single summary.
pub fn summary_table(summary: &Summary) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} | kernel {} | bandwidth {} | seeds {} | level {}",
        summary.config.experiment,
        summary.config.kernel,
        summary.config.bandwidth,
        summary.seeds.len(),
        summary.level
    );
    let _ = writeln!(s, "{}", summary.target.description);
    for w in &summary.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(
        s,
        "{:<10} {:>12} {:>12} {:>10} {:>10} {:>10}  {}",
        "functional", "mean", "gamma2", "sd", "oracle", "rel.err", "interval (first seed)"
    );
    for agg in &summary.aggregates {
        let ci = summary
            .seeds
            .first()
            .and_then(|seed| seed.functionals.iter().find(|f| f.name == agg.name))
            .map(|f| match f.ci {
                Some((lo, hi)) => format!("[{lo:.4}, {hi:.4}]"),
                None => "n/a (negative estimate)".to_string(),
            })
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{:<10} {:>12.5} {:>12.4} {:>10} {:>10} {:>10}  {}",
            agg.name,
            agg.mean_mean,
            agg.gamma2_mean,
            opt(agg.gamma2_sd, 4),
            opt(agg.oracle, 4),
            opt(agg.relative_error_of_mean, 4),
            ci
        );
    }
    let rates: Vec<f64> = summary.seeds.iter().filter_map(|s| s.acceptance_rate).collect();
    if !rates.is_empty() {
        let _ = writeln!(s, "acceptance rate: {:.4}", rates.iter().sum::<f64>() / rates.len() as f64);
    }
    s
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|v| format!("{v:.digits$}")).unwrap_or_else(|| "-".into())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub functional: String,
    pub left_mean: f64,
    pub left_ci: Option<(f64, f64)>,
    pub right_mean: f64,
    pub right_ci: Option<(f64, f64)>,
    pub overlap: bool,
    /// Right interval strictly narrower than the left one.
    pub right_narrower: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub left: String,
    pub right: String,
    pub target: String,
    pub rows: Vec<CompareRow>,
}

impl Comparison {
    pub fn non_overlapping(&self) -> Vec<&str> {
        self.rows.iter().filter(|r| !r.overlap).map(|r| r.functional.as_str()).collect()
    }

    pub fn narrower_count(&self) -> usize {
        self.rows.iter().filter(|r| r.right_narrower).count()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.target);
        let _ = writeln!(s, "{:<10} {:>28} {:>28}  overlap", "functional", self.left, self.right);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<10} {:>28} {:>28}  {}",
                r.functional,
                interval(r.left_ci),
                interval(r.right_ci),
                if r.overlap { "yes" } else { "NO" }
            );
        }
        let missing = self.non_overlapping();
        if !missing.is_empty() {
            let _ = writeln!(s, "non-overlapping intervals: {}", missing.join(", "));
        }
        let _ = writeln!(
            s,
            "note: {} intervals are narrower than {} for {} of {} functionals",
            self.right,
            self.left,
            self.narrower_count(),
            self.rows.len()
        );
        s
    }
}

fn interval(ci: Option<(f64, f64)>) -> String {
    match ci {
        Some((lo, hi)) => format!("[{lo:.4}, {hi:.4}]"),
        None => "n/a".into(),
    }
}

/// Side-by-side intervals of two summaries over the same target, using each
/// summary's first seed.
pub fn compare_summaries(left: &Summary, right: &Summary) -> Result<Comparison> {
    if left.target != right.target {
        return Err(CliError::Config(format!(
            "summaries describe different targets:\n  {}\n  {}",
            left.target.description, right.target.description
        )));
    }
    if left.level != right.level {
        return Err(CliError::Config(format!(
            "summaries use different confidence levels ({} vs {})",
            left.level, right.level
        )));
    }
    let (Some(l), Some(r)) = (left.seeds.first(), right.seeds.first()) else {
        return Err(CliError::Runtime("summary contains no seeds".into()));
    };
    let rows = left
        .target
        .functionals
        .iter()
        .map(|name| {
            let lf = l.functionals.iter().find(|f| &f.name == name);
            let rf = r.functionals.iter().find(|f| &f.name == name);
            let (Some(lf), Some(rf)) = (lf, rf) else {
                return Err(CliError::Runtime(format!("functional {name} missing from a summary")));
            };
            let overlap = match (lf.ci, rf.ci) {
                (Some(a), Some(b)) => a.0 <= b.1 && b.0 <= a.1,
                _ => false,
            };
            let right_narrower = match (lf.ci, rf.ci) {
                (Some(a), Some(b)) => b.1 - b.0 < a.1 - a.0,
                _ => false,
            };
            Ok(CompareRow {
                functional: name.clone(),
                left_mean: lf.mean,
                left_ci: lf.ci,
                right_mean: rf.mean,
                right_ci: rf.ci,
                overlap,
                right_narrower,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Comparison {
        left: left.config.experiment.to_string(),
        right: right.config.experiment.to_string(),
        target: left.target.description.clone(),
        rows,
    })
}

/// Reads two `summary.json` files and compares them.
pub fn compare_report(left: &Path, right: &Path) -> Result<Comparison> {
    compare_summaries(&Summary::read(left)?, &Summary::read(right)?)
}
