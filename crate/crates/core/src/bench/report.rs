//! Benchmark results and their CSV / markdown renderings.

use std::fmt::Write as _;
use std::path::Path;

use super::config::{Metric, OutputFormat};
use crate::error::{Error, Result};
use crate::metrics::CvSummary;
use crate::samplers::{SamplerKind, SamplerSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub sampler: SamplerKind,
    /// Chosen grid point.
    pub spec: SamplerSpec,
    pub scores: Vec<(Metric, CvSummary)>,
}

impl ReportRow {
    pub fn score(&self, metric: Metric) -> Option<&CvSummary> {
        self.scores
            .iter()
            .find(|(m, _)| *m == metric)
            .map(|(_, s)| s)
    }

    /// The hyperparameters that matter for this sampler, e.g. `k=5;eta=0.2`.
    pub fn params(&self) -> String {
        let mut parts = Vec::new();
        if self.sampler.uses_k() {
            parts.push(format!("k={}", self.spec.k));
        }
        if self.sampler.uses_eta() {
            parts.push(format!("eta={}", self.spec.eta));
            parts.push(format!("r={}", self.spec.r));
        }
        if parts.is_empty() {
            "-".into()
        } else {
            parts.join(";")
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn row(&self, dataset: &str, sampler: SamplerKind) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.sampler == sampler)
    }

    fn metrics(&self) -> Vec<Metric> {
        let mut out: Vec<Metric> = Vec::new();
        for r in &self.rows {
            for (m, _) in &r.scores {
                if !out.contains(m) {
                    out.push(*m);
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("dataset,sampler,params,metric,mean,variance\n");
        for r in &self.rows {
            for (m, summary) in &r.scores {
                writeln!(
                    s,
                    "{},{},{},{},{:.4},{:.4}",
                    csv_field(&r.dataset),
                    r.sampler,
                    r.params(),
                    m,
                    summary.mean,
                    summary.variance
                )
                .unwrap();
            }
        }
        s
    }

    /// One table per metric: datasets down, samplers across, `mean ± variance`
    /// in each cell, the best mean of each row in bold.
    pub fn to_markdown(&self) -> String {
        let mut datasets: Vec<&str> = Vec::new();
        let mut samplers: Vec<SamplerKind> = Vec::new();
        for r in &self.rows {
            if !datasets.contains(&r.dataset.as_str()) {
                datasets.push(&r.dataset);
            }
            if !samplers.contains(&r.sampler) {
                samplers.push(r.sampler);
            }
        }
        let mut s = String::new();
        for metric in self.metrics() {
            writeln!(s, "### {metric}\n").unwrap();
            s.push_str("| dataset |");
            for k in &samplers {
                write!(s, " {k} |").unwrap();
            }
            s.push_str("\n|---|");
            s.push_str(&"---|".repeat(samplers.len()));
            s.push('\n');
            for ds in &datasets {
                let cells: Vec<Option<&CvSummary>> = samplers
                    .iter()
                    .map(|&k| self.row(ds, k).and_then(|r| r.score(metric)))
                    .collect();
                let best = cells
                    .iter()
                    .flatten()
                    .map(|c| c.mean)
                    .fold(f64::NEG_INFINITY, f64::max);
                write!(s, "| {ds} |").unwrap();
                for cell in cells {
                    match cell {
                        Some(c) if c.mean == best => {
                            write!(s, " **{:.4} ± {:.4}** |", c.mean, c.variance)
                        }
                        Some(c) => write!(s, " {:.4} ± {:.4} |", c.mean, c.variance),
                        None => write!(s, " - |"),
                    }
                    .unwrap();
                }
                s.push('\n');
            }
            s.push('\n');
        }
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Markdown => self.to_markdown(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(report: &ExperimentReport, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report.render(format)).map_err(|e| Error::io(path, e))
}
