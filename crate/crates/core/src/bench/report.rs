use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::operator::Measurement;
use crate::rdf::{serialize_ntriple, Triple};

pub const REPORT_HEADER: &str = "step,pipeline,operator_id,window_seq,triples,eval_millis,kb_triples_touched,engine_id";
pub const SUMMARY_HEADER: &str = "step,pipeline,wall_millis,digest";
pub const SWEEP_HEADER: &str = "sweep,subquery,used_size,total_size,mean_window_millis";

/// Order-independent hash of a triple multiset: SHA-256 over the sorted
/// N-Triples lines.
pub fn digest_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut lines: Vec<String> = triples.into_iter().map(serialize_ntriple).collect();
    lines.sort_unstable();
    let mut h = Sha256::new();
    for l in &lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub pipeline: String,
    pub wall_millis: f64,
    pub digest: String,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    /// `used` for the shrinking-used sweep, `total` for the growing-total one.
    pub sweep: String,
    pub subquery: String,
    pub used_size: usize,
    pub total_size: usize,
    pub mean_window_millis: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub step: String,
    /// `(pipeline, measurement)` per evaluated window.
    pub rows: Vec<(String, Measurement)>,
    pub summary: Vec<SummaryRow>,
    pub sweep: Vec<SweepRow>,
    /// Set when the step aborted; the rows gathered so far are kept.
    pub failure: Option<String>,
}

impl ExperimentReport {
    pub fn new(step: &str) -> Self {
        ExperimentReport { step: step.into(), ..Default::default() }
    }

    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }

    /// Mean per-window evaluation time of the given operators in `pipeline`.
    pub fn mean_eval(&self, pipeline: &str, operators: &[&str]) -> Option<f64> {
        let times: Vec<f64> = self
            .rows
            .iter()
            .filter(|(p, m)| p == pipeline && operators.contains(&m.operator_id.as_str()))
            .map(|(_, m)| m.eval_millis)
            .collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
    }

    pub fn report_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for (pipeline, m) in &self.rows {
            let _ = writeln!(out, "{},{pipeline},{}", self.step, m.csv_row());
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_HEADER}\n");
        for r in &self.summary {
            let _ = writeln!(out, "{},{},{:.3},{}", self.step, r.pipeline, r.wall_millis, r.digest);
        }
        if let Some(f) = &self.failure {
            let _ = writeln!(out, "{},INVALID,0,{}", self.step, f.replace([',', '\n'], " "));
        }
        out
    }

    pub fn sweep_csv(&self) -> String {
        let mut out = format!("{SWEEP_HEADER}\n");
        for r in &self.sweep {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3}",
                r.sweep, r.subquery, r.used_size, r.total_size, r.mean_window_millis
            );
        }
        out
    }

    /// Writes the per-window report to `path`, the summary next to it as
    /// `<stem>.summary.csv` and, for sweeps, `<stem>.sweep.csv`. Returns the
    /// paths written.
    pub fn write(&self, path: &Path) -> std::io::Result<Vec<PathBuf>> {
        let sibling = |suffix: &str| {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
            path.with_file_name(format!("{stem}.{suffix}.csv"))
        };
        let mut written = vec![path.to_path_buf(), sibling("summary")];
        std::fs::write(path, self.report_csv())?;
        std::fs::write(&written[1], self.summary_csv())?;
        if !self.sweep.is_empty() {
            let p = sibling("sweep");
            std::fs::write(&p, self.sweep_csv())?;
            written.push(p);
        }
        Ok(written)
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
