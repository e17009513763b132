use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const METRICS_HEADER: &str = "operator_id,window_seq,triples,eval_millis,kb_triples_touched,engine_id";

/// One evaluated window.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub operator_id: String,
    pub window_seq: u64,
    pub triples: usize,
    pub eval_millis: f64,
    pub kb_triples_touched: u64,
    pub engine_id: usize,
}

impl Measurement {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.3},{},{}",
            self.operator_id, self.window_seq, self.triples, self.eval_millis, self.kb_triples_touched, self.engine_id
        )
    }
}

/// Receives measurements in window order as the publisher releases them.
pub type MetricsSink = Box<dyn FnMut(&Measurement) + Send>;

/// A sink appending rows to a fresh CSV file with a header line.
pub fn csv_metrics(path: &Path) -> std::io::Result<MetricsSink> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{METRICS_HEADER}")?;
    out.flush()?;
    Ok(Box::new(move |m: &Measurement| {
        if let Err(e) = writeln!(out, "{}", m.csv_row()).and_then(|_| out.flush()) {
            log::warn!("metrics write failed: {e}");
        }
    }))
}
