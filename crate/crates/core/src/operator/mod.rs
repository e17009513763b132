//! The SCEP operator and client.
//!
//! An operator subscribes to its input topics, merges them into one
//! timestamp-ordered stream, cuts windows and hands each window to one
//! engine of its pool through a consumer group. A publisher puts results
//! back into window order, stamps them with the window's high timestamp and
//! emits them on the output topic, which downstream operators consume like
//! any other stream. A client does the same merging and windowing but hands
//! windows to script callbacks instead of engines.

mod aggregator;
mod client;
mod config;
mod merge;
mod metrics;
mod reorder;
mod run;
mod window;

use thiserror::Error;

use crate::bus::BusError;
use crate::engine::EngineError;

pub use client::{run_client, ClientConfig, ClientHandle, ClientReport, CollectSink, CsvSink, WindowSink};
pub use config::{OperatorConfig, Properties};
pub use merge::{merge_order, Merger};
pub use metrics::{csv_metrics, Measurement, MetricsSink, METRICS_HEADER};
pub use reorder::ReorderBuffer;
pub use run::{result_events, run_operator, OperatorHandle, OperatorReport};
pub use window::{cut_windows, Window, WindowKind, Windower};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("input {topic}: timestamp {got} arrived after {previous}")]
    NonMonotonic { topic: String, previous: i64, got: i64 },
    #[error("reorder buffer waiting for window {expected} holds {held} results (capacity {capacity})")]
    ReorderOverflow { expected: u64, held: usize, capacity: usize },
    #[error("window {0} delivered twice")]
    DuplicateWindow(u64),
    #[error("bus: {0}")]
    Bus(#[from] BusError),
    #[error("window {window}: {source}")]
    Evaluation { window: u64, source: EngineError },
    #[error("engine setup: {0}")]
    Engine(#[from] EngineError),
    #[error("{topic} offset {offset}: {msg}")]
    Decode { topic: String, offset: u64, msg: String },
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("stopped")]
    Stopped,
    #[error("activity panicked: {0}")]
    Panicked(String),
}

/// Joins activity threads and keeps the most informative failure: a real
/// error beats the `Stopped` its peers report once the run is torn down.
fn join_all<T>(handles: Vec<std::thread::JoinHandle<Result<T, OperatorError>>>) -> Result<Vec<T>, OperatorError> {
    let mut out = Vec::with_capacity(handles.len());
    let mut err: Option<OperatorError> = None;
    for h in handles {
        let r = h.join().unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_default();
            Err(OperatorError::Panicked(msg))
        });
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                if err.as_ref().is_none_or(|cur| matches!(cur, OperatorError::Stopped)) {
                    err = Some(e);
                }
            }
        }
    }
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

