//! Named pipelines, run in one process over the in-process bus.

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::queries::{self, full};
use super::report::digest_triples;
use super::BenchError;
use crate::bus::{Broker, Bus};
use crate::engine::KbAccessMode;
use crate::operator::{
    run_client, run_operator, ClientConfig, Measurement, OperatorConfig, OperatorHandle, Window, WindowKind, WindowSink,
};
use crate::query::{parse_query, Query};
use crate::rdf::Triple;
use crate::streamgen::{replay, StreamLine};

pub const SOURCE_TOPIC: &str = "tweets";
pub const RESULT_TOPIC: &str = "results";

/// How stages that touch the KB reach it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Local,
    Service,
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub id: &'static str,
    pub inputs: Vec<&'static str>,
    pub output: &'static str,
    pub query: Arc<Query>,
    pub window: WindowKind,
    pub touches_kb: bool,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub name: String,
    pub stages: Vec<Stage>,
}

fn stage(id: &'static str, inputs: &[&'static str], output: &'static str, body: &str, window: WindowKind, kb: bool) -> Stage {
    let query = parse_query(&full(body)).unwrap_or_else(|e| panic!("built-in query {id}: {e}"));
    Stage { id, inputs: inputs.to_vec(), output, query: Arc::new(query), window, touches_kb: kb }
}

/// `q15`, `q16`, `cquery1-mono` or `cquery1-dag`. Stages reading the source
/// use count windows of `window_triples`; later stages use 1 ms time
/// windows, which line up with the source windows because every output is
/// stamped with its window's high timestamp.
pub fn pipeline(name: &str, access: Access, window_triples: usize) -> Result<Pipeline, BenchError> {
    let count = WindowKind::Count { max_triples: window_triples };
    let tick = WindowKind::Time { width_ms: 1 };
    let service = access == Access::Service;
    let stages = match name {
        "q15" => vec![stage("q15", &[SOURCE_TOPIC], RESULT_TOPIC, if service { queries::Q15_SERVICE } else { queries::Q15_LOCAL }, count, true)],
        "q16" => vec![stage("q16", &[SOURCE_TOPIC], RESULT_TOPIC, if service { queries::Q16_SERVICE } else { queries::Q16_LOCAL }, count, true)],
        "cquery1-mono" | "cquery1-dag" if service => {
            return Err(BenchError::Config(format!("{name} runs with local KB access only")));
        }
        "cquery1-mono" => vec![stage("cquery1", &[SOURCE_TOPIC], RESULT_TOPIC, queries::CQUERY1_MONO, count, true)],
        "cquery1-dag" => vec![
            stage("A", &[SOURCE_TOPIC], "artists", queries::DAG_A, count, true),
            stage("B", &[SOURCE_TOPIC], "shows", queries::DAG_B, count, true),
            stage("C", &["artists"], "artists-pos", queries::DAG_C, tick, false),
            stage("D", &["artists"], "artists-neg", queries::DAG_D, tick, false),
            stage("E", &["shows"], "shows-pos", queries::DAG_E, tick, false),
            stage("F", &["shows"], "shows-neg", queries::DAG_F, tick, false),
            stage("G", &["artists-pos", "artists-neg", "shows-pos", "shows-neg"], RESULT_TOPIC, queries::DAG_G, tick, false),
        ],
        other => return Err(BenchError::Config(format!("unknown pipeline {other}"))),
    };
    let suffix = match (name.starts_with('q'), access) {
        (true, Access::Local) => "-local",
        (true, Access::Service) => "-service",
        (false, _) => "",
    };
    Ok(Pipeline { name: format!("{name}{suffix}"), stages })
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub pipeline: String,
    /// From the first publish to the arrival of the last result window.
    pub wall_millis: f64,
    pub digest: String,
    pub result_triples: usize,
    pub result_windows: usize,
    pub measurements: Vec<Measurement>,
}

#[derive(Default)]
struct TimedSink {
    state: Mutex<(Vec<Triple>, usize, Option<Instant>)>,
}

impl WindowSink for TimedSink {
    fn on_window(&self, _script: usize, w: &Window) -> Result<(), String> {
        let mut s = self.state.lock().unwrap_or_else(|e| e.into_inner());
        s.0.extend(w.triples().cloned());
        s.1 += 1;
        s.2 = Some(Instant::now());
        Ok(())
    }
}

/// Runs `p` once: operators and a result client on a fresh bus, then the
/// stream replayed at `rate` triples/s (0 for unthrottled).
pub fn run_pipeline(
    p: &Pipeline,
    stream: &[StreamLine],
    kb_for: &dyn Fn(&Stage) -> KbAccessMode,
    engines: usize,
    rate: f64,
) -> Result<PipelineRun, BenchError> {
    let bus = Broker::new();
    let shared: Arc<dyn Bus> = Arc::new(bus.clone());
    let mut handles = Vec::new();
    for s in &p.stages {
        let kb = if s.touches_kb { kb_for(s) } else { KbAccessMode::None };
        let cfg = OperatorConfig {
            id: s.id.to_string(),
            inputs: s.inputs.iter().map(|t| t.to_string()).collect(),
            output: s.output.to_string(),
            window: s.window,
            merge_buffer: 1024,
            engines,
            query: s.query.clone(),
            kb,
        };
        match run_operator(cfg, shared.clone(), None) {
            Ok(h) => handles.push(h),
            Err(e) => {
                handles.iter().for_each(OperatorHandle::stop);
                return Err(e.into());
            }
        }
    }
    let sink = Arc::new(TimedSink::default());
    let client_cfg = ClientConfig::new(format!("{}-client", p.name), &[RESULT_TOPIC]).with_window(WindowKind::Time { width_ms: 1 });
    let client = run_client(client_cfg, shared, sink.clone())?;

    let start = Instant::now();
    replay(stream, rate, SOURCE_TOPIC, &bus)?;
    let joined = join_operators(handles);
    if joined.is_err() {
        client.stop();
    }
    let client_result = client.join();
    let measurements = joined?;
    client_result?;

    let (triples, windows, last) = std::mem::take(&mut *sink.state.lock().unwrap_or_else(|e| e.into_inner()));
    let wall = last.map_or_else(|| start.elapsed(), |t| t.duration_since(start));
    Ok(PipelineRun {
        pipeline: p.name.clone(),
        wall_millis: wall.as_secs_f64() * 1000.0,
        digest: digest_triples(&triples),
        result_triples: triples.len(),
        result_windows: windows,
        measurements,
    })
}

/// Joins every operator; the first failure stops the rest so nothing waits
/// for an end of stream that will never come.
fn join_operators(mut handles: Vec<OperatorHandle>) -> Result<Vec<Measurement>, BenchError> {
    let mut measurements = Vec::new();
    let mut failure = None;
    while !handles.is_empty() {
        let Some(i) = handles.iter().position(OperatorHandle::is_finished) else {
            std::thread::sleep(Duration::from_millis(2));
            continue;
        };
        match handles.swap_remove(i).join() {
            Ok(report) => measurements.extend(report.measurements),
            Err(e) => {
                handles.iter().for_each(OperatorHandle::stop);
                if failure.is_none() || matches!(failure, Some(crate::operator::OperatorError::Stopped)) {
                    failure = Some(e);
                }
            }
        }
    }
    match failure {
        Some(e) => Err(e.into()),
        None => {
            measurements.sort_by(|a, b| (&a.operator_id, a.window_seq).cmp(&(&b.operator_id, b.window_seq)));
            Ok(measurements)
        }
    }
}
