use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;

use super::aggregator::{self, AggregatorSpec, Credits, POLL};
use super::config::OperatorConfig;
use super::metrics::{Measurement, MetricsSink};
use super::reorder::ReorderBuffer;
use super::window::Window;
use super::{join_all, OperatorError};
use crate::bus::{is_eos, Bus, Subscription, EOS_PAYLOAD};
use crate::engine::{Engine, KbAccessMode, WindowResult};
use crate::rdf::wire::encode_graph_event;
use crate::rdf::{GraphEvent, Triple};

/// Result triple groups as output events: graph id `<op>/<seq>/<group>`,
/// every triple stamped with `ts`.
pub fn result_events(operator_id: &str, seq: u64, ts: i64, groups: Vec<Vec<Triple>>) -> Vec<GraphEvent> {
    groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(i, g)| GraphEvent::stamped(format!("{operator_id}/{seq}/{i}"), g, ts).expect("non-empty group"))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct OperatorReport {
    pub operator_id: String,
    pub windows: u64,
    pub output_events: u64,
    /// In window order.
    pub measurements: Vec<Measurement>,
}

pub struct OperatorHandle {
    id: String,
    stop: Arc<AtomicBool>,
    activities: Vec<JoinHandle<Result<u64, OperatorError>>>,
    publisher: JoinHandle<Result<OperatorReport, OperatorError>>,
}

impl OperatorHandle {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Asks every activity to wind down; `join` then reports `Stopped`.
    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }

    pub fn is_finished(&self) -> bool {
        self.publisher.is_finished()
    }

    /// Waits for the end-of-stream on every input to propagate through.
    pub fn join(self) -> Result<OperatorReport, OperatorError> {
        let published = self
            .publisher
            .join()
            .unwrap_or_else(|_| Err(OperatorError::Panicked("publisher".into())));
        let rest = join_all(self.activities);
        match (published, rest) {
            (Ok(report), Ok(_)) => Ok(report),
            (Err(OperatorError::Stopped), Err(e)) | (Err(e), _) | (Ok(_), Err(e)) => Err(e),
        }
    }
}

enum Outcome {
    Done { result: WindowResult, high_ts: i64, triples: usize, engine: usize },
    Finished,
}

/// Starts an operator. Subscriptions are in place when this returns, so the
/// caller may start publishing to the inputs right away.
pub fn run_operator(cfg: OperatorConfig, bus: Arc<dyn Bus>, metrics: Option<MetricsSink>) -> Result<OperatorHandle, OperatorError> {
    cfg.validate()?;
    if let KbAccessMode::RemoteService(endpoints) = &cfg.kb {
        probe_endpoints(endpoints)?;
    }
    let stop = Arc::new(AtomicBool::new(false));
    let window_topic = format!("{}.windows", cfg.id);
    let engine_group = format!("{}.engines", cfg.id);
    bus.create_group(&window_topic, &engine_group)?;

    let mut engines = Vec::with_capacity(cfg.engines);
    for i in 0..cfg.engines {
        let engine = Engine::new(cfg.query.clone(), cfg.kb.clone())?;
        let sub = bus.subscribe(&window_topic, &engine_group, &format!("{}.engine-{i}", cfg.id))?;
        engines.push((engine, sub));
    }

    let capacity = 4 * cfg.engines;
    let (credit_tx, credit_rx) = mpsc::channel();
    let (out_tx, out_rx) = mpsc::channel();
    let spec = AggregatorSpec {
        id: cfg.id.clone(),
        inputs: cfg.inputs.clone(),
        window: cfg.window,
        merge_buffer: cfg.merge_buffer,
        window_topic,
        consumers: cfg.engines,
    };
    let credits = Credits { available: capacity, returned: credit_rx };
    let (readers, main) = aggregator::spawn(bus.clone(), spec, Some(credits), stop.clone())?;

    let mut activities = readers;
    activities.push(main);
    for (i, (engine, sub)) in engines.into_iter().enumerate() {
        let (tx, flag) = (out_tx.clone(), stop.clone());
        activities.push(spawn_named(format!("{}-engine-{i}", cfg.id), move || run_engine(i, engine, sub, tx, &flag), &stop)?);
    }
    drop(out_tx);

    let publisher = {
        let stop = stop.clone();
        let p = Publisher {
            id: cfg.id.clone(),
            output: cfg.output.clone(),
            engines: cfg.engines,
            bus,
            reorder: ReorderBuffer::new(capacity),
            credits: credit_tx,
            metrics,
        };
        std::thread::Builder::new()
            .name(format!("{}-publisher", cfg.id))
            .spawn(move || {
                let r = p.run(out_rx, &stop);
                if r.is_err() {
                    stop.store(true, Ordering::SeqCst);
                }
                r
            })
            .map_err(|e| OperatorError::Io(e.to_string()))?
    };
    Ok(OperatorHandle { id: cfg.id, stop, activities, publisher })
}

fn probe_endpoints(endpoints: &std::collections::BTreeMap<String, String>) -> Result<(), OperatorError> {
    use std::net::{TcpStream, ToSocketAddrs};
    for (name, addr) in endpoints {
        let fail = |msg: String| OperatorError::Engine(crate::engine::EngineError::Service { endpoint: name.clone(), msg });
        let sock = addr
            .to_socket_addrs()
            .map_err(|e| fail(e.to_string()))?
            .next()
            .ok_or_else(|| fail(format!("{addr} resolves to nothing")))?;
        TcpStream::connect_timeout(&sock, std::time::Duration::from_secs(5)).map_err(|e| fail(e.to_string()))?;
    }
    Ok(())
}

fn spawn_named<F>(name: String, f: F, stop: &Arc<AtomicBool>) -> Result<JoinHandle<Result<u64, OperatorError>>, OperatorError>
where
    F: FnOnce() -> Result<u64, OperatorError> + Send + 'static,
{
    let stop = stop.clone();
    std::thread::Builder::new()
        .name(name)
        .spawn(move || {
            let r = f();
            if r.is_err() {
                stop.store(true, Ordering::SeqCst);
            }
            r
        })
        .map_err(|e| OperatorError::Io(e.to_string()))
}

fn run_engine(
    id: usize,
    mut engine: Engine,
    mut sub: Box<dyn Subscription>,
    out: Sender<Outcome>,
    stop: &AtomicBool,
) -> Result<u64, OperatorError> {
    let mut evaluated = 0;
    loop {
        if stop.load(Ordering::SeqCst) {
            return Err(OperatorError::Stopped);
        }
        let Some(msg) = sub.next(POLL)? else { continue };
        if is_eos(&msg.payload) {
            sub.ack(msg.offset)?;
            let _ = out.send(Outcome::Finished);
            return Ok(evaluated);
        }
        let w = Window::decode(&msg.payload).map_err(|e| OperatorError::Decode {
            topic: "windows".into(),
            offset: msg.offset,
            msg: e.to_string(),
        })?;
        let result = engine.evaluate(&w).map_err(|source| OperatorError::Evaluation { window: w.seq, source })?;
        evaluated += 1;
        let outcome = Outcome::Done { result, high_ts: w.high_ts, triples: w.triple_count, engine: id };
        if out.send(outcome).is_err() {
            return Err(OperatorError::Stopped);
        }
        sub.ack(msg.offset)?;
    }
}

struct Publisher {
    id: String,
    output: String,
    engines: usize,
    bus: Arc<dyn Bus>,
    reorder: ReorderBuffer<(WindowResult, i64, usize, usize)>,
    credits: Sender<()>,
    metrics: Option<MetricsSink>,
}

impl Publisher {
    fn run(mut self, rx: Receiver<Outcome>, stop: &AtomicBool) -> Result<OperatorReport, OperatorError> {
        let mut report = OperatorReport { operator_id: self.id.clone(), ..Default::default() };
        let mut finished = 0;
        while finished < self.engines {
            match rx.recv_timeout(POLL) {
                Ok(Outcome::Finished) => finished += 1,
                Ok(Outcome::Done { result, high_ts, triples, engine }) => {
                    let seq = result.window_seq;
                    for (result, high_ts, triples, engine) in self.reorder.insert(seq, (result, high_ts, triples, engine))? {
                        self.release(&mut report, result, high_ts, triples, engine)?;
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    if stop.load(Ordering::SeqCst) {
                        return Err(OperatorError::Stopped);
                    }
                }
                Err(RecvTimeoutError::Disconnected) => return Err(OperatorError::Stopped),
            }
        }
        if self.reorder.held() > 0 {
            return Err(OperatorError::Protocol(format!(
                "{} results still waiting for window {} at end of stream",
                self.reorder.held(),
                self.reorder.expected()
            )));
        }
        self.bus.publish(&self.output, EOS_PAYLOAD)?;
        Ok(report)
    }

    fn release(
        &mut self,
        report: &mut OperatorReport,
        result: WindowResult,
        high_ts: i64,
        triples: usize,
        engine: usize,
    ) -> Result<(), OperatorError> {
        let seq = result.window_seq;
        for event in result_events(&self.id, seq, high_ts, result.output_groups()) {
            self.bus.publish(&self.output, &encode_graph_event(&event))?;
            report.output_events += 1;
        }
        // The aggregator may be gone already once it has sent end of stream.
        let _ = self.credits.send(());
        let m = Measurement {
            operator_id: self.id.clone(),
            window_seq: seq,
            triples,
            eval_millis: result.eval_millis,
            kb_triples_touched: result.kb_triples_touched,
            engine_id: engine,
        };
        if let Some(sink) = self.metrics.as_mut() {
            sink(&m);
        }
        report.measurements.push(m);
        report.windows += 1;
        Ok(())
    }
}
