use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use super::aggregator::{self, AggregatorSpec, POLL};
use super::config::Properties;
use super::window::{Window, WindowKind};
use super::{join_all, OperatorError};
use crate::bus::{is_eos, Bus, Subscription};

/// Receives every window handed to a script.
pub trait WindowSink: Send + Sync {
    fn on_window(&self, script: usize, window: &Window) -> Result<(), String>;
}

/// Keeps windows in memory.
#[derive(Default)]
pub struct CollectSink {
    windows: Mutex<Vec<(usize, Window)>>,
}

impl CollectSink {
    pub fn new() -> Self {
        Self::default()
    }

    /// Collected `(script, window)` pairs sorted by window seq.
    pub fn take(&self) -> Vec<(usize, Window)> {
        let mut v = std::mem::take(&mut *self.windows.lock().unwrap_or_else(|e| e.into_inner()));
        v.sort_by_key(|(_, w)| w.seq);
        v
    }
}

impl WindowSink for CollectSink {
    fn on_window(&self, script: usize, window: &Window) -> Result<(), String> {
        self.windows.lock().unwrap_or_else(|e| e.into_inner()).push((script, window.clone()));
        Ok(())
    }
}

/// One CSV row per window: `window_seq,events,triples,low_ts,high_ts,script`.
pub struct CsvSink {
    out: Mutex<BufWriter<File>>,
}

impl CsvSink {
    pub const HEADER: &'static str = "window_seq,events,triples,low_ts,high_ts,script";

    pub fn create(path: &Path) -> std::io::Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", Self::HEADER)?;
        out.flush()?;
        Ok(CsvSink { out: Mutex::new(out) })
    }
}

impl WindowSink for CsvSink {
    fn on_window(&self, script: usize, w: &Window) -> Result<(), String> {
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        writeln!(out, "{},{},{},{},{},{script}", w.seq, w.events.len(), w.triple_count, w.low_ts, w.high_ts)
            .and_then(|_| out.flush())
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub id: String,
    pub inputs: Vec<String>,
    pub window: WindowKind,
    pub scripts: usize,
    pub merge_buffer: usize,
}

impl ClientConfig {
    pub fn new(id: impl Into<String>, inputs: &[&str]) -> Self {
        ClientConfig {
            id: id.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            window: WindowKind::default(),
            scripts: 1,
            merge_buffer: 1024,
        }
    }

    pub fn with_window(mut self, window: WindowKind) -> Self {
        self.window = window;
        self
    }

    pub fn with_scripts(mut self, scripts: usize) -> Self {
        self.scripts = scripts;
        self
    }

    /// Keys: `id`, `topics`, `window.*`, `scripts`, `merge.buffer`,
    /// `sink.file`.
    pub fn from_properties(p: &Properties) -> Result<Self, OperatorError> {
        p.check_keys(&["id", "topics", "window.kind", "window.max_triples", "window.width_ms", "scripts", "merge.buffer", "sink.file"])?;
        Ok(ClientConfig {
            id: p.required("id")?.to_string(),
            inputs: p.list("topics")?,
            window: p.window()?,
            scripts: p.parsed("scripts")?.unwrap_or(1),
            merge_buffer: p.parsed("merge.buffer")?.unwrap_or(1024),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ClientReport {
    /// Windows handled by each script.
    pub per_script: Vec<u64>,
}

impl ClientReport {
    pub fn windows(&self) -> u64 {
        self.per_script.iter().sum()
    }
}

pub struct ClientHandle {
    stop: Arc<AtomicBool>,
    aggregator: Vec<JoinHandle<Result<u64, OperatorError>>>,
    scripts: Vec<JoinHandle<Result<u64, OperatorError>>>,
}

impl ClientHandle {
    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }

    pub fn join(self) -> Result<ClientReport, OperatorError> {
        let per_script = join_all(self.scripts);
        join_all(self.aggregator)?;
        Ok(ClientReport { per_script: per_script? })
    }
}

/// Starts a client. Like an operator it is subscribed on return.
pub fn run_client(cfg: ClientConfig, bus: Arc<dyn Bus>, sink: Arc<dyn WindowSink>) -> Result<ClientHandle, OperatorError> {
    if cfg.scripts == 0 || cfg.inputs.is_empty() {
        return Err(OperatorError::Config(format!("{}: needs inputs and at least one script", cfg.id)));
    }
    let stop = Arc::new(AtomicBool::new(false));
    let window_topic = format!("{}.windows", cfg.id);
    let group = format!("{}.scripts", cfg.id);
    bus.create_group(&window_topic, &group)?;
    let mut subs = Vec::new();
    for i in 0..cfg.scripts {
        subs.push(bus.subscribe(&window_topic, &group, &format!("{}.script-{i}", cfg.id))?);
    }
    let spec = AggregatorSpec {
        id: cfg.id.clone(),
        inputs: cfg.inputs.clone(),
        window: cfg.window,
        merge_buffer: cfg.merge_buffer,
        window_topic,
        consumers: cfg.scripts,
    };
    let (mut aggregator, main) = aggregator::spawn(bus, spec, None, stop.clone())?;
    aggregator.push(main);
    let scripts = subs
        .into_iter()
        .enumerate()
        .map(|(i, sub)| {
            let (sink, stop) = (sink.clone(), stop.clone());
            std::thread::Builder::new()
                .name(format!("{}-script-{i}", cfg.id))
                .spawn(move || run_script(i, sub, sink.as_ref(), &stop))
                .map_err(|e| OperatorError::Io(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClientHandle { stop, aggregator, scripts })
}

fn run_script(id: usize, mut sub: Box<dyn Subscription>, sink: &dyn WindowSink, stop: &AtomicBool) -> Result<u64, OperatorError> {
    let mut handled = 0;
    loop {
        if stop.load(Ordering::SeqCst) {
            return Err(OperatorError::Stopped);
        }
        let Some(msg) = sub.next(POLL)? else { continue };
        if is_eos(&msg.payload) {
            sub.ack(msg.offset)?;
            return Ok(handled);
        }
        match Window::decode(&msg.payload) {
            Ok(w) => {
                if let Err(e) = sink.on_window(id, &w) {
                    log::warn!("script {id}: sink failed on window {}: {e}", w.seq);
                }
                handled += 1;
            }
            Err(e) => log::warn!("script {id}: undecodable window at offset {}: {e}", msg.offset),
        }
        sub.ack(msg.offset)?;
    }
}
