//! Entry points for running each role as its own process.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use super::BenchError;
use crate::bus::{serve_broker, Broker, Bus, RemoteBus};
use crate::kb::TripleStore;
use crate::operator::{csv_metrics, run_client, run_operator, ClientConfig, CsvSink, OperatorConfig, Properties, Window, WindowSink};
use crate::streamgen::{generate, read_stream, replay, GenConfig};

pub const DEFAULT_BROKER: &str = "127.0.0.1:7400";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Broker,
    Operator,
    Client,
    KbService,
    Gen,
    Replay,
}

impl FromStr for Role {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "broker" => Role::Broker,
            "operator" => Role::Operator,
            "client" => Role::Client,
            "kbservice" => Role::KbService,
            "gen" => Role::Gen,
            "replay" => Role::Replay,
            other => return Err(BenchError::Config(format!("unknown role {other}"))),
        })
    }
}

struct StdoutSink;

impl WindowSink for StdoutSink {
    fn on_window(&self, script: usize, w: &Window) -> Result<(), String> {
        println!("{},{},{},{},{},{script}", w.seq, w.events.len(), w.triple_count, w.low_ts, w.high_ts);
        Ok(())
    }
}

fn remote(broker: &str) -> Result<Arc<dyn Bus>, BenchError> {
    Ok(Arc::new(RemoteBus::connect(broker)?))
}

/// Runs one role with its `key = value` config. Broker and KB service run
/// until the process is killed; the others return when their work ends.
///
/// | role | keys |
/// |---|---|
/// | broker | `addr` |
/// | operator | operator keys, `metrics.file` |
/// | client | client keys, `sink.file` |
/// | kbservice | `addr`, `kb.file` |
/// | gen | `config` (generator TOML), `seed`, `stream.file`, `kb.file` |
/// | replay | `stream.file`, `topic`, `rate` |
pub fn launch(role: Role, config: &Path, broker: &str) -> Result<(), BenchError> {
    let props = Properties::load(config)?;
    match role {
        Role::Broker => {
            props.check_keys(&["addr"])?;
            let server = serve_broker(Broker::new(), props.get("addr").unwrap_or(broker))?;
            log::info!("broker listening on {}", server.local_addr());
            server.wait();
        }
        Role::Operator => {
            let cfg = OperatorConfig::from_properties(&props)?;
            let metrics = props.path("metrics.file")?.map(|p| csv_metrics(&p)).transpose()?;
            let id = cfg.id.clone();
            let handle = run_operator(cfg, remote(broker)?, metrics)?;
            log::info!("operator {id} attached to {broker}");
            let report = handle.join()?;
            log::info!("operator {} done: {} windows, {} events out", report.operator_id, report.windows, report.output_events);
        }
        Role::Client => {
            let cfg = ClientConfig::from_properties(&props)?;
            let sink: Arc<dyn WindowSink> = match props.path("sink.file")? {
                Some(p) => Arc::new(CsvSink::create(&p)?),
                None => Arc::new(StdoutSink),
            };
            let id = cfg.id.clone();
            let handle = run_client(cfg, remote(broker)?, sink)?;
            log::info!("client {id} attached to {broker}");
            let report = handle.join()?;
            log::info!("client done: {} windows", report.windows());
        }
        Role::KbService => {
            props.check_keys(&["addr", "kb.file"])?;
            let path = props.path("kb.file")?.ok_or_else(|| BenchError::Config("missing key kb.file".into()))?;
            let store = TripleStore::load_canonical(&std::fs::read_to_string(&path)?)?;
            let handle = crate::kb::serve(Arc::new(store), props.required("addr")?)?;
            log::info!("KB service on {} ({})", handle.local_addr(), path.display());
            handle.wait();
        }
        Role::Gen => {
            props.check_keys(&["config", "seed", "stream.file", "kb.file"])?;
            let mut cfg = match props.path("config")? {
                Some(p) => GenConfig::from_toml(&std::fs::read_to_string(p)?).map_err(BenchError::Config)?,
                None => GenConfig::default(),
            };
            if let Some(seed) = props.parsed("seed")? {
                cfg.seed = seed;
            }
            cfg.validate().map_err(BenchError::Config)?;
            let out = |key: &str| props.path(key)?.ok_or_else(|| BenchError::Config(format!("missing key {key}")));
            let (stream_path, kb_path) = (out("stream.file")?, out("kb.file")?);
            let data = generate(&cfg);
            data.write_stream(std::io::BufWriter::new(std::fs::File::create(&stream_path)?))?;
            data.write_kb(std::io::BufWriter::new(std::fs::File::create(&kb_path)?))?;
            log::info!("wrote {} events and {} KB triples", data.events.len(), data.kb.len());
        }
        Role::Replay => {
            props.check_keys(&["stream.file", "topic", "rate"])?;
            let path = props.path("stream.file")?.ok_or_else(|| BenchError::Config("missing key stream.file".into()))?;
            let lines = read_stream(&path)?;
            let rate = props.parsed("rate")?.unwrap_or(25_000.0);
            let r = replay(&lines, rate, props.get("topic").unwrap_or(super::SOURCE_TOPIC), &RemoteBus::connect(broker)?)?;
            log::info!("replayed {} triples in {:.2?} ({:.0}/s)", r.triples, r.duration, r.achieved_rate);
        }
    }
    Ok(())
}
