//! Node configuration: `key = value` lines, `#` comments.
//!
//! Operator keys: `id`, `topics` (comma separated), `output`, `window.kind`
//! (`count` or `time`), `window.max_triples`, `window.width_ms`, `engines`,
//! `merge.buffer`, `query.file`, `kb.mode` (`local`, `service` or `none`),
//! `kb.file`, `kb.reload_per_window`, `kb.endpoint` (address of the endpoint
//! named `kb`), `kb.endpoint.<name>` and `metrics.file`. Relative paths are
//! resolved against the config file's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use super::window::WindowKind;
use super::OperatorError;
use crate::engine::{KbAccessMode, LocalKb};
use crate::query::{parse_query, Query};

fn config_err(msg: impl Into<String>) -> OperatorError {
    OperatorError::Config(msg.into())
}

/// Parsed `key = value` document.
#[derive(Debug, Clone, Default)]
pub struct Properties {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl Properties {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, OperatorError> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", n + 1)))?;
            if values.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key {}", n + 1, k.trim())));
            }
        }
        Ok(Properties { values, base_dir: base_dir.into() })
    }

    pub fn load(path: &Path) -> Result<Self, OperatorError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn required(&self, key: &str) -> Result<&str, OperatorError> {
        self.get(key).ok_or_else(|| config_err(format!("missing key {key}")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, OperatorError> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| config_err(format!("{key}: cannot parse {v:?}"))))
            .transpose()
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>, OperatorError> {
        Ok(self.get(key).map(|v| self.base_dir.join(v)))
    }

    pub fn list(&self, key: &str) -> Result<Vec<String>, OperatorError> {
        Ok(self.required(key)?.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
    }

    /// Keys with the given prefix, prefix stripped.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.values.iter().filter_map(move |(k, v)| k.strip_prefix(prefix).map(|rest| (rest, v.as_str())))
    }

    /// Rejects keys outside `known` (an entry ending in `.` admits a prefix).
    pub fn check_keys(&self, known: &[&str]) -> Result<(), OperatorError> {
        for k in self.values.keys() {
            let ok = known.iter().any(|p| if p.ends_with('.') { k.starts_with(p) } else { k == p });
            if !ok {
                return Err(config_err(format!("unknown key {k}")));
            }
        }
        Ok(())
    }

    pub fn window(&self) -> Result<WindowKind, OperatorError> {
        match self.get("window.kind").unwrap_or("count") {
            "count" => Ok(WindowKind::Count { max_triples: self.parsed("window.max_triples")?.unwrap_or(1000) }),
            "time" => Ok(WindowKind::Time {
                width_ms: self.parsed("window.width_ms")?.ok_or_else(|| config_err("time windows need window.width_ms"))?,
            }),
            other => Err(config_err(format!("window.kind must be count or time, not {other}"))),
        }
    }
}

const OPERATOR_KEYS: &[&str] = &[
    "id",
    "topics",
    "output",
    "window.kind",
    "window.max_triples",
    "window.width_ms",
    "engines",
    "merge.buffer",
    "query.file",
    "kb.mode",
    "kb.file",
    "kb.reload_per_window",
    "kb.endpoint",
    "kb.endpoint.",
    "metrics.file",
];

#[derive(Debug, Clone)]
pub struct OperatorConfig {
    pub id: String,
    pub inputs: Vec<String>,
    pub output: String,
    pub window: WindowKind,
    /// Events buffered per input while the merge waits on a slower one.
    pub merge_buffer: usize,
    pub engines: usize,
    pub query: Arc<Query>,
    pub kb: KbAccessMode,
}

impl OperatorConfig {
    /// Defaults: 1000-triple count windows, one engine, no KB.
    pub fn new(id: impl Into<String>, inputs: &[&str], output: impl Into<String>, query: Query) -> Self {
        OperatorConfig {
            id: id.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            output: output.into(),
            window: WindowKind::default(),
            merge_buffer: 1024,
            engines: 1,
            query: Arc::new(query),
            kb: KbAccessMode::None,
        }
    }

    pub fn with_window(mut self, window: WindowKind) -> Self {
        self.window = window;
        self
    }

    pub fn with_engines(mut self, engines: usize) -> Self {
        self.engines = engines;
        self
    }

    pub fn with_kb(mut self, kb: KbAccessMode) -> Self {
        self.kb = kb;
        self
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        if self.id.is_empty() {
            return Err(config_err("empty operator id"));
        }
        if self.inputs.is_empty() {
            return Err(config_err(format!("{}: no input topics", self.id)));
        }
        if self.inputs.iter().collect::<BTreeSet<_>>().len() != self.inputs.len() {
            return Err(config_err(format!("{}: input topics repeat", self.id)));
        }
        if self.inputs.contains(&self.output) {
            return Err(config_err(format!("{}: output topic {} is also an input", self.id, self.output)));
        }
        if self.engines == 0 {
            return Err(config_err(format!("{}: engines must be at least 1", self.id)));
        }
        match self.window {
            WindowKind::Count { max_triples: 0 } | WindowKind::Time { width_ms: ..=0 } => {
                Err(config_err(format!("{}: window size must be positive", self.id)))
            }
            _ => Ok(()),
        }
    }

    pub fn from_properties(p: &Properties) -> Result<Self, OperatorError> {
        p.check_keys(OPERATOR_KEYS)?;
        let query_path = p.path("query.file")?.ok_or_else(|| config_err("missing key query.file"))?;
        let text = std::fs::read_to_string(&query_path)
            .map_err(|e| config_err(format!("{}: {e}", query_path.display())))?;
        let query = parse_query(&text).map_err(|e| config_err(format!("{}: {e}", query_path.display())))?;
        let kb = match p.get("kb.mode").unwrap_or("none") {
            "none" => KbAccessMode::None,
            "local" => {
                let path = p.path("kb.file")?.ok_or_else(|| config_err("kb.mode local needs kb.file"))?;
                let text = std::fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                let reload = p.parsed("kb.reload_per_window")?.unwrap_or(false);
                KbAccessMode::LocalMerge(LocalKb::from_ntriples(text, reload).map_err(|e| config_err(format!("{}: {e}", path.display())))?)
            }
            "service" => {
                let mut endpoints: BTreeMap<String, String> =
                    p.with_prefix("kb.endpoint.").map(|(k, v)| (k.to_string(), v.to_string())).collect();
                if let Some(addr) = p.get("kb.endpoint") {
                    endpoints.insert("kb".into(), addr.into());
                }
                if endpoints.is_empty() {
                    return Err(config_err("kb.mode service needs kb.endpoint"));
                }
                KbAccessMode::RemoteService(endpoints)
            }
            other => return Err(config_err(format!("kb.mode must be local, service or none, not {other}"))),
        };
        let cfg = OperatorConfig {
            id: p.required("id")?.to_string(),
            inputs: p.list("topics")?,
            output: p.required("output")?.to_string(),
            window: p.window()?,
            merge_buffer: p.parsed("merge.buffer")?.unwrap_or(1024),
            engines: p.parsed("engines")?.unwrap_or(1),
            query: Arc::new(query),
            kb,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
