//! Line-oriented KB query service.
//!
//! Request: `{"op":"query","id":"r1","bgp":[{"s":{..},"p":{..},"o":{..}}],"vars":["x"]}`
//! where pattern positions use the event term encoding plus `{"k":"var","v":"name"}`.
//! Reply: `{"op":"result","id":"r1","rows":[{"x":{..}}]}` or
//! `{"op":"error","id":"r1","code":"bad-request","msg":".."}`.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{eval_bgp, Dataset, Solution};
use crate::rdf::wire::WireTerm;

use super::{KbError, PatternTerm, TriplePattern, TripleStore};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WirePattern {
    pub s: WireTerm,
    pub p: WireTerm,
    pub o: WireTerm,
}

pub fn pattern_term_to_wire(t: &PatternTerm) -> WireTerm {
    match t {
        PatternTerm::Var(v) => WireTerm { k: "var".into(), v: v.clone(), dt: None, lang: None },
        PatternTerm::Term(t) => t.into(),
    }
}

pub fn pattern_term_from_wire(w: &WireTerm) -> Result<PatternTerm, String> {
    if w.k == "var" {
        if w.v.is_empty() {
            return Err("empty variable name".into());
        }
        return Ok(PatternTerm::Var(w.v.clone()));
    }
    w.to_term().map(PatternTerm::Term).map_err(|e| e.to_string())
}

pub fn pattern_to_wire(p: &TriplePattern) -> WirePattern {
    WirePattern { s: pattern_term_to_wire(&p.s), p: pattern_term_to_wire(&p.p), o: pattern_term_to_wire(&p.o) }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryRequest {
    pub op: String,
    pub id: String,
    pub bgp: Vec<WirePattern>,
    pub vars: Vec<String>,
}

/// Builds the request line (without newline) for a basic graph pattern.
pub fn encode_request(id: &str, patterns: &[TriplePattern]) -> Vec<u8> {
    let mut vars: Vec<String> = Vec::new();
    for p in patterns {
        for v in p.vars() {
            if !vars.iter().any(|x| x == v) {
                vars.push(v.to_string());
            }
        }
    }
    let req = QueryRequest { op: "query".into(), id: id.into(), bgp: patterns.iter().map(pattern_to_wire).collect(), vars };
    serde_json::to_vec(&req).expect("request serialises")
}

/// Parses a reply line into solution rows, or the error message it carries.
pub fn decode_reply(line: &str, expect_id: &str) -> Result<Vec<Solution>, String> {
    let v: Value = serde_json::from_str(line).map_err(|e| format!("malformed reply: {e}"))?;
    let id = v.get("id").and_then(Value::as_str).unwrap_or_default();
    if id != expect_id {
        return Err(format!("reply id {id:?} does not match request {expect_id:?}"));
    }
    match v.get("op").and_then(Value::as_str) {
        Some("result") => {
            let rows = v.get("rows").and_then(Value::as_array).ok_or("reply without rows")?;
            rows.iter()
                .map(|row| {
                    let obj = row.as_object().ok_or("row is not an object")?;
                    obj.iter()
                        .map(|(k, t)| {
                            let w: WireTerm = serde_json::from_value(t.clone()).map_err(|e| e.to_string())?;
                            Ok((k.clone(), w.to_term().map_err(|e| e.to_string())?))
                        })
                        .collect::<Result<Solution, String>>()
                })
                .collect()
        }
        Some("error") => Err(format!(
            "{}: {}",
            v.get("code").and_then(Value::as_str).unwrap_or("error"),
            v.get("msg").and_then(Value::as_str).unwrap_or("")
        )),
        other => Err(format!("unexpected reply op {other:?}")),
    }
}

/// Evaluates one request line against the store and returns the reply line.
pub fn answer(store: &TripleStore, line: &str) -> String {
    let id = serde_json::from_str::<Value>(line)
        .ok()
        .and_then(|v| v.get("id").and_then(Value::as_str).map(str::to_string))
        .unwrap_or_default();
    match run_request(store, line) {
        Ok(rows) => serde_json::json!({"op": "result", "id": id, "rows": rows}).to_string(),
        Err(msg) => serde_json::json!({"op": "error", "id": id, "code": "bad-request", "msg": msg}).to_string(),
    }
}

fn run_request(store: &TripleStore, line: &str) -> Result<Vec<Value>, String> {
    let req: QueryRequest = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if req.op != "query" {
        return Err(format!("unsupported op {:?}", req.op));
    }
    let mut patterns = Vec::with_capacity(req.bgp.len());
    for wp in &req.bgp {
        let canon = |w: &WireTerm| -> Result<PatternTerm, String> {
            Ok(match pattern_term_from_wire(w)? {
                PatternTerm::Term(t) => PatternTerm::Term(store.sameas_rep(&t)),
                var => var,
            })
        };
        let p = TriplePattern::new(canon(&wp.s)?, canon(&wp.p)?, canon(&wp.o)?);
        if matches!(p.p, PatternTerm::Term(ref t) if !t.is_iri()) {
            return Err("predicate must be an IRI or variable".into());
        }
        patterns.push(p);
    }
    let ds = Dataset::new(TripleStore::new(), Some(store));
    let rows = eval_bgp(&ds, &patterns, &Solution::new());
    Ok(rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, Value> = req
                .vars
                .iter()
                .filter_map(|v| {
                    row.get(v).map(|t| (v.clone(), serde_json::to_value(WireTerm::from(t)).expect("term serialises")))
                })
                .collect();
            Value::Object(obj)
        })
        .collect())
}

/// A running KB service. Dropping the handle leaves it running; call
/// [`ServiceHandle::shutdown`] to stop accepting connections.
pub struct ServiceHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    /// Blocks until the accept loop ends.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Serves `store` on `addr` (e.g. `127.0.0.1:0`). Each connection gets its
/// own thread; requests on a connection are answered in order.
pub fn serve(store: Arc<TripleStore>, addr: &str) -> Result<ServiceHandle, KbError> {
    let listener = TcpListener::bind(addr).map_err(|e| KbError::Bind { addr: addr.into(), msg: e.to_string() })?;
    let local = listener.local_addr().map_err(|e| KbError::Io(e.to_string()))?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = stop.clone();
    let thread = std::thread::Builder::new()
        .name(format!("kb-service-{local}"))
        .spawn(move || {
            for conn in listener.incoming() {
                if stop_flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(conn) = conn else { continue };
                let store = store.clone();
                std::thread::spawn(move || {
                    if let Err(e) = handle_connection(&store, conn) {
                        log::debug!("kb service connection ended: {e}");
                    }
                });
            }
        })
        .map_err(|e| KbError::Io(e.to_string()))?;
    Ok(ServiceHandle { addr: local, stop, thread: Some(thread) })
}

fn handle_connection(store: &TripleStore, conn: TcpStream) -> std::io::Result<()> {
    conn.set_nodelay(true)?;
    let mut writer = conn.try_clone()?;
    let reader = BufReader::new(conn);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reply = answer(store, &line);
        reply.push('\n');
        writer.write_all(reply.as_bytes())?;
    }
    Ok(())
}
