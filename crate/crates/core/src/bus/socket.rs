//! Newline-delimited JSON framing of the bus over TCP.
//!
//! Requests: `pub`, `group`, `sub`, `next`, `ack`. A connection carries at
//! most one subscription; publishers use their own connection.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::Deserialize;
use serde_json::value::RawValue;

use super::{Broker, Bus, BusError, Message, Subscription};

#[derive(Deserialize)]
struct Request<'a> {
    op: &'a str,
    topic: Option<String>,
    group: Option<String>,
    consumer: Option<String>,
    timeout: Option<u64>,
    offset: Option<u64>,
    #[serde(borrow)]
    payload: Option<&'a RawValue>,
}

#[derive(Deserialize)]
struct Reply {
    op: String,
    offset: Option<u64>,
    joined: Option<u64>,
    start: Option<u64>,
    msg: Option<String>,
    payload: Option<Box<RawValue>>,
}

fn error_frame(msg: impl std::fmt::Display) -> String {
    serde_json::json!({"op": "error", "msg": msg.to_string()}).to_string()
}

fn field<T>(v: Option<T>, name: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("missing field {name:?}"))
}

pub struct BrokerServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl BrokerServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    fn stop_accepting(&mut self) {
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

impl Drop for BrokerServer {
    fn drop(&mut self) {
        if self.thread.is_some() {
            self.stop_accepting();
        }
    }
}

/// Serves `broker` on `addr` (use port 0 for an ephemeral port).
pub fn serve_broker(broker: Broker, addr: &str) -> Result<BrokerServer, BusError> {
    let conn_err = |e: std::io::Error| BusError::Connection { addr: addr.to_string(), msg: e.to_string() };
    let listener = TcpListener::bind(addr).map_err(conn_err)?;
    let local = listener.local_addr().map_err(conn_err)?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = stop.clone();
    let thread = std::thread::Builder::new()
        .name(format!("broker-{local}"))
        .spawn(move || {
            for conn in listener.incoming() {
                if stop_flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(conn) = conn else { continue };
                let broker = broker.clone();
                std::thread::spawn(move || {
                    if let Err(e) = handle_connection(&broker, conn) {
                        log::debug!("broker connection ended: {e}");
                    }
                });
            }
        })
        .map_err(conn_err)?;
    Ok(BrokerServer { addr: local, stop, thread: Some(thread) })
}

fn handle_connection(broker: &Broker, conn: TcpStream) -> std::io::Result<()> {
    conn.set_nodelay(true)?;
    let mut writer = conn.try_clone()?;
    let mut sub: Option<Box<dyn Subscription>> = None;
    for line in BufReader::new(conn).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reply = match serde_json::from_str::<Request>(&line) {
            Ok(req) => dispatch(broker, &mut sub, req).unwrap_or_else(error_frame),
            Err(e) => error_frame(format!("bad frame: {e}")),
        };
        reply.push('\n');
        writer.write_all(reply.as_bytes())?;
    }
    Ok(())
}

fn dispatch(broker: &Broker, sub: &mut Option<Box<dyn Subscription>>, req: Request<'_>) -> Result<String, String> {
    match req.op {
        "pub" => {
            let topic = field(req.topic, "topic")?;
            let payload = field(req.payload, "payload")?;
            let offset = broker.publish(&topic, payload.get().as_bytes()).map_err(|e| e.to_string())?;
            Ok(format!(r#"{{"op":"pub-ok","offset":{offset}}}"#))
        }
        "group" => {
            let start = broker
                .create_group(&field(req.topic, "topic")?, &field(req.group, "group")?)
                .map_err(|e| e.to_string())?;
            Ok(format!(r#"{{"op":"group-ok","start":{start}}}"#))
        }
        "sub" => {
            if sub.is_some() {
                return Err("connection already subscribed".into());
            }
            let s = broker
                .subscribe(&field(req.topic, "topic")?, &field(req.group, "group")?, &field(req.consumer, "consumer")?)
                .map_err(|e| e.to_string())?;
            let joined = s.joined_at();
            *sub = Some(s);
            Ok(format!(r#"{{"op":"sub-ok","joined":{joined}}}"#))
        }
        "next" => {
            let s = sub.as_mut().ok_or("not subscribed")?;
            let timeout = Duration::from_millis(req.timeout.unwrap_or(0));
            match s.next(timeout).map_err(|e| e.to_string())? {
                None => Ok(r#"{"op":"none"}"#.into()),
                Some(m) => {
                    let payload = std::str::from_utf8(&m.payload)
                        .ok()
                        .filter(|p| serde_json::from_str::<&RawValue>(p).is_ok())
                        .ok_or_else(|| format!("payload at offset {} is not JSON", m.offset))?;
                    Ok(format!(r#"{{"op":"msg","offset":{},"payload":{payload}}}"#, m.offset))
                }
            }
        }
        "ack" => {
            let s = sub.as_mut().ok_or("not subscribed")?;
            s.ack(field(req.offset, "offset")?).map_err(|e| e.to_string())?;
            Ok(r#"{"op":"ack-ok"}"#.into())
        }
        other => Err(format!("unknown op {other:?}")),
    }
}

struct Conn {
    addr: String,
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Conn {
    fn open(addr: &str, attempts: u32) -> Result<Conn, BusError> {
        let mut delay = Duration::from_millis(50);
        let mut last = String::new();
        for attempt in 0..attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay = (delay * 2).min(Duration::from_secs(2));
            }
            match TcpStream::connect(addr) {
                Ok(stream) => {
                    let io = |e: std::io::Error| BusError::Connection { addr: addr.into(), msg: e.to_string() };
                    stream.set_nodelay(true).map_err(io)?;
                    let writer = stream.try_clone().map_err(io)?;
                    return Ok(Conn { addr: addr.into(), reader: BufReader::new(stream), writer });
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(BusError::Connection { addr: addr.into(), msg: format!("gave up after {attempts} attempts: {last}") })
    }

    fn call(&mut self, frame: &str) -> Result<Reply, BusError> {
        let io = |e: std::io::Error| BusError::Connection { addr: self.addr.clone(), msg: e.to_string() };
        self.writer.write_all(frame.as_bytes()).map_err(io)?;
        self.writer.write_all(b"\n").map_err(io)?;
        let mut line = String::new();
        if self.reader.read_line(&mut line).map_err(io)? == 0 {
            return Err(BusError::Connection { addr: self.addr.clone(), msg: "closed by broker".into() });
        }
        let reply: Reply = serde_json::from_str(&line).map_err(|e| BusError::Protocol(e.to_string()))?;
        if reply.op == "error" {
            return Err(BusError::Remote(reply.msg.unwrap_or_default()));
        }
        Ok(reply)
    }
}

fn expect(reply: &Reply, op: &str) -> Result<(), BusError> {
    if reply.op == op {
        Ok(())
    } else {
        Err(BusError::Protocol(format!("expected {op}, got {}", reply.op)))
    }
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("string serialises")
}

/// Client side of [`serve_broker`]. Payloads must be JSON documents.
pub struct RemoteBus {
    addr: String,
    attempts: u32,
    control: Mutex<Conn>,
}

impl RemoteBus {
    /// Connects with bounded exponential backoff (8 attempts, about 5 s).
    pub fn connect(addr: &str) -> Result<Self, BusError> {
        Self::connect_with(addr, 8)
    }

    pub fn connect_with(addr: &str, attempts: u32) -> Result<Self, BusError> {
        let control = Conn::open(addr, attempts)?;
        Ok(RemoteBus { addr: addr.into(), attempts, control: Mutex::new(control) })
    }

    fn control(&self) -> std::sync::MutexGuard<'_, Conn> {
        self.control.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl Bus for RemoteBus {
    fn publish(&self, topic: &str, payload: &[u8]) -> Result<u64, BusError> {
        let raw = std::str::from_utf8(payload)
            .ok()
            .filter(|p| serde_json::from_str::<&RawValue>(p).is_ok())
            .ok_or_else(|| BusError::Protocol("payload is not a JSON document".into()))?;
        let frame = format!(r#"{{"op":"pub","topic":{},"payload":{raw}}}"#, quoted(topic));
        let reply = self.control().call(&frame)?;
        expect(&reply, "pub-ok")?;
        reply.offset.ok_or_else(|| BusError::Protocol("pub-ok without offset".into()))
    }

    fn create_group(&self, topic: &str, group: &str) -> Result<u64, BusError> {
        let frame = format!(r#"{{"op":"group","topic":{},"group":{}}}"#, quoted(topic), quoted(group));
        let reply = self.control().call(&frame)?;
        expect(&reply, "group-ok")?;
        reply.start.ok_or_else(|| BusError::Protocol("group-ok without start".into()))
    }

    fn subscribe(&self, topic: &str, group: &str, consumer: &str) -> Result<Box<dyn Subscription>, BusError> {
        let mut conn = Conn::open(&self.addr, self.attempts)?;
        let frame = format!(
            r#"{{"op":"sub","topic":{},"group":{},"consumer":{}}}"#,
            quoted(topic),
            quoted(group),
            quoted(consumer)
        );
        let reply = conn.call(&frame)?;
        expect(&reply, "sub-ok")?;
        let joined = reply.joined.ok_or_else(|| BusError::Protocol("sub-ok without joined".into()))?;
        Ok(Box::new(RemoteSubscription { conn: Some(conn), joined }))
    }
}

struct RemoteSubscription {
    conn: Option<Conn>,
    joined: u64,
}

impl Subscription for RemoteSubscription {
    fn joined_at(&self) -> u64 {
        self.joined
    }

    fn next(&mut self, timeout: Duration) -> Result<Option<Message>, BusError> {
        let conn = self.conn.as_mut().ok_or(BusError::Closed)?;
        let reply = conn.call(&format!(r#"{{"op":"next","timeout":{}}}"#, timeout.as_millis()))?;
        match reply.op.as_str() {
            "none" => Ok(None),
            "msg" => {
                let offset = reply.offset.ok_or_else(|| BusError::Protocol("msg without offset".into()))?;
                let payload = reply.payload.ok_or_else(|| BusError::Protocol("msg without payload".into()))?;
                Ok(Some(Message { offset, payload: Arc::from(payload.get().as_bytes()) }))
            }
            other => Err(BusError::Protocol(format!("unexpected reply {other}"))),
        }
    }

    fn ack(&mut self, offset: u64) -> Result<(), BusError> {
        let conn = self.conn.as_mut().ok_or(BusError::Closed)?;
        let reply = conn.call(&format!(r#"{{"op":"ack","offset":{offset}}}"#))?;
        expect(&reply, "ack-ok")
    }

    fn close(&mut self) {
        if let Some(conn) = self.conn.take() {
            let _ = conn.writer.shutdown(std::net::Shutdown::Both);
        }
    }
}

impl Drop for RemoteSubscription {
    fn drop(&mut self) {
        self.close();
    }
}
