use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use crate::kb::service::{decode_reply, encode_request};
use crate::kb::TriplePattern;

use super::eval::ServiceBackend;
use super::{EngineError, Solution};

const CONNECT_TIMEOUT: Duration = Duration::from_secs(5);
const REPLY_TIMEOUT: Duration = Duration::from_secs(60);

struct Conn {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

/// Persistent connections to named KB services, opened on first use.
pub struct ServiceClients {
    endpoints: BTreeMap<String, String>,
    conns: HashMap<String, Conn>,
    next_id: u64,
}

impl ServiceClients {
    pub fn new(endpoints: BTreeMap<String, String>) -> Self {
        ServiceClients { endpoints, conns: HashMap::new(), next_id: 0 }
    }

    pub fn resolves(&self, endpoint: &str) -> bool {
        self.endpoints.contains_key(endpoint)
    }

    fn connect(&self, endpoint: &str) -> Result<Conn, String> {
        let addr = self.endpoints.get(endpoint).ok_or("endpoint not configured")?;
        let sock = addr
            .to_socket_addrs()
            .map_err(|e| e.to_string())?
            .next()
            .ok_or_else(|| format!("{addr} does not resolve"))?;
        let stream = TcpStream::connect_timeout(&sock, CONNECT_TIMEOUT).map_err(|e| format!("{addr}: {e}"))?;
        stream.set_nodelay(true).map_err(|e| e.to_string())?;
        stream.set_read_timeout(Some(REPLY_TIMEOUT)).map_err(|e| e.to_string())?;
        let writer = stream.try_clone().map_err(|e| e.to_string())?;
        Ok(Conn { reader: BufReader::new(stream), writer })
    }

    fn roundtrip(&mut self, endpoint: &str, patterns: &[TriplePattern]) -> Result<Vec<Solution>, String> {
        if !self.conns.contains_key(endpoint) {
            let c = self.connect(endpoint)?;
            self.conns.insert(endpoint.to_string(), c);
        }
        self.next_id += 1;
        let id = format!("q{}", self.next_id);
        let mut line = encode_request(&id, patterns);
        line.push(b'\n');
        let conn = self.conns.get_mut(endpoint).expect("inserted above");
        let result = (|| {
            conn.writer.write_all(&line).map_err(|e| e.to_string())?;
            let mut reply = String::new();
            let n = conn.reader.read_line(&mut reply).map_err(|e| e.to_string())?;
            if n == 0 {
                return Err("connection closed".to_string());
            }
            Ok(reply)
        })();
        match result {
            Ok(reply) => decode_reply(reply.trim_end(), &id),
            Err(e) => {
                self.conns.remove(endpoint);
                Err(e)
            }
        }
    }
}

impl ServiceBackend for ServiceClients {
    fn query(&mut self, endpoint: &str, patterns: &[TriplePattern]) -> Result<Vec<Solution>, EngineError> {
        self.roundtrip(endpoint, patterns)
            .map_err(|msg| EngineError::Service { endpoint: endpoint.to_string(), msg })
    }
}
