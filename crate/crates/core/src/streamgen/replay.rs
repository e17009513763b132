use std::io::BufRead;
use std::path::Path;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bus::{Bus, BusError, EOS_PAYLOAD};
use crate::rdf::wire::encode_graph_event;
use crate::rdf::{decode_event, GraphEvent, StreamEvent};

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: timestamp {ts} goes back from {previous}")]
    Order { line: usize, previous: i64, ts: i64 },
}

/// A validated stream file line, kept verbatim for publishing.
#[derive(Debug, Clone)]
pub struct StreamLine {
    pub payload: Vec<u8>,
    pub triples: usize,
    pub ts: i64,
}

impl StreamLine {
    pub fn from_event(e: &GraphEvent) -> Self {
        StreamLine { payload: encode_graph_event(e), triples: e.len(), ts: e.event_ts() }
    }
}

pub fn read_stream(path: &Path) -> Result<Vec<StreamLine>, StreamError> {
    let io = |e: std::io::Error| StreamError::Io { path: path.display().to_string(), msg: e.to_string() };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    let mut previous = i64::MIN;
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |msg: String| StreamError::Parse { line: n + 1, msg };
        let (triples, ts) = match decode_event(line.as_bytes()).map_err(|e| parse(e.to_string()))? {
            StreamEvent::Graph(g) => (g.len(), g.event_ts()),
            StreamEvent::Triple(t) => (1, t.ts),
        };
        if ts < previous {
            return Err(StreamError::Order { line: n + 1, previous, ts });
        }
        previous = ts;
        out.push(StreamLine { payload: line.into_bytes(), triples, ts });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub events: u64,
    pub triples: u64,
    pub duration: Duration,
    /// Triples per second over the whole run.
    pub achieved_rate: f64,
    /// Extremes of the trailing one-second triple count, sampled at every
    /// publish from one second into the run; `None` for shorter runs.
    pub rolling_min: Option<u64>,
    pub rolling_max: Option<u64>,
}

/// Publishes `lines` in order at `rate` triples per second, then the
/// end-of-stream marker. A rate of 0 publishes as fast as possible.
///
/// Each event is held until its scheduled instant (triples sent before it
/// divided by the rate), so pacing errors never accumulate.
pub fn replay(lines: &[StreamLine], rate: f64, topic: &str, bus: &dyn Bus) -> Result<ReplayReport, BusError> {
    let start = Instant::now();
    let mut sent: u64 = 0;
    let mut stamps: Vec<(Duration, u64)> = Vec::with_capacity(lines.len());
    for line in lines {
        if rate > 0.0 {
            let due = Duration::from_secs_f64(sent as f64 / rate);
            let now = start.elapsed();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
        bus.publish(topic, &line.payload)?;
        sent += line.triples as u64;
        stamps.push((start.elapsed(), line.triples as u64));
    }
    bus.publish(topic, EOS_PAYLOAD)?;
    let duration = stamps.last().map_or(Duration::ZERO, |s| s.0);
    let (rolling_min, rolling_max) = rolling_extremes(&stamps, Duration::from_secs(1));
    Ok(ReplayReport {
        events: lines.len() as u64,
        triples: sent,
        duration,
        achieved_rate: if duration.is_zero() { 0.0 } else { sent as f64 / duration.as_secs_f64() },
        rolling_min,
        rolling_max,
    })
}

/// Min and max triples published within `(t - span, t]` over sample points
/// `t` at each publish with `t >= span`.
fn rolling_extremes(stamps: &[(Duration, u64)], span: Duration) -> (Option<u64>, Option<u64>) {
    let mut lo = 0;
    let mut in_window = 0u64;
    let mut extremes: Option<(u64, u64)> = None;
    for &(t, n) in stamps {
        in_window += n;
        while stamps[lo].0 + span <= t {
            in_window -= stamps[lo].1;
            lo += 1;
        }
        if t >= span {
            extremes = Some(match extremes {
                None => (in_window, in_window),
                Some((a, b)) => (a.min(in_window), b.max(in_window)),
            });
        }
    }
    (extremes.map(|e| e.0), extremes.map(|e| e.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rolling_window_counts() {
        let ms = Duration::from_millis;
        let stamps = [(ms(0), 10), (ms(500), 10), (ms(1000), 10), (ms(1500), 10), (ms(1600), 5)];
        // At 1000: (0, 1000] holds 500 and 1000; at 1500: 1000, 1500; at 1600: 1000, 1500, 1600.
        assert_eq!(rolling_extremes(&stamps, ms(1000)), (Some(20), Some(25)));
        assert_eq!(rolling_extremes(&stamps[..2], ms(1000)), (None, None));
    }
}
