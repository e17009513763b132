//! Input readers plus the merge/window/dispatch loop shared by operators and
//! clients.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, SyncSender};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use super::merge::Merger;
use super::window::{Window, WindowKind, Windower};
use super::OperatorError;
use crate::bus::{is_eos, Bus, Subscription, EOS_PAYLOAD};
use crate::rdf::wire::decode_event;
use crate::rdf::{GraphEvent, StreamEvent};

pub(crate) const POLL: Duration = Duration::from_millis(100);

enum Item {
    Event(GraphEvent),
    Eos,
    Failed(OperatorError),
}

pub(crate) struct AggregatorSpec {
    pub id: String,
    pub inputs: Vec<String>,
    pub window: WindowKind,
    pub merge_buffer: usize,
    pub window_topic: String,
    /// Number of downstream consumers; each gets one end-of-stream marker.
    pub consumers: usize,
}

/// Window-dispatch credits handed back by whoever consumes the windows.
pub(crate) struct Credits {
    pub available: usize,
    pub returned: Receiver<()>,
}

type Worker = JoinHandle<Result<u64, OperatorError>>;

/// Subscribes to every input now, so nothing published after this returns is
/// missed, then runs the loop on its own thread. The thread yields the number
/// of windows dispatched.
pub(crate) fn spawn(
    bus: Arc<dyn Bus>,
    spec: AggregatorSpec,
    credits: Option<Credits>,
    stop: Arc<AtomicBool>,
) -> Result<(Vec<Worker>, Worker), OperatorError> {
    let merger = Merger::new(spec.inputs.iter().cloned());
    let mut readers = Vec::new();
    let mut receivers = Vec::new();
    for topic in merger.names() {
        let sub = bus.subscribe(topic, &spec.id, &format!("{}.aggregator", spec.id))?;
        let (tx, rx) = mpsc::sync_channel(spec.merge_buffer.max(1));
        receivers.push(rx);
        let topic = topic.to_string();
        let stop = stop.clone();
        readers.push(
            std::thread::Builder::new()
                .name(format!("{}-read-{topic}", spec.id))
                .spawn(move || read_input(sub, &topic, tx, &stop))
                .map_err(|e| OperatorError::Io(e.to_string()))?,
        );
    }
    let main = std::thread::Builder::new()
        .name(format!("{}-aggregator", spec.id))
        .spawn(move || {
            let r = Aggregator { bus, spec, merger, receivers, credits, stop: stop.clone(), dispatched: 0 }.run();
            if r.is_err() {
                stop.store(true, Ordering::SeqCst);
            }
            r
        })
        .map_err(|e| OperatorError::Io(e.to_string()))?;
    Ok((readers, main))
}

fn read_input(
    mut sub: Box<dyn Subscription>,
    topic: &str,
    tx: SyncSender<Item>,
    stop: &AtomicBool,
) -> Result<u64, OperatorError> {
    let mut seen = 0;
    while !stop.load(Ordering::SeqCst) {
        let Some(msg) = sub.next(POLL)? else { continue };
        sub.ack(msg.offset)?;
        seen += 1;
        let item = if is_eos(&msg.payload) {
            Item::Eos
        } else {
            match decode_event(&msg.payload) {
                Ok(StreamEvent::Graph(g)) => Item::Event(g),
                Ok(StreamEvent::Triple(t)) => match GraphEvent::from_triple(format!("{topic}#{}", msg.offset), t) {
                    Ok(g) => Item::Event(g),
                    Err(e) => Item::Failed(decode_err(topic, msg.offset, e)),
                },
                Err(e) => Item::Failed(decode_err(topic, msg.offset, e)),
            }
        };
        let last = !matches!(item, Item::Event(_));
        if tx.send(item).is_err() || last {
            break;
        }
    }
    Ok(seen)
}

fn decode_err(topic: &str, offset: u64, e: impl std::fmt::Display) -> OperatorError {
    OperatorError::Decode { topic: topic.into(), offset, msg: e.to_string() }
}

struct Aggregator {
    bus: Arc<dyn Bus>,
    spec: AggregatorSpec,
    merger: Merger,
    receivers: Vec<Receiver<Item>>,
    credits: Option<Credits>,
    stop: Arc<AtomicBool>,
    dispatched: u64,
}

impl Aggregator {
    fn run(mut self) -> Result<u64, OperatorError> {
        let mut windower = Windower::new(self.spec.window);
        let mut ready: VecDeque<Window> = VecDeque::new();
        loop {
            while let Some(e) = self.merger.pop() {
                ready.extend(windower.push(e));
            }
            if self.merger.is_finished() {
                ready.extend(windower.flush());
            }
            self.dispatch(&mut ready)?;
            if self.merger.is_finished() {
                break;
            }
            let Some(input) = self.merger.waiting_on() else { continue };
            match self.receivers[input].recv_timeout(POLL) {
                Ok(Item::Event(e)) => self.merger.push(input, e)?,
                Ok(Item::Eos) => self.merger.close(input),
                Ok(Item::Failed(e)) => return Err(e),
                Err(RecvTimeoutError::Timeout) => self.check_stop()?,
                Err(RecvTimeoutError::Disconnected) => {
                    self.check_stop()?;
                    return Err(OperatorError::Protocol("input reader ended before end of stream".into()));
                }
            }
        }
        for _ in 0..self.spec.consumers {
            self.bus.publish(&self.spec.window_topic, EOS_PAYLOAD)?;
        }
        Ok(self.dispatched)
    }

    fn check_stop(&self) -> Result<(), OperatorError> {
        if self.stop.load(Ordering::SeqCst) {
            Err(OperatorError::Stopped)
        } else {
            Ok(())
        }
    }

    /// Publishes ready windows, blocking for credits when they run out.
    fn dispatch(&mut self, ready: &mut VecDeque<Window>) -> Result<(), OperatorError> {
        while let Some(w) = ready.front() {
            if let Some(c) = self.credits.as_mut() {
                while let Ok(()) = c.returned.try_recv() {
                    c.available += 1;
                }
                while c.available == 0 {
                    match c.returned.recv_timeout(POLL) {
                        Ok(()) => c.available += 1,
                        Err(RecvTimeoutError::Timeout) => {
                            if self.stop.load(Ordering::SeqCst) {
                                return Err(OperatorError::Stopped);
                            }
                        }
                        Err(RecvTimeoutError::Disconnected) => return Err(OperatorError::Stopped),
                    }
                }
                c.available -= 1;
            }
            self.bus.publish(&self.spec.window_topic, &w.encode())?;
            self.dispatched += 1;
            ready.pop_front();
        }
        Ok(())
    }
}
