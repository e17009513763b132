//! Topic bus with consumer groups.
//!
//! Every topic is a single append-only log. A consumer group pulls from it
//! with `next`/`ack`; each offset goes to exactly one member of each group.
//! Groups start at the end of the topic when they are created, so nothing
//! published earlier is ever replayed to them.

mod broker;
mod socket;

use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

pub use broker::Broker;
pub use socket::{serve_broker, BrokerServer, RemoteBus};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BusError {
    #[error("consumer {consumer:?} already in group {group:?} on {topic:?}")]
    DuplicateConsumer { topic: String, group: String, consumer: String },
    #[error("offset {offset} is not in flight for {consumer:?}")]
    NotInFlight { offset: u64, consumer: String },
    #[error("subscription closed")]
    Closed,
    #[error("connection to {addr}: {msg}")]
    Connection { addr: String, msg: String },
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("broker: {0}")]
    Remote(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub offset: u64,
    pub payload: Arc<[u8]>,
}

/// Handle on a bus, shared between the activities of one process.
pub trait Bus: Send + Sync {
    /// Appends to `topic`, creating it when needed; returns the offset.
    fn publish(&self, topic: &str, payload: &[u8]) -> Result<u64, BusError>;

    /// Declares a group without members so messages published from now on
    /// are kept for it. Idempotent; returns the group's starting offset.
    fn create_group(&self, topic: &str, group: &str) -> Result<u64, BusError>;

    fn subscribe(&self, topic: &str, group: &str, consumer: &str) -> Result<Box<dyn Subscription>, BusError>;
}

/// One member's view of a consumer group; owned by a single activity.
pub trait Subscription: Send {
    /// First offset this member can be handed.
    fn joined_at(&self) -> u64;

    /// Claims the lowest unclaimed offset for the group, waiting up to
    /// `timeout` for one to be published.
    fn next(&mut self, timeout: Duration) -> Result<Option<Message>, BusError>;

    fn ack(&mut self, offset: u64) -> Result<(), BusError>;

    /// Leaves the group. Later calls fail with [`BusError::Closed`].
    fn close(&mut self);
}

/// End-of-stream marker payload.
pub const EOS_PAYLOAD: &[u8] = br#"{"op":"eos"}"#;

pub fn is_eos(payload: &[u8]) -> bool {
    #[derive(serde::Deserialize)]
    struct Op<'a> {
        op: Option<&'a str>,
    }
    // Cheap prefix check first; event payloads never start with `{"op"`.
    payload.starts_with(br#"{"op""#)
        && serde_json::from_slice::<Op>(payload).is_ok_and(|o| o.op == Some("eos"))
}

impl<B: Bus + ?Sized> Bus for Arc<B> {
    fn publish(&self, topic: &str, payload: &[u8]) -> Result<u64, BusError> {
        (**self).publish(topic, payload)
    }

    fn create_group(&self, topic: &str, group: &str) -> Result<u64, BusError> {
        (**self).create_group(topic, group)
    }

    fn subscribe(&self, topic: &str, group: &str, consumer: &str) -> Result<Box<dyn Subscription>, BusError> {
        (**self).subscribe(topic, group, consumer)
    }
}

#[cfg(test)]
mod tests;
