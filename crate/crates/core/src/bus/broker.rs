use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use super::{Bus, BusError, Message, Subscription};

/// In-process broker. Clones share the same topics.
#[derive(Clone, Default)]
pub struct Broker {
    inner: Arc<Inner>,
}

#[derive(Default)]
struct Inner {
    topics: Mutex<HashMap<String, Topic>>,
    published: Condvar,
}

#[derive(Default)]
struct Topic {
    /// Offset of `messages[0]`; everything below was settled by every group.
    base: u64,
    messages: VecDeque<Arc<[u8]>>,
    groups: HashMap<String, Group>,
}

struct Group {
    members: HashSet<String>,
    next_offset: u64,
    in_flight: BTreeMap<u64, String>,
}

impl Topic {
    fn end(&self) -> u64 {
        self.base + self.messages.len() as u64
    }

    fn group(&mut self, name: &str) -> &mut Group {
        let end = self.end();
        self.groups
            .entry(name.to_string())
            .or_insert_with(|| Group { members: HashSet::new(), next_offset: end, in_flight: BTreeMap::new() })
    }

    /// Drops messages no group can still be handed.
    fn trim(&mut self) {
        let low = self
            .groups
            .values()
            .map(|g| g.in_flight.keys().next().copied().unwrap_or(g.next_offset).min(g.next_offset))
            .min()
            .unwrap_or_else(|| self.end());
        while self.base < low && !self.messages.is_empty() {
            self.messages.pop_front();
            self.base += 1;
        }
    }
}

impl Broker {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> MutexGuard<'_, HashMap<String, Topic>> {
        self.inner.topics.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Offset the next publish on `topic` will get.
    pub fn end_offset(&self, topic: &str) -> u64 {
        self.lock().get(topic).map_or(0, Topic::end)
    }

    /// Messages still held for some group.
    pub fn retained(&self, topic: &str) -> usize {
        self.lock().get(topic).map_or(0, |t| t.messages.len())
    }

    fn claim(&self, topic: &str, group: &str, consumer: &str, timeout: Duration) -> Result<Option<Message>, BusError> {
        let deadline = Instant::now() + timeout;
        let mut topics = self.lock();
        loop {
            let t = topics.get_mut(topic).ok_or(BusError::Closed)?;
            let base = t.base;
            let end = t.end();
            let g = t.groups.get_mut(group).ok_or(BusError::Closed)?;
            if !g.members.contains(consumer) {
                return Err(BusError::Closed);
            }
            if g.next_offset < end {
                let offset = g.next_offset;
                g.next_offset += 1;
                g.in_flight.insert(offset, consumer.to_string());
                let payload = t.messages[(offset - base) as usize].clone();
                return Ok(Some(Message { offset, payload }));
            }
            let now = Instant::now();
            if now >= deadline {
                return Ok(None);
            }
            topics = self
                .inner
                .published
                .wait_timeout(topics, deadline - now)
                .unwrap_or_else(|e| e.into_inner())
                .0;
        }
    }

    fn settle(&self, topic: &str, group: &str, consumer: &str, offset: u64) -> Result<(), BusError> {
        let mut topics = self.lock();
        let not_in_flight = || BusError::NotInFlight { offset, consumer: consumer.to_string() };
        let t = topics.get_mut(topic).ok_or_else(not_in_flight)?;
        let g = t.groups.get_mut(group).ok_or_else(not_in_flight)?;
        if !g.members.contains(consumer) {
            return Err(BusError::Closed);
        }
        match g.in_flight.get(&offset) {
            Some(owner) if owner == consumer => {
                g.in_flight.remove(&offset);
            }
            _ => return Err(not_in_flight()),
        }
        t.trim();
        Ok(())
    }

    fn leave(&self, topic: &str, group: &str, consumer: &str) {
        if let Some(g) = self.lock().get_mut(topic).and_then(|t| t.groups.get_mut(group)) {
            g.members.remove(consumer);
        }
        // Wake a waiter blocked in `claim` for this consumer.
        self.inner.published.notify_all();
    }
}

impl Bus for Broker {
    fn publish(&self, topic: &str, payload: &[u8]) -> Result<u64, BusError> {
        let mut topics = self.lock();
        let t = topics.entry(topic.to_string()).or_default();
        let offset = t.end();
        t.messages.push_back(Arc::from(payload));
        if t.groups.is_empty() {
            t.trim();
        }
        drop(topics);
        self.inner.published.notify_all();
        Ok(offset)
    }

    fn create_group(&self, topic: &str, group: &str) -> Result<u64, BusError> {
        let mut topics = self.lock();
        let g = topics.entry(topic.to_string()).or_default().group(group);
        Ok(g.in_flight.keys().next().copied().unwrap_or(g.next_offset).min(g.next_offset))
    }

    fn subscribe(&self, topic: &str, group: &str, consumer: &str) -> Result<Box<dyn Subscription>, BusError> {
        let mut topics = self.lock();
        let g = topics.entry(topic.to_string()).or_default().group(group);
        if !g.members.insert(consumer.to_string()) {
            return Err(BusError::DuplicateConsumer {
                topic: topic.into(),
                group: group.into(),
                consumer: consumer.into(),
            });
        }
        let joined_at = g.next_offset;
        Ok(Box::new(LocalSubscription {
            broker: self.clone(),
            topic: topic.into(),
            group: group.into(),
            consumer: consumer.into(),
            joined_at,
            open: true,
        }))
    }
}

struct LocalSubscription {
    broker: Broker,
    topic: String,
    group: String,
    consumer: String,
    joined_at: u64,
    open: bool,
}

impl Subscription for LocalSubscription {
    fn joined_at(&self) -> u64 {
        self.joined_at
    }

    fn next(&mut self, timeout: Duration) -> Result<Option<Message>, BusError> {
        if !self.open {
            return Err(BusError::Closed);
        }
        self.broker.claim(&self.topic, &self.group, &self.consumer, timeout)
    }

    fn ack(&mut self, offset: u64) -> Result<(), BusError> {
        if !self.open {
            return Err(BusError::Closed);
        }
        self.broker.settle(&self.topic, &self.group, &self.consumer, offset)
    }

    fn close(&mut self) {
        if std::mem::replace(&mut self.open, false) {
            self.broker.leave(&self.topic, &self.group, &self.consumer);
        }
    }
}

impl Drop for LocalSubscription {
    fn drop(&mut self) {
        self.close();
    }
}
