//! K-way merge of timestamp-ordered inputs.

use std::collections::VecDeque;

use super::OperatorError;
use crate::rdf::GraphEvent;

struct Input {
    name: String,
    queue: VecDeque<GraphEvent>,
    last_ts: Option<i64>,
    closed: bool,
}

/// Merges per-input event sequences into one ordered by
/// `(event_ts, input name, arrival)`.
///
/// An event is released only once no open input can still produce something
/// that sorts before it, so the output is final as soon as it is popped.
pub struct Merger {
    inputs: Vec<Input>,
}

impl Merger {
    /// Input indices follow the sorted order of `names`.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        names.dedup();
        let inputs = names
            .into_iter()
            .map(|name| Input { name, queue: VecDeque::new(), last_ts: None, closed: false })
            .collect();
        Merger { inputs }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|i| i.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|i| i.name == name)
    }

    pub fn push(&mut self, input: usize, event: GraphEvent) -> Result<(), OperatorError> {
        let inp = &mut self.inputs[input];
        let ts = event.event_ts();
        if let Some(prev) = inp.last_ts.filter(|&p| ts < p) {
            return Err(OperatorError::NonMonotonic { topic: inp.name.clone(), previous: prev, got: ts });
        }
        if inp.closed {
            return Err(OperatorError::Protocol(format!("event after end of stream on {}", inp.name)));
        }
        inp.last_ts = Some(ts);
        inp.queue.push_back(event);
        Ok(())
    }

    pub fn close(&mut self, input: usize) {
        self.inputs[input].closed = true;
    }

    pub fn is_closed(&self, input: usize) -> bool {
        self.inputs[input].closed
    }

    pub fn buffered(&self, input: usize) -> usize {
        self.inputs[input].queue.len()
    }

    /// Every input closed and drained.
    pub fn is_finished(&self) -> bool {
        self.inputs.iter().all(|i| i.closed && i.queue.is_empty())
    }

    fn candidate(&self) -> Option<(usize, i64)> {
        self.inputs
            .iter()
            .enumerate()
            .filter_map(|(idx, i)| i.queue.front().map(|e| (idx, e.event_ts())))
            .min_by_key(|&(idx, ts)| (ts, idx))
    }

    /// The first input (if any) that keeps the candidate event `(c, ts)` from
    /// being released.
    fn blocker(&self, c: usize, ts: i64) -> Option<usize> {
        self.inputs.iter().enumerate().position(|(j, i)| {
            j != c
                && i.queue.is_empty()
                && !i.closed
                && match i.last_ts {
                    None => true,
                    Some(last) => last < ts || (last == ts && j < c),
                }
        })
    }

    pub fn pop(&mut self) -> Option<GraphEvent> {
        let (c, ts) = self.candidate()?;
        if self.blocker(c, ts).is_some() {
            return None;
        }
        self.inputs[c].queue.pop_front()
    }

    /// An open input with nothing buffered whose next event is needed before
    /// anything more can be released; `None` when [`Merger::pop`] would
    /// succeed or the merge is finished.
    pub fn waiting_on(&self) -> Option<usize> {
        match self.candidate() {
            Some((c, ts)) => self.blocker(c, ts),
            None => self.inputs.iter().position(|i| !i.closed),
        }
    }
}

/// Merges complete, already-collected inputs.
pub fn merge_order(inputs: Vec<(String, Vec<GraphEvent>)>) -> Result<Vec<GraphEvent>, OperatorError> {
    let mut merger = Merger::new(inputs.iter().map(|(n, _)| n.clone()));
    for (name, events) in inputs {
        let idx = merger.index_of(&name).expect("input registered");
        for e in events {
            merger.push(idx, e)?;
        }
        merger.close(idx);
    }
    let mut out = Vec::new();
    while let Some(e) = merger.pop() {
        out.push(e);
    }
    debug_assert!(merger.is_finished());
    Ok(out)
}
