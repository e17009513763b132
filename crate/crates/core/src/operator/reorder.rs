use std::collections::BTreeMap;

use super::OperatorError;

/// Holds results that finished out of order and releases them by sequence
/// number.
#[derive(Debug)]
pub struct ReorderBuffer<T> {
    next: u64,
    capacity: usize,
    pending: BTreeMap<u64, T>,
}

impl<T> ReorderBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        ReorderBuffer { next: 0, capacity: capacity.max(1), pending: BTreeMap::new() }
    }

    /// Sequence number the next release must carry.
    pub fn expected(&self) -> u64 {
        self.next
    }

    pub fn held(&self) -> usize {
        self.pending.len()
    }

    /// Accepts `item` for `seq` and returns whatever became releasable, in
    /// order.
    pub fn insert(&mut self, seq: u64, item: T) -> Result<Vec<T>, OperatorError> {
        if seq < self.next || self.pending.contains_key(&seq) {
            return Err(OperatorError::DuplicateWindow(seq));
        }
        self.pending.insert(seq, item);
        if self.pending.len() > self.capacity {
            return Err(OperatorError::ReorderOverflow {
                expected: self.next,
                held: self.pending.len(),
                capacity: self.capacity,
            });
        }
        let mut out = Vec::new();
        while let Some(item) = self.pending.remove(&self.next) {
            out.push(item);
            self.next += 1;
        }
        Ok(out)
    }
}
