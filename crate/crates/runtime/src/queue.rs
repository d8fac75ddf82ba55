use std::sync::atomic::{AtomicU64, Ordering};

use crossbeam_queue::ArrayQueue;

/// Bounded multi-producer queue that never blocks: when full, the oldest
/// message is dropped and counted.
#[derive(Debug)]
pub struct BoundedQueue<T> {
    inner: ArrayQueue<T>,
    dropped: AtomicU64,
}

impl<T> BoundedQueue<T> {
    pub const DEFAULT_CAPACITY: usize = 1024;

    pub fn new(capacity: usize) -> Self {
        BoundedQueue { inner: ArrayQueue::new(capacity.max(1)), dropped: AtomicU64::new(0) }
    }

    pub fn push(&self, v: T) {
        if self.inner.force_push(v).is_some() {
            self.dropped.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn pop(&self) -> Option<T> {
        self.inner.pop()
    }

    /// Everything queued right now, oldest first.
    pub fn drain(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.inner.len());
        while let Some(v) = self.inner.pop() {
            out.push(v);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.inner.capacity()
    }

    /// Messages lost to overflow so far.
    pub fn dropped(&self) -> u64 {
        self.dropped.load(Ordering::Relaxed)
    }
}

impl<T> Default for BoundedQueue<T> {
    fn default() -> Self {
        Self::new(Self::DEFAULT_CAPACITY)
    }
}
