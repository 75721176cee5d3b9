//! Fixed-capacity ring buffer of pixel coordinates.

/// One queued event, 4 bytes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[repr(C)]
pub struct QueueEntry {
    pub x: u16,
    pub y: u16,
}

/// FIFO over a preallocated buffer. Events enter at the back and leave from
/// the front; nothing is allocated after construction.
#[derive(Clone, Debug)]
pub struct ActiveQueue {
    buf: Box<[QueueEntry]>,
    head: usize,
    len: usize,
}

impl ActiveQueue {
    pub fn with_capacity(capacity: usize) -> Self {
        assert!(capacity > 0);
        ActiveQueue {
            buf: vec![QueueEntry::default(); capacity].into_boxed_slice(),
            head: 0,
            len: 0,
        }
    }

    #[inline(always)]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline(always)]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline(always)]
    pub fn capacity(&self) -> usize {
        self.buf.len()
    }

    /// Returns false when full.
    #[inline(always)]
    pub fn push_back(&mut self, entry: QueueEntry) -> bool {
        let cap = self.buf.len();
        if self.len == cap {
            return false;
        }
        let mut idx = self.head + self.len;
        if idx >= cap {
            idx -= cap;
        }
        self.buf[idx] = entry;
        self.len += 1;
        true
    }

    #[inline(always)]
    pub fn pop_front(&mut self) -> Option<QueueEntry> {
        if self.len == 0 {
            return None;
        }
        let e = self.buf[self.head];
        self.head += 1;
        if self.head == self.buf.len() {
            self.head = 0;
        }
        self.len -= 1;
        Some(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = QueueEntry> + '_ {
        let cap = self.buf.len();
        (0..self.len).map(move |i| self.buf[(self.head + i) % cap])
    }

    pub fn clear(&mut self) {
        self.head = 0;
        self.len = 0;
    }

    pub fn heap_bytes(&self) -> usize {
        self.buf.len() * std::mem::size_of::<QueueEntry>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    use proptest::prelude::*;

    #[test]
    fn wraps_around() {
        let mut q = ActiveQueue::with_capacity(3);
        for i in 0..10u16 {
            assert!(q.push_back(QueueEntry { x: i, y: 0 }));
            if q.len() == 3 {
                assert_eq!(q.pop_front().unwrap().x, i - 2);
            }
        }
        assert_eq!(q.iter().map(|e| e.x).collect::<Vec<_>>(), vec![8, 9]);
        assert!(q.push_back(QueueEntry::default()));
        assert!(!q.push_back(QueueEntry::default()));
        assert_eq!(std::mem::size_of::<QueueEntry>(), 4);
    }

    proptest! {
        #[test]
        fn behaves_like_vecdeque(ops in prop::collection::vec(any::<Option<u16>>(), 0..300)) {
            let mut q = ActiveQueue::with_capacity(17);
            let mut model = VecDeque::new();
            for op in ops {
                match op {
                    Some(x) => {
                        let ok = q.push_back(QueueEntry { x, y: x });
                        prop_assert_eq!(ok, model.len() < 17);
                        if ok { model.push_back(x); }
                    }
                    None => prop_assert_eq!(q.pop_front().map(|e| e.x), model.pop_front()),
                }
                prop_assert_eq!(q.len(), model.len());
            }
        }
    }
}
