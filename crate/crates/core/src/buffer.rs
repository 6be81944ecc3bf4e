use serde::{Deserialize, Serialize};

/// Contiguous FIFO that pops from the front by advancing a head offset and
/// compacts lazily, so the live contents are always one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<T>", into = "Vec<T>")]
pub(crate) struct SlidingBuffer<T: Copy> {
    data: Vec<T>,
    head: usize,
}

impl<T: Copy> SlidingBuffer<T> {
    pub fn new() -> Self {
        Self {
            data: Vec::new(),
            head: 0,
        }
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            data: Vec::with_capacity(capacity),
            head: 0,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() - self.head
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data[self.head..]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data[self.head..]
    }

    #[inline]
    pub fn push_back(&mut self, value: T) {
        self.data.push(value);
    }

    pub fn pop_front(&mut self) -> Option<T> {
        if self.is_empty() {
            return None;
        }
        let value = self.data[self.head];
        self.head += 1;
        // Amortized O(1): compact once the dead prefix outweighs the live part.
        if self.head >= 1024 && self.head >= self.len() {
            self.data.drain(..self.head);
            self.head = 0;
        }
        Some(value)
    }

    pub fn last(&self) -> Option<&T> {
        self.as_slice().last()
    }

    pub fn clear(&mut self) {
        self.data.clear();
        self.head = 0;
    }
}

impl<T: Copy> Default for SlidingBuffer<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Copy> From<Vec<T>> for SlidingBuffer<T> {
    fn from(data: Vec<T>) -> Self {
        Self { data, head: 0 }
    }
}

impl<T: Copy> From<SlidingBuffer<T>> for Vec<T> {
    fn from(mut buf: SlidingBuffer<T>) -> Self {
        buf.data.drain(..buf.head);
        buf.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_order_survives_compaction() {
        let mut buf = SlidingBuffer::new();
        for i in 0..5000u32 {
            buf.push_back(i);
            if i >= 100 {
                assert_eq!(buf.pop_front(), Some(i - 100));
            }
        }
        assert_eq!(buf.len(), 100);
        assert_eq!(buf.as_slice()[0], 4900);
        assert_eq!(buf.last(), Some(&4999));
    }

    #[test]
    fn serializes_live_contents_only() {
        let mut buf = SlidingBuffer::new();
        buf.push_back(1.0);
        buf.push_back(2.0);
        buf.pop_front();
        let json = serde_json::to_string(&buf).unwrap();
        assert_eq!(json, "[2.0]");
        let back: SlidingBuffer<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.as_slice(), &[2.0]);
    }
}
