use std::collections::VecDeque;

/// Drop-tail FIFO at the gateway holding the arrival time of each packet.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayQueue {
    capacity: usize,
    arrivals: VecDeque<f64>,
}

impl RelayQueue {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            arrivals: VecDeque::with_capacity(capacity.min(4096)),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn occupancy(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// Returns false (and drops the packet) when the queue is full.
    pub fn push(&mut self, arrival: f64) -> bool {
        if self.arrivals.len() >= self.capacity {
            return false;
        }
        self.arrivals.push_back(arrival);
        true
    }

    pub fn pop(&mut self) -> Option<f64> {
        self.arrivals.pop_front()
    }

    pub fn front_arrival(&self) -> Option<f64> {
        self.arrivals.front().copied()
    }
}
