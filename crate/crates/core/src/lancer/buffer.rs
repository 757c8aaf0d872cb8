use std::collections::VecDeque;

use crate::error::{Error, Result};

/// One evaluated surrogate cost: `(ĉ, context, f̂)` with `f̂` in the
/// minimize convention.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferEntry {
    pub c: Vec<f64>,
    pub context: Vec<f64>,
    pub loss: f64,
}

/// Append-only store of every evaluation made so far, optionally capped
/// (oldest entries leave first).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    entries: VecDeque<BufferEntry>,
    capacity: Option<usize>,
    c_dim: usize,
    context_dim: usize,
}

impl ReplayBuffer {
    pub fn new(c_dim: usize, context_dim: usize, capacity: Option<usize>) -> Self {
        ReplayBuffer {
            entries: VecDeque::new(),
            capacity,
            c_dim,
            context_dim,
        }
    }

    pub fn push(&mut self, c: Vec<f64>, context: Vec<f64>, loss: f64) -> Result<()> {
        if c.len() != self.c_dim || context.len() != self.context_dim {
            return Err(Error::dim(format!(
                "buffer holds ({}, {})-wide entries, got ({}, {})",
                self.c_dim,
                self.context_dim,
                c.len(),
                context.len()
            )));
        }
        if !loss.is_finite() || c.iter().chain(&context).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite value offered to the replay buffer".into()));
        }
        if let Some(cap) = self.capacity {
            while self.entries.len() >= cap {
                self.entries.pop_front();
            }
        }
        self.entries.push_back(BufferEntry { c, context, loss });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn c_dim(&self) -> usize {
        self.c_dim
    }

    pub fn context_dim(&self) -> usize {
        self.context_dim
    }

    pub fn iter(&self) -> std::collections::vec_deque::Iter<'_, BufferEntry> {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_cap_drops_oldest() {
        let mut b = ReplayBuffer::new(1, 0, Some(2));
        for i in 0..3 {
            b.push(vec![i as f64], vec![], i as f64).unwrap();
        }
        let losses: Vec<f64> = b.iter().map(|e| e.loss).collect();
        assert_eq!(losses, vec![1.0, 2.0]);
    }

    #[test]
    fn shape_and_finiteness_are_checked() {
        let mut b = ReplayBuffer::new(2, 1, None);
        assert!(b.push(vec![0.0], vec![0.0], 0.0).is_err());
        assert!(b.push(vec![0.0, 0.0], vec![0.0], f64::NAN).is_err());
        assert!(b.is_empty());
    }
}
