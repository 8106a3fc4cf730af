use rand::Rng;

use crate::error::{Error, Result};
use crate::gnn::GraphFeatures;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: GraphFeatures,
    pub actions: Vec<bool>,
    pub reward: f64,
    /// `None` at the end of an episode.
    pub next_state: Option<GraphFeatures>,
}

/// Fixed-capacity ring buffer; the oldest transition is overwritten first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        Ok(Self { capacity, items: Vec::new(), next: 0 })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// `n` distinct transitions drawn uniformly without replacement.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<&Transition>> {
        if n > self.items.len() {
            return Err(Error::Underfull { have: self.items.len(), need: n });
        }
        Ok(rand::seq::index::sample(rng, self.items.len(), n)
            .into_iter()
            .map(|k| &self.items[k])
            .collect())
    }
}
