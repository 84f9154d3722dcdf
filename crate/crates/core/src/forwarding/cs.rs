use std::collections::{BTreeMap, HashMap};

use crate::naming::ContentName;

/// LRU content store bounded by a packet count.
#[derive(Debug, Clone)]
pub struct ContentStore<V> {
    capacity: usize,
    tick: u64,
    entries: HashMap<ContentName, (V, u64)>,
    order: BTreeMap<u64, ContentName>,
}

impl<V: Clone> ContentStore<V> {
    pub fn new(capacity: usize) -> Self {
        ContentStore {
            capacity,
            tick: 0,
            entries: HashMap::new(),
            order: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn bump(&mut self) -> u64 {
        self.tick += 1;
        self.tick
    }

    /// Insert or refresh; evicts the least recently used entry when full.
    /// Returns the evicted name, if any.
    pub fn insert(&mut self, name: ContentName, value: V) -> Option<ContentName> {
        if self.capacity == 0 {
            return None;
        }
        let t = self.bump();
        if let Some((v, old)) = self.entries.get_mut(&name) {
            self.order.remove(old);
            *v = value;
            *old = t;
            self.order.insert(t, name);
            return None;
        }
        let mut evicted = None;
        if self.entries.len() >= self.capacity {
            if let Some((_, victim)) = self.order.pop_first() {
                self.entries.remove(&victim);
                evicted = Some(victim);
            }
        }
        self.entries.insert(name.clone(), (value, t));
        self.order.insert(t, name);
        evicted
    }

    /// Lookup refreshes recency on a hit.
    pub fn lookup(&mut self, name: &ContentName) -> Option<V> {
        let t = self.tick + 1;
        let (v, old) = self.entries.get_mut(name)?;
        self.tick = t;
        let prev = std::mem::replace(old, t);
        let out = v.clone();
        let n = self.order.remove(&prev).expect("order out of sync");
        self.order.insert(t, n);
        Some(out)
    }

    pub fn contains(&self, name: &ContentName) -> bool {
        self.entries.contains_key(name)
    }
}
