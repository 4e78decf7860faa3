/*
  Copyright 2026 The jitstar Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/

//! Edge queue ordered lexicographically by `(key1, key2)` with insertion
//! order breaking ties.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Two-level priority of an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Key {
    pub key1: f64,
    pub key2: f64,
}

impl Key {
    pub fn new(key1: f64, key2: f64) -> Self {
        Self { key1, key2 }
    }
}

#[derive(Debug, Clone)]
struct Entry<T> {
    key: Key,
    seq: u64,
    item: T,
}

impl<T> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Entry<T> {}

impl<T> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Entry<T> {
    // reversed so the max-heap pops the smallest key first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .key1
            .total_cmp(&self.key.key1)
            .then_with(|| other.key.key2.total_cmp(&self.key.key2))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone)]
pub struct EdgeQueue<T> {
    heap: BinaryHeap<Entry<T>>,
    seq: u64,
}

impl<T> Default for EdgeQueue<T> {
    fn default() -> Self {
        Self {
            heap: BinaryHeap::new(),
            seq: 0,
        }
    }
}

impl<T> EdgeQueue<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: Key, item: T) {
        self.heap.push(Entry {
            key,
            seq: self.seq,
            item,
        });
        self.seq += 1;
    }

    pub fn pop(&mut self) -> Option<(Key, T)> {
        self.heap.pop().map(|e| (e.key, e.item))
    }

    pub fn peek_key(&self) -> Option<Key> {
        self.heap.peek().map(|e| e.key)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn clear(&mut self) {
        self.heap.clear();
    }
}
