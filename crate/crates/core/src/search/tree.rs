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

//! Flat state storage and the parent/label trees grown over it.

use crate::state::{euclid, StateVector};

/// States addressed by dense integer ids.
#[derive(Debug, Clone, PartialEq)]
pub struct StateStore {
    dim: usize,
    coords: Vec<f64>,
}

impl StateStore {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn push(&mut self, x: &[f64]) -> usize {
        assert_eq!(x.len(), self.dim, "state dimension mismatch");
        self.coords.extend_from_slice(x);
        self.len() - 1
    }

    #[inline]
    pub fn get(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn state(&self, id: usize) -> StateVector {
        StateVector::from_vec_unchecked(self.get(id).to_vec())
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        euclid(self.get(a), self.get(b))
    }
}

/// A rooted tree over state ids with a cost label per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchTree {
    root: usize,
    parent: Vec<Option<usize>>,
    label: Vec<f64>,
    children: Vec<Vec<usize>>,
}

impl SearchTree {
    pub fn new(root: usize, capacity: usize) -> Self {
        let mut t = Self {
            root,
            parent: Vec::new(),
            label: Vec::new(),
            children: Vec::new(),
        };
        t.reset(root, capacity);
        t
    }

    /// Drops every vertex except the root.
    pub fn reset(&mut self, root: usize, capacity: usize) {
        self.root = root;
        self.parent.clear();
        self.label.clear();
        self.children.clear();
        self.grow(capacity.max(root + 1));
        self.label[root] = 0.0;
    }

    pub fn grow(&mut self, capacity: usize) {
        if capacity > self.label.len() {
            self.parent.resize(capacity, None);
            self.label.resize(capacity, f64::INFINITY);
            self.children.resize_with(capacity, Vec::new);
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.label.len() && self.label[v].is_finite()
    }

    /// Cost label; infinite for vertices outside the tree.
    #[inline]
    pub fn label(&self, v: usize) -> f64 {
        self.label.get(v).copied().unwrap_or(f64::INFINITY)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent.get(v).copied().flatten()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        self.children.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Attaches `v` below `p` with the given label, detaching it from any
    /// previous parent.
    pub fn set_parent(&mut self, v: usize, p: usize, label: f64) {
        self.grow(v.max(p) + 1);
        debug_assert_ne!(v, self.root, "the root has no parent");
        if let Some(old) = self.parent[v] {
            self.children[old].retain(|&c| c != v);
        }
        self.parent[v] = Some(p);
        self.children[p].push(v);
        self.label[v] = label;
    }

    /// Sets the label of `v` only.
    pub fn set_label(&mut self, v: usize, label: f64) {
        self.grow(v + 1);
        self.label[v] = label;
    }

    /// Removes `v` and its descendants.
    pub fn detach_subtree(&mut self, v: usize) {
        if let Some(p) = self.parent(v) {
            self.children[p].retain(|&c| c != v);
        }
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            stack.extend(std::mem::take(&mut self.children[u]));
            self.parent[u] = None;
            self.label[u] = f64::INFINITY;
        }
    }

    /// Ids from the root down to `v`.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Ancestors of `v`, nearest first.
    pub fn ancestors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let mut cur = self.parent(v);
        std::iter::from_fn(move || {
            let out = cur?;
            cur = self.parent(out);
            Some(out)
        })
    }

    /// Adds `delta` to the labels of all descendants of `v`; returns them.
    pub fn shift_descendants(&mut self, v: usize, delta: f64) -> Vec<usize> {
        let mut touched = Vec::new();
        let mut stack: Vec<usize> = self.children[v].clone();
        while let Some(u) = stack.pop() {
            self.label[u] += delta;
            touched.push(u);
            stack.extend_from_slice(&self.children[u]);
        }
        touched
    }

    pub fn capacity(&self) -> usize {
        self.label.len()
    }
}
