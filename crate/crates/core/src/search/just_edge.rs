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

//! Adaptive ancestor expansion: connect a vertex directly to the farthest
//! ancestors it can see, with a surrogate state when the walk is blocked.

use super::tree::{SearchTree, StateStore};
use crate::state::{lerp_coords, StateVector};

/// Edge validity used while walking ancestors.
pub trait EdgeOracle {
    fn collision_free(&mut self, a: &[f64], b: &[f64]) -> bool;

    /// Edge between two stored vertices; oracles with a verdict cache
    /// override this to look it up by id.
    fn vertices_free(&mut self, _ids: (usize, usize), a: &[f64], b: &[f64]) -> bool {
        self.collision_free(a, b)
    }
}

impl<F: FnMut(&[f64], &[f64]) -> bool> EdgeOracle for F {
    fn collision_free(&mut self, a: &[f64], b: &[f64]) -> bool {
        self(a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ancestor {
    Vertex(usize),
    /// A new state on the tree edge between `x_prev` and its parent
    /// `x_tmp`, stored as `(x_prev, x_tmp)`.
    Surrogate {
        state: StateVector,
        between: (usize, usize),
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct JustEdge {
    /// Baseline neighbours followed by visible ancestors not already listed.
    pub neighbors: Vec<usize>,
    pub ancestors: Vec<Ancestor>,
}

impl JustEdge {
    pub fn vertex_ancestors(&self) -> Vec<usize> {
        self.ancestors
            .iter()
            .filter_map(|a| match a {
                Ancestor::Vertex(v) => Some(*v),
                Ancestor::Surrogate { .. } => None,
            })
            .collect()
    }

    pub fn surrogate(&self) -> Option<(&StateVector, (usize, usize))> {
        self.ancestors.iter().find_map(|a| match a {
            Ancestor::Surrogate { state, between } => Some((state, *between)),
            Ancestor::Vertex(_) => None,
        })
    }
}

/// Walks up from `x` for at most `tau + 1` steps. Every ancestor with a
/// collision-free connection to `x` joins the ancestor set; at the first
/// blocked ancestor `x_tmp`, up to `m` evenly spaced states on the edge
/// from the last visible vertex `x_prev` to `x_tmp` are tried, starting
/// next to `x_tmp`, and the first one that sees both `x` and `x_tmp`
/// becomes a surrogate. The walk then stops.
pub fn just_edge(
    x: usize,
    tree: &SearchTree,
    store: &StateStore,
    baseline: &[usize],
    oracle: &mut dyn EdgeOracle,
    tau: usize,
    m: usize,
) -> JustEdge {
    let mut out = JustEdge {
        neighbors: baseline.to_vec(),
        ancestors: Vec::new(),
    };
    let xs = store.get(x);
    let mut x_prev = x;
    let mut x_tmp = tree.parent(x);
    let mut steps = 0;
    while let Some(t) = x_tmp {
        if steps > tau {
            break;
        }
        steps += 1;
        if oracle.vertices_free((x, t), xs, store.get(t)) {
            out.ancestors.push(Ancestor::Vertex(t));
            x_prev = t;
            x_tmp = tree.parent(t);
            continue;
        }
        let (p, q) = (store.get(x_prev), store.get(t));
        for j in (1..=m).rev() {
            let frac = j as f64 / (m + 1) as f64;
            let cand = lerp_coords(p, q, frac);
            if oracle.collision_free(xs, &cand) && oracle.collision_free(&cand, q) {
                out.ancestors.push(Ancestor::Surrogate {
                    state: StateVector::from_vec_unchecked(cand),
                    between: (x_prev, t),
                });
                break;
            }
        }
        break;
    }
    for v in out.vertex_ancestors() {
        if !out.neighbors.contains(&v) {
            out.neighbors.push(v);
        }
    }
    out
}
