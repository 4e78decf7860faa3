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

//! Anytime, asymptotically optimal sampling-based motion planning.
//!
//! The planner keeps two trees over a shared batch of samples: a lazy
//! reverse tree rooted at the goal that only performs sparse collision
//! checks and supplies cost-to-goal estimates, and a forward tree rooted at
//! the start whose edges are fully validated. On top of that base search it
//! adds
//!
//! - ancestor edges: a freshly connected vertex tries to link directly to
//!   a bounded number of its tree ancestors ([`search::just_edge`]),
//! - bottleneck sampling: edges that pass the sparse reverse check but fail
//!   the full forward check get extra samples in the lens between their
//!   endpoints ([`sampling::just_sample`]),
//! - an optional manipulability term in the edge keys computed from the
//!   smallest singular value of a DH chain Jacobian ([`motion`]).
//!
//! Self-collision for one or two serial arms is handled by
//! [`self_collision`], which turns link segments into a danger field.

pub mod error;
pub mod kinematics;
pub mod motion;
pub mod sampling;
pub mod search;
pub mod self_collision;
pub mod state;
pub mod world;

pub use error::{Error, Result};
pub use state::{distance, interpolate, path_cost, Edge, Path, StateVector};
pub use world::{HyperRect, ObstacleWorld, Scenario};

/// Deterministic generator used for every sampling stream.
pub type PlannerRng = rand_chacha::ChaCha8Rng;

/// Builds a [`PlannerRng`] from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> PlannerRng {
    use rand::SeedableRng;
    PlannerRng::seed_from_u64(seed)
}
