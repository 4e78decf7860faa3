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

//! Bidirectional lazy search with just-in-time edges and samples.

pub mod heuristics;
pub mod just_edge;
pub mod planner;
pub mod queue;
pub mod tree;

pub use heuristics::{
    blend, could_improve_solution, effort, forward_key, keep_after_prune, reverse_key, rgg_radius,
    solution_key, EuclideanHeuristics, HeuristicSet,
};
pub use just_edge::{just_edge, Ancestor, EdgeOracle, JustEdge};
pub use planner::{
    plan, Clock, GraphSnapshot, PlanOutcome, PlannerConfig, PlannerStats, Problem, ReversePop,
    SolutionEvent,
};
pub use queue::{EdgeQueue, Key};
pub use tree::{SearchTree, StateStore};
