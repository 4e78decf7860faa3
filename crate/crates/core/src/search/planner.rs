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

//! The anytime bidirectional planner.

use std::ops::ControlFlow;
use std::time::Instant;

use rustc_hash::FxHashMap;

use super::heuristics::{blend, could_improve_solution, effort, rgg_radius, solution_key};
use super::just_edge::{just_edge, Ancestor, EdgeOracle};
use super::queue::{EdgeQueue, Key};
use super::tree::{SearchTree, StateStore};
use crate::error::{check_dim, Error, Result};
use crate::motion::{d_tanh, ManipConfig, Manipulator};
use crate::sampling::{
    bias_sample, just_sample, priority_region_measure, InformedSet, SampleLedger,
};
use crate::state::{Edge, Path, StateVector};
use crate::world::{ObstacleWorld, Scenario};
use crate::PlannerRng;

/// How elapsed planning time is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clock {
    Wall,
    /// Virtual time proportional to work done, counted as collision probes,
    /// loop iterations and drawn samples, for machine-independent budgets.
    Effort {
        seconds_per_unit: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub batch_size: usize,
    pub tau: usize,
    /// Surrogate candidates tried on a blocked ancestor edge.
    pub surrogates: usize,
    pub per_edge: usize,
    pub alpha: f64,
    pub eta_rewire: f64,
    /// Seconds.
    pub max_time: Option<f64>,
    pub max_iterations: Option<u64>,
    pub use_just_edge: bool,
    pub use_just_sample: bool,
    pub use_motion_performance: bool,
    pub clock: Clock,
    pub manip: ManipConfig,
    /// Waypoint spacing of the post-processed path; defaults to five check
    /// resolutions.
    pub refine_spacing: Option<f64>,
    /// Keep every reverse-queue pop of the first batch in the outcome.
    pub record_reverse_pops: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self::jit()
    }
}

impl PlannerConfig {
    /// Both just-in-time modules on, pure path cost.
    pub fn jit() -> Self {
        Self {
            batch_size: 100,
            tau: 5,
            surrogates: 3,
            per_edge: 10,
            alpha: 1.0,
            eta_rewire: 1.001,
            max_time: Some(1.0),
            max_iterations: None,
            use_just_edge: true,
            use_just_sample: true,
            use_motion_performance: false,
            clock: Clock::Wall,
            manip: ManipConfig::default(),
            refine_spacing: None,
            record_reverse_pops: false,
        }
    }

    /// The same search with both just-in-time modules off.
    pub fn ablation() -> Self {
        Self {
            use_just_edge: false,
            use_just_sample: false,
            ..Self::jit()
        }
    }

    /// Kinematic mode: manipulability-weighted keys and path refinement.
    pub fn kinematic() -> Self {
        Self {
            alpha: 0.7,
            use_motion_performance: true,
            ..Self::jit()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(self.eta_rewire > 1.0) {
            return Err(Error::Config(format!(
                "eta must exceed 1, got {}",
                self.eta_rewire
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.max_time.is_none() && self.max_iterations.is_none() {
            return Err(Error::Config(
                "a time or iteration budget is required".into(),
            ));
        }
        if let Some(t) = self.max_time {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("negative time budget {t}")));
            }
        }
        if let Clock::Effort { seconds_per_unit } = self.clock {
            if !(seconds_per_unit > 0.0) {
                return Err(Error::Config(
                    "seconds per work unit must be positive".into(),
                ));
            }
        }
        self.manip.validate()
    }
}

/// Start, goal and the space they live in. With a manipulator the world is
/// its joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub world: ObstacleWorld,
    pub start: StateVector,
    pub goal: StateVector,
    pub manipulator: Option<Manipulator>,
}

impl Problem {
    pub fn new(world: ObstacleWorld, start: StateVector, goal: StateVector) -> Result<Self> {
        check_dim(world.dim(), start.dim())?;
        check_dim(world.dim(), goal.dim())?;
        Ok(Self {
            world,
            start,
            goal,
            manipulator: None,
        })
    }

    pub fn with_manipulator(mut self, m: Manipulator) -> Result<Self> {
        check_dim(self.world.dim(), m.dof())?;
        self.manipulator = Some(m);
        Ok(self)
    }

    pub fn is_state_valid(&self, x: &[f64]) -> bool {
        self.world.is_free(x)
            && self
                .manipulator
                .as_ref()
                .is_none_or(|m| m.within_bounds(x) && m.self_collision_free(x))
    }

    /// Probe-based edge check against the full validity predicate.
    pub fn is_edge_valid(&self, a: &[f64], b: &[f64]) -> bool {
        self.edge_check(a, b).0
    }

    fn edge_check(&self, a: &[f64], b: &[f64]) -> (bool, usize) {
        self.world
            .edge_free_with(a, b, &mut |x| self.is_state_valid(x))
    }

    /// Every edge passes the full check and the endpoints match.
    pub fn validates(&self, path: &Path) -> bool {
        path.start() == &self.start
            && path.end() == &self.goal
            && path
                .edges()
                .all(|(a, b)| self.is_edge_valid(a.coords(), b.coords()))
    }
}

impl From<Scenario> for Problem {
    fn from(s: Scenario) -> Self {
        Self {
            world: s.world,
            start: s.start,
            goal: s.goal,
            manipulator: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlannerStats {
    pub iterations: u64,
    pub batches: u64,
    pub reverse_expansions: u64,
    pub forward_expansions: u64,
    pub reverse_restarts: u64,
    pub full_checks: u64,
    pub lazy_checks: u64,
    pub probes: u64,
    /// States drawn by batch and bottleneck sampling, valid or not.
    pub samples: u64,
    pub just_edge_rewires: u64,
    pub surrogates: u64,
    pub just_samples: u64,
    pub failed_edges: u64,
    pub obstacle_samples: u64,
    pub solutions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversePop {
    pub source: usize,
    pub target: usize,
    pub key1: f64,
}

/// Sample graph of the first batch, for offline inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot {
    pub states: StateStore,
    pub ids: Vec<usize>,
    pub radius: f64,
}

pub struct SolutionEvent<'a> {
    pub elapsed: f64,
    pub cost: f64,
    pub path: &'a Path,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    /// The last emitted solution.
    pub path: Option<Path>,
    /// `path` after manipulability post-processing, in kinematic mode.
    pub refined: Option<Path>,
    /// `(elapsed seconds, cost)` per emitted solution.
    pub trace: Vec<(f64, f64)>,
    pub stats: PlannerStats,
    pub elapsed: f64,
    pub reverse_pops: Vec<ReversePop>,
    pub first_batch: Option<GraphSnapshot>,
}

impl PlanOutcome {
    pub fn solved(&self) -> bool {
        self.path.is_some()
    }

    /// Refined path when available, else the raw solution.
    pub fn best_path(&self) -> Option<&Path> {
        self.refined.as_ref().or(self.path.as_ref())
    }
}

const START: usize = 0;
const GOAL: usize = 1;

#[inline]
fn edge_id(a: usize, b: usize) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

/// Runs the planner until the budget runs out or `on_solution` breaks.
pub fn plan(
    problem: &Problem,
    cfg: &PlannerConfig,
    rng: &mut PlannerRng,
    on_solution: &mut dyn FnMut(&SolutionEvent) -> ControlFlow<()>,
) -> Result<PlanOutcome> {
    cfg.validate()?;
    if cfg.use_motion_performance && problem.manipulator.is_none() {
        return Err(Error::Config(
            "motion performance mode needs a manipulator".into(),
        ));
    }
    if !problem.is_state_valid(problem.start.coords()) {
        return Err(Error::Problem("start state is invalid".into()));
    }
    if !problem.is_state_valid(problem.goal.coords()) {
        return Err(Error::Problem("goal state is invalid".into()));
    }
    let mut search = Search::new(problem, cfg, rng)?;
    search.run(on_solution)?;
    search.finish()
}

/// Full edge checks for ancestor walks, sharing the planner's verdict cache.
struct CachedOracle<'a> {
    prob: &'a Problem,
    cache: &'a mut FxHashMap<u64, bool>,
    checks: u64,
    probes: u64,
}

impl EdgeOracle for CachedOracle<'_> {
    fn collision_free(&mut self, a: &[f64], b: &[f64]) -> bool {
        self.checks += 1;
        let (ok, p) = self.prob.edge_check(a, b);
        self.probes += p as u64;
        ok
    }

    fn vertices_free(&mut self, ids: (usize, usize), a: &[f64], b: &[f64]) -> bool {
        let key = edge_id(ids.0, ids.1);
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let ok = self.collision_free(a, b);
        self.cache.insert(key, ok);
        ok
    }
}

struct Search<'a> {
    prob: &'a Problem,
    cfg: &'a PlannerConfig,
    rng: &'a mut PlannerRng,
    alpha: f64,
    res: f64,
    dim: usize,

    store: StateStore,
    alive: Vec<bool>,
    free_count: usize,
    to_goal: Vec<f64>,
    to_start: Vec<f64>,
    e_goal: Vec<f64>,
    e_start: Vec<f64>,
    dt: Vec<f64>,
    neighbors: Vec<Option<Vec<(usize, f64)>>>,
    radius: f64,
    full_valid: FxHashMap<u64, bool>,
    lazy_valid: FxHashMap<u64, bool>,

    rev: SearchTree,
    rev_queue: EdgeQueue<(usize, usize)>,
    fwd: SearchTree,
    fwd_effort: Vec<f64>,
    fwd_queue: EdgeQueue<(usize, usize)>,

    informed: InformedSet,
    ledger: SampleLedger,
    max_failed_len: f64,
    /// Priority-region samples waiting for the next batch.
    pending: Vec<StateVector>,
    c_best: f64,
    c_min: f64,
    solution_ids: Vec<usize>,
    best: Option<Path>,
    trace: Vec<(f64, f64)>,
    stopped: bool,

    stats: PlannerStats,
    started: Instant,
    reverse_pops: Vec<ReversePop>,
    first_batch: Option<GraphSnapshot>,
}

impl<'a> Search<'a> {
    fn new(prob: &'a Problem, cfg: &'a PlannerConfig, rng: &'a mut PlannerRng) -> Result<Self> {
        let dim = prob.world.dim();
        let alpha = if cfg.use_motion_performance {
            cfg.alpha
        } else {
            1.0
        };
        let informed = InformedSet::new(prob.start.clone(), prob.goal.clone(), f64::INFINITY)?;
        let c_min = informed.c_min();
        let mut s = Self {
            prob,
            cfg,
            rng,
            alpha,
            res: prob.world.check_resolution(),
            dim,
            store: StateStore::new(dim),
            alive: Vec::new(),
            free_count: 0,
            to_goal: Vec::new(),
            to_start: Vec::new(),
            e_goal: Vec::new(),
            e_start: Vec::new(),
            dt: Vec::new(),
            neighbors: Vec::new(),
            radius: f64::INFINITY,
            full_valid: FxHashMap::default(),
            lazy_valid: FxHashMap::default(),
            rev: SearchTree::new(GOAL, 2),
            rev_queue: EdgeQueue::new(),
            fwd: SearchTree::new(START, 2),
            fwd_effort: Vec::new(),
            fwd_queue: EdgeQueue::new(),
            informed,
            ledger: SampleLedger::default(),
            max_failed_len: 0.0,
            pending: Vec::new(),
            c_best: f64::INFINITY,
            c_min,
            solution_ids: Vec::new(),
            best: None,
            trace: Vec::new(),
            stopped: false,
            stats: PlannerStats::default(),
            started: Instant::now(),
            reverse_pops: Vec::new(),
            first_batch: None,
        };
        s.add_state(prob.start.coords())?;
        s.add_state(prob.goal.coords())?;
        Ok(s)
    }

    fn elapsed(&self) -> f64 {
        match self.cfg.clock {
            Clock::Wall => self.started.elapsed().as_secs_f64(),
            Clock::Effort { seconds_per_unit } => {
                (self.stats.probes + self.stats.iterations + self.stats.samples) as f64
                    * seconds_per_unit
            }
        }
    }

    fn out_of_budget(&self) -> bool {
        self.cfg
            .max_iterations
            .is_some_and(|n| self.stats.iterations >= n)
            || self.cfg.max_time.is_some_and(|t| self.elapsed() >= t)
    }

    fn add_state(&mut self, x: &[f64]) -> Result<usize> {
        let id = self.store.push(x);
        let xs = self.store.get(id);
        let to_goal = crate::state::euclid(xs, self.prob.goal.coords());
        let to_start = crate::state::euclid(xs, self.prob.start.coords());
        self.to_goal.push(to_goal);
        self.to_start.push(to_start);
        self.e_goal.push(effort(to_goal, self.res));
        self.e_start.push(effort(to_start, self.res));
        let dt = match (&self.prob.manipulator, self.alpha < 1.0) {
            (Some(m), true) => d_tanh(m.sigma_min(xs)?, &self.cfg.manip)?,
            _ => 0.0,
        };
        self.dt.push(dt);
        self.alive.push(true);
        self.neighbors.push(None);
        self.fwd_effort.push(f64::INFINITY);
        self.free_count += 1;
        let cap = self.store.len();
        self.rev.grow(cap);
        self.fwd.grow(cap);
        Ok(id)
    }

    // --- validity -----------------------------------------------------

    fn full_check(&mut self, a: usize, b: usize) -> bool {
        let key = edge_id(a, b);
        if let Some(&v) = self.full_valid.get(&key) {
            return v;
        }
        let (ok, probes) = self.prob.edge_check(self.store.get(a), self.store.get(b));
        self.stats.full_checks += 1;
        self.stats.probes += probes as u64;
        self.full_valid.insert(key, ok);
        ok
    }

    fn lazy_check_coords(&mut self, a: &[f64], b: &[f64]) -> bool {
        self.stats.lazy_checks += 1;
        self.stats.probes += 3;
        let prob = self.prob;
        ObstacleWorld::lazy_edge_free_with(a, b, &mut |x| prob.is_state_valid(x))
    }

    fn lazy_check(&mut self, a: usize, b: usize) -> bool {
        let key = edge_id(a, b);
        if let Some(&v) = self.full_valid.get(&key) {
            return v;
        }
        if let Some(&v) = self.lazy_valid.get(&key) {
            return v;
        }
        let (pa, pb) = (self.store.get(a).to_vec(), self.store.get(b).to_vec());
        let ok = self.lazy_check_coords(&pa, &pb);
        self.lazy_valid.insert(key, ok);
        ok
    }

    fn known_invalid(&self, a: usize, b: usize) -> bool {
        self.full_valid.get(&edge_id(a, b)) == Some(&false)
    }

    // --- graph -------------------------------------------------------

    fn ensure_neighbors(&mut self, v: usize) {
        if self.neighbors[v].is_some() {
            return;
        }
        let r = self.radius;
        let mut list = Vec::new();
        for u in 0..self.store.len() {
            if u != v && self.alive[u] {
                let d = self.store.distance(u, v);
                if d <= r && d > 0.0 {
                    list.push((u, d));
                }
            }
        }
        self.neighbors[v] = Some(list);
    }

    fn neighbor_list(&mut self, v: usize) -> Vec<(usize, f64)> {
        self.ensure_neighbors(v);
        self.neighbors[v].clone().unwrap_or_default()
    }

    /// Borrows the cached list out of the cache; return it with `put_neighbors`.
    fn take_neighbors(&mut self, v: usize) -> Vec<(usize, f64)> {
        self.ensure_neighbors(v);
        self.neighbors[v].take().unwrap_or_default()
    }

    fn put_neighbors(&mut self, v: usize, list: Vec<(usize, f64)>) {
        self.neighbors[v] = Some(list);
    }

    /// Adds a state mid-batch and links it into the cached neighbour lists.
    fn insert_sample(&mut self, x: &[f64]) -> Result<usize> {
        let id = self.add_state(x)?;
        let list = self.neighbor_list(id);
        for &(u, d) in &list {
            if let Some(nl) = self.neighbors[u].as_mut() {
                nl.push((id, d));
            }
            if self.fwd.contains(u) && u != GOAL {
                self.push_forward(u, id, d);
            }
        }
        Ok(id)
    }

    fn update_radius(&mut self) -> Result<()> {
        let n = self.dim;
        let volume = self.prob.world.bounds().volume();
        let informed = self.informed.measure().min(volume);
        let priority = if self.max_failed_len > 0.0 {
            priority_region_measure(n, self.max_failed_len)?
        } else {
            0.0
        };
        self.radius = rgg_radius(
            self.free_count.max(2),
            n,
            informed,
            priority,
            self.cfg.eta_rewire,
        )?;
        Ok(())
    }

    // --- keys --------------------------------------------------------

    fn reverse_key(&self, s: usize, t: usize, c: f64) -> Key {
        Key::new(
            blend(
                self.alpha,
                self.rev.label(s) + c + self.to_start[t],
                self.dt[t],
            ),
            self.e_goal[s] + effort(c, self.res) + self.e_start[t],
        )
    }

    fn forward_key(&self, s: usize, t: usize, c: f64) -> Key {
        let to_go = if self.rev.contains(t) {
            self.rev.label(t)
        } else {
            self.to_goal[t]
        };
        Key::new(
            blend(self.alpha, self.fwd.label(s) + c + to_go, self.dt[t]),
            self.fwd_effort[s] + effort(c, self.res),
        )
    }

    fn solution_key(&self) -> f64 {
        solution_key(self.c_best, self.alpha, self.dt[GOAL])
    }

    // --- reverse search ----------------------------------------------

    fn restart_reverse(&mut self) {
        self.stats.reverse_restarts += 1;
        self.rev.reset(GOAL, self.store.len());
        self.rev_queue.clear();
        self.expand_reverse(GOAL);
    }

    fn expand_reverse(&mut self, v: usize) {
        if v == START {
            return;
        }
        let g = self.rev.label(v);
        let list = self.take_neighbors(v);
        for &(u, d) in &list {
            if u == GOAL || g + d >= self.rev.label(u) {
                continue;
            }
            let key = self.reverse_key(v, u, d);
            self.rev_queue.push(key, (v, u));
        }
        self.put_neighbors(v, list);
    }

    fn reverse_step(&mut self) -> Result<()> {
        let Some((key, (s, t))) = self.rev_queue.pop() else {
            return Ok(());
        };
        if !self.alive[s] || !self.alive[t] {
            return Ok(());
        }
        let c = self.store.distance(s, t);
        let new = self.rev.label(s) + c;
        if new >= self.rev.label(t) || self.known_invalid(s, t) {
            return Ok(());
        }
        if self.cfg.record_reverse_pops && self.stats.batches == 1 {
            self.reverse_pops.push(ReversePop {
                source: s,
                target: t,
                key1: key.key1.min(self.reverse_key(s, t, c).key1),
            });
        }
        if !self.lazy_check(s, t) {
            return Ok(());
        }
        self.stats.reverse_expansions += 1;
        self.rev.set_parent(t, s, new);
        if self.cfg.use_just_edge {
            self.just_edge_rewire(t, false)?;
        }
        self.expand_reverse(t);
        Ok(())
    }

    // --- forward search ----------------------------------------------

    fn push_forward(&mut self, s: usize, t: usize, c: f64) {
        let g = self.fwd.label(s) + c;
        if t == START || g >= self.fwd.label(t) || g + self.to_goal[t] >= self.c_best {
            return;
        }
        let key = self.forward_key(s, t, c);
        self.fwd_queue.push(key, (s, t));
    }

    fn expand_forward(&mut self, v: usize) {
        if v == GOAL {
            return;
        }
        let list = self.take_neighbors(v);
        for &(u, d) in &list {
            self.push_forward(v, u, d);
        }
        self.put_neighbors(v, list);
    }

    fn forward_step(
        &mut self,
        on_solution: &mut dyn FnMut(&SolutionEvent) -> ControlFlow<()>,
    ) -> Result<()> {
        let Some((key, (s, t))) = self.fwd_queue.pop() else {
            return Ok(());
        };
        if !self.alive[s] || !self.alive[t] || !self.fwd.contains(s) {
            return Ok(());
        }
        let c = self.store.distance(s, t);
        let fresh = self.forward_key(s, t, c);
        if fresh.key1 > key.key1 + 1e-12 * key.key1.abs().max(1.0) {
            self.fwd_queue.push(fresh, (s, t));
            return Ok(());
        }
        let new = self.fwd.label(s) + c;
        if new >= self.fwd.label(t)
            || new + self.to_goal[t] >= self.c_best
            || self.known_invalid(s, t)
        {
            return Ok(());
        }
        if !self.full_check(s, t) {
            self.handle_failed_edge(s, t)?;
            return Ok(());
        }
        self.stats.forward_expansions += 1;
        self.attach_forward(t, s, new);
        if self.cfg.use_just_edge {
            self.just_edge_rewire(t, true)?;
        }
        self.check_solution(on_solution)?;
        self.expand_forward(t);
        Ok(())
    }

    /// Reparents `t` under `p` and shifts every descendant by the change.
    fn attach_forward(&mut self, t: usize, p: usize, label: f64) {
        let old = self.fwd.label(t);
        let old_effort = self.fwd_effort[t];
        self.fwd.set_parent(t, p, label);
        self.fwd_effort[t] = self.fwd_effort[p] + effort(self.store.distance(p, t), self.res);
        if old.is_finite() {
            let de = self.fwd_effort[t] - old_effort;
            for u in self.fwd.shift_descendants(t, label - old) {
                self.fwd_effort[u] += de;
            }
        }
    }

    /// Ancestor edges are admitted only after a full check in either tree.
    fn just_edge_rewire(&mut self, t: usize, forward: bool) -> Result<()> {
        let prob = self.prob;
        let mut oracle = CachedOracle {
            prob,
            cache: &mut self.full_valid,
            checks: 0,
            probes: 0,
        };
        let tree = if forward { &self.fwd } else { &self.rev };
        let out = just_edge(
            t,
            tree,
            &self.store,
            &[],
            &mut oracle,
            self.cfg.tau,
            self.cfg.surrogates,
        );
        let (checks, probes) = (oracle.checks, oracle.probes);
        self.stats.full_checks += checks;
        self.stats.probes += probes;
        self.apply_ancestors(t, &out.ancestors, forward)
    }

    /// Rewires `t` to its cheapest visible ancestor, inserting a surrogate
    /// state when that is the cheapest option.
    fn apply_ancestors(&mut self, t: usize, ancestors: &[Ancestor], forward: bool) -> Result<()> {
        let tree = if forward { &self.fwd } else { &self.rev };
        let current = tree.label(t);
        let parent = tree.parent(t);
        let mut best: Option<(f64, &Ancestor)> = None;
        for a in ancestors {
            let cost = match a {
                Ancestor::Vertex(v) => {
                    if Some(*v) == parent {
                        continue;
                    }
                    tree.label(*v) + self.store.distance(*v, t)
                }
                Ancestor::Surrogate { state, between } => {
                    let base = between.1;
                    let via = crate::state::euclid(state.coords(), self.store.get(base));
                    tree.label(base) + via + crate::state::euclid(state.coords(), self.store.get(t))
                }
            };
            if cost < current - 1e-12 && best.is_none_or(|(b, _)| cost < b) {
                best = Some((cost, a));
            }
        }
        let Some((cost, choice)) = best else {
            return Ok(());
        };
        let choice = choice.clone();
        self.stats.just_edge_rewires += 1;
        let (p, via_len) = match choice {
            Ancestor::Vertex(v) => (v, self.store.distance(v, t)),
            Ancestor::Surrogate { state, between } => {
                self.stats.surrogates += 1;
                let base = between.1;
                let id = self.insert_sample(state.coords())?;
                let l = self.tree(forward).label(base) + self.store.distance(base, id);
                self.full_valid.insert(edge_id(base, id), true);
                self.full_valid.insert(edge_id(id, t), true);
                if forward {
                    self.attach_forward(id, base, l);
                } else {
                    self.rev.set_parent(id, base, l);
                }
                (id, self.store.distance(id, t))
            }
        };
        let label = self.tree(forward).label(p) + via_len;
        debug_assert!((label - cost).abs() <= 1e-9 * cost.max(1.0));
        self.full_valid.insert(edge_id(p, t), true);
        if forward {
            self.attach_forward(t, p, label);
        } else {
            self.rev.set_parent(t, p, label);
        }
        Ok(())
    }

    fn tree(&self, forward: bool) -> &SearchTree {
        if forward {
            &self.fwd
        } else {
            &self.rev
        }
    }

    fn handle_failed_edge(&mut self, s: usize, t: usize) -> Result<()> {
        let in_reverse = self.rev.parent(t) == Some(s) || self.rev.parent(s) == Some(t);
        if !in_reverse {
            return Ok(());
        }
        self.stats.failed_edges += 1;
        if self.cfg.use_just_sample {
            let edge = Edge::new(self.store.state(s), self.store.state(t))?;
            self.max_failed_len = self.max_failed_len.max(edge.length());
            self.ledger.failed_edges.push(edge);
            let prob = self.prob;
            let ok = |x: &StateVector| prob.is_state_valid(x.coords());
            let before = self.ledger.obstacle_samples.len();
            let fresh = just_sample(
                &mut self.ledger,
                &self.prob.world,
                &self.informed,
                self.cfg.per_edge,
                &ok,
                self.rng,
            );
            let invalid = (self.ledger.obstacle_samples.len() - before) as u64;
            self.stats.obstacle_samples += invalid;
            self.stats.samples += invalid + fresh.len() as u64;
            self.ledger.free_samples.clear();
            self.stats.just_samples += fresh.len() as u64;
            self.pending.extend(fresh);
        }
        self.restart_reverse();
        Ok(())
    }

    fn check_solution(
        &mut self,
        on_solution: &mut dyn FnMut(&SolutionEvent) -> ControlFlow<()>,
    ) -> Result<()> {
        if !(self.fwd.label(GOAL) < self.c_best) {
            return Ok(());
        }
        let ids = self.fwd.path_to(GOAL);
        let path = Path::new(ids.iter().map(|&i| self.store.state(i)).collect())?;
        let cost = path.total_cost();
        if !(cost < self.c_best) {
            return Ok(());
        }
        self.c_best = cost;
        self.informed.set_c_best(cost);
        self.solution_ids = ids;
        self.stats.solutions += 1;
        let elapsed = self.elapsed();
        self.trace.push((elapsed, cost));
        let event = SolutionEvent {
            elapsed,
            cost,
            path: &path,
        };
        if on_solution(&event).is_break() {
            self.stopped = true;
        }
        self.best = Some(path);
        Ok(())
    }

    // --- batches -----------------------------------------------------

    fn new_batch(&mut self) -> Result<()> {
        self.stats.batches += 1;
        if self.c_best.is_finite() {
            for v in 2..self.store.len() {
                if self.alive[v]
                    && self.to_start[v] + self.to_goal[v] > self.c_best
                    && !self.solution_ids.contains(&v)
                {
                    self.alive[v] = false;
                    self.free_count -= 1;
                }
            }
            let informed = &self.informed;
            self.ledger
                .obstacle_samples
                .retain(|x| informed.contains(x.coords()));
        }
        let prob = self.prob;
        let ok = |x: &StateVector| {
            prob.manipulator
                .as_ref()
                .is_none_or(|m| m.within_bounds(x.coords()) && m.self_collision_free(x.coords()))
        };
        let batch = bias_sample(
            &self.prob.world,
            &self.informed,
            self.cfg.batch_size,
            &ok,
            self.rng,
        );
        self.stats.obstacle_samples += batch.obstacle_samples.len() as u64;
        self.stats.samples += self.cfg.batch_size as u64;
        self.ledger.obstacle_samples.extend(batch.obstacle_samples);
        let pending = std::mem::take(&mut self.pending);
        for x in batch.free_samples.into_iter().chain(pending) {
            if self.informed.contains(x.coords()) || !self.c_best.is_finite() {
                self.add_state(x.coords())?;
            }
        }
        self.update_radius()?;
        self.max_failed_len = 0.0;
        self.neighbors.iter_mut().for_each(|n| *n = None);
        if self.cfg.record_reverse_pops && self.stats.batches == 1 {
            self.first_batch = Some(GraphSnapshot {
                states: self.store.clone(),
                ids: (0..self.store.len()).filter(|&v| self.alive[v]).collect(),
                radius: self.radius,
            });
        }

        self.fwd.reset(START, self.store.len());
        self.fwd_effort.iter_mut().for_each(|e| *e = f64::INFINITY);
        self.fwd_effort[START] = 0.0;
        self.fwd_queue.clear();
        self.expand_forward(START);
        self.restart_reverse();
        Ok(())
    }

    /// No path can beat the straight segment under the pure length cost.
    fn is_optimal(&self) -> bool {
        self.alpha == 1.0 && self.c_best <= self.c_min * (1.0 + 1e-12)
    }

    fn run(
        &mut self,
        on_solution: &mut dyn FnMut(&SolutionEvent) -> ControlFlow<()>,
    ) -> Result<()> {
        if !self.cfg.use_motion_performance && self.full_check(START, GOAL) {
            self.fwd.set_parent(GOAL, START, self.c_min);
            self.check_solution(on_solution)?;
        }
        if self.stopped || self.is_optimal() {
            return Ok(());
        }
        self.new_batch()?;
        while !self.stopped && !self.out_of_budget() {
            if self.is_optimal() {
                break;
            }
            self.stats.iterations += 1;
            let sol = self.solution_key();
            let rtop = self.rev_queue.peek_key();
            let ftop = self.fwd_queue.peek_key();
            let reverse =
                rtop.is_some_and(|r| r.key1 < sol && ftop.is_none_or(|f| r.key1 <= f.key1));
            if reverse {
                self.reverse_step()?;
            } else if could_improve_solution(ftop, sol) {
                self.forward_step(on_solution)?;
            } else {
                self.new_batch()?;
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<PlanOutcome> {
        let elapsed = self.elapsed();
        let refined = match (
            &self.best,
            &self.prob.manipulator,
            self.cfg.use_motion_performance,
        ) {
            (Some(path), Some(m), true) => {
                let spacing = self.cfg.refine_spacing.unwrap_or(5.0 * self.res);
                let dense = path.densified(spacing)?;
                let prob = self.prob;
                let mut edge_ok = |a: &[f64], b: &[f64]| prob.is_edge_valid(a, b);
                let mut rng = self.rng;
                let out = crate::motion::refine_interpolated_path(
                    m,
                    &dense,
                    &self.cfg.manip,
                    &mut rng,
                    &mut edge_ok,
                )?;
                Some(if prob.validates(&out) { out } else { dense })
            }
            _ => None,
        };
        Ok(PlanOutcome {
            path: self.best,
            refined,
            trace: self.trace,
            stats: self.stats,
            elapsed,
            reverse_pops: self.reverse_pops,
            first_batch: self.first_batch,
        })
    }
}
