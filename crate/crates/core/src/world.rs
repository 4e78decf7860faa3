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

//! Axis-aligned obstacle worlds, the two benchmark scenario generators and
//! state/edge validity.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::state::{euclid, step_count, StateVector};

/// Closed axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRect {
    lower: StateVector,
    upper: StateVector,
}

impl HyperRect {
    pub fn new(lower: StateVector, upper: StateVector) -> Result<Self> {
        check_dim(lower.dim(), upper.dim())?;
        for i in 0..lower.dim() {
            if lower[i] > upper[i] {
                return Err(Error::Config(format!(
                    "box lower[{i}] = {} exceeds upper[{i}] = {}",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_slices(lower: &[f64], upper: &[f64]) -> Result<Self> {
        Self::new(
            StateVector::new(lower.to_vec())?,
            StateVector::new(upper.to_vec())?,
        )
    }

    /// The unit hypercube `[0, 1]^n`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(StateVector::splat(n, 0.0)?, StateVector::splat(n, 1.0)?)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &StateVector {
        &self.lower
    }

    pub fn upper(&self) -> &StateVector {
        &self.upper
    }

    /// Closed containment: boundary points are inside.
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        let lo = self.lower.coords();
        let hi = self.upper.coords();
        x.iter()
            .zip(lo.iter().zip(hi))
            .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn intersects(&self, other: &HyperRect) -> bool {
        (0..self.dim()).all(|i| self.lower[i] <= other.upper[i] && other.lower[i] <= self.upper[i])
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.upper[i] - self.lower[i])
            .product()
    }

    pub fn diagonal(&self) -> f64 {
        euclid(self.lower.coords(), self.upper.coords())
    }
}

/// A bounded planning domain with box obstacles.
///
/// Obstacles are closed: a state on an obstacle boundary is in collision.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleWorld {
    bounds: HyperRect,
    obstacles: Vec<HyperRect>,
    check_resolution: f64,
}

impl ObstacleWorld {
    pub fn new(
        bounds: HyperRect,
        obstacles: Vec<HyperRect>,
        check_resolution: f64,
    ) -> Result<Self> {
        if !(check_resolution > 0.0) || !check_resolution.is_finite() {
            return Err(Error::Config(format!(
                "check resolution must be positive, got {check_resolution}"
            )));
        }
        for (i, o) in obstacles.iter().enumerate() {
            check_dim(bounds.dim(), o.dim())?;
            if !o.intersects(&bounds) {
                return Err(Error::Config(format!(
                    "obstacle {i} lies outside the bounds"
                )));
            }
        }
        Ok(Self {
            bounds,
            obstacles,
            check_resolution,
        })
    }

    /// Uses the default resolution of 1% of the domain diagonal.
    pub fn with_default_resolution(bounds: HyperRect, obstacles: Vec<HyperRect>) -> Result<Self> {
        let res = default_resolution(&bounds);
        Self::new(bounds, obstacles, res)
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &HyperRect {
        &self.bounds
    }

    pub fn obstacles(&self) -> &[HyperRect] {
        &self.obstacles
    }

    pub fn check_resolution(&self) -> f64 {
        self.check_resolution
    }

    /// Inside the bounds and outside every obstacle.
    pub fn is_state_valid(&self, x: &StateVector) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.is_free(x.coords()))
    }

    /// Every probe along `a -> b` at spacing at most the check resolution is
    /// valid. Zero-length edges probe the single state.
    pub fn is_edge_valid(&self, a: &StateVector, b: &StateVector) -> Result<bool> {
        check_dim(self.dim(), a.dim())?;
        check_dim(self.dim(), b.dim())?;
        Ok(self
            .edge_free_with(a.coords(), b.coords(), &mut |x| self.is_free(x))
            .0)
    }

    /// Unchecked membership test on raw coordinates.
    #[inline]
    pub fn is_free(&self, x: &[f64]) -> bool {
        self.bounds.contains(x) && !self.obstacles.iter().any(|o| o.contains(x))
    }

    /// Number of probes a full check of an edge of length `len` performs.
    pub fn probe_count(&self, len: f64) -> usize {
        step_count(len, self.check_resolution) + 1
    }

    /// Full edge check against an arbitrary state predicate.
    ///
    /// Endpoints are probed first, then interior probes in bisection order.
    /// Probe coordinates are computed from the lexicographically smaller
    /// endpoint so the result does not depend on the edge direction.
    /// Returns the verdict and the number of probes evaluated.
    pub fn edge_free_with(
        &self,
        a: &[f64],
        b: &[f64],
        valid: &mut dyn FnMut(&[f64]) -> bool,
    ) -> (bool, usize) {
        let (a, b) = canonical(a, b);
        let k = step_count(euclid(a, b), self.check_resolution);
        let mut probes = 0;
        if !valid(a) {
            return (false, 1);
        }
        probes += 1;
        if k == 0 {
            return (true, probes);
        }
        if !valid(b) {
            return (false, probes + 1);
        }
        probes += 1;
        let mut buf = vec![0.0; a.len()];
        let mut pending = VecDeque::new();
        pending.push_back((0usize, k));
        while let Some((lo, hi)) = pending.pop_front() {
            if hi - lo < 2 {
                continue;
            }
            let mid = (lo + hi) / 2;
            let t = mid as f64 / k as f64;
            for ((o, x), y) in buf.iter_mut().zip(a).zip(b) {
                *o = x + t * (y - x);
            }
            probes += 1;
            if !valid(&buf) {
                return (false, probes);
            }
            pending.push_back((lo, mid));
            pending.push_back((mid, hi));
        }
        (true, probes)
    }

    /// Probe states of a full check, in path order from `a` to `b`.
    pub fn edge_probes(&self, a: &StateVector, b: &StateVector) -> Vec<StateVector> {
        let flipped = canonical(a.coords(), b.coords()).0.as_ptr() != a.coords().as_ptr();
        let (p, q) = if flipped { (b, a) } else { (a, b) };
        let k = step_count(p.distance_to(q), self.check_resolution);
        let mut out: Vec<StateVector> = (0..=k)
            .map(|i| {
                if k == 0 {
                    return p.clone();
                }
                let t = i as f64 / k as f64;
                StateVector::from_vec_unchecked(
                    p.coords()
                        .iter()
                        .zip(q.coords())
                        .map(|(x, y)| x + t * (y - x))
                        .collect(),
                )
            })
            .collect();
        if flipped {
            out.reverse();
        }
        out
    }

    /// Sparse check of an edge: endpoints and midpoint only.
    pub fn lazy_edge_free_with(
        a: &[f64],
        b: &[f64],
        valid: &mut dyn FnMut(&[f64]) -> bool,
    ) -> bool {
        let (a, b) = canonical(a, b);
        if !valid(a) || !valid(b) {
            return false;
        }
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + 0.5 * (y - x)).collect();
        valid(&mid)
    }
}

fn canonical<'a>(a: &'a [f64], b: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return (a, b),
            std::cmp::Ordering::Greater => return (b, a),
            std::cmp::Ordering::Equal => {}
        }
    }
    (a, b)
}

/// 1% of the domain diagonal.
pub fn default_resolution(bounds: &HyperRect) -> f64 {
    0.01 * bounds.diagonal()
}

/// A world together with its start and goal states.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub world: ObstacleWorld,
    pub start: StateVector,
    pub goal: StateVector,
}

impl Scenario {
    pub fn new(world: ObstacleWorld, start: StateVector, goal: StateVector) -> Result<Self> {
        check_dim(world.dim(), start.dim())?;
        check_dim(world.dim(), goal.dim())?;
        Ok(Self { world, start, goal })
    }

    pub fn dim(&self) -> usize {
        self.world.dim()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ScenarioFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct RectFile {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    dim: usize,
    bounds: RectFile,
    obstacles: Vec<RectFile>,
    start: Vec<f64>,
    goal: Vec<f64>,
    check_resolution: f64,
}

impl From<&HyperRect> for RectFile {
    fn from(r: &HyperRect) -> Self {
        Self {
            lower: r.lower.coords().to_vec(),
            upper: r.upper.coords().to_vec(),
        }
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        Self {
            dim: s.dim(),
            bounds: (&s.world.bounds).into(),
            obstacles: s.world.obstacles.iter().map(Into::into).collect(),
            start: s.start.coords().to_vec(),
            goal: s.goal.coords().to_vec(),
            check_resolution: s.world.check_resolution,
        }
    }
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(f: ScenarioFile) -> Result<Self> {
        let rect = |r: RectFile| HyperRect::from_slices(&r.lower, &r.upper);
        let bounds = rect(f.bounds)?;
        check_dim(f.dim, bounds.dim())?;
        let obstacles = f
            .obstacles
            .into_iter()
            .map(rect)
            .collect::<Result<Vec<_>>>()?;
        let world = ObstacleWorld::new(bounds, obstacles, f.check_resolution)?;
        Scenario::new(world, StateVector::new(f.start)?, StateVector::new(f.goal)?)
    }
}

/// Wall thickness of the narrow-passage scenario.
pub const WALL_THICKNESS: f64 = 0.1;
/// Default number of boxes in the random-rectangles scenario.
pub const DEFAULT_RECT_COUNT: usize = 30;
/// Side-length range of random rectangles.
pub const RECT_SIDE_RANGE: (f64, f64) = (0.02, 0.15);
const PLACEMENT_RETRIES: usize = 1000;

fn benchmark_endpoints(n: usize) -> (StateVector, StateVector) {
    let mut start = vec![0.5; n];
    let mut goal = vec![0.5; n];
    start[0] = 0.05;
    goal[0] = 0.95;
    (
        StateVector::from_vec_unchecked(start),
        StateVector::from_vec_unchecked(goal),
    )
}

/// Unit hypercube split along axis 0 by a wall with one slot.
///
/// The slot is open along axis 1 only, with width `gap_width` centred at a
/// seed-dependent offset that keeps the straight start-goal line blocked;
/// it spans the full extent of every other axis.
pub fn make_narrow_passage(n: usize, gap_width: f64, seed: u64) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::Config(format!(
            "narrow passage needs n >= 2, got {n}"
        )));
    }
    if !(gap_width > 0.0 && gap_width < 1.0) {
        return Err(Error::Config(format!(
            "gap width {gap_width} must lie strictly inside (0, 1)"
        )));
    }
    let bounds = HyperRect::unit(n)?;
    let res = default_resolution(&bounds);
    if gap_width <= res {
        return Err(Error::Config(format!(
            "gap width {gap_width} does not exceed the check resolution {res}"
        )));
    }
    let mut rng = crate::rng_from_seed(seed);
    let half = 0.5 * gap_width;
    let slack = (0.48 - gap_width).max(0.0);
    let offset = half + 0.02 + rng.random::<f64>() * slack;
    let centre = if rng.random::<bool>() {
        0.5 + offset
    } else {
        0.5 - offset
    };

    let w0 = 0.5 - 0.5 * WALL_THICKNESS;
    let w1 = 0.5 + 0.5 * WALL_THICKNESS;
    let mut obstacles = Vec::new();
    let mut wall_piece = |lo1: f64, hi1: f64| -> Result<()> {
        if hi1 <= lo1 {
            return Ok(());
        }
        let mut lo = vec![0.0; n];
        let mut hi = vec![1.0; n];
        lo[0] = w0;
        hi[0] = w1;
        lo[1] = lo1;
        hi[1] = hi1;
        obstacles.push(HyperRect::from_slices(&lo, &hi)?);
        Ok(())
    };
    wall_piece(0.0, centre - half)?;
    wall_piece(centre + half, 1.0)?;
    let world = ObstacleWorld::new(bounds, obstacles, res)?;
    let (start, goal) = benchmark_endpoints(n);
    Scenario::new(world, start, goal)
}

/// Unit hypercube with `count` random boxes that avoid start and goal.
pub fn make_random_rectangles(n: usize, count: usize, seed: u64) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::Config(format!(
            "random rectangles need n >= 2, got {n}"
        )));
    }
    let bounds = HyperRect::unit(n)?;
    let res = default_resolution(&bounds);
    let (start, goal) = benchmark_endpoints(n);
    let mut rng = crate::rng_from_seed(seed);
    let (smin, smax) = RECT_SIDE_RANGE;
    let mut obstacles = Vec::with_capacity(count);
    for k in 0..count {
        let mut placed = false;
        for _ in 0..PLACEMENT_RETRIES {
            let mut lo = vec![0.0; n];
            let mut hi = vec![0.0; n];
            for i in 0..n {
                let side = rng.random_range(smin..=smax);
                lo[i] = rng.random::<f64>() * (1.0 - side);
                hi[i] = lo[i] + side;
            }
            let rect = HyperRect::from_slices(&lo, &hi)?;
            if !rect.contains(start.coords()) && !rect.contains(goal.coords()) {
                obstacles.push(rect);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Config(format!(
                "could not place obstacle {k} clear of start and goal"
            )));
        }
    }
    let world = ObstacleWorld::new(bounds, obstacles, res)?;
    Scenario::new(world, start, goal)
}
