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

//! Dual-arm joint-space benchmark for the manipulability objective.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::ControlFlow;

use anyhow::Result;
use jitstar::kinematics::{DhLink, KinematicChain};
use jitstar::motion::{refine_goal, ManipConfig, Manipulator};
use jitstar::search::{plan, PlannerConfig, Problem};
use jitstar::self_collision::ScdfConfig;
use jitstar::{rng_from_seed, HyperRect, ObstacleWorld, Path, StateVector};
use nalgebra::Matrix4;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const DOF: usize = 6;
pub const RANDOM_BOXES: usize = 6;
pub const REFINE_SPACING: f64 = 0.05;
pub const SIGMA_SPACING: f64 = 0.01;

fn arm(base_x: f64) -> Result<KinematicChain> {
    let mut base = Matrix4::identity();
    base[(0, 3)] = base_x;
    let links = vec![
        DhLink::revolute(0.5, 0.0, 0.0, 0.0),
        DhLink::revolute(0.4, 0.0, 0.0, 0.0),
        DhLink::revolute(0.3, 0.0, 0.0, PI),
    ];
    Ok(KinematicChain::new(links, base, 2)?)
}

/// Two planar 3R arms facing each other, with self-collision checking.
pub fn dual_arm() -> Result<Manipulator> {
    Ok(Manipulator::new(vec![arm(-1.0)?, arm(1.0)?])?.with_self_collision(ScdfConfig::default()))
}

pub fn dual_arm_start() -> Vec<f64> {
    vec![FRAC_PI_2 + 0.2, 0.9, 0.9, FRAC_PI_2 - 0.2, -0.9, -0.9]
}

pub fn dual_arm_goal() -> Vec<f64> {
    vec![FRAC_PI_2 - 0.2, -0.9, -0.9, FRAC_PI_2 + 0.2, 0.9, 0.9]
}

/// Joint-space world: one fixed box across each arm's elbow/wrist sweep plus
/// random boxes around the midpoint that avoid start and goal.
pub fn dual_arm_world(seed: u64) -> Result<ObstacleWorld> {
    let (start, goal) = (dual_arm_start(), dual_arm_goal());
    let bounds = HyperRect::from_slices(&[-PI; DOF], &[PI; DOF])?;
    let mut obstacles = Vec::new();
    for j in [1, 4] {
        let (mut lo, mut hi) = ([-PI; DOF], [PI; DOF]);
        (lo[j], hi[j]) = (-0.3, 0.3);
        (lo[j + 1], hi[j + 1]) = (-0.15, 0.45);
        obstacles.push(HyperRect::from_slices(&lo, &hi)?);
    }
    let mid: Vec<f64> = start
        .iter()
        .zip(&goal)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut rng = rng_from_seed(1000 + seed);
    while obstacles.len() < 2 + RANDOM_BOXES {
        let c: Vec<f64> = mid
            .iter()
            .map(|m| m + rng.random_range(-1.0..1.0))
            .collect();
        let s: Vec<f64> = (0..DOF).map(|_| rng.random_range(0.3..0.8)).collect();
        let lo: Vec<f64> = c.iter().zip(&s).map(|(c, s)| c - s / 2.0).collect();
        let hi: Vec<f64> = c.iter().zip(&s).map(|(c, s)| c + s / 2.0).collect();
        let r = HyperRect::from_slices(&lo, &hi)?;
        if !r.contains(&start) && !r.contains(&goal) {
            obstacles.push(r);
        }
    }
    Ok(ObstacleWorld::with_default_resolution(bounds, obstacles)?)
}

/// The dual-arm problem for `seed`, with the goal passed through goal refinement.
pub fn dual_arm_problem(seed: u64) -> Result<Problem> {
    let m = dual_arm()?;
    let goal = refine_goal(
        &m,
        &StateVector::new(dual_arm_goal())?,
        &ManipConfig::default(),
        &mut rng_from_seed(seed),
    )?;
    Ok(Problem::new(
        dual_arm_world(seed)?,
        StateVector::new(dual_arm_start())?,
        goal,
    )?
    .with_manipulator(m)?)
}

/// Smallest singular value of the Jacobian over `path` sampled at `spacing`.
pub fn min_sigma_along(m: &Manipulator, path: &Path, spacing: f64) -> Result<f64> {
    let dense = path.densified(spacing)?;
    dense.waypoints().iter().try_fold(
        f64::INFINITY,
        |acc, q| Ok(acc.min(m.sigma_min(q.coords())?)),
    )
}

pub fn config_for_alpha(alpha: f64, max_time: f64) -> PlannerConfig {
    let base = if alpha < 1.0 {
        PlannerConfig {
            alpha,
            ..PlannerConfig::kinematic()
        }
    } else {
        PlannerConfig::jit()
    };
    PlannerConfig {
        max_time: Some(max_time),
        refine_spacing: Some(REFINE_SPACING),
        ..base
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipRecord {
    pub seed: u64,
    pub alpha: f64,
    pub solved: bool,
    pub cost: Option<f64>,
    pub min_sigma: Option<f64>,
}

/// Plans the dual-arm problem once; the reported path is the refined one
/// when motion performance is enabled.
pub fn run_manip_trial(seed: u64, alpha: f64, max_time: f64) -> Result<ManipRecord> {
    let problem = dual_arm_problem(seed)?;
    let cfg = config_for_alpha(alpha, max_time);
    let out = plan(&problem, &cfg, &mut rng_from_seed(seed), &mut |_| {
        ControlFlow::Continue(())
    })?;
    let path = out.best_path().filter(|p| problem.validates(p));
    let m = problem
        .manipulator
        .as_ref()
        .expect("dual-arm problem has a manipulator");
    Ok(ManipRecord {
        seed,
        alpha,
        solved: path.is_some(),
        cost: path.map(Path::total_cost),
        min_sigma: path
            .map(|p| min_sigma_along(m, p, SIGMA_SPACING))
            .transpose()?,
    })
}
