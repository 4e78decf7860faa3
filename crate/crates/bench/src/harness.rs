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

//! Paired-seed benchmark runs.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{ensure, Result};
use jitstar::search::{plan, PlannerConfig, Problem};
use jitstar::{rng_from_seed, Path};
use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioSpec;

/// A run succeeds only if its terminal waypoint is this close to the goal.
pub const GOAL_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerSpec {
    pub name: String,
    pub config: PlannerConfig,
}

impl PlannerSpec {
    pub fn new(name: impl Into<String>, config: PlannerConfig) -> Self {
        Self {
            name: name.into(),
            config,
        }
    }

    pub fn jit() -> Self {
        Self::new("jit", PlannerConfig::jit())
    }

    pub fn ablation() -> Self {
        Self::new("ablation", PlannerConfig::ablation())
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "jit" => Ok(Self::jit()),
            "ablation" => Ok(Self::ablation()),
            other => anyhow::bail!("unknown planner {other:?}; expected jit or ablation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub dim: usize,
    pub planner: String,
    pub seed: u64,
    pub t_init: Option<f64>,
    pub c_init: Option<f64>,
    pub c_final: Option<f64>,
    pub success: bool,
    pub trace: Vec<(f64, f64)>,
}

/// Seed of the planner RNG for a trial; shared by every planner so that
/// paired runs differ only in the planner.
pub fn planner_seed(world_seed: u64) -> u64 {
    let mut z = world_seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Cost of `path` if it starts at the start, ends near the goal and every
/// edge passes the full check.
pub fn revalidate(problem: &Problem, path: &Path) -> Option<f64> {
    let ok = path.start() == &problem.start
        && path.end().distance_to(&problem.goal) <= GOAL_TOLERANCE
        && path
            .edges()
            .all(|(a, b)| problem.is_edge_valid(a.coords(), b.coords()));
    ok.then(|| path.total_cost())
}

/// One planner on one world. Only solutions emitted within `max_time` and
/// confirmed by revalidation count.
pub fn run_trial(
    problem: &Problem,
    scenario: &str,
    spec: &PlannerSpec,
    world_seed: u64,
    max_time: f64,
) -> Result<RunRecord> {
    let cfg = PlannerConfig {
        max_time: Some(max_time),
        ..spec.config.clone()
    };
    // untimed warm-up so that no planner pays the first touch of a fresh world
    std::hint::black_box(problem.is_edge_valid(problem.start.coords(), problem.goal.coords()));
    let mut emitted: Vec<(f64, Path)> = Vec::new();
    plan(
        problem,
        &cfg,
        &mut rng_from_seed(planner_seed(world_seed)),
        &mut |e| {
            emitted.push((e.elapsed, e.path.clone()));
            ControlFlow::Continue(())
        },
    )?;
    let mut trace = Vec::new();
    for (t, path) in &emitted {
        if *t > max_time {
            break;
        }
        if let Some(c) = revalidate(problem, path) {
            if trace.last().is_none_or(|&(_, last)| c < last) {
                trace.push((*t, c));
            }
        }
    }
    let first = trace.first().copied();
    let last = trace.last().copied();
    Ok(RunRecord {
        scenario: scenario.to_string(),
        dim: problem.world.dim(),
        planner: spec.name.clone(),
        seed: world_seed,
        t_init: first.map(|f| f.0),
        c_init: first.map(|f| f.1),
        c_final: last.map(|l| l.1),
        success: first.is_some(),
        trace,
    })
}

/// Worker count from `JIT_THREADS`, else the available parallelism.
pub fn thread_count() -> usize {
    std::env::var("JIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub scenario: ScenarioSpec,
    pub planners: Vec<PlannerSpec>,
    pub trials: usize,
    pub max_time: f64,
    pub base_seed: u64,
    pub threads: usize,
}

/// Every planner on every trial world; world seed of trial `t` is
/// `base_seed + t`. Records are ordered by (trial, planner) whatever the
/// execution order.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<RunRecord>> {
    ensure!(cfg.trials >= 1, "at least one trial is required");
    ensure!(!cfg.planners.is_empty(), "at least one planner is required");
    let problems = (0..cfg.trials)
        .map(|t| {
            let seed = cfg.base_seed + t as u64;
            Ok((seed, Problem::from(cfg.scenario.build(seed)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let id = cfg.scenario.id();
    let jobs = cfg.trials * cfg.planners.len();
    let slots: Mutex<Vec<Option<Result<RunRecord>>>> =
        Mutex::new((0..jobs).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let work = || loop {
        let j = next.fetch_add(1, Ordering::Relaxed);
        if j >= jobs {
            break;
        }
        let n = cfg.planners.len();
        // the order in which planners run rotates with the trial index
        let (t, p) = (j / n, (j % n + j / n) % n);
        let (seed, problem) = &problems[t];
        let rec = run_trial(problem, &id, &cfg.planners[p], *seed, cfg.max_time);
        slots.lock().expect("result lock")[t * n + p] = Some(rec);
    };
    let threads = cfg.threads.clamp(1, jobs);
    if threads == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(work);
            }
        });
    }
    slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}
