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

use std::fs;
use std::io::Write as _;
use std::ops::ControlFlow;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use jitstar::kinematics::KinematicChain;
use jitstar::motion::{refine_goal, ManipConfig, Manipulator};
use jitstar::search::{plan, PlannerConfig, Problem};
use jitstar::self_collision::ScdfConfig;
use jitstar::{rng_from_seed, HyperRect, ObstacleWorld, Path, StateVector};
use jitstar_bench::harness::{
    planner_seed, revalidate, run_benchmark, thread_count, BenchConfig, PlannerSpec,
};
use jitstar_bench::output::{write_csv, write_json, write_svg};
use jitstar_bench::scenario::{default_max_time, ScenarioKind, ScenarioSpec, DEFAULT_GAP_WIDTH};
use jitstar_bench::summary::summarize_by_planner;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "jitstar",
    version,
    about = "Bidirectional lazy informed-tree planner and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan once on a scenario.
    Plan(PlanArgs),
    /// Paired-seed comparison of planners.
    Bench(BenchArgs),
    /// Kinematic tools.
    Kin {
        #[command(subcommand)]
        command: KinCommand,
    },
    /// Generated scenarios.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
}

#[derive(Subcommand)]
enum KinCommand {
    /// Refine a goal configuration and plan to it in joint space.
    Demo(KinArgs),
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Write a generated scenario as JSON.
    Dump(DumpArgs),
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// `np`, `rr` or a scenario JSON file.
    #[arg(long)]
    scenario: ScenarioKind,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_GAP_WIDTH)]
    gap_width: f64,
    #[arg(long, default_value_t = jitstar::world::DEFAULT_RECT_COUNT)]
    rect_count: usize,
}

impl ScenarioArgs {
    fn spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            gap_width: self.gap_width,
            rect_count: self.rect_count,
            ..ScenarioSpec::new(self.scenario.clone(), self.dim)
        }
    }

    fn max_time(&self, given: Option<f64>) -> f64 {
        given
            .or_else(|| default_max_time(&self.scenario, self.dim))
            .unwrap_or(1.0)
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value = "jit")]
    planner: String,
    #[arg(long)]
    max_time: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// Write the solution path as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    max_time: Option<f64>,
    /// Comma-separated planner names.
    #[arg(long, default_value = "jit,ablation", value_delimiter = ',')]
    planners: Vec<String>,
}

#[derive(Args)]
struct KinArgs {
    /// One chain object or an array of two chains.
    #[arg(long)]
    chain: PathBuf,
    /// Goal joint vector as a JSON array.
    #[arg(long)]
    goal: PathBuf,
    /// Start joint vector as a JSON array; zeros if omitted.
    #[arg(long)]
    start: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    max_time: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.7)]
    alpha: f64,
    #[arg(long)]
    eta_m: Option<f64>,
    #[arg(long)]
    eps_gate: Option<f64>,
    #[arg(long)]
    perturb_count: Option<usize>,
    #[arg(long)]
    ee_drift_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Distinguishes a planner that ran but found nothing from a bad invocation.
enum Outcome {
    Solved,
    Unsolved,
}

#[derive(Serialize)]
struct PathFile<'a> {
    cost: f64,
    waypoints: Vec<&'a [f64]>,
}

fn write_path(out: &FsPath, path: &Path) -> Result<()> {
    let file = PathFile {
        cost: path.total_cost(),
        waypoints: path.waypoints().iter().map(StateVector::coords).collect(),
    };
    write_json(out, &file)
}

fn read_vector(path: &FsPath) -> Result<StateVector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Vec<f64> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(StateVector::new(v)?)
}

fn read_chains(path: &FsPath) -> Result<Vec<KinematicChain>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let items = match value {
        serde_json::Value::Array(items) => items,
        other => vec![other],
    };
    items
        .iter()
        .map(|v| {
            KinematicChain::from_json(&v.to_string())
                .with_context(|| format!("chain in {}", path.display()))
        })
        .collect()
}

fn cmd_plan(args: &PlanArgs) -> Result<Outcome> {
    let mut spec = PlannerSpec::by_name(&args.planner)?;
    let cfg = &mut spec.config;
    cfg.max_time = Some(args.scenario.max_time(args.max_time));
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if let Some(t) = args.tau {
        cfg.tau = t;
    }
    if let Some(b) = args.batch {
        cfg.batch_size = b;
    }
    cfg.validate()?;
    let problem = Problem::from(args.scenario.spec().build(args.seed)?);
    let out = plan(
        &problem,
        cfg,
        &mut rng_from_seed(planner_seed(args.seed)),
        &mut |e| {
            println!("solution t={:.6} cost={:.9}", e.elapsed, e.cost);
            ControlFlow::Continue(())
        },
    )?;
    let s = &out.stats;
    println!(
        "elapsed={:.6} iterations={} batches={} solutions={} rewires={} just_samples={}",
        out.elapsed, s.iterations, s.batches, s.solutions, s.just_edge_rewires, s.just_samples
    );
    let Some(path) = out
        .path
        .as_ref()
        .filter(|p| revalidate(&problem, p).is_some())
    else {
        println!("no solution");
        return Ok(Outcome::Unsolved);
    };
    println!(
        "final cost={:.9} waypoints={}",
        path.total_cost(),
        path.waypoints().len()
    );
    if let Some(o) = &args.out {
        write_path(o, path)?;
    }
    Ok(Outcome::Solved)
}

fn cmd_bench(args: &BenchArgs) -> Result<Outcome> {
    let planners = args
        .planners
        .iter()
        .map(|n| PlannerSpec::by_name(n))
        .collect::<Result<Vec<_>>>()?;
    let max_time = args.scenario.max_time(args.max_time);
    let spec = args.scenario.spec();
    let cfg = BenchConfig {
        scenario: spec.clone(),
        planners,
        trials: args.trials,
        max_time,
        base_seed: args.base_seed,
        threads: thread_count(),
    };
    let records = run_benchmark(&cfg)?;
    let summaries = summarize_by_planner(&records, max_time);
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_csv(&args.out.join("records.csv"), &records)?;
    write_json(&args.out.join("records.json"), &records)?;
    write_json(&args.out.join("summary.json"), &summaries)?;
    if args.plot {
        let title = format!("{} {}D, max time {max_time} s", spec.id(), spec.dim);
        write_svg(&args.out.join("plot.svg"), &summaries, max_time, &title)?;
    }
    let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
    for s in &summaries {
        println!(
            "{:<10} success {}/{}  t_init {}  c_init {}  c_final {}",
            s.planner,
            s.successes,
            s.runs,
            fmt(s.median_t_init),
            fmt(s.median_c_init),
            fmt(s.median_c_final)
        );
    }
    Ok(if records.iter().any(|r| r.success) {
        Outcome::Solved
    } else {
        Outcome::Unsolved
    })
}

fn cmd_kin(args: &KinArgs) -> Result<Outcome> {
    let chains = read_chains(&args.chain)?;
    if !(1..=2).contains(&chains.len()) {
        bail!("expected one or two chains, got {}", chains.len());
    }
    let m = Manipulator::new(chains)?.with_self_collision(ScdfConfig::default());
    let n = m.dof();
    let goal = read_vector(&args.goal)?;
    let start = match &args.start {
        Some(p) => read_vector(p)?,
        None => StateVector::splat(n, 0.0)?,
    };
    let defaults = ManipConfig::default();
    let manip = ManipConfig {
        eta_m: args.eta_m.unwrap_or(defaults.eta_m),
        eps_gate: args.eps_gate.unwrap_or(defaults.eps_gate),
        perturb_count: args.perturb_count.unwrap_or(defaults.perturb_count),
        ee_drift_tol: args.ee_drift_tol.unwrap_or(defaults.ee_drift_tol),
        ..defaults
    };
    manip.validate()?;
    let before = m.sigma_min(goal.coords())?;
    let refined = refine_goal(&m, &goal, &manip, &mut rng_from_seed(args.seed))?;
    println!(
        "goal sigma_min {before:.6} -> {:.6}, end-effector drift {:.2e}",
        m.sigma_min(refined.coords())?,
        m.drift(refined.coords(), goal.coords())?
    );
    let bounds = HyperRect::from_slices(m.lower(), m.upper())?;
    let world = ObstacleWorld::with_default_resolution(bounds, vec![])?;
    let problem = Problem::new(world, start, refined)?.with_manipulator(m.clone())?;
    let cfg = PlannerConfig {
        alpha: args.alpha,
        max_time: Some(args.max_time),
        manip,
        use_motion_performance: args.alpha < 1.0,
        ..PlannerConfig::kinematic()
    };
    cfg.validate()?;
    let out = plan(&problem, &cfg, &mut rng_from_seed(args.seed), &mut |_| {
        ControlFlow::Continue(())
    })?;
    let Some(path) = out.best_path().filter(|p| problem.validates(p)) else {
        println!("no solution");
        return Ok(Outcome::Unsolved);
    };
    let min_sigma = path.waypoints().iter().try_fold(f64::INFINITY, |acc, q| {
        m.sigma_min(q.coords()).map(|s| acc.min(s))
    })?;
    println!(
        "path cost {:.6}, {} waypoints, min sigma_min {min_sigma:.6}",
        path.total_cost(),
        path.waypoints().len()
    );
    if let Some(o) = &args.out {
        write_path(o, path)?;
    }
    Ok(Outcome::Solved)
}

fn cmd_dump(args: &DumpArgs) -> Result<Outcome> {
    let json = args.scenario.spec().build(args.seed)?.to_json()?;
    match &args.out {
        Some(o) => fs::write(o, json).with_context(|| format!("writing {}", o.display()))?,
        None => writeln!(std::io::stdout(), "{json}").context("writing to stdout")?,
    }
    Ok(Outcome::Solved)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Kin {
            command: KinCommand::Demo(a),
        } => cmd_kin(a),
        Command::Scenario {
            command: ScenarioCommand::Dump(a),
        } => cmd_dump(a),
    };
    match result {
        Ok(Outcome::Solved) => ExitCode::SUCCESS,
        Ok(Outcome::Unsolved) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
