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

use std::path::PathBuf;
use std::process::Command;

use jitstar_bench::output::{parse_csv, render_csv};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jitstar"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

#[test]
fn plan_solves_a_narrow_passage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("path.json");
    let status = bin()
        .args([
            "plan",
            "--scenario",
            "np",
            "--dim",
            "2",
            "--max-time",
            "0.2",
            "--seed",
            "1",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(
        status.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["cost"].as_f64().unwrap() > 0.0);
    assert!(v["waypoints"].as_array().unwrap().len() >= 2);
}

#[test]
fn exit_codes_separate_failure_from_misuse() {
    let tiny = bin()
        .args([
            "plan",
            "--scenario",
            "np",
            "--dim",
            "4",
            "--max-time",
            "0.000001",
        ])
        .output()
        .unwrap();
    assert_eq!(tiny.status.code(), Some(2));
    for args in [
        vec![
            "plan",
            "--scenario",
            "np",
            "--dim",
            "4",
            "--planner",
            "nope",
        ],
        vec!["plan", "--scenario", "maze", "--dim", "4"],
        vec!["plan", "--scenario", "np", "--dim", "4", "--alpha", "2"],
        vec!["plan", "--scenario", "missing.json", "--dim", "4"],
    ] {
        let o = bin().args(&args).output().unwrap();
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn bench_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args([
            "bench",
            "--scenario",
            "np",
            "--dim",
            "2",
            "--trials",
            "3",
            "--max-time",
            "0.05",
            "--plot",
            "--out",
        ])
        .arg(dir.path())
        .env("JIT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(render_csv(&rows).unwrap(), csv);
    for name in ["records.json", "summary.json", "plot.svg"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.contains("jit (") && svg.contains("ablation ("));
}

#[test]
fn dumped_scenarios_plan_like_generated_ones() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("np3.json");
    let dump = bin()
        .args([
            "scenario",
            "dump",
            "--scenario",
            "np",
            "--dim",
            "3",
            "--seed",
            "4",
            "--out",
        ])
        .arg(&file)
        .output()
        .unwrap();
    assert!(dump.status.success());
    let run = |scenario: &str| {
        let o = bin()
            .args([
                "plan",
                "--scenario",
                scenario,
                "--dim",
                "3",
                "--seed",
                "4",
                "--max-time",
                "0.5",
            ])
            .env("JIT_THREADS", "1")
            .output()
            .unwrap();
        String::from_utf8(o.stdout).unwrap()
    };
    let first_cost = |s: &str| {
        s.lines()
            .find(|l| l.starts_with("solution"))
            .map(|l| l.split("cost=").nth(1).unwrap().to_string())
    };
    let a = run("np");
    let b = run(file.to_str().unwrap());
    assert!(first_cost(&a).is_some());
    assert_eq!(first_cost(&a), first_cost(&b));
}

#[test]
fn kin_demo_accepts_one_or_two_chains() {
    let single = bin()
        .args(["kin", "demo", "--max-time", "0.3", "--chain"])
        .arg(data("planar3r.json"))
        .arg("--goal")
        .arg(data("goal_straight.json"))
        .arg("--start")
        .arg(data("start_3r.json"))
        .output()
        .unwrap();
    assert_eq!(
        single.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&single.stderr)
    );
    let dual = bin()
        .args(["kin", "demo", "--max-time", "0.5", "--chain"])
        .arg(data("dual3r.json"))
        .arg("--goal")
        .arg(data("goal_dual.json"))
        .arg("--start")
        .arg(data("start_dual.json"))
        .output()
        .unwrap();
    assert_eq!(
        dual.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&dual.stderr)
    );
    let text = String::from_utf8(dual.stdout).unwrap();
    assert!(text.contains("min sigma_min"));
    let mismatched = bin()
        .args(["kin", "demo", "--chain"])
        .arg(data("dual3r.json"))
        .arg("--goal")
        .arg(data("goal_straight.json"))
        .output()
        .unwrap();
    assert_eq!(mismatched.status.code(), Some(1));
}
