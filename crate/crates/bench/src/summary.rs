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

//! Aggregate statistics over benchmark records.

use serde::{Deserialize, Serialize};

use crate::harness::RunRecord;

pub const TIME_BINS: usize = 100;

/// Lower median: element `floor((n-1)/2)` of the sorted values.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Element `floor(p * (n-1))` of the sorted values; `inf` sorts last.
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let i = (p.clamp(0.0, 1.0) * (v.len() - 1) as f64).floor() as usize;
    Some(v[i])
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Best cost of a run at time `t`, carrying the last solution forward.
pub fn cost_at(record: &RunRecord, t: f64) -> f64 {
    record
        .trace
        .iter()
        .take_while(|(et, _)| *et <= t)
        .last()
        .map_or(f64::INFINITY, |&(_, c)| c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileBand {
    pub time: f64,
    pub lower: Option<f64>,
    pub median: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub planner: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_t_init: Option<f64>,
    pub median_c_init: Option<f64>,
    pub median_c_final: Option<f64>,
    pub cost_bands: Vec<QuantileBand>,
    pub success_curve: Vec<(f64, f64)>,
}

/// Summary of one planner's records. Medians run over successful runs; in
/// the time bands an unsolved run counts as infinite cost.
pub fn summarize(planner: &str, records: &[&RunRecord], max_time: f64) -> Summary {
    let runs = records.len();
    let successes = records.iter().filter(|r| r.success).count();
    let median_of = |f: &dyn Fn(&RunRecord) -> Option<f64>| {
        let v: Vec<f64> = records
            .iter()
            .filter(|r| r.success)
            .filter_map(|r| f(r))
            .collect();
        lower_median(&v)
    };
    let mut cost_bands = Vec::with_capacity(TIME_BINS);
    let mut success_curve = Vec::with_capacity(TIME_BINS);
    for b in 1..=TIME_BINS {
        let t = max_time * b as f64 / TIME_BINS as f64;
        let costs: Vec<f64> = records.iter().map(|r| cost_at(r, t)).collect();
        let solved = costs.iter().filter(|c| c.is_finite()).count();
        cost_bands.push(QuantileBand {
            time: t,
            lower: quantile(&costs, 0.25).and_then(finite),
            median: lower_median(&costs).and_then(finite),
            upper: quantile(&costs, 0.75).and_then(finite),
        });
        success_curve.push((
            t,
            if runs == 0 {
                0.0
            } else {
                solved as f64 / runs as f64
            },
        ));
    }
    Summary {
        planner: planner.to_string(),
        runs,
        successes,
        success_rate: if runs == 0 {
            0.0
        } else {
            successes as f64 / runs as f64
        },
        median_t_init: median_of(&|r| r.t_init),
        median_c_init: median_of(&|r| r.c_init),
        median_c_final: median_of(&|r| r.c_final),
        cost_bands,
        success_curve,
    }
}

/// One summary per planner, in order of first appearance.
pub fn summarize_by_planner(records: &[RunRecord], max_time: f64) -> Vec<Summary> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.planner.as_str()) {
            names.push(&r.planner);
        }
    }
    names
        .into_iter()
        .map(|n| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| r.planner == n).collect();
            summarize(n, &mine, max_time)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(planner: &str, seed: u64, trace: Vec<(f64, f64)>) -> RunRecord {
        RunRecord {
            scenario: "np".into(),
            dim: 2,
            planner: planner.into(),
            seed,
            t_init: trace.first().map(|x| x.0),
            c_init: trace.first().map(|x| x.1),
            c_final: trace.last().map(|x| x.1),
            success: !trace.is_empty(),
            trace,
        }
    }

    #[test]
    fn lower_median_picks_the_lower_middle() {
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[]), None);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25), Some(2.0));
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.75), Some(4.0));
    }

    #[test]
    fn all_failures_have_no_medians() {
        let records = vec![rec("jit", 0, vec![]), rec("jit", 1, vec![])];
        let s = &summarize_by_planner(&records, 1.0)[0];
        assert_eq!(s.success_rate, 0.0);
        assert_eq!(
            (s.median_t_init, s.median_c_init, s.median_c_final),
            (None, None, None)
        );
    }

    #[test]
    fn single_success_bands_follow_its_trace() {
        let records = vec![rec("jit", 0, vec![(0.1, 3.0), (0.5, 2.0)])];
        let s = &summarize_by_planner(&records, 1.0)[0];
        for b in &s.cost_bands {
            let c = cost_at(&records[0], b.time);
            let want = c.is_finite().then_some(c);
            assert_eq!((b.lower, b.median, b.upper), (want, want, want));
        }
    }

    #[test]
    fn cost_is_carried_forward() {
        let r = rec("jit", 0, vec![(0.1, 3.0), (0.5, 2.0)]);
        assert_eq!(cost_at(&r, 0.05), f64::INFINITY);
        assert_eq!(cost_at(&r, 0.1), 3.0);
        assert_eq!(cost_at(&r, 0.49), 3.0);
        assert_eq!(cost_at(&r, 1.0), 2.0);
    }

    #[test]
    fn medians_use_successes_and_bands_count_failures() {
        let records = vec![
            rec("jit", 0, vec![(0.2, 2.0)]),
            rec("jit", 1, vec![]),
            rec("jit", 2, vec![]),
            rec("ablation", 0, vec![(0.1, 1.5)]),
        ];
        let s = summarize_by_planner(&records, 1.0);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].planner, "jit");
        assert_eq!(s[0].successes, 1);
        assert_eq!(s[0].median_c_final, Some(2.0));
        assert_eq!(s[0].cost_bands[99].median, None);
        assert_eq!(s[1].median_c_final, Some(1.5));
        assert_eq!(s[0].cost_bands.len(), TIME_BINS);
        assert_eq!(s[0].cost_bands[0].lower, None);
        assert_eq!(s[0].cost_bands[19].lower, Some(2.0));
        assert!((s[0].success_curve[99].1 - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(s[0].success_curve[0].1, 0.0);
    }

    proptest! {
        #[test]
        fn bands_are_ordered_and_monotone(
            traces in prop::collection::vec(
                prop::collection::vec((0.0f64..1.0, 0.5f64..5.0), 0..5), 1..12)
        ) {
            let records: Vec<RunRecord> = traces
                .into_iter()
                .enumerate()
                .map(|(i, mut t)| {
                    t.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut best = f64::INFINITY;
                    t.retain(|&(_, c)| { let keep = c < best; if keep { best = c; } keep });
                    rec("p", i as u64, t)
                })
                .collect();
            let s = &summarize_by_planner(&records, 1.0)[0];
            let inf = |x: Option<f64>| x.unwrap_or(f64::INFINITY);
            let mut prev_med = f64::INFINITY;
            let mut prev_rate = 0.0;
            for (b, (_, rate)) in s.cost_bands.iter().zip(&s.success_curve) {
                prop_assert!(inf(b.lower) <= inf(b.median) && inf(b.median) <= inf(b.upper));
                prop_assert!(inf(b.median) <= prev_med);
                prop_assert!(*rate >= prev_rate);
                prev_med = inf(b.median);
                prev_rate = *rate;
            }
        }
    }
}
