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

//! CSV, JSON and SVG writers for benchmark results.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::harness::RunRecord;
use crate::summary::Summary;

pub const CSV_HEADER: [&str; 8] = [
    "scenario", "dim", "planner", "seed", "t_init", "c_init", "c_final", "success",
];

/// Shortest decimal form of `x` rounded to nine significant digits.
pub fn format_float(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("well-formed float");
    rounded.to_string()
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scenario: String,
    pub dim: usize,
    pub planner: String,
    pub seed: u64,
    pub t_init: Option<f64>,
    pub c_init: Option<f64>,
    pub c_final: Option<f64>,
    pub success: bool,
}

impl From<&RunRecord> for CsvRow {
    fn from(r: &RunRecord) -> Self {
        Self {
            scenario: r.scenario.clone(),
            dim: r.dim,
            planner: r.planner.clone(),
            seed: r.seed,
            t_init: r.t_init,
            c_init: r.c_init,
            c_final: r.c_final,
            success: r.success,
        }
    }
}

pub fn render_csv(rows: &[CsvRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.dim.to_string(),
            r.planner.clone(),
            r.seed.to_string(),
            opt_float(r.t_init),
            opt_float(r.c_init),
            opt_float(r.c_final),
            r.success.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    anyhow::ensure!(header == CSV_HEADER, "unexpected CSV header {header:?}");
    r.deserialize()
        .map(|row| row.context("malformed CSV row"))
        .collect()
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let rows: Vec<CsvRow> = records.iter().map(CsvRow::from).collect();
    fs::write(path, render_csv(&rows)?).with_context(|| format!("writing {}", path.display()))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    t_max: f64,
    v_min: f64,
    v_max: f64,
}

impl Panel {
    fn x(&self, t: f64) -> f64 {
        self.x0 + self.w * t / self.t_max
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.v_max - self.v_min).max(1e-12);
        self.y0 + self.h * (1.0 - (v - self.v_min) / span)
    }

    fn frame(&self, out: &mut String, title: &str, y_label: &str) {
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            self.x0, self.y0, self.w, self.h
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{title}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 - 8.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">time [s]</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 32.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" transform="rotate(-90 {:.1} {:.1})" text-anchor="middle">{y_label}</text>"#,
            self.x0 - 42.0,
            self.y0 + self.h / 2.0,
            self.x0 - 42.0,
            self.y0 + self.h / 2.0
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let t = self.t_max * f;
            let v = self.v_min + (self.v_max - self.v_min) * f;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
                self.x(t),
                self.y0 + self.h + 14.0,
                format_float((t * 1e3).round() / 1e3)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
                self.x0 - 4.0,
                self.y(v) + 3.0,
                format_float((v * 1e3).round() / 1e3)
            );
        }
    }
}

fn polyline(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Median cost over time with its 25-75% band, and success rate over time.
pub fn render_svg(summaries: &[Summary], max_time: f64, title: &str) -> String {
    let finite: Vec<f64> = summaries
        .iter()
        .flat_map(|s| {
            s.cost_bands
                .iter()
                .flat_map(|b| [b.lower, b.median, b.upper])
        })
        .flatten()
        .collect();
    let (mut lo, mut hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-3);
    let cost = Panel {
        x0: 70.0,
        y0: 40.0,
        w: 360.0,
        h: 260.0,
        t_max: max_time,
        v_min: lo - pad,
        v_max: hi + pad,
    };
    let rate = Panel {
        x0: 530.0,
        y0: 40.0,
        w: 360.0,
        h: 260.0,
        t_max: max_time,
        v_min: 0.0,
        v_max: 1.0,
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="960" height="400" viewBox="0 0 960 400">"#
    );
    let _ = writeln!(out, r#"<rect width="960" height="400" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="480" y="18" text-anchor="middle" font-size="15">{title}</text>"#
    );
    cost.frame(&mut out, "median cost (25-75%)", "cost");
    rate.frame(&mut out, "success rate", "fraction solved");
    for (i, s) in summaries.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let band: Vec<_> = s
            .cost_bands
            .iter()
            .filter_map(|b| Some((b.time, b.lower?, b.upper?)))
            .collect();
        if !band.is_empty() {
            let mut pts: Vec<(f64, f64)> = band
                .iter()
                .map(|&(t, _, u)| (cost.x(t), cost.y(u)))
                .collect();
            pts.extend(band.iter().rev().map(|&(t, l, _)| (cost.x(t), cost.y(l))));
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                polyline(&pts)
            );
        }
        let median: Vec<_> = s
            .cost_bands
            .iter()
            .filter_map(|b| Some((cost.x(b.time), cost.y(b.median?))))
            .collect();
        if !median.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                polyline(&median)
            );
        }
        let curve: Vec<_> = s
            .success_curve
            .iter()
            .map(|&(t, r)| (rate.x(t), rate.y(r)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            polyline(&curve)
        );
        let ly = 350.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="80" y1="{:.1}" x2="104" y2="{:.1}" stroke="{color}" stroke-width="3"/>"#,
            ly - 4.0,
            ly - 4.0
        );
        let _ = writeln!(
            out,
            r#"<text x="110" y="{ly:.1}" font-size="12">{} ({}/{} solved)</text>"#,
            s.planner, s.successes, s.runs
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: &Path, summaries: &[Summary], max_time: f64, title: &str) -> Result<()> {
    fs::write(path, render_svg(summaries, max_time, title))
        .with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::summarize_by_planner;
    use proptest::prelude::*;

    fn row(seed: u64, c: Option<f64>) -> CsvRow {
        CsvRow {
            scenario: "np".into(),
            dim: 4,
            planner: "jit".into(),
            seed,
            t_init: c.map(|_| 0.012_345_678_912),
            c_init: c.map(|x| x * 1.5),
            c_final: c,
            success: c.is_some(),
        }
    }

    #[test]
    fn floats_keep_nine_significant_digits() {
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.012_345_678_912), "0.0123456789");
        assert_eq!(format_float(1_234.567_891_23), "1234.56789");
    }

    #[test]
    fn csv_has_the_expected_layout() {
        let text = render_csv(&[row(3, Some(1.25)), row(4, None)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "scenario,dim,planner,seed,t_init,c_init,c_final,success"
        );
        assert_eq!(lines[1], "np,4,jit,3,0.0123456789,1.875,1.25,true");
        assert_eq!(lines[2], "np,4,jit,4,,,,false");
    }

    #[test]
    fn empty_records_give_a_header_only_csv() {
        assert_eq!(
            render_csv(&[]).unwrap(),
            format!("{}\n", CSV_HEADER.join(","))
        );
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(parse_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn io_errors_name_the_file() {
        let err = read_csv(Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(format!("{err:#}").contains("/nonexistent/dir/x.csv"));
    }

    #[test]
    fn svg_labels_every_planner() {
        let rec = |p: &str, c: f64| RunRecord {
            scenario: "np".into(),
            dim: 2,
            planner: p.into(),
            seed: 0,
            t_init: Some(0.1),
            c_init: Some(c),
            c_final: Some(c),
            success: true,
            trace: vec![(0.1, c)],
        };
        let s = summarize_by_planner(&[rec("jit", 1.0), rec("ablation", 1.2)], 1.0);
        let svg = render_svg(&s, 1.0, "np 2D");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("jit (1/1 solved)") && svg.contains("ablation (1/1 solved)"));
        assert_eq!(svg.matches("<polygon").count(), 2);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_byte_identical(
            costs in prop::collection::vec(prop::option::of(1e-6f64..1e6), 0..20)
        ) {
            let rows: Vec<CsvRow> = costs.iter().enumerate().map(|(i, &c)| row(i as u64, c)).collect();
            let first = render_csv(&rows).unwrap();
            let parsed = parse_csv(&first).unwrap();
            prop_assert_eq!(parsed.len(), rows.len());
            let second = render_csv(&parsed).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
