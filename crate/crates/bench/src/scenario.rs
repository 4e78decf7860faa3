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

//! Benchmark scenarios and their default budgets.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use jitstar::world::{make_narrow_passage, make_random_rectangles, DEFAULT_RECT_COUNT};
use jitstar::Scenario;

/// Slot width of the narrow-passage scenario in every dimension.
pub const DEFAULT_GAP_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    NarrowPassage,
    RandomRectangles,
    File(PathBuf),
}

impl FromStr for ScenarioKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "np" => Ok(Self::NarrowPassage),
            "rr" => Ok(Self::RandomRectangles),
            p if p.ends_with(".json") => Ok(Self::File(PathBuf::from(p))),
            other => bail!("unknown scenario {other:?}; expected np, rr or a .json file"),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NarrowPassage => f.write_str("np"),
            Self::RandomRectangles => f.write_str("rr"),
            Self::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub dim: usize,
    pub gap_width: f64,
    pub rect_count: usize,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, dim: usize) -> Self {
        Self {
            kind,
            dim,
            gap_width: DEFAULT_GAP_WIDTH,
            rect_count: DEFAULT_RECT_COUNT,
        }
    }

    /// Short identifier used in result files.
    pub fn id(&self) -> String {
        match &self.kind {
            ScenarioKind::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
            k => k.to_string(),
        }
    }

    /// World for one trial. File scenarios ignore the seed.
    pub fn build(&self, seed: u64) -> Result<Scenario> {
        let s = match &self.kind {
            ScenarioKind::NarrowPassage => make_narrow_passage(self.dim, self.gap_width, seed)?,
            ScenarioKind::RandomRectangles => {
                make_random_rectangles(self.dim, self.rect_count, seed)?
            }
            ScenarioKind::File(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?;
                Scenario::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
            }
        };
        if s.dim() != self.dim {
            bail!("scenario has dimension {}, expected {}", s.dim(), self.dim);
        }
        Ok(s)
    }
}

/// Per-scenario planning budgets in seconds.
pub fn default_max_time(kind: &ScenarioKind, dim: usize) -> Option<f64> {
    match (kind, dim) {
        (ScenarioKind::NarrowPassage, 4) => Some(0.3),
        (ScenarioKind::RandomRectangles, 4) => Some(1.6),
        (ScenarioKind::NarrowPassage, 8) => Some(2.3),
        (ScenarioKind::RandomRectangles, 8) => Some(2.0),
        (ScenarioKind::NarrowPassage, 16) => Some(2.5),
        (ScenarioKind::RandomRectangles, 16) => Some(4.0),
        _ => None,
    }
}
