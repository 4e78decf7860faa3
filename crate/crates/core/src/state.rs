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

//! State, edge and path value types with the Euclidean metric.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point in the planning space.
///
/// States are plain values compared by exact coordinate equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StateVector {
    coords: Vec<f64>,
}

impl StateVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain(
                "a state needs at least one coordinate".into(),
            ));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { coords })
    }

    /// Builds a state from coordinates already known to be finite.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    /// `n` copies of `value`.
    pub fn splat(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Euclidean distance, panicking on mismatched dimensions.
    pub fn distance_to(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        euclid(&self.coords, &other.coords)
    }
}

impl Index<usize> for StateVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StateVector> for Vec<f64> {
    fn from(s: StateVector) -> Self {
        s.coords
    }
}

/// Directed edge between two states of equal dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: StateVector,
    pub target: StateVector,
}

impl Edge {
    pub fn new(source: StateVector, target: StateVector) -> Result<Self> {
        check_dim(source.dim(), target.dim())?;
        Ok(Self { source, target })
    }

    pub fn length(&self) -> f64 {
        euclid(self.source.coords(), self.target.coords())
    }
}

/// Piecewise-linear path with its cached total length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    waypoints: Vec<StateVector>,
    total_cost: f64,
}

impl Path {
    pub fn new(waypoints: Vec<StateVector>) -> Result<Self> {
        let total_cost = waypoints_cost(&waypoints)?;
        Ok(Self {
            waypoints,
            total_cost,
        })
    }

    pub fn waypoints(&self) -> &[StateVector] {
        &self.waypoints
    }

    pub fn into_waypoints(self) -> Vec<StateVector> {
        self.waypoints
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn start(&self) -> &StateVector {
        &self.waypoints[0]
    }

    pub fn end(&self) -> &StateVector {
        self.waypoints
            .last()
            .expect("paths hold at least two waypoints")
    }

    pub fn edges(&self) -> impl Iterator<Item = (&StateVector, &StateVector)> {
        self.waypoints.windows(2).map(|w| (&w[0], &w[1]))
    }

    /// Inserts interpolated states so that consecutive waypoints are at
    /// most `spacing` apart. Original waypoints are kept bitwise.
    pub fn densified(&self, spacing: f64) -> Result<Path> {
        if !(spacing > 0.0) {
            return Err(Error::Domain(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let mut out = vec![self.waypoints[0].clone()];
        for (a, b) in self.edges() {
            let steps = step_count(a.distance_to(b), spacing).max(1);
            for i in 1..steps {
                out.push(lerp(a, b, i as f64 / steps as f64));
            }
            out.push(b.clone());
        }
        Path::new(out)
    }
}

/// Euclidean distance between two states.
pub fn distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(euclid(a.coords(), b.coords()))
}

/// Point at fraction `t` along the segment from `a` to `b`.
pub fn interpolate(a: &StateVector, b: &StateVector, t: f64) -> Result<StateVector> {
    check_dim(a.dim(), b.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            lower: 0.0,
            upper: 1.0,
        });
    }
    Ok(lerp(a, b, t))
}

/// Sum of segment lengths of a path.
pub fn path_cost(p: &Path) -> f64 {
    p.total_cost
}

fn waypoints_cost(w: &[StateVector]) -> Result<f64> {
    if w.len() < 2 {
        return Err(Error::MalformedPath(w.len()));
    }
    let mut total = 0.0;
    for pair in w.windows(2) {
        total += distance(&pair[0], &pair[1])?;
    }
    Ok(total)
}

pub(crate) fn lerp(a: &StateVector, b: &StateVector, t: f64) -> StateVector {
    if t == 0.0 {
        return a.clone();
    }
    if t == 1.0 {
        return b.clone();
    }
    StateVector::from_vec_unchecked(lerp_coords(a.coords(), b.coords(), t))
}

pub(crate) fn lerp_coords(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

#[inline]
pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    euclid_sq(a, b).sqrt()
}

#[inline]
pub(crate) fn euclid_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Number of intervals of length at most `spacing` needed to cover `len`.
pub(crate) fn step_count(len: f64, spacing: f64) -> usize {
    // Guards 0.25 / 0.01 = 25.000000000000004 from rounding up to 26.
    let raw = len / spacing;
    let snapped = raw.round();
    if (raw - snapped).abs() <= 1e-9 * snapped.max(1.0) {
        snapped as usize
    } else {
        raw.ceil() as usize
    }
}
