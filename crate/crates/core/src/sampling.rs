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

//! Uniform, informed and priority-region sampling, plus the measures used by
//! the rewiring radius.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::state::{euclid, Edge, StateVector};
use crate::world::{HyperRect, ObstacleWorld};

/// Prolate hyperspheroid with foci `focus_a`, `focus_b` and transverse
/// diameter `c_best`. An infinite `c_best` stands for the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct InformedSet {
    focus_a: StateVector,
    focus_b: StateVector,
    c_best: f64,
    c_min: f64,
}

impl InformedSet {
    pub fn new(focus_a: StateVector, focus_b: StateVector, c_best: f64) -> Result<Self> {
        check_dim(focus_a.dim(), focus_b.dim())?;
        let c_min = focus_a.distance_to(&focus_b);
        Ok(Self {
            focus_a,
            focus_b,
            c_best,
            c_min,
        })
    }

    pub fn focus_a(&self) -> &StateVector {
        &self.focus_a
    }

    pub fn focus_b(&self) -> &StateVector {
        &self.focus_b
    }

    pub fn c_best(&self) -> f64 {
        self.c_best
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn dim(&self) -> usize {
        self.focus_a.dim()
    }

    pub fn set_c_best(&mut self, c_best: f64) {
        self.c_best = c_best;
    }

    pub fn is_bounded(&self) -> bool {
        self.c_best.is_finite()
    }

    pub fn is_empty(&self) -> bool {
        self.c_best < self.c_min
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        !self.is_bounded()
            || euclid(x, self.focus_a.coords()) + euclid(x, self.focus_b.coords()) <= self.c_best
    }

    /// Lebesgue measure; infinite when unbounded.
    pub fn measure(&self) -> f64 {
        if !self.is_bounded() {
            return f64::INFINITY;
        }
        if self.is_empty() {
            return 0.0;
        }
        let n = self.dim() as f64;
        let conj = (self.c_best * self.c_best - self.c_min * self.c_min)
            .max(0.0)
            .sqrt();
        zeta(self.dim()) * 0.5 * self.c_best * (0.5 * conj).powf(n - 1.0)
    }
}

/// Precomputed transform from the unit ball onto an informed set.
#[derive(Debug, Clone)]
pub struct InformedSampler {
    centre: Vec<f64>,
    // Householder vector mapping e1 onto the focal axis; empty for identity
    reflector: Vec<f64>,
    radii: (f64, f64),
}

impl InformedSampler {
    pub fn new(set: &InformedSet) -> Result<Self> {
        if set.is_empty() || !set.is_bounded() {
            return Err(Error::EmptyInformedSet {
                c_best: set.c_best,
                c_min: set.c_min,
            });
        }
        let a = set.focus_a.coords();
        let b = set.focus_b.coords();
        let centre: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let mut reflector = Vec::new();
        if set.c_min > 0.0 {
            let mut v: Vec<f64> = a.iter().zip(b).map(|(x, y)| (y - x) / set.c_min).collect();
            v[0] -= 1.0;
            if v.iter().map(|t| t * t).sum::<f64>() > 1e-24 {
                reflector = v;
            }
        }
        let c = set.c_best;
        let conj = (c * c - set.c_min * set.c_min).max(0.0).sqrt();
        Ok(Self {
            centre,
            reflector,
            radii: (0.5 * c, 0.5 * conj),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        let mut y = unit_ball_sample(self.centre.len(), rng);
        y[0] *= self.radii.0;
        for v in &mut y[1..] {
            *v *= self.radii.1;
        }
        if !self.reflector.is_empty() {
            let v = &self.reflector;
            let vv: f64 = v.iter().map(|t| t * t).sum();
            let vy: f64 = v.iter().zip(&y).map(|(p, q)| p * q).sum();
            let s = 2.0 * vy / vv;
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi -= s * vi;
            }
        }
        for (yi, ci) in y.iter_mut().zip(&self.centre) {
            *yi += ci;
        }
        StateVector::from_vec_unchecked(y)
    }
}

/// Uniform sample from the closed unit ball.
pub fn unit_ball_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm > 1e-300 {
            let r = rng.random::<f64>().powf(1.0 / n as f64) / norm;
            v.iter_mut().for_each(|t| *t *= r);
            return v;
        }
    }
}

pub fn sample_uniform<R: Rng + ?Sized>(w: &ObstacleWorld, rng: &mut R) -> StateVector {
    sample_in_rect(w.bounds(), rng)
}

pub(crate) fn sample_in_rect<R: Rng + ?Sized>(r: &HyperRect, rng: &mut R) -> StateVector {
    let lo = r.lower().coords();
    let hi = r.upper().coords();
    StateVector::from_vec_unchecked(
        lo.iter()
            .zip(hi)
            .map(|(l, h)| l + rng.random::<f64>() * (h - l))
            .collect(),
    )
}

pub fn sample_informed<R: Rng + ?Sized>(s: &InformedSet, rng: &mut R) -> Result<StateVector> {
    Ok(InformedSampler::new(s)?.sample(rng))
}

/// Volume of the unit n-ball.
pub fn unit_ball_measure(n: i64) -> Result<f64> {
    if n <= 0 {
        return Err(Error::Domain(format!(
            "unit ball dimension must be positive, got {n}"
        )));
    }
    Ok(zeta(n as usize))
}

pub(crate) fn zeta(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    PI.powf(h) / libm::tgamma(h + 1.0)
}

const SERIES_TOL: f64 = 1e-12;
const SERIES_TERMS: usize = 100_000;

/// Gauss hypergeometric function by its power series, `|z| < 1`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Domain(format!("c = {c} is a non-positive integer")));
    }
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!("|z| = {} must be below 1", z.abs())));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_TERMS {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        if term == 0.0 {
            return Ok(sum);
        }
        sum += term;
        if term.abs() <= SERIES_TOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Numerical(format!(
        "2F1({a}, {b}; {c}; {z}) did not converge in {SERIES_TERMS} terms"
    )))
}

/// Measure of the lens where two radius-`c` balls with centres `c` apart
/// overlap.
pub fn priority_region_measure(n: usize, c: f64) -> Result<f64> {
    lens_measure(n, c, 0.5 * (1.0 - n as f64))
}

fn lens_measure(n: usize, c: f64, b: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("lens measure needs n >= 2, got {n}")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!(
            "edge cost must be positive, got {c}"
        )));
    }
    let nf = n as f64;
    let (r, h) = (c, 0.5 * c);
    let u = (r - h) / r;
    let ratio = libm::tgamma(1.0 + 0.5 * nf) / (PI.sqrt() * libm::tgamma(0.5 * (nf + 1.0)));
    let f = gauss_2f1(0.5, b, 1.5, u * u)?;
    Ok(2.0 * zeta(n) * r.powf(nf) * (0.5 - u * ratio * f))
}

/// States strictly within `c` of both edge endpoints, clipped to an
/// informed set.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityRegion {
    source: StateVector,
    target: StateVector,
    c: f64,
    informed: InformedSet,
}

impl PriorityRegion {
    pub fn new(
        source: StateVector,
        target: StateVector,
        c: f64,
        informed: InformedSet,
    ) -> Result<Self> {
        check_dim(source.dim(), target.dim())?;
        check_dim(source.dim(), informed.dim())?;
        if !(c > 0.0) {
            return Err(Error::Domain(format!(
                "priority region needs c > 0, got {c}"
            )));
        }
        Ok(Self {
            source,
            target,
            c,
            informed,
        })
    }

    pub fn source(&self) -> &StateVector {
        &self.source
    }

    pub fn target(&self) -> &StateVector {
        &self.target
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        euclid(x, self.source.coords()) < self.c
            && euclid(x, self.target.coords()) < self.c
            && self.informed.contains(x)
    }

    /// Radius of the smallest ball about the edge midpoint covering the lens.
    pub fn bounding_radius(&self) -> f64 {
        let d = self.source.distance_to(&self.target);
        (self.c * self.c - 0.25 * d * d).max(0.0).sqrt()
    }
}

/// Rejection sample from the bounding ball; `None` when `max_tries` draws
/// all miss.
pub fn sample_priority_region<R: Rng + ?Sized>(
    r: &PriorityRegion,
    rng: &mut R,
    max_tries: usize,
) -> Option<StateVector> {
    if r.informed.is_empty() {
        return None;
    }
    let n = r.source.dim();
    let radius = r.bounding_radius();
    let mid: Vec<f64> = r
        .source
        .coords()
        .iter()
        .zip(r.target.coords())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    for _ in 0..max_tries {
        let mut x = unit_ball_sample(n, rng);
        for (xi, mi) in x.iter_mut().zip(&mid) {
            *xi = mi + radius * *xi;
        }
        if r.contains(&x) {
            return Some(StateVector::from_vec_unchecked(x));
        }
    }
    None
}

/// Samples collected by the planner.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleLedger {
    pub free_samples: Vec<StateVector>,
    pub obstacle_samples: Vec<StateVector>,
    pub failed_edges: Vec<Edge>,
}

impl SampleLedger {
    pub fn len(&self) -> usize {
        self.free_samples.len() + self.obstacle_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const BOUNDS_TRIES: usize = 100;
/// Draw budget per priority-region sample.
pub const PRIORITY_MAX_TRIES: usize = 200;

/// Draws one candidate: from the informed set when bounded and smaller than
/// the domain, else uniformly over the bounds.
pub(crate) fn draw_candidate<R: Rng + ?Sized>(
    bounds: &HyperRect,
    informed: Option<&InformedSampler>,
    rng: &mut R,
) -> StateVector {
    if let Some(sampler) = informed {
        for _ in 0..BOUNDS_TRIES {
            let x = sampler.sample(rng);
            if bounds.contains(x.coords()) {
                return x;
            }
        }
    }
    sample_in_rect(bounds, rng)
}

pub(crate) fn informed_sampler_for(bounds: &HyperRect, s: &InformedSet) -> Option<InformedSampler> {
    if !s.is_bounded() || s.measure() >= bounds.volume() {
        return None;
    }
    InformedSampler::new(s).ok()
}

/// A batch of `batch_size` candidates split into free and invalid states.
pub fn bias_sample<R: Rng + ?Sized>(
    w: &ObstacleWorld,
    s: &InformedSet,
    batch_size: usize,
    self_collision_ok: &dyn Fn(&StateVector) -> bool,
    rng: &mut R,
) -> SampleLedger {
    let sampler = informed_sampler_for(w.bounds(), s);
    let mut ledger = SampleLedger::default();
    for _ in 0..batch_size {
        let x = draw_candidate(w.bounds(), sampler.as_ref(), rng);
        if w.is_free(x.coords()) && self_collision_ok(&x) {
            ledger.free_samples.push(x);
        } else {
            ledger.obstacle_samples.push(x);
        }
    }
    ledger
}

/// Valid states drawn around every failed edge; clears the failed edges.
pub fn just_sample<R: Rng + ?Sized>(
    ledger: &mut SampleLedger,
    w: &ObstacleWorld,
    s: &InformedSet,
    per_edge: usize,
    self_collision_ok: &dyn Fn(&StateVector) -> bool,
    rng: &mut R,
) -> Vec<StateVector> {
    let mut out = Vec::new();
    for edge in std::mem::take(&mut ledger.failed_edges) {
        let c = edge.length();
        let Ok(region) = PriorityRegion::new(edge.source, edge.target, c, s.clone()) else {
            continue;
        };
        for _ in 0..per_edge {
            let Some(x) = sample_priority_region(&region, rng, PRIORITY_MAX_TRIES) else {
                break;
            };
            if w.is_free(x.coords()) && self_collision_ok(&x) {
                ledger.free_samples.push(x.clone());
                out.push(x);
            } else {
                ledger.obstacle_samples.push(x);
            }
        }
    }
    out
}
