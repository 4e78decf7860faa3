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

//! Cost and effort heuristics, queue keys and the rewiring radius.

use super::queue::Key;
use crate::error::{Error, Result};
use crate::sampling::zeta;
use crate::state::{euclid, step_count, Edge, StateVector};

/// Collision-probe count for a segment of length `len`.
#[inline]
pub fn effort(len: f64, resolution: f64) -> f64 {
    step_count(len, resolution) as f64
}

/// Heuristic terms of the search keys.
pub trait HeuristicSet {
    /// Admissible cost-to-goal.
    fn h_hat(&self, x: &[f64]) -> f64;
    /// Admissible cost-to-start.
    fn g_hat(&self, x: &[f64]) -> f64;
    fn c_hat(&self, a: &[f64], b: &[f64]) -> f64;
    fn e_bar(&self, a: &[f64], b: &[f64]) -> f64;
    /// Effort from the start.
    fn d_bar(&self, x: &[f64]) -> f64;
    fn e_goal(&self, x: &[f64]) -> f64;
    fn alpha(&self) -> f64;
    /// Motion-performance term; zero without a manipulator.
    fn d_tanh(&self, x: &[f64]) -> f64;
}

/// Straight-line heuristics with probe-count effort.
pub struct EuclideanHeuristics<'a> {
    start: Vec<f64>,
    goal: Vec<f64>,
    resolution: f64,
    alpha: f64,
    d_tanh: Option<Box<dyn Fn(&[f64]) -> f64 + 'a>>,
}

impl<'a> EuclideanHeuristics<'a> {
    pub fn new(start: &StateVector, goal: &StateVector, resolution: f64, alpha: f64) -> Self {
        Self {
            start: start.coords().to_vec(),
            goal: goal.coords().to_vec(),
            resolution,
            alpha,
            d_tanh: None,
        }
    }

    pub fn with_d_tanh(mut self, f: impl Fn(&[f64]) -> f64 + 'a) -> Self {
        self.d_tanh = Some(Box::new(f));
        self
    }
}

impl HeuristicSet for EuclideanHeuristics<'_> {
    fn h_hat(&self, x: &[f64]) -> f64 {
        euclid(x, &self.goal)
    }

    fn g_hat(&self, x: &[f64]) -> f64 {
        euclid(x, &self.start)
    }

    fn c_hat(&self, a: &[f64], b: &[f64]) -> f64 {
        euclid(a, b)
    }

    fn e_bar(&self, a: &[f64], b: &[f64]) -> f64 {
        effort(euclid(a, b), self.resolution)
    }

    fn d_bar(&self, x: &[f64]) -> f64 {
        effort(euclid(&self.start, x), self.resolution)
    }

    fn e_goal(&self, x: &[f64]) -> f64 {
        effort(euclid(&self.goal, x), self.resolution)
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn d_tanh(&self, x: &[f64]) -> f64 {
        self.d_tanh.as_ref().map_or(0.0, |f| f(x))
    }
}

/// Blends path cost with the motion-performance term.
#[inline]
pub fn blend(alpha: f64, cost: f64, d_tanh: f64) -> f64 {
    if alpha == 1.0 {
        cost
    } else {
        alpha * cost + (1.0 - alpha) * d_tanh
    }
}

/// Reverse-search key of `x_s -> x_t`. `h_s` is the cost-to-goal estimate
/// at the source: the heuristic, or the reverse-tree label during search.
pub fn reverse_key_terms(
    h_s: f64,
    c_st: f64,
    g_t: f64,
    d_tanh_t: f64,
    alpha: f64,
    effort2: f64,
) -> Key {
    Key::new(blend(alpha, h_s + c_st + g_t, d_tanh_t), effort2)
}

pub fn reverse_key(e: &Edge, h: &dyn HeuristicSet) -> Key {
    let (s, t) = (e.source.coords(), e.target.coords());
    reverse_key_terms(
        h.h_hat(s),
        h.c_hat(s, t),
        h.g_hat(t),
        h.d_tanh(t),
        h.alpha(),
        h.e_goal(s) + h.e_bar(s, t) + h.d_bar(t),
    )
}

/// Forward-search key of `x_s -> x_t` given the forward label and effort of
/// the source and, when known, the reverse label of the target.
pub fn forward_key(
    e: &Edge,
    h: &dyn HeuristicSet,
    g_s: f64,
    effort_s: f64,
    h_reverse_t: Option<f64>,
) -> Result<Key> {
    if !g_s.is_finite() {
        return Err(Error::Problem(
            "forward key requested for a source outside the tree".into(),
        ));
    }
    let (s, t) = (e.source.coords(), e.target.coords());
    let to_go = h_reverse_t.unwrap_or_else(|| h.h_hat(t));
    Ok(Key::new(
        blend(h.alpha(), g_s + h.c_hat(s, t) + to_go, h.d_tanh(t)),
        effort_s + h.e_bar(s, t),
    ))
}

/// Key a queue entry must beat to improve the current solution.
pub fn solution_key(c_best: f64, alpha: f64, d_tanh_goal: f64) -> f64 {
    if c_best.is_finite() {
        blend(alpha, c_best, d_tanh_goal)
    } else {
        f64::INFINITY
    }
}

pub fn could_improve_solution(top: Option<Key>, solution_key: f64) -> bool {
    top.is_some_and(|k| k.key1 < solution_key)
}

/// Whether `x` survives pruning against `c_best`.
pub fn keep_after_prune(x: &[f64], c_best: f64, h: &dyn HeuristicSet) -> bool {
    !c_best.is_finite() || h.g_hat(x) + h.h_hat(x) <= c_best
}

/// Rewiring radius of the random geometric graph over `q` samples.
pub fn rgg_radius(
    q: usize,
    n: usize,
    measure_informed: f64,
    measure_priority: f64,
    eta: f64,
) -> Result<f64> {
    if q < 2 {
        return Err(Error::Domain(format!(
            "radius needs at least two samples, got {q}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let nf = n as f64;
    let qf = q as f64;
    let measure = measure_informed.max(measure_priority);
    Ok(eta * (2.0 * (1.0 + 1.0 / nf) * (measure / zeta(n)) * (qf.ln() / qf)).powf(1.0 / nf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    fn line() -> (StateVector, StateVector, Edge) {
        let start = sv(&[0.0, 0.0]);
        let goal = sv(&[1.0, 0.0]);
        let e = Edge::new(sv(&[0.75, 0.0]), sv(&[0.5, 0.0])).unwrap();
        (start, goal, e)
    }

    #[test]
    fn reverse_key_examples() {
        let (start, goal, e) = line();
        let h = EuclideanHeuristics::new(&start, &goal, 0.01, 1.0);
        let k = reverse_key(&e, &h);
        assert_relative_eq!(k.key1, 1.0, epsilon = 1e-15);
        assert_eq!(k.key2, 100.0);
        let zero = EuclideanHeuristics::new(&start, &goal, 0.01, 0.0);
        assert_eq!(reverse_key(&e, &zero).key1, 0.0);
    }

    #[test]
    fn forward_key_examples() {
        let (start, goal, _) = line();
        let h = EuclideanHeuristics::new(&start, &goal, 0.01, 1.0);
        let e = Edge::new(sv(&[0.25, 0.0]), sv(&[0.5, 0.0])).unwrap();
        assert_relative_eq!(
            forward_key(&e, &h, 0.25, 25.0, None).unwrap().key1,
            1.0,
            epsilon = 1e-15
        );
        let last = Edge::new(sv(&[0.6, 0.0]), goal.clone()).unwrap();
        assert_relative_eq!(
            forward_key(&last, &h, 0.6, 60.0, None).unwrap().key1,
            1.0,
            epsilon = 1e-15
        );
        let direct = Edge::new(sv(&[0.25, 0.0]), sv(&[0.5, 0.0])).unwrap();
        let detour = Edge::new(sv(&[0.25, 0.0]), sv(&[0.5, 0.3])).unwrap();
        let kd = forward_key(&direct, &h, 0.25, 25.0, None).unwrap();
        let kt = forward_key(&detour, &h, 0.25, 25.0, None).unwrap();
        assert!(kt.key1 > kd.key1);
        assert_eq!(forward_key(&e, &h, 0.25, 25.0, None).unwrap().key2, 50.0);
        assert!(forward_key(&e, &h, f64::INFINITY, 0.0, None).is_err());
        assert_relative_eq!(
            forward_key(&e, &h, 0.25, 0.0, Some(0.7)).unwrap().key1,
            1.2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn larger_sigma_wins_below_unit_alpha() {
        let (start, goal, _) = line();
        let cfg = crate::motion::ManipConfig::default();
        // σ grows with the second coordinate in this stand-in
        let sigma = |x: &[f64]| 0.3 + x[1];
        let s = sv(&[0.5, 0.0]);
        // mirrored targets share C_sum exactly
        let up = Edge::new(s.clone(), sv(&[0.25, 0.2])).unwrap();
        let down = Edge::new(s.clone(), sv(&[0.25, -0.2])).unwrap();
        for alpha in [0.0, 0.3, 0.7, 0.99] {
            let h = EuclideanHeuristics::new(&start, &goal, 0.01, alpha)
                .with_d_tanh(|x| crate::motion::d_tanh(sigma(x), &cfg).unwrap());
            assert!(reverse_key(&up, &h).key1 < reverse_key(&down, &h).key1);
        }
        let h = EuclideanHeuristics::new(&start, &goal, 0.01, 1.0)
            .with_d_tanh(|x| crate::motion::d_tanh(sigma(x), &cfg).unwrap());
        assert_eq!(reverse_key(&up, &h).key1, reverse_key(&down, &h).key1);
    }

    #[test]
    fn improvement_checks() {
        assert!(!could_improve_solution(None, 1.0));
        assert!(could_improve_solution(
            Some(Key::new(5.0, 0.0)),
            solution_key(f64::INFINITY, 1.0, 0.0)
        ));
        assert!(!could_improve_solution(
            Some(Key::new(1.0, 0.0)),
            solution_key(1.0, 1.0, 0.0)
        ));
    }

    #[test]
    fn prune_examples() {
        let (start, goal, _) = line();
        let h = EuclideanHeuristics::new(&start, &goal, 0.01, 1.0);
        assert!(keep_after_prune(&[5.0, 5.0], f64::INFINITY, &h));
        assert!(keep_after_prune(&[0.3, 0.0], 1.0, &h));
        // ĝ + ĥ = 1.5 at the midpoint lifted by √0.5
        let y = (0.75f64 * 0.75 - 0.25).sqrt();
        assert!(!keep_after_prune(&[0.5, y], 1.0, &h));
    }

    #[test]
    fn radius_examples() {
        let r = rgg_radius(100, 2, 1.0, 0.5, 1.001).unwrap();
        assert_relative_eq!(r, 0.20991458305884115, max_relative = 1e-12);
        let by_formula = 1.001 * (2.0 * 1.5 / std::f64::consts::PI * 100f64.ln() / 100.0).sqrt();
        assert_relative_eq!(r, by_formula, max_relative = 1e-14);
        let mut prev = f64::INFINITY;
        for q in 3..2000 {
            let r = rgg_radius(q, 2, 1.0, 0.0, 1.001).unwrap();
            assert!(r < prev);
            prev = r;
        }
        let doubled = rgg_radius(100, 2, 2.0, 0.0, 1.001).unwrap();
        assert_relative_eq!(doubled / r, 2f64.sqrt(), max_relative = 1e-12);
        assert!(rgg_radius(1, 2, 1.0, 0.0, 1.001).is_err());
    }
}
