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

//! Segment-segment distances and self-collision danger fields for one or two
//! arms modelled as chains of line segments.

use nalgebra::Vector3;

use crate::error::{check_dim, Error, Result};
use crate::kinematics::KinematicChain;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSegment {
    pub p1: Vector3<f64>,
    pub p2: Vector3<f64>,
}

impl LinkSegment {
    pub fn new(p1: Vector3<f64>, p2: Vector3<f64>) -> Self {
        Self { p1, p2 }
    }

    pub fn from_points(p1: [f64; 3], p2: [f64; 3]) -> Self {
        Self::new(p1.into(), p2.into())
    }

    pub fn at(&self, u: f64) -> Vector3<f64> {
        self.p1 + (self.p2 - self.p1) * u
    }

    pub fn translated(&self, by: &Vector3<f64>) -> Self {
        Self::new(self.p1 + by, self.p2 + by)
    }
}

/// Squared distance and the closest-point parameters on each segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentDistance {
    pub d_sq: f64,
    pub u1: f64,
    pub u2: f64,
}

pub fn segment_distance_squared(p: &LinkSegment, q: &LinkSegment) -> SegmentDistance {
    let dp = p.p2 - p.p1;
    let dq = q.p2 - q.p1;
    let r = p.p1 - q.p1;
    let alpha = dp.dot(&dp);
    let beta = dq.dot(&dq);
    let gamma = -2.0 * dp.dot(&dq);
    let delta = 2.0 * r.dot(&dp);
    let eps = -2.0 * r.dot(&dq);

    let eval = |u1: f64, u2: f64| SegmentDistance {
        d_sq: (p.at(u1) - q.at(u2)).norm_squared(),
        u1,
        u2,
    };

    let det = 4.0 * alpha * beta - gamma * gamma;
    if det.abs() > 1e-12 * (alpha * beta).max(1.0) {
        let u1 = (gamma * eps - 2.0 * beta * delta) / det;
        let u2 = (gamma * delta - 2.0 * alpha * eps) / det;
        if (0.0..=1.0).contains(&u1) && (0.0..=1.0).contains(&u2) {
            return eval(u1, u2);
        }
    }

    let clamp01 = |x: f64| x.clamp(0.0, 1.0);
    let along_q = |u1: f64| {
        if beta > 0.0 {
            clamp01(-(gamma * u1 + eps) / (2.0 * beta))
        } else {
            0.0
        }
    };
    let along_p = |u2: f64| {
        if alpha > 0.0 {
            clamp01(-(gamma * u2 + delta) / (2.0 * alpha))
        } else {
            0.0
        }
    };
    let candidates = [
        (0.0, 0.0),
        (0.0, 1.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (0.0, along_q(0.0)),
        (1.0, along_q(1.0)),
        (along_p(0.0), 0.0),
        (along_p(1.0), 1.0),
    ];
    candidates
        .iter()
        .map(|&(u1, u2)| eval(u1, u2))
        .min_by(|a, b| a.d_sq.total_cmp(&b.d_sq))
        .expect("candidate set is nonempty")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScdfConfig {
    pub kappa: f64,
    pub lambda_tol: f64,
}

impl Default for ScdfConfig {
    fn default() -> Self {
        Self {
            kappa: 0.001,
            lambda_tol: 0.018,
        }
    }
}

impl ScdfConfig {
    pub fn new(kappa: f64, lambda_tol: f64) -> Result<Self> {
        if !(kappa > 0.0 && lambda_tol > 0.0) {
            return Err(Error::Config(format!(
                "kappa ({kappa}) and lambda ({lambda_tol}) must be positive"
            )));
        }
        Ok(Self { kappa, lambda_tol })
    }

    /// Danger of one pair; infinite for touching segments.
    pub fn pair_risk(&self, p: &LinkSegment, q: &LinkSegment) -> f64 {
        let d = segment_distance_squared(p, q).d_sq;
        if d > 0.0 {
            self.kappa / d.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

pub fn scdf_between_arms(arm_a: &[LinkSegment], arm_b: &[LinkSegment], cfg: &ScdfConfig) -> f64 {
    arm_a
        .iter()
        .flat_map(|p| arm_b.iter().map(move |q| (p, q)))
        .map(|(p, q)| cfg.pair_risk(p, q))
        .sum()
}

/// Sum over link pairs `(i, i + 2)`.
pub fn scdf_within_arm(links: &[LinkSegment], cfg: &ScdfConfig) -> f64 {
    links
        .iter()
        .zip(links.iter().skip(2))
        .map(|(p, q)| cfg.pair_risk(p, q))
        .sum()
}

/// Link segments between consecutive frame origins.
pub fn arm_segments(chain: &KinematicChain, q: &[f64]) -> Result<Vec<LinkSegment>> {
    let origins = chain.forward_kinematics(q)?.joint_origins();
    Ok(origins
        .windows(2)
        .map(|w| LinkSegment::new(w[0], w[1]))
        .collect())
}

// Sums pair risks, stopping as soon as the total reaches the tolerance.
fn below_tolerance<'a>(
    pairs: impl Iterator<Item = (&'a LinkSegment, &'a LinkSegment)>,
    cfg: &ScdfConfig,
) -> bool {
    let mut total = 0.0;
    for (p, q) in pairs {
        total += cfg.pair_risk(p, q);
        if total >= cfg.lambda_tol {
            return false;
        }
    }
    true
}

pub fn segments_are_safe(arms: &[Vec<LinkSegment>], cfg: &ScdfConfig) -> bool {
    for links in arms {
        if !below_tolerance(links.iter().zip(links.iter().skip(2)), cfg) {
            return false;
        }
    }
    if let [a, b] = arms {
        if !below_tolerance(a.iter().flat_map(|p| b.iter().map(move |q| (p, q))), cfg) {
            return false;
        }
    }
    true
}

/// True when every danger field stays below the tolerance. `q` is the
/// concatenation of the joint vectors of `chains`.
pub fn is_self_collision_free(
    chains: &[KinematicChain],
    q: &[f64],
    cfg: &ScdfConfig,
) -> Result<bool> {
    if chains.is_empty() || chains.len() > 2 {
        return Err(Error::Config(format!(
            "expected one or two chains, got {}",
            chains.len()
        )));
    }
    let dof: usize = chains.iter().map(KinematicChain::dof).sum();
    check_dim(dof, q.len())?;
    let mut arms = Vec::with_capacity(chains.len());
    let mut offset = 0;
    for ch in chains {
        arms.push(arm_segments(ch, &q[offset..offset + ch.dof()])?);
        offset += ch.dof();
    }
    Ok(segments_are_safe(&arms, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn seg(a: [f64; 3], b: [f64; 3]) -> LinkSegment {
        LinkSegment::from_points(a, b)
    }

    fn grid_search(p: &LinkSegment, q: &LinkSegment, lo: (f64, f64), span: f64) -> (f64, f64, f64) {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=200 {
            let u1 = (lo.0 + span * i as f64 / 200.0).clamp(0.0, 1.0);
            let pu = p.at(u1);
            for j in 0..=200 {
                let u2 = (lo.1 + span * j as f64 / 200.0).clamp(0.0, 1.0);
                let d = (pu - q.at(u2)).norm_squared();
                if d < best.0 {
                    best = (d, u1, u2);
                }
            }
        }
        best
    }

    fn grid_min(p: &LinkSegment, q: &LinkSegment) -> f64 {
        grid_search(p, q, (0.0, 0.0), 1.0).0
    }

    // The squared distance is convex in (u1, u2), so a second grid over the
    // cells around the coarse minimiser resolves near-touching pairs the
    // coarse spacing cannot.
    fn nested_grid_min(p: &LinkSegment, q: &LinkSegment) -> f64 {
        let (coarse, u1, u2) = grid_search(p, q, (0.0, 0.0), 1.0);
        let h = 1.0 / 200.0;
        coarse.min(grid_search(p, q, (u1 - h, u2 - h), 2.0 * h).0)
    }

    #[test]
    fn distance_examples() {
        let p = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let r = segment_distance_squared(&p, &seg([0.0, 1.0, 0.0], [1.0, 1.0, 0.0]));
        assert_relative_eq!(r.d_sq, 1.0, epsilon = 1e-12);
        let r = segment_distance_squared(&p, &seg([0.5, -1.0, 0.0], [0.5, 1.0, 0.0]));
        assert_relative_eq!(r.d_sq, 0.0, epsilon = 1e-12);
        assert_relative_eq!(r.u1, 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.u2, 0.5, epsilon = 1e-12);
        let q = seg([2.0, 1.0, 0.0], [3.0, 1.0, 0.0]);
        let r = segment_distance_squared(&p, &q);
        assert_relative_eq!(r.d_sq, 2.0, epsilon = 1e-12);
        assert_relative_eq!(grid_min(&p, &q), 2.0, epsilon = 1e-12);
        assert_eq!((r.u1, r.u2), (1.0, 0.0));
    }

    #[test]
    fn degenerate_segments_reduce_to_points() {
        let point = seg([0.5, 0.5, 0.0], [0.5, 0.5, 0.0]);
        let line = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let r = segment_distance_squared(&point, &line);
        assert_relative_eq!(r.d_sq, 0.25, epsilon = 1e-12);
        assert_relative_eq!(r.u2, 0.5, epsilon = 1e-12);
        let r = segment_distance_squared(&point, &seg([1.0, 1.0, 1.0], [1.0, 1.0, 1.0]));
        assert_relative_eq!(r.d_sq, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn intersection_iff_zero_distance() {
        for k in 0..50 {
            let t = k as f64 / 49.0;
            let p = seg([0.0, 0.0, 0.0], [1.0, 1.0, 0.0]);
            let crossing = seg([t, 0.0, -0.5], [t, t + 0.5, 0.5]);
            let r = segment_distance_squared(&p, &crossing);
            let hits = (r.d_sq).abs() < 1e-20;
            // the crossing segment meets the diagonal at (t, t, 0) exactly when z passes 0 at y = t
            let z_at_t = -0.5 + t / (t + 0.5);
            let expected = z_at_t.abs() < 1e-12;
            if expected {
                assert!(hits);
            }
            let lifted = seg([t, 0.0, 0.1], [t, 1.0, 0.1]);
            assert!(segment_distance_squared(&p, &lifted).d_sq > 0.0);
            let through = seg([t, 0.0, 0.0], [t, 1.0, 0.0]);
            assert!(segment_distance_squared(&p, &through).d_sq < 1e-24);
        }
    }

    #[test]
    fn scdf_examples() {
        let cfg = ScdfConfig::new(1.0, 10.0).unwrap();
        let p = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let a = [p];
        let b = [seg([0.0, 1.0, 0.0], [1.0, 1.0, 0.0])];
        assert_relative_eq!(scdf_between_arms(&a, &b, &cfg), 1.0, epsilon = 1e-12);
        let far = [seg([0.0, 2.0, 0.0], [1.0, 2.0, 0.0])];
        assert_relative_eq!(scdf_between_arms(&a, &far, &cfg), 0.5, epsilon = 1e-12);
        let double = ScdfConfig::new(2.0, 10.0).unwrap();
        assert_relative_eq!(scdf_between_arms(&a, &b, &double), 2.0, epsilon = 1e-12);
        assert!(
            scdf_between_arms(&a, &[seg([0.5, 0.0, 0.0], [0.5, 1.0, 0.0])], &cfg).is_infinite()
        );
    }

    #[test]
    fn within_arm_examples() {
        let cfg = ScdfConfig::new(1.0, 10.0).unwrap();
        let two = KinematicChain::planar(&[1.0, 1.0]).unwrap();
        assert_eq!(
            scdf_within_arm(&arm_segments(&two, &[0.3, 1.0]).unwrap(), &cfg),
            0.0
        );
        // straight arm: link1 ends at x=1, link3 starts at x=2
        let three = KinematicChain::planar(&[1.0, 1.0, 1.0]).unwrap();
        let straight = arm_segments(&three, &[0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(scdf_within_arm(&straight, &cfg), 1.0, epsilon = 1e-12);
        // folded: link1 on [0,1], middle link of length sqrt(0.5) bent so link3 runs parallel
        let l1 = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let l2 = seg([1.0, 0.0, 0.0], [1.0, 0.5f64.sqrt(), 0.0]);
        let l3 = seg([1.0, 0.5f64.sqrt(), 0.0], [0.0, 0.5f64.sqrt(), 0.0]);
        let d = segment_distance_squared(&l1, &l3).d_sq;
        assert_relative_eq!(d, 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            scdf_within_arm(&[l1, l2, l3], &cfg),
            1.0 / 0.5f64.sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            1.0 / 0.5f64.sqrt(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn self_collision_predicate_examples() {
        let cfg = ScdfConfig::default();
        let two = KinematicChain::planar(&[1.0, 1.0]).unwrap();
        for q in [[0.0, 0.0], [1.0, 3.0], [-2.0, PI]] {
            assert!(is_self_collision_free(std::slice::from_ref(&two), &q, &cfg).unwrap());
        }
        let left = KinematicChain::planar_with_base(&[1.0, 1.0, 1.0], 0.0, 0.0).unwrap();
        let right = KinematicChain::planar_with_base(&[1.0, 1.0, 1.0], 10.0, 0.0).unwrap();
        let arms = [left.clone(), right.clone()];
        let mut rng = crate::rng_from_seed(8);
        use rand::Rng;
        for _ in 0..200 {
            let mut q: Vec<f64> = (0..6).map(|_| rng.random_range(-PI..PI)).collect();
            // keep each arm unfolded enough to clear its own danger field
            q[1] = q[1].clamp(-2.0, 2.0);
            q[2] = q[2].clamp(-2.0, 2.0);
            q[4] = q[4].clamp(-2.0, 2.0);
            q[5] = q[5].clamp(-2.0, 2.0);
            let segs = [
                arm_segments(&left, &q[..3]).unwrap(),
                arm_segments(&right, &q[3..]).unwrap(),
            ];
            let cross = scdf_between_arms(&segs[0], &segs[1], &cfg);
            assert!(cross < 9.0 * cfg.kappa / 4.0f64.sqrt() + 1e-12);
            if scdf_within_arm(&segs[0], &cfg) < cfg.lambda_tol
                && scdf_within_arm(&segs[1], &cfg) < cfg.lambda_tol
            {
                assert!(is_self_collision_free(&arms, &q, &cfg).unwrap());
            }
        }
        let near = KinematicChain::planar_with_base(&[1.0, 1.0, 1.0], 2.0, 0.0).unwrap();
        // left arm straight along +x reaches (3,0); right arm pointing back along -x overlaps it
        let q = [0.0, 0.0, 0.0, PI, 0.0, 0.0];
        assert!(!is_self_collision_free(&[left, near], &q, &cfg).unwrap());
        assert!(is_self_collision_free(&[two], &[0.0], &cfg).is_err());
    }

    fn unit_point() -> impl Strategy<Value = [f64; 3]> {
        [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn matches_grid_oracle(a in unit_point(), b in unit_point(), c in unit_point(), d in unit_point()) {
            let p = seg(a, b);
            let q = seg(c, d);
            let r = segment_distance_squared(&p, &q);
            prop_assert!((r.d_sq.sqrt() - nested_grid_min(&p, &q).sqrt()).abs() <= 1e-3);
            prop_assert!(r.d_sq <= grid_min(&p, &q) + 1e-12);
            prop_assert!((r.d_sq - (p.at(r.u1) - q.at(r.u2)).norm_squared()).abs() <= 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn symmetric_under_swap(a in unit_point(), b in unit_point(), c in unit_point(), d in unit_point()) {
            let p = seg(a, b);
            let q = seg(c, d);
            let pq = segment_distance_squared(&p, &q);
            let qp = segment_distance_squared(&q, &p);
            prop_assert!((pq.d_sq - qp.d_sq).abs() <= 1e-12);
            if pq.d_sq > 1e-9 {
                prop_assert!((pq.u1 - qp.u2).abs() <= 1e-6 && (pq.u2 - qp.u1).abs() <= 1e-6);
            }
        }

        #[test]
        fn scdf_decreases_with_distance_and_adds(y1 in 0.05..2.0f64, dy in 0.01..2.0f64) {
            let cfg = ScdfConfig::default();
            let p = [seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])];
            let near = [seg([0.0, y1, 0.0], [1.0, y1, 0.0])];
            let far = [seg([0.0, y1 + dy, 0.0], [1.0, y1 + dy, 0.0])];
            prop_assert!(scdf_between_arms(&p, &near, &cfg) > scdf_between_arms(&p, &far, &cfg));
            let both = [near[0], far[0]];
            let sum = scdf_between_arms(&p, &near, &cfg) + scdf_between_arms(&p, &far, &cfg);
            prop_assert!((scdf_between_arms(&p, &both, &cfg) - sum).abs() <= 1e-12);
        }

        #[test]
        fn predicate_is_translation_invariant(
            q in proptest::collection::vec(-3.0..3.0f64, 6), sep in 0.5..4.0f64,
            tx in -50.0..50.0f64, ty in -50.0..50.0f64,
        ) {
            let cfg = ScdfConfig::default();
            let a = KinematicChain::planar_with_base(&[0.6, 0.5, 0.4], 0.0, 0.0).unwrap();
            let b = KinematicChain::planar_with_base(&[0.6, 0.5, 0.4], sep, 0.0).unwrap();
            let at = KinematicChain::planar_with_base(&[0.6, 0.5, 0.4], tx, ty).unwrap();
            let bt = KinematicChain::planar_with_base(&[0.6, 0.5, 0.4], sep + tx, ty).unwrap();
            let base = is_self_collision_free(&[a.clone(), b.clone()], &q, &cfg).unwrap();
            let moved = is_self_collision_free(&[at, bt], &q, &cfg).unwrap();
            // recompute the risk to skip cases balanced on the tolerance
            let sa = arm_segments(&a, &q[..3]).unwrap();
            let sb = arm_segments(&b, &q[3..]).unwrap();
            let risks = [scdf_within_arm(&sa, &cfg), scdf_within_arm(&sb, &cfg), scdf_between_arms(&sa, &sb, &cfg)];
            prop_assume!(risks.iter().all(|r| (r - cfg.lambda_tol).abs() > 1e-9));
            prop_assert_eq!(base, moved);
        }
    }
}
