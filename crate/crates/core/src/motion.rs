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

//! Manipulability terms for kinematic planning: the smooth singularity
//! penalty, the singularity gate, and null-space refinement of the goal and
//! of interpolated path states.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_dim, Error, Result};
use crate::kinematics::{svd, KinematicChain, Pose};
use crate::self_collision::{is_self_collision_free, ScdfConfig};
use crate::state::{Path, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct ManipConfig {
    pub eta_m: f64,
    pub eps_div: f64,
    pub eps_gate: f64,
    pub perturb_count: usize,
    pub perturb_scale: f64,
    pub gauss_mean: f64,
    pub gauss_std: f64,
    pub ee_drift_tol: f64,
    /// Damping of the least-squares end-effector correction.
    pub dls_damping: f64,
    /// Correction iterations applied to each candidate.
    pub dls_iterations: usize,
    /// Per-joint step of the finite-difference σ_min gradient.
    pub gradient_step: f64,
}

impl Default for ManipConfig {
    fn default() -> Self {
        Self {
            eta_m: 0.2,
            eps_div: 1e-6,
            eps_gate: 0.05,
            perturb_count: 30,
            perturb_scale: 0.1,
            gauss_mean: 0.5,
            gauss_std: 0.4,
            ee_drift_tol: 1e-4,
            dls_damping: 1e-3,
            dls_iterations: 10,
            gradient_step: 1e-5,
        }
    }
}

impl ManipConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta_m", self.eta_m),
            ("eps_gate", self.eps_gate),
            ("ee_drift_tol", self.ee_drift_tol),
            ("gradient_step", self.gradient_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eps_div >= 0.0
            && self.perturb_scale >= 0.0
            && self.gauss_std >= 0.0
            && self.dls_damping >= 0.0)
        {
            return Err(Error::Config("negative manipulability parameter".into()));
        }
        Ok(())
    }
}

/// `tanh(η/(σ+ε))/(σ+ε)`.
pub fn d_tanh(sigma_min: f64, cfg: &ManipConfig) -> Result<f64> {
    if !(sigma_min >= 0.0) {
        return Err(Error::Domain(format!(
            "σ_min must be non-negative, got {sigma_min}"
        )));
    }
    let s = sigma_min + cfg.eps_div;
    if s == 0.0 {
        return Err(Error::Domain("σ_min + ε is zero".into()));
    }
    Ok((cfg.eta_m / s).tanh() / s)
}

/// The gate is closed: σ_min equal to the threshold counts as singular.
pub fn near_singularity(sigma_min: f64, cfg: &ManipConfig) -> bool {
    sigma_min <= cfg.eps_gate
}

/// One or two chains sharing a joint vector, with hard joint bounds and
/// optional self-collision checking.
#[derive(Debug, Clone, PartialEq)]
pub struct Manipulator {
    chains: Vec<KinematicChain>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    scdf: Option<ScdfConfig>,
}

impl Manipulator {
    /// Joint bounds default to `[-π, π]`.
    pub fn new(chains: Vec<KinematicChain>) -> Result<Self> {
        if chains.is_empty() || chains.len() > 2 {
            return Err(Error::Config(format!(
                "expected one or two chains, got {}",
                chains.len()
            )));
        }
        let dof = chains.iter().map(KinematicChain::dof).sum();
        Ok(Self {
            chains,
            lower: vec![-PI; dof],
            upper: vec![PI; dof],
            scdf: None,
        })
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(self.dof(), lower.len())?;
        check_dim(self.dof(), upper.len())?;
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::Config(
                "joint lower bound exceeds upper bound".into(),
            ));
        }
        self.lower = lower;
        self.upper = upper;
        Ok(self)
    }

    pub fn with_self_collision(mut self, cfg: ScdfConfig) -> Self {
        self.scdf = Some(cfg);
        self
    }

    pub fn chains(&self) -> &[KinematicChain] {
        &self.chains
    }

    pub fn dof(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn scdf(&self) -> Option<&ScdfConfig> {
        self.scdf.as_ref()
    }

    pub fn within_bounds(&self, q: &[f64]) -> bool {
        q.len() == self.dof()
            && q.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| v >= l && v <= u)
    }

    pub fn self_collision_free(&self, q: &[f64]) -> bool {
        match &self.scdf {
            Some(cfg) => is_self_collision_free(&self.chains, q, cfg).unwrap_or(false),
            None => true,
        }
    }

    fn slices<'a>(&'a self, q: &'a [f64]) -> impl Iterator<Item = (&'a KinematicChain, &'a [f64])> {
        let mut offset = 0;
        self.chains.iter().map(move |ch| {
            let s = &q[offset..offset + ch.dof()];
            offset += ch.dof();
            (ch, s)
        })
    }

    pub fn poses(&self, q: &[f64]) -> Result<Vec<Pose>> {
        check_dim(self.dof(), q.len())?;
        self.slices(q)
            .map(|(ch, s)| ch.forward_kinematics(s))
            .collect()
    }

    pub fn task_dim(&self) -> usize {
        self.chains.iter().map(KinematicChain::task_dim).sum()
    }

    /// Block-diagonal task Jacobian.
    pub fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dof(), q.len())?;
        let mut j = DMatrix::zeros(self.task_dim(), self.dof());
        let (mut r, mut c) = (0, 0);
        for (ch, s) in self.slices(q) {
            let block = ch.jacobian(s)?;
            j.view_mut((r, c), block.shape()).copy_from(&block);
            r += block.nrows();
            c += block.ncols();
        }
        Ok(j)
    }

    /// Smallest singular value over all arms.
    pub fn sigma_min(&self, q: &[f64]) -> Result<f64> {
        check_dim(self.dof(), q.len())?;
        let mut best = f64::INFINITY;
        for (ch, s) in self.slices(q) {
            best = best.min(svd(&ch.jacobian(s)?).min_singular_value());
        }
        Ok(best)
    }

    /// Stacked task-space error from the pose at `q` to `targets`.
    pub fn task_error(&self, q: &[f64], targets: &[Pose]) -> Result<DVector<f64>> {
        let poses = self.poses(q)?;
        let parts: Vec<f64> = self
            .chains
            .iter()
            .zip(poses.iter().zip(targets))
            .flat_map(|(ch, (p, t))| ch.task_error(p, t).iter().copied().collect::<Vec<_>>())
            .collect();
        Ok(DVector::from_vec(parts))
    }

    /// End-effector drift between two joint vectors.
    pub fn drift(&self, q: &[f64], reference: &[f64]) -> Result<f64> {
        Ok(self.task_error(q, &self.poses(reference)?)?.norm())
    }

    /// Damped least-squares steps towards `targets`.
    fn correct(&self, q: &mut [f64], targets: &[Pose], cfg: &ManipConfig) -> Result<f64> {
        let mut err = self.task_error(q, targets)?;
        for _ in 0..cfg.dls_iterations {
            if err.norm() <= 0.01 * cfg.ee_drift_tol {
                break;
            }
            let j = self.jacobian(q)?;
            let mu2 = cfg.dls_damping * cfg.dls_damping;
            let jjt = &j * j.transpose() + DMatrix::identity(j.nrows(), j.nrows()) * mu2;
            let Some(y) = jjt.lu().solve(&err) else {
                break;
            };
            let dq = j.transpose() * y;
            for (qi, d) in q.iter_mut().zip(dq.iter()) {
                *qi += d;
            }
            err = self.task_error(q, targets)?;
        }
        Ok(err.norm())
    }

    /// Central-difference gradient of σ_min.
    pub fn sigma_gradient(&self, q: &[f64], step: f64) -> Result<DVector<f64>> {
        let mut g = DVector::zeros(self.dof());
        let mut x = q.to_vec();
        for i in 0..self.dof() {
            x[i] = q[i] + step;
            let up = self.sigma_min(&x)?;
            x[i] = q[i] - step;
            let down = self.sigma_min(&x)?;
            x[i] = q[i];
            g[i] = (up - down) / (2.0 * step);
        }
        Ok(g)
    }
}

impl TryFrom<KinematicChain> for Manipulator {
    type Error = Error;

    fn try_from(ch: KinematicChain) -> Result<Self> {
        Manipulator::new(vec![ch])
    }
}

/// Moves a singular goal along the Jacobian null space towards higher σ_min
/// while keeping the end effector in place.
pub fn refine_goal<R: Rng + ?Sized>(
    m: &Manipulator,
    x_goal: &StateVector,
    cfg: &ManipConfig,
    rng: &mut R,
) -> Result<StateVector> {
    if x_goal.dim() != m.dof() || !m.within_bounds(x_goal.coords()) {
        return Err(Error::Domain("goal is outside the joint bounds".into()));
    }
    let q0 = x_goal.coords();
    let sigma0 = m.sigma_min(q0)?;
    if !near_singularity(sigma0, cfg) {
        return Ok(x_goal.clone());
    }
    let n = svd(&m.jacobian(q0)?).null_space();
    if n.nrows() == 0 {
        return Ok(x_goal.clone());
    }
    let targets = m.poses(q0)?;
    let normal = Normal::new(0.0, cfg.perturb_scale).map_err(|e| Error::Config(e.to_string()))?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..cfg.perturb_count {
        let lambda = DVector::from_fn(n.nrows(), |_, _| normal.sample(rng));
        let step = n.transpose() * lambda;
        let mut q: Vec<f64> = q0.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let drift = m.correct(&mut q, &targets, cfg)?;
        if drift > cfg.ee_drift_tol || !m.within_bounds(&q) || !m.self_collision_free(&q) {
            continue;
        }
        let sigma = m.sigma_min(&q)?;
        if sigma > sigma0 && best.as_ref().is_none_or(|(s, _)| sigma > *s) {
            best = Some((sigma, q));
        }
    }
    match best {
        Some((_, q)) => StateVector::new(q),
        None => Ok(x_goal.clone()),
    }
}

/// Nudges interior waypoints along the null-space projection of ∇σ_min.
///
/// A candidate replaces its waypoint only if the end effector stays within
/// tolerance, σ_min does not drop, joint bounds hold and `edge_ok` accepts
/// the edges to both neighbours. Endpoints are left untouched.
pub fn refine_interpolated_path<R: Rng + ?Sized>(
    m: &Manipulator,
    path: &Path,
    cfg: &ManipConfig,
    rng: &mut R,
    edge_ok: &mut dyn FnMut(&[f64], &[f64]) -> bool,
) -> Result<Path> {
    let mut states: Vec<StateVector> = path.waypoints().to_vec();
    for s in &states {
        check_dim(m.dof(), s.dim())?;
    }
    let normal =
        Normal::new(cfg.gauss_mean, cfg.gauss_std).map_err(|e| Error::Config(e.to_string()))?;
    for i in 1..states.len().saturating_sub(1) {
        let q0 = states[i].coords().to_vec();
        let sigma0 = m.sigma_min(&q0)?;
        let svd0 = svd(&m.jacobian(&q0)?);
        if svd0.null_space().nrows() == 0 {
            continue;
        }
        let j = m.jacobian(&q0)?;
        let projector = DMatrix::identity(m.dof(), m.dof()) - svd0.pseudo_inverse() * &j;
        let dir = &projector * m.sigma_gradient(&q0, cfg.gradient_step)?;
        if dir.norm() < 1e-12 {
            continue;
        }
        let scale = normal.sample(rng);
        let mut q: Vec<f64> = q0
            .iter()
            .zip(dir.iter())
            .map(|(a, d)| a + scale * d)
            .collect();
        let targets = m.poses(&q0)?;
        let drift = m.correct(&mut q, &targets, cfg)?;
        if drift > cfg.ee_drift_tol || !m.within_bounds(&q) || !m.self_collision_free(&q) {
            continue;
        }
        if m.sigma_min(&q)? < sigma0 {
            continue;
        }
        if !edge_ok(states[i - 1].coords(), &q) || !edge_ok(&q, states[i + 1].coords()) {
            continue;
        }
        states[i] = StateVector::new(q)?;
    }
    Path::new(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    fn planar(lengths: &[f64]) -> Manipulator {
        Manipulator::try_from(KinematicChain::planar(lengths).unwrap()).unwrap()
    }

    #[test]
    fn d_tanh_examples() {
        let cfg = ManipConfig {
            eta_m: 1.0,
            eps_div: 1e-6,
            ..ManipConfig::default()
        };
        assert_relative_eq!(d_tanh(0.0, &cfg).unwrap(), 1e6, max_relative = 1e-12);
        let exact = ManipConfig {
            eps_div: 0.0,
            ..cfg.clone()
        };
        assert_relative_eq!(
            d_tanh(100.0, &exact).unwrap(),
            9.99966667999946e-5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            d_tanh(1.0, &exact).unwrap(),
            0.7615941559557649,
            max_relative = 1e-12
        );
        assert!(matches!(d_tanh(0.0, &exact), Err(Error::Domain(_))));
        assert!(d_tanh(-1.0, &cfg).is_err());
    }

    #[test]
    fn d_tanh_is_strictly_decreasing() {
        let cfg = ManipConfig::default();
        let grid: Vec<f64> = (0..2000).map(|k| k as f64 * 0.005).collect();
        for w in grid.windows(2) {
            assert!(d_tanh(w[0], &cfg).unwrap() > d_tanh(w[1], &cfg).unwrap());
        }
        assert!(d_tanh(1e9, &cfg).unwrap() < 1e-9);
    }

    #[test]
    fn gate_examples() {
        let cfg = ManipConfig::default();
        assert!(near_singularity(0.0, &cfg));
        assert!(!near_singularity(2.0 * cfg.eps_gate, &cfg));
        assert!(near_singularity(cfg.eps_gate, &cfg));
    }

    #[test]
    fn block_jacobian_and_sigma() {
        let left = KinematicChain::planar(&[1.0, 1.0]).unwrap();
        let right = KinematicChain::planar_with_base(&[1.0, 1.0, 1.0], 3.0, 0.0).unwrap();
        let m = Manipulator::new(vec![left.clone(), right.clone()]).unwrap();
        let q = [0.0, std::f64::consts::FRAC_PI_2, 0.4, 0.5, 0.6];
        let j = m.jacobian(&q).unwrap();
        assert_eq!(j.shape(), (4, 5));
        assert_eq!(j[(0, 2)], 0.0);
        let s = m.sigma_min(&q).unwrap();
        let s_left = svd(&left.jacobian(&q[..2]).unwrap()).min_singular_value();
        let s_right = svd(&right.jacobian(&q[2..]).unwrap()).min_singular_value();
        assert_relative_eq!(s, s_left.min(s_right), epsilon = 1e-14);
    }

    #[test]
    fn non_singular_goal_is_unchanged() {
        let m = planar(&[1.0, 1.0, 1.0]);
        let goal = sv(&[0.3, 1.2, -0.8]);
        let mut rng = crate::rng_from_seed(1);
        assert_eq!(
            refine_goal(&m, &goal, &ManipConfig::default(), &mut rng).unwrap(),
            goal
        );
    }

    #[test]
    fn goal_without_null_space_is_unchanged() {
        let m = planar(&[1.0, 1.0]);
        let mut rng = crate::rng_from_seed(1);
        // gated as singular, but the square Jacobian has full rank
        let bent = sv(&[0.0, std::f64::consts::FRAC_PI_2]);
        let cfg = ManipConfig {
            eps_gate: 0.7,
            ..ManipConfig::default()
        };
        assert_eq!(refine_goal(&m, &bent, &cfg, &mut rng).unwrap(), bent);
    }

    #[test]
    fn folded_singular_goal_is_refined() {
        // collinear but folded back: a singular configuration strictly inside
        // the workspace, so the end effector can stay put while σ_min grows
        let m = planar(&[1.0, 1.0, 1.0]);
        let goal = sv(&[0.0, PI - 1e-9, 0.0]);
        let cfg = ManipConfig::default();
        assert!(m.sigma_min(goal.coords()).unwrap() < 1e-6);
        let mut rng = crate::rng_from_seed(4);
        let out = refine_goal(&m, &goal, &cfg, &mut rng).unwrap();
        assert!(m.sigma_min(out.coords()).unwrap() > 0.05);
        assert!(m.drift(out.coords(), goal.coords()).unwrap() <= 1e-4);
        assert!(m.within_bounds(out.coords()));
    }

    #[test]
    fn refine_goal_rejects_out_of_bounds() {
        let m = planar(&[1.0, 1.0, 1.0]);
        let mut rng = crate::rng_from_seed(1);
        assert!(matches!(
            refine_goal(&m, &sv(&[4.0, 0.0, 0.0]), &ManipConfig::default(), &mut rng),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sigma_gradient_matches_directional_difference() {
        let m = planar(&[1.0, 0.8, 0.6]);
        let q = [0.2, 0.4, 0.9];
        let g = m.sigma_gradient(&q, 1e-5).unwrap();
        let dir = [0.3, -0.5, 0.8];
        let h = 1e-4;
        let plus: Vec<f64> = q.iter().zip(dir).map(|(a, d)| a + h * d).collect();
        let minus: Vec<f64> = q.iter().zip(dir).map(|(a, d)| a - h * d).collect();
        let fd = (m.sigma_min(&plus).unwrap() - m.sigma_min(&minus).unwrap()) / (2.0 * h);
        let dot: f64 = g.iter().zip(dir).map(|(a, b)| a * b).sum();
        assert!((fd - dot).abs() < 1e-6);
    }

    #[test]
    fn full_rank_square_path_is_unchanged() {
        let m = planar(&[1.0, 1.0]);
        let path = Path::new(vec![
            sv(&[0.1, 0.5]),
            sv(&[0.2, 0.7]),
            sv(&[0.3, 0.9]),
            sv(&[0.4, 1.0]),
        ])
        .unwrap();
        let mut rng = crate::rng_from_seed(2);
        let out =
            refine_interpolated_path(&m, &path, &ManipConfig::default(), &mut rng, &mut |_, _| {
                true
            })
            .unwrap();
        assert_eq!(out, path);
    }

    #[test]
    fn path_near_folded_arm_gains_manipulability() {
        let m = planar(&[1.0, 1.0, 1.0]);
        let a = sv(&[0.3, 2.6, 0.2]);
        let b = sv(&[-0.3, 3.1, -0.1]);
        let path = Path::new(vec![a, sv(&[0.0, 3.1, 0.05]), b])
            .unwrap()
            .densified(0.05)
            .unwrap();
        let mut rng = crate::rng_from_seed(3);
        let cfg = ManipConfig::default();
        let out = refine_interpolated_path(&m, &path, &cfg, &mut rng, &mut |_, _| true).unwrap();
        let inner = |p: &Path| -> f64 {
            let w = p.waypoints();
            w[1..w.len() - 1]
                .iter()
                .map(|x| m.sigma_min(x.coords()).unwrap())
                .fold(f64::INFINITY, f64::min)
        };
        assert!(inner(&out) > inner(&path));
        assert_eq!(out.start(), path.start());
        assert_eq!(out.end(), path.end());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn refine_goal_keeps_end_effector_and_sigma(seed in any::<u64>(), q in proptest::collection::vec(-3.0..3.0f64, 3)) {
            let m = planar(&[1.0, 0.9, 0.7]);
            let cfg = ManipConfig { eps_gate: 0.6, ..ManipConfig::default() };
            let goal = sv(&q);
            let mut rng = crate::rng_from_seed(seed);
            let out = refine_goal(&m, &goal, &cfg, &mut rng).unwrap();
            prop_assert!(m.sigma_min(out.coords()).unwrap() >= m.sigma_min(goal.coords()).unwrap());
            prop_assert!(m.drift(out.coords(), goal.coords()).unwrap() <= cfg.ee_drift_tol);
            prop_assert!(m.within_bounds(out.coords()));
        }

        #[test]
        fn refine_path_keeps_endpoints_and_sigma(seed in any::<u64>(), a in proptest::collection::vec(-2.5..2.5f64, 3), b in proptest::collection::vec(-2.5..2.5f64, 3)) {
            let m = planar(&[1.0, 0.9, 0.7]);
            let cfg = ManipConfig::default();
            let path = Path::new(vec![sv(&a), sv(&b)]).unwrap().densified(0.2).unwrap();
            let mut rng = crate::rng_from_seed(seed);
            let out = refine_interpolated_path(&m, &path, &cfg, &mut rng, &mut |_, _| true).unwrap();
            prop_assert_eq!(out.waypoints().len(), path.waypoints().len());
            prop_assert_eq!(out.start().coords(), path.start().coords());
            prop_assert_eq!(out.end().coords(), path.end().coords());
            for (x, y) in out.waypoints().iter().zip(path.waypoints()) {
                if x != y {
                    prop_assert!(m.sigma_min(x.coords()).unwrap() >= m.sigma_min(y.coords()).unwrap());
                    prop_assert!(m.drift(x.coords(), y.coords()).unwrap() <= cfg.ee_drift_tol);
                }
            }
        }
    }
}
