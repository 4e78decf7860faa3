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

//! Standard-DH serial chains: forward kinematics, the geometric Jacobian and
//! a small dense SVD.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointType {
    Revolute,
    Prismatic,
}

/// One standard (distal) DH link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhLink {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta_offset: f64,
    #[serde(rename = "type")]
    pub joint_type: JointType,
}

impl DhLink {
    pub fn revolute(a: f64, alpha: f64, d: f64, theta_offset: f64) -> Self {
        Self {
            a,
            alpha,
            d,
            theta_offset,
            joint_type: JointType::Revolute,
        }
    }

    pub fn prismatic(a: f64, alpha: f64, d: f64, theta_offset: f64) -> Self {
        Self {
            a,
            alpha,
            d,
            theta_offset,
            joint_type: JointType::Prismatic,
        }
    }

    /// Homogeneous transform from frame i-1 to frame i at joint value `q`.
    #[rustfmt::skip]
    pub fn transform(&self, q: f64) -> Matrix4<f64> {
        let (theta, d) = match self.joint_type {
            JointType::Revolute => (q + self.theta_offset, self.d),
            JointType::Prismatic => (self.theta_offset, self.d + q),
        };
        let (st, ct) = theta.sin_cos();
        let (sa, ca) = self.alpha.sin_cos();
        Matrix4::new(
            ct, -st * ca, st * sa, self.a * ct,
            st, ct * ca, -ct * sa, self.a * st,
            0.0, sa, ca, d,
            0.0, 0.0, 0.0, 1.0,
        )
    }

    fn is_finite(&self) -> bool {
        [self.a, self.alpha, self.d, self.theta_offset]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// End-effector pose together with every joint frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
    /// `frames[0]` is the base, `frames[i]` the frame after link `i`.
    pub frames: Vec<Matrix4<f64>>,
}

impl Pose {
    /// Origins of all frames, base first and end effector last.
    pub fn joint_origins(&self) -> Vec<Vector3<f64>> {
        self.frames
            .iter()
            .map(|f| Vector3::new(f[(0, 3)], f[(1, 3)], f[(2, 3)]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain {
    links: Vec<DhLink>,
    base: Matrix4<f64>,
    task_dim: usize,
}

impl KinematicChain {
    pub fn new(links: Vec<DhLink>, base: Matrix4<f64>, task_dim: usize) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::Config("a chain needs at least one link".into()));
        }
        if ![2, 3, 6].contains(&task_dim) {
            return Err(Error::Config(format!(
                "task dimension must be 2, 3 or 6, got {task_dim}"
            )));
        }
        if !links.iter().all(DhLink::is_finite) || !base.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("chain parameters must be finite".into()));
        }
        Ok(Self {
            links,
            base,
            task_dim,
        })
    }

    /// Planar revolute arm in the xy-plane with position-only task rows.
    pub fn planar(lengths: &[f64]) -> Result<Self> {
        Self::planar_with_base(lengths, 0.0, 0.0)
    }

    pub fn planar_with_base(lengths: &[f64], x: f64, y: f64) -> Result<Self> {
        let links = lengths
            .iter()
            .map(|&l| DhLink::revolute(l, 0.0, 0.0, 0.0))
            .collect();
        let mut base = Matrix4::identity();
        base[(0, 3)] = x;
        base[(1, 3)] = y;
        Self::new(links, base, 2)
    }

    pub fn links(&self) -> &[DhLink] {
        &self.links
    }

    pub fn base(&self) -> &Matrix4<f64> {
        &self.base
    }

    pub fn task_dim(&self) -> usize {
        self.task_dim
    }

    pub fn dof(&self) -> usize {
        self.links.len()
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Pose> {
        check_dim(self.dof(), q.len())?;
        let mut frames = Vec::with_capacity(self.dof() + 1);
        let mut t = self.base;
        frames.push(t);
        for (link, &qi) in self.links.iter().zip(q) {
            t *= link.transform(qi);
            frames.push(t);
        }
        Ok(Pose {
            position: Vector3::new(t[(0, 3)], t[(1, 3)], t[(2, 3)]),
            rotation: t.fixed_view::<3, 3>(0, 0).into_owned(),
            frames,
        })
    }

    /// Full 6×n geometric Jacobian (linear rows first).
    pub fn full_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let pose = self.forward_kinematics(q)?;
        Ok(self.full_jacobian_at(&pose))
    }

    fn full_jacobian_at(&self, pose: &Pose) -> DMatrix<f64> {
        let n = self.dof();
        let pe = pose.position;
        let mut j = DMatrix::zeros(6, n);
        for (i, link) in self.links.iter().enumerate() {
            let f = &pose.frames[i];
            let z = Vector3::new(f[(0, 2)], f[(1, 2)], f[(2, 2)]);
            let p = Vector3::new(f[(0, 3)], f[(1, 3)], f[(2, 3)]);
            let (lin, ang) = match link.joint_type {
                JointType::Revolute => (z.cross(&(pe - p)), z),
                JointType::Prismatic => (z, Vector3::zeros()),
            };
            j.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
            j.fixed_view_mut::<3, 1>(3, i).copy_from(&ang);
        }
        j
    }

    /// Geometric Jacobian truncated to the task rows.
    pub fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let full = self.full_jacobian(q)?;
        Ok(full.rows(0, self.task_dim).into_owned())
    }

    /// Task-space coordinates usable for drift measurement: the first
    /// `task_dim` position components, with orientation handled by
    /// [`KinematicChain::task_error`].
    pub fn task_error(&self, current: &Pose, target: &Pose) -> DVector<f64> {
        let dp = target.position - current.position;
        match self.task_dim {
            2 => DVector::from_vec(vec![dp.x, dp.y]),
            3 => DVector::from_vec(vec![dp.x, dp.y, dp.z]),
            _ => {
                let mut w = Vector3::zeros();
                for k in 0..3 {
                    w += current.rotation.column(k).cross(&target.rotation.column(k));
                }
                w *= 0.5;
                DVector::from_vec(vec![dp.x, dp.y, dp.z, w.x, w.y, w.z])
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ChainFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ChainFile = serde_json::from_str(text)?;
        f.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct ChainFile {
    convention: String,
    task_dim: usize,
    base: Vec<f64>,
    links: Vec<DhLink>,
}

const CONVENTION: &str = "standard-dh";

impl From<&KinematicChain> for ChainFile {
    fn from(c: &KinematicChain) -> Self {
        let base = (0..4)
            .flat_map(|r| (0..4).map(move |k| (r, k)))
            .map(|(r, k)| c.base[(r, k)])
            .collect();
        Self {
            convention: CONVENTION.into(),
            task_dim: c.task_dim,
            base,
            links: c.links.clone(),
        }
    }
}

impl TryFrom<ChainFile> for KinematicChain {
    type Error = Error;

    fn try_from(f: ChainFile) -> Result<Self> {
        if f.convention != CONVENTION {
            return Err(Error::Config(format!(
                "unsupported convention {:?}",
                f.convention
            )));
        }
        if f.base.len() != 16 {
            return Err(Error::Config(format!(
                "base must have 16 entries, got {}",
                f.base.len()
            )));
        }
        KinematicChain::new(f.links, Matrix4::from_row_slice(&f.base), f.task_dim)
    }
}

/// `J = U·diag(S)·Vᵀ` with `S` sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_SWEEPS: usize = 100;

/// One-sided Jacobi SVD. Returns `min(m, n)` singular values with full
/// square `U` and `V`.
pub fn svd(j: &DMatrix<f64>) -> Svd {
    let (m, n) = j.shape();
    let mut a = j.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|k| a.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let v = DMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    let k = m.min(n);
    let s: Vec<f64> = order[..k].iter().map(|&i| norms[i]).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let mut u = DMatrix::<f64>::zeros(m, m);
    let mut filled = 0;
    for (col, &i) in order[..k].iter().enumerate() {
        if norms[i] > 1e-14 * smax.max(f64::MIN_POSITIVE) {
            u.set_column(col, &(a.column(i) / norms[i]));
            filled += 1;
        } else {
            break;
        }
    }
    complete_basis(&mut u, filled);
    Svd { u, s, v }
}

fn rotate_columns(a: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for r in 0..a.nrows() {
        let x = a[(r, p)];
        let y = a[(r, q)];
        a[(r, p)] = c * x - s * y;
        a[(r, q)] = s * x + c * y;
    }
}

// Extends the first `filled` orthonormal columns to a full orthonormal basis.
fn complete_basis(u: &mut DMatrix<f64>, mut filled: usize) {
    let m = u.nrows();
    let mut e = 0;
    while filled < m && e < m {
        let mut w = DVector::<f64>::zeros(m);
        w[e] = 1.0;
        for _ in 0..2 {
            for k in 0..filled {
                let proj = u.column(k).dot(&w);
                w -= u.column(k) * proj;
            }
        }
        let norm = w.norm();
        if norm > 1e-8 {
            u.set_column(filled, &(w / norm));
            filled += 1;
        }
        e += 1;
    }
}

impl Svd {
    pub fn min_singular_value(&self) -> f64 {
        self.s.last().copied().unwrap_or(0.0)
    }

    pub fn max_singular_value(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Rank with the tolerance `1e-9·σ_max`.
    pub fn rank(&self) -> usize {
        let tol = RANK_TOL * self.max_singular_value();
        self.s.iter().filter(|&&x| x > tol).count()
    }

    /// Rows spanning the null space, taken from the trailing right-singular
    /// vectors.
    pub fn null_space(&self) -> DMatrix<f64> {
        let n = self.v.nrows();
        let d = n - self.rank();
        self.v.columns(n - d, d).transpose()
    }

    pub fn pseudo_inverse(&self) -> DMatrix<f64> {
        let (n, m) = (self.v.nrows(), self.u.nrows());
        let r = self.rank();
        let mut out = DMatrix::zeros(n, m);
        for k in 0..r {
            out += self.v.column(k) * self.u.column(k).transpose() / self.s[k];
        }
        out
    }
}

/// Relative rank tolerance applied to the largest singular value.
pub const RANK_TOL: f64 = 1e-9;

pub fn min_singular_value(j: &DMatrix<f64>) -> f64 {
    svd(j).min_singular_value()
}

pub fn null_space_basis(j: &DMatrix<f64>) -> DMatrix<f64> {
    svd(j).null_space()
}

pub fn pseudo_inverse(j: &DMatrix<f64>) -> DMatrix<f64> {
    svd(j).pseudo_inverse()
}
