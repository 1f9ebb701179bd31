//! Skeletal motion clips, their feature encoding and forward kinematics.
//!
//! A clip stores a root translation per frame and a local rotation per joint
//! in the continuous 6D representation (the first two columns of the
//! rotation matrix, stored column by column). The feature encoding lays a
//! frame out as `[root_x, root_y, root_z, joint_0 6D, ..., joint_{J-1} 6D]`,
//! so `D = 3 + 6J`.

mod bvh;
mod json;
mod render;

use std::collections::HashSet;
use std::path::PathBuf;

use nalgebra::{Matrix3, Vector3};
use ndarray::{Array2, Array3};
use thiserror::Error;

pub use bvh::{export_bvh, parse_bvh, write_bvh, BvhChannel, BvhDocument, BvhJoint};
pub use json::{clip_from_json, clip_to_json, load_clip, save_clip};
pub use render::{render_frames, render_svg, RenderOptions};

pub type Vec3 = [f64; 3];
pub type Rot6 = [f64; 6];

pub const IDENTITY_ROT6: Rot6 = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];

const DEFAULT_SKELETON: &str = include_str!("../../data/skeleton.tsv");
const DEGENERATE_NORM: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("bvh: {0}")]
    Bvh(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MotionError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MotionError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Gram-Schmidt decoding of a 6D rotation. `None` when either column is degenerate.
// Negated comparisons also reject NaN norms.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn rot6_to_matrix(r: &Rot6) -> Option<Matrix3<f64>> {
    let a1 = Vector3::new(r[0], r[1], r[2]);
    let a2 = Vector3::new(r[3], r[4], r[5]);
    let n1 = a1.norm();
    if !(n1 > DEGENERATE_NORM) {
        return None;
    }
    let b1 = a1 / n1;
    let u2 = a2 - b1 * b1.dot(&a2);
    let n2 = u2.norm();
    if !(n2 > DEGENERATE_NORM) {
        return None;
    }
    let b2 = u2 / n2;
    let b3 = b1.cross(&b2);
    Some(Matrix3::from_columns(&[b1, b2, b3]))
}

pub fn matrix_to_rot6(m: &Matrix3<f64>) -> Rot6 {
    [m[(0, 0)], m[(1, 0)], m[(2, 0)], m[(0, 1)], m[(1, 1)], m[(2, 1)]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: Vec3,
}

/// Joints in topological order; joint 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    joints: Vec<Joint>,
}

impl Skeleton {
    pub fn new(joints: Vec<Joint>) -> Result<Self, MotionError> {
        let bad = |m: String| Err(MotionError::InvalidSkeleton(m));
        if joints.is_empty() {
            return bad("no joints".into());
        }
        let mut names = HashSet::new();
        for (i, j) in joints.iter().enumerate() {
            match (i, j.parent) {
                (0, None) => {}
                (0, Some(_)) => return bad("joint 0 must be the root".into()),
                (_, None) => return bad(format!("joint {i} ({}) is a second root", j.name)),
                (_, Some(p)) if p >= i => return bad(format!("joint {i} ({}) has parent {p} >= {i}", j.name)),
                _ => {}
            }
            if j.name.is_empty() || j.name.chars().any(char::is_whitespace) {
                return bad(format!("joint {i} has an invalid name {:?}", j.name));
            }
            if !names.insert(j.name.as_str()) {
                return bad(format!("duplicate joint name {:?}", j.name));
            }
            if j.offset.iter().any(|v| !v.is_finite()) {
                return bad(format!("joint {i} offset is not finite"));
            }
        }
        Ok(Skeleton { joints })
    }

    /// The bundled 24-joint body.
    pub fn default_body() -> Self {
        Self::from_tsv(DEFAULT_SKELETON).expect("bundled skeleton is valid")
    }

    /// Rows of `name, parent name or -, offset x, y, z`.
    pub fn from_tsv(text: &str) -> Result<Self, MotionError> {
        let mut joints: Vec<Joint> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| MotionError::InvalidSkeleton(format!("line {}: {m}", i + 1));
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(bad("expected 5 columns"));
            }
            let parent = match f[1] {
                "-" => None,
                name => Some(joints.iter().position(|j| j.name == name).ok_or_else(|| bad("unknown parent"))?),
            };
            let mut offset = [0.0; 3];
            for (o, s) in offset.iter_mut().zip(&f[2..]) {
                *o = s.parse().map_err(|_| bad("bad offset"))?;
            }
            joints.push(Joint {
                name: f[0].to_string(),
                parent,
                offset,
            });
        }
        Skeleton::new(joints)
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn feature_dim(&self) -> usize {
        feature_dim(self.len())
    }

    pub fn children(&self, joint: usize) -> impl Iterator<Item = usize> + '_ {
        self.joints
            .iter()
            .enumerate()
            .filter(move |(_, j)| j.parent == Some(joint))
            .map(|(i, _)| i)
    }
}

pub fn feature_dim(joints: usize) -> usize {
    3 + 6 * joints
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    fps: f64,
    skeleton: Skeleton,
    root_translation: Vec<Vec3>,
    /// `n_frames * J`, frame-major.
    joint_rotations: Vec<Rot6>,
}

impl MotionClip {
    pub fn new(
        fps: f64,
        skeleton: Skeleton,
        root_translation: Vec<Vec3>,
        joint_rotations: Vec<Rot6>,
    ) -> Result<Self, MotionError> {
        let bad = |m: String| Err(MotionError::InvalidClip(m));
        if !(fps.is_finite() && fps > 0.0) {
            return bad(format!("fps must be positive, got {fps}"));
        }
        let j = skeleton.len();
        if joint_rotations.len() != root_translation.len() * j {
            return bad(format!(
                "{} rotations for {} frames of {j} joints",
                joint_rotations.len(),
                root_translation.len()
            ));
        }
        if let Some(f) = root_translation.iter().position(|t| t.iter().any(|v| !v.is_finite())) {
            return bad(format!("frame {f}: root translation is not finite"));
        }
        for (k, r) in joint_rotations.iter().enumerate() {
            if r.iter().any(|v| !v.is_finite()) || rot6_to_matrix(r).is_none() {
                return bad(format!("frame {} joint {}: degenerate rotation", k / j, k % j));
            }
        }
        Ok(MotionClip {
            fps,
            skeleton,
            root_translation,
            joint_rotations,
        })
    }

    /// Every joint at identity rotation, root at `root`.
    pub fn rest(skeleton: Skeleton, frames: usize, fps: f64, root: Vec3) -> Result<Self, MotionError> {
        let j = skeleton.len();
        MotionClip::new(fps, skeleton, vec![root; frames], vec![IDENTITY_ROT6; frames * j])
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn n_frames(&self) -> usize {
        self.root_translation.len()
    }

    pub fn root_translation(&self) -> &[Vec3] {
        &self.root_translation
    }

    pub fn joint_rotations(&self) -> &[Rot6] {
        &self.joint_rotations
    }

    pub fn rotation(&self, frame: usize, joint: usize) -> &Rot6 {
        &self.joint_rotations[frame * self.skeleton.len() + joint]
    }

    /// Frames `[start, end)` as a new clip.
    pub fn slice(&self, start: usize, end: usize) -> MotionClip {
        let j = self.skeleton.len();
        MotionClip {
            fps: self.fps,
            skeleton: self.skeleton.clone(),
            root_translation: self.root_translation[start..end].to_vec(),
            joint_rotations: self.joint_rotations[start * j..end * j].to_vec(),
        }
    }

    /// This clip followed by `other` (same skeleton and fps).
    pub fn concat(&self, other: &MotionClip) -> Result<MotionClip, MotionError> {
        if self.skeleton != other.skeleton || self.fps != other.fps {
            return Err(MotionError::InvalidClip("cannot concatenate clips with different skeletons or fps".into()));
        }
        let mut out = self.clone();
        out.root_translation.extend_from_slice(&other.root_translation);
        out.joint_rotations.extend_from_slice(&other.joint_rotations);
        Ok(out)
    }

    pub fn with_root_offset(&self, offset: Vec3) -> MotionClip {
        let mut out = self.clone();
        for t in &mut out.root_translation {
            for k in 0..3 {
                t[k] += offset[k];
            }
        }
        out
    }
}

pub fn to_features(clip: &MotionClip) -> Array2<f64> {
    let j = clip.skeleton.len();
    let d = feature_dim(j);
    let mut out = Array2::zeros((clip.n_frames(), d));
    for (f, mut row) in out.rows_mut().into_iter().enumerate() {
        let t = clip.root_translation[f];
        row[0] = t[0];
        row[1] = t[1];
        row[2] = t[2];
        for k in 0..j {
            let r = clip.rotation(f, k);
            for c in 0..6 {
                row[3 + 6 * k + c] = r[c];
            }
        }
    }
    out
}

pub fn from_features(features: &Array2<f64>, skeleton: &Skeleton, fps: f64) -> Result<MotionClip, MotionError> {
    let j = skeleton.len();
    let d = feature_dim(j);
    if features.ncols() != d {
        return Err(MotionError::DimensionMismatch {
            expected: d,
            found: features.ncols(),
        });
    }
    let mut root = Vec::with_capacity(features.nrows());
    let mut rots = Vec::with_capacity(features.nrows() * j);
    for row in features.rows() {
        root.push([row[0], row[1], row[2]]);
        for k in 0..j {
            let base = 3 + 6 * k;
            rots.push(std::array::from_fn(|c| row[base + c]));
        }
    }
    MotionClip::new(fps, skeleton.clone(), root, rots)
}

/// World joint positions, `n_frames x J x 3`.
pub fn fk_positions(clip: &MotionClip) -> Array3<f64> {
    let j = clip.skeleton.len();
    let n = clip.n_frames();
    let mut out = Array3::zeros((n, j, 3));
    let mut world_rot: Vec<Matrix3<f64>> = vec![Matrix3::identity(); j];
    let mut world_pos: Vec<Vector3<f64>> = vec![Vector3::zeros(); j];
    for f in 0..n {
        for (k, joint) in clip.skeleton.joints.iter().enumerate() {
            let local = rot6_to_matrix(clip.rotation(f, k)).expect("clip rotations are validated");
            match joint.parent {
                None => {
                    let t = clip.root_translation[f];
                    world_pos[k] = Vector3::new(t[0], t[1], t[2]) + Vector3::from(joint.offset);
                    world_rot[k] = local;
                }
                Some(p) => {
                    world_pos[k] = world_pos[p] + world_rot[p] * Vector3::from(joint.offset);
                    world_rot[k] = world_rot[p] * local;
                }
            }
            for c in 0..3 {
                out[[f, k, c]] = world_pos[k][c];
            }
        }
    }
    out
}
