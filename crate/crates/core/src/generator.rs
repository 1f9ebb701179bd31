//! Autoregressive rollout.
//!
//! The seed occupies condition frames `[0, seed_len)`. Step `t` feeds the
//! most recent `seed_len` frames of history with condition rows
//! `[t, t + cond_len)`, keeps only the first predicted frame and slides both
//! windows by one. Generated frame `t` therefore sits at condition frame
//! `seed_len + t`, the same alignment training windows use.

use std::path::PathBuf;

use ndarray::Array2;
use thiserror::Error;

use crate::diffcore::Tensor;
use crate::factmodel::{load_checkpoint, FactModel, ModelError};
use crate::motion::{feature_dim, from_features, to_features, MotionClip, MotionError, Skeleton};
use crate::timeline::{ConditioningSequence, TimelineError, DEFAULT_FPS};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("feature dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("requested length must be at least 1 frame")]
    ZeroLength,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeedMotion {
    /// Every seed frame at the rest pose.
    RestPose,
    /// The last `seed_len` frames of a real clip.
    Clip(MotionClip),
    /// A `seed_len x D` feature matrix.
    Features(Array2<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub checkpoint: PathBuf,
    pub skeleton: Skeleton,
    pub seed: SeedMotion,
    /// Shorter sequences are zero-padded.
    pub condition: ConditioningSequence,
    pub frames: usize,
    /// Reserved for stochastic decoding; the rollout itself is deterministic.
    pub rng_seed: u64,
}

/// `seed_len` identical rest-pose feature rows.
pub fn rest_pose_seed(skeleton: &Skeleton, motion_dim: usize, seed_len: usize) -> Result<Array2<f64>, GenerateError> {
    let d = skeleton.feature_dim();
    if d != motion_dim {
        return Err(GenerateError::DimensionMismatch(format!(
            "skeleton with {} joints has {d} features, model expects {motion_dim}",
            skeleton.len()
        )));
    }
    let clip = MotionClip::rest(skeleton.clone(), seed_len, DEFAULT_FPS, [0.0; 3])?;
    Ok(to_features(&clip))
}

fn seed_features(seed: &SeedMotion, skeleton: &Skeleton, model: &FactModel<f32>) -> Result<Array2<f64>, GenerateError> {
    let c = model.config();
    let features = match seed {
        SeedMotion::RestPose => return rest_pose_seed(skeleton, c.motion_dim, c.seed_len),
        SeedMotion::Clip(clip) => {
            if clip.n_frames() < c.seed_len {
                return Err(GenerateError::DimensionMismatch(format!(
                    "seed clip has {} frames, need {}",
                    clip.n_frames(),
                    c.seed_len
                )));
            }
            to_features(&clip.slice(clip.n_frames() - c.seed_len, clip.n_frames()))
        }
        SeedMotion::Features(f) => f.clone(),
    };
    if features.dim() != (c.seed_len, c.motion_dim) {
        return Err(GenerateError::DimensionMismatch(format!(
            "seed is {:?}, model expects ({}, {})",
            features.dim(),
            c.seed_len,
            c.motion_dim
        )));
    }
    Ok(features)
}

/// Rolls `model` forward for `frames` steps; the result holds only the
/// generated frames, at 60 fps.
pub fn generate_with_model(
    model: &FactModel<f32>,
    skeleton: &Skeleton,
    seed: &SeedMotion,
    condition: &ConditioningSequence,
    frames: usize,
) -> Result<MotionClip, GenerateError> {
    if frames == 0 {
        return Err(GenerateError::ZeroLength);
    }
    let c = model.config();
    if feature_dim(skeleton.len()) != c.motion_dim {
        return Err(GenerateError::DimensionMismatch(format!(
            "skeleton has {} features, model expects {}",
            skeleton.feature_dim(),
            c.motion_dim
        )));
    }
    let seed = seed_features(seed, skeleton, model)?;
    let d = c.motion_dim;
    let mut history: Vec<f32> = seed.iter().map(|&v| v as f32).collect();
    for t in 0..frames {
        let start = history.len() - c.seed_len * d;
        let window = Tensor::new(c.seed_len, d, history[start..].to_vec()).expect("window shape");
        let cond = Tensor::from_array2(&condition.window(t as i64, c.cond_len)?);
        let out = model.forward(&window, &cond)?;
        history.extend_from_slice(out.row(0));
    }
    let generated = &history[c.seed_len * d..];
    let features = Array2::from_shape_fn((frames, d), |(f, k)| generated[f * d + k] as f64);
    Ok(from_features(&features, skeleton, DEFAULT_FPS)?)
}

pub fn generate(req: &GenerationRequest) -> Result<MotionClip, GenerateError> {
    let model = load_checkpoint(&req.checkpoint)?;
    generate_with_model(&model, &req.skeleton, &req.seed, &req.condition, req.frames)
}
