//! Windowing, batching and the training loop.

mod manifest;

use std::path::Path;
use std::time::Instant;

use ndarray::{s, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffcore::{Adam, AdamConfig, Graph, Tensor};
use crate::factmodel::{save_checkpoint, FactModel, ModelConfig, ModelError};
use crate::motion::{to_features, MotionClip, MotionError};
use crate::timeline::{ConditioningSequence, TimelineError, DEFAULT_FPS};

pub use manifest::{load_dataset, Manifest, ManifestEntry};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no training windows: every example was empty or too short")]
    EmptyDataset,
    #[error("loss became non-finite ({loss}) at step {step}")]
    NonFiniteLoss { step: u64, loss: f64 },
    #[error("example {id:?} has {frames} frames; at least {needed} are needed")]
    TooShort { id: String, frames: usize, needed: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("example {id:?}: {message}")]
    InvalidExample { id: String, message: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_error(path: &Path, source: std::io::Error) -> TrainError {
    TrainError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// A motion feature matrix with its frame-aligned conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedExample {
    pub id: String,
    /// `n x D`.
    pub motion: Array2<f64>,
    pub condition: ConditioningSequence,
}

impl PairedExample {
    pub fn new(id: impl Into<String>, motion: Array2<f64>, condition: ConditioningSequence) -> Result<Self, TrainError> {
        let id = id.into();
        let bad = |message: String| TrainError::InvalidExample {
            id: id.clone(),
            message,
        };
        if motion.nrows() != condition.n_frames() {
            return Err(bad(format!(
                "motion has {} frames but the condition has {}",
                motion.nrows(),
                condition.n_frames()
            )));
        }
        if condition.fps != DEFAULT_FPS {
            return Err(bad(format!("condition fps is {}, expected {DEFAULT_FPS}", condition.fps)));
        }
        Ok(PairedExample { id, motion, condition })
    }

    pub fn from_clip(id: impl Into<String>, clip: &MotionClip, condition: ConditioningSequence) -> Result<Self, TrainError> {
        let id = id.into();
        if clip.fps() != DEFAULT_FPS {
            return Err(TrainError::InvalidExample {
                id,
                message: format!("clip fps is {}, expected {DEFAULT_FPS}", clip.fps()),
            });
        }
        Self::new(id, to_features(clip), condition)
    }

    pub fn n_frames(&self) -> usize {
        self.motion.nrows()
    }
}

/// One supervised sample. `cond` row 0 and `seed` row 0 are the same source frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingWindow {
    pub start: usize,
    pub seed: Tensor<f32>,
    pub cond: Tensor<f32>,
    pub target: Tensor<f32>,
}

pub fn window_count(n_frames: usize, model: &ModelConfig, stride: usize) -> usize {
    let needed = model.seed_len + model.out_len;
    if n_frames < needed || stride == 0 {
        0
    } else {
        (n_frames - needed) / stride + 1
    }
}

/// The window starting at source frame `start`. Condition rows past the end
/// of the example are zero.
pub fn window_at(example: &PairedExample, model: &ModelConfig, start: usize) -> Result<TrainingWindow, TrainError> {
    let (sl, ol) = (model.seed_len, model.out_len);
    if start + sl + ol > example.n_frames() {
        return Err(TrainError::TooShort {
            id: example.id.clone(),
            frames: example.n_frames(),
            needed: start + sl + ol,
        });
    }
    if example.motion.ncols() != model.motion_dim {
        return Err(TrainError::InvalidExample {
            id: example.id.clone(),
            message: format!("motion has {} features, model expects {}", example.motion.ncols(), model.motion_dim),
        });
    }
    let seed = Tensor::from_array2(&example.motion.slice(s![start..start + sl, ..]).to_owned());
    let target = Tensor::from_array2(&example.motion.slice(s![start + sl..start + sl + ol, ..]).to_owned());
    let cond = Tensor::from_array2(&example.condition.window(start as i64, model.cond_len)?);
    Ok(TrainingWindow {
        start,
        seed,
        cond,
        target,
    })
}

/// Lazily yields every window, `stride` frames apart.
pub fn make_windows<'a>(
    example: &'a PairedExample,
    model: &'a ModelConfig,
    stride: usize,
) -> Result<impl Iterator<Item = TrainingWindow> + 'a, TrainError> {
    if stride == 0 {
        return Err(TrainError::InvalidConfig("window stride must be at least 1".into()));
    }
    let needed = model.seed_len + model.out_len;
    if example.n_frames() < needed {
        return Err(TrainError::TooShort {
            id: example.id.clone(),
            frames: example.n_frames(),
            needed,
        });
    }
    let count = window_count(example.n_frames(), model, stride);
    Ok((0..count).map(move |k| window_at(example, model, k * stride).expect("start is in range")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub steps: u64,
    /// Write a checkpoint every this many steps; 0 disables periodic checkpoints.
    pub checkpoint_every: u64,
    pub window_stride: usize,
    /// Drives shuffling and dropout.
    pub seed: u64,
    /// Stop as soon as a step's loss falls below this value.
    pub stop_below: Option<f64>,
    /// When false, the `wall_ms` column is written as 0 so metric files from
    /// repeated runs compare equal.
    pub record_wall_time: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            model: ModelConfig::desk(),
            lr: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps: adam.eps,
            batch_size: 4,
            steps: 1000,
            checkpoint_every: 0,
            window_stride: 1,
            seed: 0,
            stop_below: None,
            record_wall_time: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        self.model.validate()?;
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("lr must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("betas must be in [0, 1)");
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.window_stride == 0 {
            return bad("window_stride must be at least 1");
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepMetric {
    pub step: u64,
    pub loss: f64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedExample {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: FactModel<f32>,
    pub metrics: Vec<StepMetric>,
    pub skipped: Vec<SkippedExample>,
    pub n_windows: usize,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> Option<f64> {
        self.metrics.last().map(|m| m.loss)
    }
}

pub fn metrics_csv(metrics: &[StepMetric]) -> String {
    let mut out = String::from("step,loss,wall_ms\n");
    for m in metrics {
        out.push_str(&format!("{},{},{}\n", m.step, m.loss, m.wall_ms));
    }
    out
}

pub fn train(dataset: &[PairedExample], cfg: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    train_with(dataset, cfg, |_, _| Ok(()))
}

/// Trains and calls `on_checkpoint(step, model)` every `checkpoint_every` steps.
///
/// Windows are visited in a seeded shuffled order, reshuffled each epoch.
/// A step averages the loss and gradients of `batch_size` windows and
/// applies one Adam update. The logged loss is the batch mean before the update.
pub fn train_with(
    dataset: &[PairedExample],
    cfg: &TrainConfig,
    mut on_checkpoint: impl FnMut(u64, &FactModel<f32>) -> Result<(), TrainError>,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    let mc = &cfg.model;
    let mut skipped = Vec::new();
    let mut index: Vec<(usize, usize)> = Vec::new();
    for (e, ex) in dataset.iter().enumerate() {
        let needed = mc.seed_len + mc.out_len;
        if ex.n_frames() < needed {
            skipped.push(SkippedExample {
                id: ex.id.clone(),
                reason: TrainError::TooShort {
                    id: ex.id.clone(),
                    frames: ex.n_frames(),
                    needed,
                }
                .to_string(),
            });
            continue;
        }
        if ex.motion.ncols() != mc.motion_dim {
            return Err(TrainError::InvalidExample {
                id: ex.id.clone(),
                message: format!("motion has {} features, model expects {}", ex.motion.ncols(), mc.motion_dim),
            });
        }
        let n = window_count(ex.n_frames(), mc, cfg.window_stride);
        index.extend((0..n).map(|k| (e, k * cfg.window_stride)));
    }
    if index.is_empty() {
        return Err(TrainError::EmptyDataset);
    }

    let mut model = FactModel::<f32>::new(mc.clone())?;
    let mut adam = Adam::new(cfg.adam(), model.params());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = index.clone();
    order.shuffle(&mut rng);
    let mut cursor = 0;
    let mut metrics = Vec::with_capacity(cfg.steps as usize);
    let clock = Instant::now();
    let mut drawn: u64 = 0;

    for step in 1..=cfg.steps {
        let mut total_loss = 0.0f64;
        let mut acc: Option<Vec<Tensor<f32>>> = None;
        let scale = 1.0 / cfg.batch_size as f32;
        for _ in 0..cfg.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let (e, start) = order[cursor];
            cursor += 1;
            let w = window_at(&dataset[e], mc, start)?;

            let mut g = Graph::training(cfg.seed, drawn);
            drawn += 1;
            let b = model.params().bind(&mut g);
            let seed = g.constant(w.seed);
            let cond = g.constant(w.cond);
            let pred = model.forward_graph(&mut g, &b, seed, cond)?;
            let target = g.constant(w.target);
            let l = g.mse(pred, target).map_err(ModelError::from)?;
            total_loss += g.value(l).get(0, 0) as f64;
            let mut grads = g.backward(l).map_err(ModelError::from)?;
            let grads = b.gradients(model.params(), &mut grads);
            match acc.as_mut() {
                None => acc = Some(grads.into_iter().map(|t| t.map(|v| v * scale)).collect()),
                Some(a) => {
                    for (a, g) in a.iter_mut().zip(&grads) {
                        a.axpy(scale, g);
                    }
                }
            }
        }
        let loss = total_loss / cfg.batch_size as f64;
        if !loss.is_finite() {
            return Err(TrainError::NonFiniteLoss { step, loss });
        }
        adam.step(model.params_mut(), &acc.expect("batch_size >= 1"))
            .map_err(ModelError::from)?;
        let wall_ms = if cfg.record_wall_time {
            clock.elapsed().as_millis() as u64
        } else {
            0
        };
        metrics.push(StepMetric { step, loss, wall_ms });
        if cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 {
            on_checkpoint(step, &model)?;
        }
        if cfg.stop_below.is_some_and(|t| loss < t) {
            break;
        }
    }
    Ok(TrainOutcome {
        model,
        metrics,
        skipped,
        n_windows: index.len(),
    })
}

/// Trains and writes `checkpoint_<step>.onof`, `final.onof`, `metrics.csv`
/// and `train_config.json` into `out_dir`.
pub fn train_to_dir(dataset: &[PairedExample], cfg: &TrainConfig, out_dir: &Path) -> Result<TrainOutcome, TrainError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let outcome = train_with(dataset, cfg, |step, model| {
        save_checkpoint(model, out_dir.join(format!("checkpoint_{step:06}.onof")))?;
        Ok(())
    })?;
    save_checkpoint(&outcome.model, out_dir.join("final.onof"))?;
    let metrics_path = out_dir.join("metrics.csv");
    std::fs::write(&metrics_path, metrics_csv(&outcome.metrics)).map_err(|e| io_error(&metrics_path, e))?;
    let config_path = out_dir.join("train_config.json");
    let text = serde_json::to_string_pretty(cfg).expect("config serializes");
    std::fs::write(&config_path, text + "\n").map_err(|e| io_error(&config_path, e))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolism::SCALE_DIMS;

    fn example(n: usize, d: usize) -> PairedExample {
        let motion = Array2::from_shape_fn((n, d), |(f, k)| f as f64 * 1000.0 + k as f64);
        let mut cond = ConditioningSequence::zeros(n, 60.0);
        for f in 0..n {
            cond.frames[[f, 0]] = f as f32 + 1.0;
        }
        PairedExample::new("ex", motion, cond).unwrap()
    }

    fn tiny_model() -> ModelConfig {
        ModelConfig {
            motion_dim: 5,
            hidden_dim: 8,
            heads: 2,
            ff_dim: 16,
            motion_layers: 1,
            cond_layers: 1,
            cross_layers: 1,
            ..ModelConfig::desk()
        }
    }

    #[test]
    fn window_counts_and_padding() {
        let m = ModelConfig::desk();
        let ex = example(600, 147);
        let windows: Vec<_> = make_windows(&ex, &m, 1).unwrap().collect();
        assert_eq!(windows.len(), 461);
        assert_eq!(windows[0].start, 0);
        let last = windows.last().unwrap();
        assert_eq!(last.start, 460);
        let zero_rows = (0..240).filter(|&r| (0..SCALE_DIMS).all(|c| last.cond.get(r, c) == 0.0)).count();
        assert_eq!(zero_rows, 100);
        assert_eq!(make_windows(&ex, &m, 20).unwrap().count(), 24);

        let short = example(139, 147);
        assert!(matches!(make_windows(&short, &m, 1), Err(TrainError::TooShort { frames: 139, needed: 140, .. })));
        assert_eq!(make_windows(&example(140, 147), &m, 1).unwrap().count(), 1);
    }

    #[test]
    fn windows_are_aligned_and_disjoint() {
        let m = ModelConfig::desk();
        let ex = example(300, 147);
        for w in make_windows(&ex, &m, 7).unwrap() {
            // row 0 of seed and cond come from the same source frame
            assert_eq!(w.seed.get(0, 0), (w.start * 1000) as f32);
            assert_eq!(w.cond.get(0, 0), w.start as f32 + 1.0);
            assert_eq!(w.seed.get(119, 0), ((w.start + 119) * 1000) as f32);
            assert_eq!(w.target.get(0, 0), ((w.start + 120) * 1000) as f32);
        }
    }

    #[test]
    fn zero_steps_returns_initialization() {
        let cfg = TrainConfig {
            model: tiny_model(),
            steps: 0,
            ..TrainConfig::default()
        };
        let out = train(&[example(150, 5)], &cfg).unwrap();
        assert_eq!(out.model, FactModel::<f32>::new(tiny_model()).unwrap());
        assert!(out.metrics.is_empty());
    }

    #[test]
    fn empty_dataset_and_skips() {
        let cfg = TrainConfig {
            model: tiny_model(),
            steps: 1,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&[], &cfg), Err(TrainError::EmptyDataset)));
        assert!(matches!(train(&[example(100, 5)], &cfg), Err(TrainError::EmptyDataset)));
        let out = train(&[example(100, 5), example(141, 5)], &cfg).unwrap();
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.n_windows, 2);
    }

    #[test]
    fn non_finite_loss_names_the_step() {
        let mut ex = example(150, 5);
        ex.motion[[125, 0]] = f64::INFINITY;
        let cfg = TrainConfig {
            model: tiny_model(),
            steps: 3,
            batch_size: 11,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&[ex], &cfg), Err(TrainError::NonFiniteLoss { step: 1, .. })));
    }

    #[test]
    fn metrics_are_reproducible() {
        let ex = example(160, 5).motion.mapv(|v| (v * 1e-3).sin());
        let ex = PairedExample::new("s", ex, example(160, 5).condition).unwrap();
        let cfg = TrainConfig {
            model: ModelConfig {
                dropout: 0.1,
                ..tiny_model()
            },
            steps: 5,
            batch_size: 3,
            record_wall_time: false,
            lr: 1e-3,
            ..TrainConfig::default()
        };
        let a = train(std::slice::from_ref(&ex), &cfg).unwrap();
        let b = train(std::slice::from_ref(&ex), &cfg).unwrap();
        assert_eq!(metrics_csv(&a.metrics), metrics_csv(&b.metrics));
        assert_eq!(a.model, b.model);
        assert!(metrics_csv(&a.metrics).starts_with("step,loss,wall_ms\n1,"));
    }

    #[test]
    fn one_small_step_lowers_the_loss() {
        let mut ex = example(140, 5);
        ex.motion.mapv_inplace(|v| (v * 1e-3).cos());
        let cfg = TrainConfig {
            model: tiny_model(),
            steps: 1,
            batch_size: 1,
            lr: 1e-5,
            ..TrainConfig::default()
        };
        let w = window_at(&ex, &cfg.model, 0).unwrap();
        let before = crate::factmodel::loss(&FactModel::<f32>::new(tiny_model()).unwrap().forward(&w.seed, &w.cond).unwrap(), &w.target).unwrap();
        let out = train(std::slice::from_ref(&ex), &cfg).unwrap();
        let after = crate::factmodel::loss(&out.model.forward(&w.seed, &w.cond).unwrap(), &w.target).unwrap();
        assert!(after < before, "{after} >= {before}");
    }

    #[test]
    fn config_validation_and_json() {
        let bad = TrainConfig {
            window_stride: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let cfg: TrainConfig = serde_json::from_str(r#"{"steps": 10, "model": {"hidden_dim": 32, "heads": 2}}"#).unwrap();
        assert_eq!(cfg.steps, 10);
        assert_eq!(cfg.model.hidden_dim, 32);
        assert_eq!(cfg.beta2, 0.98);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"step": 10}"#).is_err());
    }
}
