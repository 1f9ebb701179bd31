//! Cross-modal transformer that extends a motion history under a
//! conditioning sequence.
//!
//! Both inputs are linearly embedded to `hidden_dim` and get a learnable
//! positional encoding. Each passes its own encoder stack; the two encoded
//! streams are then concatenated along time (motion first) and run through
//! the cross stack with full attention. The last `out_len` positions pass a
//! final layer norm and a linear map back to motion features.

mod checkpoint;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::diffcore::{Bound, DiffError, Graph, LayerNorm, Linear, ParamId, ParamSet, Scalar, Tensor, TransformerBlock, Var};
use crate::symbolism::SCALE_DIMS;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("{what}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        what: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("checkpoint format version {0} is not supported")]
    VersionUnsupported(u32),
    #[error("checkpoint is corrupt or truncated: {0}")]
    CorruptChecksum(String),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("checkpoint payload: {0}")]
    Payload(String),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub motion_dim: usize,
    pub cond_dim: usize,
    pub hidden_dim: usize,
    pub motion_layers: usize,
    pub cond_layers: usize,
    pub cross_layers: usize,
    pub heads: usize,
    pub ff_dim: usize,
    pub seed_len: usize,
    pub cond_len: usize,
    pub out_len: usize,
    pub dropout: f64,
    pub init_seed: u64,
    /// Scales the condition into [-1, 1] before embedding.
    pub normalize_condition: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ModelConfig {
    /// Small enough to train on a laptop CPU.
    pub fn desk() -> Self {
        ModelConfig {
            motion_dim: 147,
            cond_dim: SCALE_DIMS,
            hidden_dim: 64,
            motion_layers: 2,
            cond_layers: 2,
            cross_layers: 4,
            heads: 4,
            ff_dim: 256,
            seed_len: 120,
            cond_len: 240,
            out_len: 20,
            dropout: 0.0,
            init_seed: 0,
            normalize_condition: false,
        }
    }

    /// 800-wide hidden representation with a 2/2/12 layer split.
    pub fn large() -> Self {
        ModelConfig {
            hidden_dim: 800,
            motion_layers: 2,
            cond_layers: 2,
            cross_layers: 12,
            heads: 10,
            ff_dim: 3072,
            dropout: 0.1,
            ..Self::desk()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "desk" => Some(Self::desk()),
            "large" => Some(Self::large()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidConfig(m));
        if self.cond_dim != SCALE_DIMS {
            return bad(format!("cond_dim must be {SCALE_DIMS}, got {}", self.cond_dim));
        }
        if self.seed_len > self.cond_len {
            return bad(format!("seed_len {} exceeds cond_len {}", self.seed_len, self.cond_len));
        }
        if self.out_len == 0 {
            return bad("out_len must be at least 1".into());
        }
        if self.out_len > self.seed_len + self.cond_len {
            return bad("out_len exceeds the combined sequence length".into());
        }
        for (name, v) in [
            ("motion_dim", self.motion_dim),
            ("hidden_dim", self.hidden_dim),
            ("heads", self.heads),
            ("ff_dim", self.ff_dim),
            ("seed_len", self.seed_len),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if !self.hidden_dim.is_multiple_of(self.heads) {
            return bad(format!(
                "hidden_dim {} is not divisible by {} heads",
                self.hidden_dim, self.heads
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    motion_embed: Linear,
    cond_embed: Linear,
    motion_pos: ParamId,
    cond_pos: ParamId,
    motion_blocks: Vec<TransformerBlock>,
    cond_blocks: Vec<TransformerBlock>,
    cross_blocks: Vec<TransformerBlock>,
    final_norm: LayerNorm,
    head: Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactModel<T> {
    config: ModelConfig,
    params: ParamSet<T>,
    layout: Layout,
}

const POS_STD: f64 = 0.02;

impl<T: Scalar> FactModel<T> {
    /// Fresh parameters, drawn from `config.init_seed`.
    pub fn new(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let c = &config;
        let mut rng = ChaCha8Rng::seed_from_u64(c.init_seed);
        let mut p = ParamSet::new();
        let motion_embed = Linear::new(&mut p, "motion_embed", c.motion_dim, c.hidden_dim, &mut rng)?;
        let cond_embed = Linear::new(&mut p, "cond_embed", c.cond_dim, c.hidden_dim, &mut rng)?;
        let motion_pos = p.add_normal("motion_pos", c.seed_len, c.hidden_dim, POS_STD, &mut rng)?;
        let cond_pos = p.add_normal("cond_pos", c.cond_len, c.hidden_dim, POS_STD, &mut rng)?;
        let mut stack = |p: &mut ParamSet<T>, prefix: &str, n: usize| -> Result<Vec<TransformerBlock>, DiffError> {
            (0..n)
                .map(|i| {
                    TransformerBlock::new(p, &format!("{prefix}.{i}"), c.hidden_dim, c.heads, c.ff_dim, c.dropout, &mut rng)
                })
                .collect()
        };
        let motion_blocks = stack(&mut p, "motion_encoder", c.motion_layers)?;
        let cond_blocks = stack(&mut p, "cond_encoder", c.cond_layers)?;
        let cross_blocks = stack(&mut p, "cross", c.cross_layers)?;
        let final_norm = LayerNorm::new(&mut p, "final_norm", c.hidden_dim)?;
        let head = Linear::new(&mut p, "head", c.hidden_dim, c.motion_dim, &mut rng)?;
        Ok(FactModel {
            layout: Layout {
                motion_embed,
                cond_embed,
                motion_pos,
                cond_pos,
                motion_blocks,
                cond_blocks,
                cross_blocks,
                final_norm,
                head,
            },
            config,
            params: p,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamSet<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet<T> {
        &mut self.params
    }

    pub fn n_parameters(&self) -> usize {
        self.params.n_elements()
    }

    pub fn cast<U: Scalar>(&self) -> FactModel<U> {
        FactModel {
            config: self.config.clone(),
            params: self.params.cast(),
            layout: self.layout.clone(),
        }
    }

    fn check(&self, what: &str, t: (usize, usize), expected: (usize, usize)) -> Result<(), ModelError> {
        if t != expected {
            return Err(ModelError::ShapeMismatch {
                what: what.to_string(),
                expected,
                found: t,
            });
        }
        Ok(())
    }

    /// Builds the forward pass on `g`. `seed` is `seed_len x motion_dim`,
    /// `cond` is `cond_len x cond_dim`; the result is `out_len x motion_dim`.
    pub fn forward_graph(&self, g: &mut Graph<T>, b: &Bound, seed: Var, cond: Var) -> Result<Var, ModelError> {
        let c = &self.config;
        let l = &self.layout;
        self.check("seed motion", g.value(seed).shape(), (c.seed_len, c.motion_dim))?;
        self.check("condition", g.value(cond).shape(), (c.cond_len, c.cond_dim))?;

        let cond = if c.normalize_condition { g.scale(cond, T::of(0.5)) } else { cond };
        let mut m = l.motion_embed.forward(g, b, seed)?;
        m = g.add(m, b.var(l.motion_pos))?;
        for blk in &l.motion_blocks {
            m = blk.forward(g, b, m, false)?;
        }
        let mut s = l.cond_embed.forward(g, b, cond)?;
        s = g.add(s, b.var(l.cond_pos))?;
        for blk in &l.cond_blocks {
            s = blk.forward(g, b, s, false)?;
        }
        let mut x = g.concat_rows(&[m, s])?;
        for blk in &l.cross_blocks {
            x = blk.forward(g, b, x, false)?;
        }
        let total = c.seed_len + c.cond_len;
        let tail = g.slice_rows(x, total - c.out_len, c.out_len)?;
        let tail = l.final_norm.forward(g, b, tail)?;
        Ok(l.head.forward(g, b, tail)?)
    }

    /// Inference forward pass (no dropout, no gradient tracking).
    pub fn forward(&self, seed: &Tensor<T>, cond: &Tensor<T>) -> Result<Tensor<T>, ModelError> {
        let mut g = Graph::new();
        let b = self.params.bind_frozen(&mut g);
        let s = g.constant(seed.clone());
        let c = g.constant(cond.clone());
        let out = self.forward_graph(&mut g, &b, s, c)?;
        Ok(g.value(out).clone())
    }

    /// Parameter summary as JSON: config, total count and per-tensor shapes.
    pub fn info_json(&self) -> serde_json::Value {
        let tensors: Vec<_> = self
            .params
            .iter()
            .map(|(_, name, t)| json!({"name": name, "shape": [t.rows(), t.cols()]}))
            .collect();
        json!({
            "config": self.config,
            "n_parameters": self.n_parameters(),
            "parameters": tensors,
        })
    }
}

/// Mean squared error over every entry.
pub fn loss<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<f64, ModelError> {
    if pred.shape() != target.shape() {
        return Err(ModelError::ShapeMismatch {
            what: "loss target".into(),
            expected: pred.shape(),
            found: target.shape(),
        });
    }
    let n = pred.len().max(1) as f64;
    Ok(pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&a, &b)| {
            let d = (a - b).as_f64();
            d * d
        })
        .sum::<f64>()
        / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::grad_check;

    fn inputs<T: Scalar>(c: &ModelConfig) -> (Tensor<T>, Tensor<T>) {
        let seed = Tensor::from_fn(c.seed_len, c.motion_dim, |r, k| T::of(((r * 31 + k * 7) as f64 * 0.01).sin()));
        let cond = Tensor::from_fn(c.cond_len, c.cond_dim, |r, k| T::of(((r + 3 * k) as f64 * 0.05).cos() * 2.0));
        (seed, cond)
    }

    #[test]
    fn desk_shape_contract() {
        let c = ModelConfig::desk();
        let model = FactModel::<f32>::new(c.clone()).unwrap();
        let (seed, cond) = inputs::<f32>(&c);
        let out = model.forward(&seed, &cond).unwrap();
        assert_eq!(out.shape(), (20, 147));

        let bad_seed = Tensor::zeros(119, 147);
        assert!(matches!(model.forward(&bad_seed, &cond), Err(ModelError::ShapeMismatch { .. })));
        let bad_cond = Tensor::zeros(240, 42);
        assert!(matches!(model.forward(&seed, &bad_cond), Err(ModelError::ShapeMismatch { .. })));
    }

    #[test]
    fn inference_is_deterministic() {
        let c = ModelConfig {
            dropout: 0.1,
            ..ModelConfig::desk()
        };
        let model = FactModel::<f32>::new(c.clone()).unwrap();
        let (seed, cond) = inputs::<f32>(&c);
        assert_eq!(model.forward(&seed, &cond).unwrap(), model.forward(&seed, &cond).unwrap());
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let c = ModelConfig::desk();
        let mut model = FactModel::<f64>::new(c.clone()).unwrap();
        model.params_mut().tensors_mut().for_each(|t| t.data_mut().fill(0.0));
        let (seed, cond) = inputs::<f64>(&c);
        let out = model.forward(&seed, &cond).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn config_guards() {
        let bad = ModelConfig {
            hidden_dim: 65,
            heads: 4,
            ..ModelConfig::desk()
        };
        assert!(matches!(FactModel::<f32>::new(bad), Err(ModelError::InvalidConfig(_))));
        let bad = ModelConfig {
            cond_dim: 35,
            ..ModelConfig::desk()
        };
        assert!(bad.validate().is_err());
        let bad = ModelConfig {
            seed_len: 241,
            ..ModelConfig::desk()
        };
        assert!(bad.validate().is_err());
        let bad = ModelConfig {
            out_len: 0,
            ..ModelConfig::desk()
        };
        assert!(bad.validate().is_err());
        assert!(ModelConfig::large().validate().is_ok());
        assert_eq!(ModelConfig::large().hidden_dim, 800);
    }

    #[test]
    fn config_json_round_trip_and_defaults() {
        let c = ModelConfig::large();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ModelConfig>(&text).unwrap(), c);
        let partial: ModelConfig = serde_json::from_str(r#"{"hidden_dim": 32, "heads": 2}"#).unwrap();
        assert_eq!(partial.cross_layers, 4);
        assert!(serde_json::from_str::<ModelConfig>(r#"{"hidden": 32}"#).is_err());
    }

    #[test]
    fn mse_examples() {
        let a = Tensor::<f64>::from_fn(20, 3, |r, c| (r * c) as f64);
        assert_eq!(loss(&a, &a).unwrap(), 0.0);
        let b = a.map(|v| v + 1.0);
        assert_eq!(loss(&a, &b).unwrap(), 1.0);
        assert!(loss(&a, &Tensor::zeros(20, 4)).is_err());
    }

    #[test]
    fn small_model_gradients_match_finite_differences() {
        let c = ModelConfig {
            motion_dim: 9,
            hidden_dim: 8,
            heads: 2,
            ff_dim: 12,
            motion_layers: 1,
            cond_layers: 1,
            cross_layers: 1,
            seed_len: 6,
            cond_len: 10,
            out_len: 3,
            init_seed: 4,
            ..ModelConfig::desk()
        };
        let model = FactModel::<f64>::new(c.clone()).unwrap();
        let (seed, cond) = inputs::<f64>(&c);
        let target = Tensor::from_fn(3, 9, |r, k| ((r * 9 + k) as f64 * 0.2).sin());
        let report = grad_check(
            model.params(),
            |g, b| {
                let s = g.constant(seed.clone());
                let cv = g.constant(cond.clone());
                let out = model.forward_graph(g, b, s, cv).map_err(|e| match e {
                    ModelError::Diff(d) => d,
                    other => panic!("{other}"),
                })?;
                let t = g.constant(target.clone());
                g.mse(out, t)
            },
            1e-3,
        )
        .unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
