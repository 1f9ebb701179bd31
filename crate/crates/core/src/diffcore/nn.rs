use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{DiffError, Gradients, Graph, Scalar, Tensor, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Uniquely named parameters in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet<T> {
    entries: Vec<(String, Tensor<T>)>,
}

impl<T: Scalar> Default for ParamSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParamSet<T> {
    pub fn new() -> Self {
        ParamSet { entries: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor<T>) -> Result<ParamId, DiffError> {
        let name = name.into();
        if self.by_name(&name).is_some() {
            return Err(DiffError::DuplicateParameter(name));
        }
        self.entries.push((name, value));
        Ok(ParamId(self.entries.len() - 1))
    }

    /// Adds a `rows x cols` parameter drawn from `N(0, std^2)`. Draws happen in
    /// `f64` so every scalar type starts from the same values.
    pub fn add_normal(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        std: f64,
        rng: &mut impl Rng,
    ) -> Result<ParamId, DiffError> {
        let dist = Normal::new(0.0, std).expect("finite std");
        let t = Tensor::from_fn(rows, cols, |_, _| T::of(dist.sample(rng)));
        self.add(name, t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_elements(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    pub fn get(&self, id: ParamId) -> &Tensor<T> {
        &self.entries[id.0].1
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.entries[id.0].1
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].0
    }

    pub fn by_name(&self, name: &str) -> Option<ParamId> {
        self.entries.iter().position(|(n, _)| n == name).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor<T>)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, (n, t))| (ParamId(i), n.as_str(), t))
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor<T>> {
        self.entries.iter_mut().map(|(_, t)| t)
    }

    pub fn cast<U: Scalar>(&self) -> ParamSet<U> {
        ParamSet {
            entries: self.entries.iter().map(|(n, t)| (n.clone(), t.cast())).collect(),
        }
    }

    /// Puts every parameter on `g` as a trainable leaf.
    pub fn bind(&self, g: &mut Graph<T>) -> Bound {
        Bound {
            vars: self.entries.iter().map(|(_, t)| g.leaf(t.clone())).collect(),
        }
    }

    /// Puts every parameter on `g` as a constant (no gradients are tracked).
    pub fn bind_frozen(&self, g: &mut Graph<T>) -> Bound {
        Bound {
            vars: self.entries.iter().map(|(_, t)| g.constant(t.clone())).collect(),
        }
    }
}

/// Parameter handles on one graph.
#[derive(Debug, Clone)]
pub struct Bound {
    vars: Vec<Var>,
}

impl Bound {
    pub fn var(&self, id: ParamId) -> Var {
        self.vars[id.0]
    }

    /// One gradient per parameter, zero where the loss does not depend on it.
    pub fn gradients<T: Scalar>(&self, params: &ParamSet<T>, grads: &mut Gradients<T>) -> Vec<Tensor<T>> {
        self.vars
            .iter()
            .zip(params.iter())
            .map(|(&v, (_, _, t))| grads.take(v).unwrap_or_else(|| Tensor::zeros(t.rows(), t.cols())))
            .collect()
    }
}

/// `y = x W + b` with `W: in x out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
}

impl Linear {
    /// Weights from `N(0, 1/in)`, zero bias.
    pub fn new<T: Scalar>(
        params: &mut ParamSet<T>,
        name: &str,
        input: usize,
        output: usize,
        rng: &mut impl Rng,
    ) -> Result<Self, DiffError> {
        let std = 1.0 / (input.max(1) as f64).sqrt();
        let weight = params.add_normal(format!("{name}.weight"), input, output, std, rng)?;
        let bias = params.add(format!("{name}.bias"), Tensor::zeros(1, output))?;
        Ok(Linear { weight, bias })
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, b: &Bound, x: Var) -> Result<Var, DiffError> {
        let y = g.matmul(x, b.var(self.weight))?;
        g.add_row(y, b.var(self.bias))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerNorm {
    pub gamma: ParamId,
    pub beta: ParamId,
}

impl LayerNorm {
    pub fn new<T: Scalar>(params: &mut ParamSet<T>, name: &str, dim: usize) -> Result<Self, DiffError> {
        Ok(LayerNorm {
            gamma: params.add(format!("{name}.gamma"), Tensor::filled(1, dim, T::one()))?,
            beta: params.add(format!("{name}.beta"), Tensor::zeros(1, dim))?,
        })
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, b: &Bound, x: Var) -> Result<Var, DiffError> {
        g.layer_norm(x, b.var(self.gamma), b.var(self.beta))
    }
}

/// `softmax(q k^T / sqrt(d)) v`.
pub fn scaled_dot_product_attention<T: Scalar>(
    g: &mut Graph<T>,
    q: Var,
    k: Var,
    v: Var,
    causal: bool,
) -> Result<Var, DiffError> {
    let d = g.value(q).cols();
    let scores = g.matmul_scaled(q, false, k, true, T::of(1.0 / (d.max(1) as f64).sqrt()))?;
    let p = g.softmax(scores, causal);
    g.matmul(p, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiHeadAttention {
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub output: Linear,
    pub heads: usize,
    pub dim: usize,
}

impl MultiHeadAttention {
    pub fn new<T: Scalar>(
        params: &mut ParamSet<T>,
        name: &str,
        dim: usize,
        heads: usize,
        rng: &mut impl Rng,
    ) -> Result<Self, DiffError> {
        if heads == 0 || !dim.is_multiple_of(heads) {
            return Err(DiffError::HeadDivisibility { dim, heads });
        }
        Ok(MultiHeadAttention {
            query: Linear::new(params, &format!("{name}.query"), dim, dim, rng)?,
            key: Linear::new(params, &format!("{name}.key"), dim, dim, rng)?,
            value: Linear::new(params, &format!("{name}.value"), dim, dim, rng)?,
            output: Linear::new(params, &format!("{name}.output"), dim, dim, rng)?,
            heads,
            dim,
        })
    }

    /// Queries come from `q_src`, keys and values from `kv_src`.
    pub fn forward<T: Scalar>(
        &self,
        g: &mut Graph<T>,
        b: &Bound,
        q_src: Var,
        kv_src: Var,
        causal: bool,
    ) -> Result<Var, DiffError> {
        let q = self.query.forward(g, b, q_src)?;
        let k = self.key.forward(g, b, kv_src)?;
        let v = self.value.forward(g, b, kv_src)?;
        let dh = self.dim / self.heads;
        let mut outs = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let (qh, kh, vh) = if self.heads == 1 {
                (q, k, v)
            } else {
                (
                    g.slice_cols(q, h * dh, dh)?,
                    g.slice_cols(k, h * dh, dh)?,
                    g.slice_cols(v, h * dh, dh)?,
                )
            };
            outs.push(scaled_dot_product_attention(g, qh, kh, vh, causal)?);
        }
        let merged = if outs.len() == 1 { outs[0] } else { g.concat_cols(&outs)? };
        self.output.forward(g, b, merged)
    }
}

/// Pre-norm block: `x + attn(ln(x))`, then `x + ff(ln(x))` with a GELU MLP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformerBlock {
    pub ln_attn: LayerNorm,
    pub attn: MultiHeadAttention,
    pub ln_ff: LayerNorm,
    pub ff_in: Linear,
    pub ff_out: Linear,
    pub dropout: f64,
}

impl TransformerBlock {
    pub fn new<T: Scalar>(
        params: &mut ParamSet<T>,
        name: &str,
        dim: usize,
        heads: usize,
        ff_dim: usize,
        dropout: f64,
        rng: &mut impl Rng,
    ) -> Result<Self, DiffError> {
        Ok(TransformerBlock {
            ln_attn: LayerNorm::new(params, &format!("{name}.ln_attn"), dim)?,
            attn: MultiHeadAttention::new(params, &format!("{name}.attn"), dim, heads, rng)?,
            ln_ff: LayerNorm::new(params, &format!("{name}.ln_ff"), dim)?,
            ff_in: Linear::new(params, &format!("{name}.ff_in"), dim, ff_dim, rng)?,
            ff_out: Linear::new(params, &format!("{name}.ff_out"), ff_dim, dim, rng)?,
            dropout,
        })
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, b: &Bound, x: Var, causal: bool) -> Result<Var, DiffError> {
        let h = self.ln_attn.forward(g, b, x)?;
        let a = self.attn.forward(g, b, h, h, causal)?;
        let a = g.dropout(a, self.dropout);
        let x = g.add(x, a)?;
        let h = self.ln_ff.forward(g, b, x)?;
        let f = self.ff_in.forward(g, b, h)?;
        let f = g.gelu(f);
        let f = self.ff_out.forward(g, b, f)?;
        let f = g.dropout(f, self.dropout);
        g.add(x, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_attention(dim: usize) -> (ParamSet<f64>, MultiHeadAttention) {
        let mut p = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mha = MultiHeadAttention::new(&mut p, "a", dim, 1, &mut rng).unwrap();
        for lin in [mha.query, mha.key, mha.value, mha.output] {
            *p.get_mut(lin.weight) = Tensor::from_fn(dim, dim, |r, c| if r == c { 1.0 } else { 0.0 });
        }
        (p, mha)
    }

    #[test]
    fn zero_linear_gives_zero() {
        let mut p = ParamSet::<f64>::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lin = Linear::new(&mut p, "l", 3, 5, &mut rng).unwrap();
        p.tensors_mut().for_each(|t| t.data_mut().fill(0.0));
        let mut g = Graph::new();
        let b = p.bind(&mut g);
        let x = g.constant(Tensor::from_fn(4, 3, |r, c| (r + c) as f64 - 1.5));
        let y = lin.forward(&mut g, &b, x).unwrap();
        assert_eq!(g.value(y), &Tensor::zeros(4, 5));
    }

    #[test]
    fn single_key_attention_returns_the_value_row() {
        let (p, mha) = identity_attention(4);
        let mut g = Graph::new();
        let b = p.bind(&mut g);
        let q = g.constant(Tensor::from_fn(3, 4, |r, c| (r * 4 + c) as f64 * 0.1));
        let kv = g.constant(Tensor::new(1, 4, vec![0.5, -1.0, 2.0, 0.25]).unwrap());
        let y = mha.forward(&mut g, &b, q, kv, false).unwrap();
        for r in 0..3 {
            for (a, e) in g.value(y).row(r).iter().zip(&[0.5, -1.0, 2.0, 0.25]) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn attention_is_invariant_to_key_order() {
        let mut p = ParamSet::<f64>::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mha = MultiHeadAttention::new(&mut p, "a", 8, 2, &mut rng).unwrap();
        let q = Tensor::from_fn(3, 8, |r, c| ((r * 8 + c) as f64).sin());
        let kv = Tensor::from_fn(5, 8, |r, c| ((r * 3 + c * 5) as f64).cos());
        let perm = [3, 0, 4, 1, 2];
        let kv_perm = Tensor::from_fn(5, 8, |r, c| kv.get(perm[r], c));
        let run = |kv: Tensor<f64>| {
            let mut g = Graph::new();
            let b = p.bind_frozen(&mut g);
            let qv = g.constant(q.clone());
            let kvv = g.constant(kv);
            let y = mha.forward(&mut g, &b, qv, kvv, false).unwrap();
            g.value(y).clone()
        };
        assert!(run(kv).max_abs_diff(&run(kv_perm)) < 1e-12);
    }

    #[test]
    fn heads_must_divide_dim() {
        let mut p = ParamSet::<f32>::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            MultiHeadAttention::new(&mut p, "a", 64, 3, &mut rng).unwrap_err(),
            DiffError::HeadDivisibility { dim: 64, heads: 3 }
        );
    }

    #[test]
    fn parameter_names_are_unique() {
        let mut p = ParamSet::<f32>::new();
        p.add("w", Tensor::zeros(1, 1)).unwrap();
        assert!(matches!(p.add("w", Tensor::zeros(1, 1)), Err(DiffError::DuplicateParameter(_))));
    }

    #[test]
    fn init_is_reproducible_and_shared_across_precisions() {
        let build = |seed| {
            let mut p = ParamSet::<f64>::new();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            TransformerBlock::new(&mut p, "b", 8, 2, 16, 0.0, &mut rng).unwrap();
            p
        };
        assert_eq!(build(3), build(3));
        assert_ne!(build(3), build(4));
        let mut p32 = ParamSet::<f32>::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        TransformerBlock::new(&mut p32, "b", 8, 2, 16, 0.0, &mut rng).unwrap();
        assert_eq!(p32, build(3).cast::<f32>());
    }
}
