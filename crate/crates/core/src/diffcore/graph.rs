use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{gemm_into, DiffError, Scalar, Tensor, LAYER_NORM_EPS};

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub(crate) usize);

#[derive(Debug)]
enum Op<T> {
    Leaf,
    MatMul { a: Var, b: Var, ta: bool, tb: bool, alpha: T },
    Add(Var, Var),
    AddRow { x: Var, bias: Var },
    Scale(Var, T),
    Mul(Var, Var),
    LayerNorm { x: Var, gamma: Var, beta: Var, xhat: Tensor<T>, inv_std: Vec<T> },
    Softmax(Var),
    Gelu(Var),
    SliceRows { x: Var, start: usize },
    SliceCols { x: Var, start: usize },
    ConcatRows(Vec<Var>),
    ConcatCols(Vec<Var>),
    Mse { pred: Var, target: Var },
    SumAll(Var),
    Dropout { x: Var, mask: Vec<T> },
}

#[derive(Debug)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    requires_grad: bool,
}

/// A tape of operations. Build one per forward pass.
#[derive(Debug)]
pub struct Graph<T> {
    nodes: Vec<Node<T>>,
    dropout_rng: Option<ChaCha8Rng>,
}

const GELU_C: f64 = 0.044715;

fn mismatch<T: Scalar>(op: &'static str, a: &Tensor<T>, b: &Tensor<T>) -> DiffError {
    DiffError::ShapeMismatch {
        op,
        left: a.shape(),
        right: b.shape(),
    }
}

impl<T: Scalar> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Graph<T> {
    /// Inference mode: dropout is the identity.
    pub fn new() -> Self {
        Graph {
            nodes: Vec::new(),
            dropout_rng: None,
        }
    }

    /// Training mode. Dropout masks come from a generator keyed by
    /// `(seed, step)`, so a step can be replayed exactly.
    pub fn training(seed: u64, step: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(step);
        Graph {
            nodes: Vec::new(),
            dropout_rng: Some(rng),
        }
    }

    pub fn is_training(&self) -> bool {
        self.dropout_rng.is_some()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, inputs: &[Var]) -> Var {
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// A value that receives no gradient.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    /// A trainable leaf.
    pub fn leaf(&mut self, value: Tensor<T>) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    /// `op(a) op(b)`, where `op` transposes when the flag is set.
    pub fn matmul_t(&mut self, a: Var, ta: bool, b: Var, tb: bool) -> Result<Var, DiffError> {
        self.matmul_scaled(a, ta, b, tb, T::one())
    }

    /// `alpha * op(a) op(b)` in one pass.
    pub fn matmul_scaled(&mut self, a: Var, ta: bool, b: Var, tb: bool, alpha: T) -> Result<Var, DiffError> {
        let (va, vb) = (self.value(a), self.value(b));
        let (m, k) = if ta { (va.cols(), va.rows()) } else { va.shape() };
        let (k2, n) = if tb { (vb.cols(), vb.rows()) } else { vb.shape() };
        if k != k2 {
            return Err(mismatch("matmul", va, vb));
        }
        let mut out = Tensor::zeros(m, n);
        gemm_into(alpha, va, ta, vb, tb, T::zero(), &mut out);
        Ok(self.push(out, Op::MatMul { a, b, ta, tb, alpha }, &[a, b]))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        self.matmul_t(a, false, b, false)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(mismatch("add", va, vb));
        }
        let mut out = va.clone();
        out.axpy(T::one(), vb);
        Ok(self.push(out, Op::Add(a, b), &[a, b]))
    }

    /// Adds a `1 x cols` row to every row of `x`.
    pub fn add_row(&mut self, x: Var, bias: Var) -> Result<Var, DiffError> {
        let (vx, vb) = (self.value(x), self.value(bias));
        if vb.rows() != 1 || vb.cols() != vx.cols() {
            return Err(mismatch("add_row", vx, vb));
        }
        let mut out = vx.clone();
        for r in 0..out.rows() {
            for (o, &b) in out.row_mut(r).iter_mut().zip(vb.data()) {
                *o = *o + b;
            }
        }
        Ok(self.push(out, Op::AddRow { x, bias }, &[x, bias]))
    }

    pub fn scale(&mut self, x: Var, c: T) -> Var {
        let out = self.value(x).map(|v| v * c);
        self.push(out, Op::Scale(x, c), &[x])
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(mismatch("mul", va, vb));
        }
        let data = va.data().iter().zip(vb.data()).map(|(&x, &y)| x * y).collect();
        let out = Tensor::new(va.rows(), va.cols(), data)?;
        Ok(self.push(out, Op::Mul(a, b), &[a, b]))
    }

    /// Row-wise normalization to zero mean and unit variance (population
    /// variance plus [`LAYER_NORM_EPS`]), then `* gamma + beta`.
    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var) -> Result<Var, DiffError> {
        let (vx, vg, vb) = (self.value(x), self.value(gamma), self.value(beta));
        if vg.shape() != (1, vx.cols()) {
            return Err(mismatch("layer_norm", vx, vg));
        }
        if vb.shape() != (1, vx.cols()) {
            return Err(mismatch("layer_norm", vx, vb));
        }
        let n = T::of(vx.cols() as f64);
        let eps = T::of(LAYER_NORM_EPS);
        let mut xhat = vx.clone();
        let mut inv_std = Vec::with_capacity(vx.rows());
        for r in 0..vx.rows() {
            let row = xhat.row_mut(r);
            let mean = row.iter().copied().sum::<T>() / n;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
            let is = (var + eps).sqrt().recip();
            for v in row.iter_mut() {
                *v = (*v - mean) * is;
            }
            inv_std.push(is);
        }
        let mut out = xhat.clone();
        for r in 0..out.rows() {
            for ((o, &g), &b) in out.row_mut(r).iter_mut().zip(vg.data()).zip(vb.data()) {
                *o = *o * g + b;
            }
        }
        Ok(self.push(
            out,
            Op::LayerNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
            },
            &[x, gamma, beta],
        ))
    }

    /// Row-wise softmax. With `causal`, entry `(i, j)` for `j > i` is
    /// excluded and comes out as exactly zero.
    pub fn softmax(&mut self, x: Var, causal: bool) -> Var {
        let mut out = self.value(x).clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            let live = if causal { (r + 1).min(row.len()) } else { row.len() };
            let (keep, masked) = row.split_at_mut(live);
            masked.iter_mut().for_each(|v| *v = T::zero());
            let mut max = T::neg_infinity();
            for &v in keep.iter() {
                if v > max {
                    max = v;
                }
            }
            let mut total = T::zero();
            for v in keep.iter_mut() {
                *v = (*v - max).exp();
                total = total + *v;
            }
            let inv = total.recip();
            for v in keep.iter_mut() {
                *v = *v * inv;
            }
        }
        self.push(out, Op::Softmax(x), &[x])
    }

    /// GELU, tanh approximation.
    pub fn gelu(&mut self, x: Var) -> Var {
        let c = T::of((2.0 / std::f64::consts::PI).sqrt());
        let k = T::of(GELU_C);
        let half = T::of(0.5);
        let out = self
            .value(x)
            .map(|v| half * v * (T::one() + (c * (v + k * v * v * v)).tanh()));
        self.push(out, Op::Gelu(x), &[x])
    }

    pub fn slice_rows(&mut self, x: Var, start: usize, len: usize) -> Result<Var, DiffError> {
        let vx = self.value(x);
        if start + len > vx.rows() {
            return Err(DiffError::ShapeMismatch {
                op: "slice_rows",
                left: vx.shape(),
                right: (start + len, vx.cols()),
            });
        }
        let out = Tensor::new(len, vx.cols(), vx.data()[start * vx.cols()..(start + len) * vx.cols()].to_vec())?;
        Ok(self.push(out, Op::SliceRows { x, start }, &[x]))
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Result<Var, DiffError> {
        let vx = self.value(x);
        if start + len > vx.cols() {
            return Err(DiffError::ShapeMismatch {
                op: "slice_cols",
                left: vx.shape(),
                right: (vx.rows(), start + len),
            });
        }
        let mut data = Vec::with_capacity(vx.rows() * len);
        for r in 0..vx.rows() {
            data.extend_from_slice(&vx.row(r)[start..start + len]);
        }
        let out = Tensor::new(vx.rows(), len, data)?;
        Ok(self.push(out, Op::SliceCols { x, start }, &[x]))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, DiffError> {
        let first = self.value(parts[0]);
        let cols = first.cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let vp = self.value(p);
            if vp.cols() != cols {
                return Err(mismatch("concat_rows", self.value(parts[0]), vp));
            }
            data.extend_from_slice(vp.data());
            rows += vp.rows();
        }
        let out = Tensor::new(rows, cols, data)?;
        Ok(self.push(out, Op::ConcatRows(parts.to_vec()), parts))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, DiffError> {
        let rows = self.value(parts[0]).rows();
        let mut cols = 0;
        for &p in parts {
            let vp = self.value(p);
            if vp.rows() != rows {
                return Err(mismatch("concat_cols", self.value(parts[0]), vp));
            }
            cols += vp.cols();
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(r));
            }
        }
        let out = Tensor::new(rows, cols, data)?;
        Ok(self.push(out, Op::ConcatCols(parts.to_vec()), parts))
    }

    /// Mean of squared differences over all entries; a `1 x 1` result.
    pub fn mse(&mut self, pred: Var, target: Var) -> Result<Var, DiffError> {
        let (vp, vt) = (self.value(pred), self.value(target));
        if vp.shape() != vt.shape() {
            return Err(mismatch("mse", vp, vt));
        }
        let n = T::of(vp.len().max(1) as f64);
        let total: T = vp.data().iter().zip(vt.data()).map(|(&a, &b)| (a - b) * (a - b)).sum();
        let out = Tensor::new(1, 1, vec![total / n])?;
        Ok(self.push(out, Op::Mse { pred, target }, &[pred, target]))
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let total = self.value(x).data().iter().copied().sum();
        self.push(Tensor::filled(1, 1, total), Op::SumAll(x), &[x])
    }

    /// Inverted dropout; the identity in inference mode or at rate 0.
    pub fn dropout(&mut self, x: Var, rate: f64) -> Var {
        let Some(rng) = self.dropout_rng.as_mut().filter(|_| rate > 0.0) else {
            return x;
        };
        let keep = T::of(1.0 / (1.0 - rate));
        let n = self.nodes[x.0].value.len();
        let mask: Vec<T> = (0..n)
            .map(|_| if rng.random::<f64>() < rate { T::zero() } else { keep })
            .collect();
        let vx = self.value(x);
        let data = vx.data().iter().zip(&mask).map(|(&v, &m)| v * m).collect();
        let out = Tensor::new(vx.rows(), vx.cols(), data).expect("same shape");
        self.push(out, Op::Dropout { x, mask }, &[x])
    }

    /// Gradients of a `1 x 1` node with respect to every node it depends on.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>, DiffError> {
        let (r, c) = self.value(loss).shape();
        if (r, c) != (1, 1) {
            return Err(DiffError::NonScalarLoss(r, c));
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::filled(1, 1, T::one()));

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn propagate(&self, node: &Node<T>, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) {
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut Tensor<T>)| {
            if !self.nodes[v.0].requires_grad {
                return;
            }
            let shape = self.nodes[v.0].value.shape();
            let slot = grads[v.0].get_or_insert_with(|| Tensor::zeros(shape.0, shape.1));
            f(slot);
        };
        match &node.op {
            Op::Leaf => {}
            &Op::MatMul { a, b, ta, tb, alpha } => {
                let (va, vb) = (self.value(a), self.value(b));
                acc(a, &mut |ga| {
                    if ta {
                        gemm_into(alpha, vb, tb, g, true, T::one(), ga);
                    } else {
                        gemm_into(alpha, g, false, vb, !tb, T::one(), ga);
                    }
                });
                acc(b, &mut |gb| {
                    if tb {
                        gemm_into(alpha, g, true, va, ta, T::one(), gb);
                    } else {
                        gemm_into(alpha, va, !ta, g, false, T::one(), gb);
                    }
                });
            }
            &Op::Add(a, b) => {
                acc(a, &mut |ga| ga.axpy(T::one(), g));
                acc(b, &mut |gb| gb.axpy(T::one(), g));
            }
            &Op::AddRow { x, bias } => {
                acc(x, &mut |gx| gx.axpy(T::one(), g));
                acc(bias, &mut |gb| {
                    for r in 0..g.rows() {
                        for (o, &v) in gb.data_mut().iter_mut().zip(g.row(r)) {
                            *o = *o + v;
                        }
                    }
                });
            }
            &Op::Scale(x, c) => acc(x, &mut |gx| gx.axpy(c, g)),
            &Op::Mul(a, b) => {
                let (va, vb) = (self.value(a), self.value(b));
                acc(a, &mut |ga| {
                    for ((o, &d), &y) in ga.data_mut().iter_mut().zip(g.data()).zip(vb.data()) {
                        *o = *o + d * y;
                    }
                });
                acc(b, &mut |gb| {
                    for ((o, &d), &y) in gb.data_mut().iter_mut().zip(g.data()).zip(va.data()) {
                        *o = *o + d * y;
                    }
                });
            }
            Op::LayerNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
            } => {
                let vg = self.value(*gamma);
                acc(*beta, &mut |gb| {
                    for r in 0..g.rows() {
                        for (o, &v) in gb.data_mut().iter_mut().zip(g.row(r)) {
                            *o = *o + v;
                        }
                    }
                });
                acc(*gamma, &mut |gg| {
                    for r in 0..g.rows() {
                        for ((o, &v), &h) in gg.data_mut().iter_mut().zip(g.row(r)).zip(xhat.row(r)) {
                            *o = *o + v * h;
                        }
                    }
                });
                if self.needs(*x) {
                    let n = T::of(xhat.cols() as f64);
                    acc(*x, &mut |gx| {
                        for (r, &istd) in inv_std.iter().enumerate() {
                            let dh: Vec<T> = g.row(r).iter().zip(vg.data()).map(|(&d, &w)| d * w).collect();
                            let s1: T = dh.iter().copied().sum();
                            let s2: T = dh.iter().zip(xhat.row(r)).map(|(&d, &h)| d * h).sum();
                            let k = istd / n;
                            for ((o, &d), &h) in gx.row_mut(r).iter_mut().zip(&dh).zip(xhat.row(r)) {
                                *o = *o + k * (n * d - s1 - h * s2);
                            }
                        }
                    });
                }
            }
            &Op::Softmax(x) => {
                let y = &node.value;
                acc(x, &mut |gx| {
                    for r in 0..y.rows() {
                        let dot: T = g.row(r).iter().zip(y.row(r)).map(|(&a, &b)| a * b).sum();
                        for ((o, &d), &p) in gx.row_mut(r).iter_mut().zip(g.row(r)).zip(y.row(r)) {
                            *o = *o + p * (d - dot);
                        }
                    }
                });
            }
            &Op::Gelu(x) => {
                let vx = self.value(x);
                let c = T::of((2.0 / std::f64::consts::PI).sqrt());
                let k = T::of(GELU_C);
                let half = T::of(0.5);
                let three = T::of(3.0);
                acc(x, &mut |gx| {
                    for ((o, &d), &v) in gx.data_mut().iter_mut().zip(g.data()).zip(vx.data()) {
                        let t = (c * (v + k * v * v * v)).tanh();
                        let dt = c * (T::one() + three * k * v * v);
                        let deriv = half * (T::one() + t) + half * v * (T::one() - t * t) * dt;
                        *o = *o + d * deriv;
                    }
                });
            }
            &Op::SliceRows { x, start } => acc(x, &mut |gx| {
                let cols = gx.cols();
                for (o, &d) in gx.data_mut()[start * cols..].iter_mut().zip(g.data()) {
                    *o = *o + d;
                }
            }),
            &Op::SliceCols { x, start } => acc(x, &mut |gx| {
                for r in 0..g.rows() {
                    for (o, &d) in gx.row_mut(r)[start..].iter_mut().zip(g.row(r)) {
                        *o = *o + d;
                    }
                }
            }),
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    acc(p, &mut |gp| {
                        for (o, &d) in gp.data_mut().iter_mut().zip(&g.data()[offset..offset + len]) {
                            *o = *o + d;
                        }
                    });
                    offset += len;
                }
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).cols();
                    acc(p, &mut |gp| {
                        for r in 0..g.rows() {
                            for (o, &d) in gp.row_mut(r).iter_mut().zip(&g.row(r)[offset..offset + w]) {
                                *o = *o + d;
                            }
                        }
                    });
                    offset += w;
                }
            }
            &Op::Mse { pred, target } => {
                let (vp, vt) = (self.value(pred), self.value(target));
                let k = T::of(2.0) * g.get(0, 0) / T::of(vp.len().max(1) as f64);
                acc(pred, &mut |gp| {
                    for ((o, &a), &b) in gp.data_mut().iter_mut().zip(vp.data()).zip(vt.data()) {
                        *o = *o + k * (a - b);
                    }
                });
                acc(target, &mut |gt| {
                    for ((o, &a), &b) in gt.data_mut().iter_mut().zip(vp.data()).zip(vt.data()) {
                        *o = *o - k * (a - b);
                    }
                });
            }
            &Op::SumAll(x) => {
                let d = g.get(0, 0);
                acc(x, &mut |gx| gx.data_mut().iter_mut().for_each(|o| *o = *o + d));
            }
            Op::Dropout { x, mask } => acc(*x, &mut |gx| {
                for ((o, &d), &m) in gx.data_mut().iter_mut().zip(g.data()).zip(mask) {
                    *o = *o + d * m;
                }
            }),
        }
    }
}

#[derive(Debug)]
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
}

impl<T: Scalar> Gradients<T> {
    /// `None` when `v` does not influence the loss through trainable leaves.
    pub fn get(&self, v: Var) -> Option<&Tensor<T>> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor<T>> {
        self.grads.get_mut(v.0).and_then(|g| g.take())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: usize, cols: usize, data: &[f64]) -> Tensor<f64> {
        Tensor::new(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(t(1, 3, &[0.0, 0.0, 0.0]));
        let y = g.softmax(x, false);
        for &v in g.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one_and_causal_zeroes() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(Tensor::from_fn(3, 4, |r, c| (r * 7 + c * 3) as f64 * 0.37 - 2.0));
        let y = g.softmax(x, true);
        let v = g.value(y);
        for r in 0..3 {
            assert!((v.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for c in r + 1..4 {
                assert_eq!(v.get(r, c), 0.0);
            }
        }
    }

    #[test]
    fn matmul_shape_contract() {
        let mut g = Graph::<f32>::new();
        let a = g.constant(Tensor::zeros(2, 3));
        let b = g.constant(Tensor::zeros(3, 4));
        let c = g.matmul(a, b).unwrap();
        assert_eq!(g.value(c).shape(), (2, 4));
        let err = g.matmul(b, b).unwrap_err();
        assert_eq!(
            err,
            DiffError::ShapeMismatch {
                op: "matmul",
                left: (3, 4),
                right: (3, 4)
            }
        );
    }

    #[test]
    fn layer_norm_rows_are_standardized() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(Tensor::from_fn(4, 16, |r, c| ((r + 1) * c) as f64 + (c as f64).sin()));
        let gamma = g.constant(Tensor::filled(1, 16, 1.0));
        let beta = g.constant(Tensor::zeros(1, 16));
        let y = g.layer_norm(x, gamma, beta).unwrap();
        for r in 0..4 {
            let row = g.value(y).row(r);
            let mean = row.iter().sum::<f64>() / 16.0;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 16.0;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn sum_of_squares_gradient() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(t(1, 2, &[1.0, 2.0]));
        let sq = g.mul(x, x).unwrap();
        let s = g.sum_all(sq);
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[2.0, 4.0]);
    }

    #[test]
    fn constants_receive_no_gradient() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(t(1, 2, &[1.0, 2.0]));
        let w = g.leaf(t(2, 1, &[3.0, 4.0]));
        let y = g.matmul(x, w).unwrap();
        let grads = g.backward(y).unwrap();
        assert!(grads.get(x).is_none());
        assert_eq!(grads.get(w).unwrap().data(), &[1.0, 2.0]);
    }

    #[test]
    fn dropout_is_identity_in_inference_and_replayable_in_training() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(Tensor::filled(8, 8, 1.0));
        assert_eq!(g.dropout(x, 0.5), x);

        let run = |step| {
            let mut g = Graph::<f64>::training(11, step);
            let x = g.constant(Tensor::filled(8, 8, 1.0));
            let y = g.dropout(x, 0.5);
            g.value(y).clone()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
        assert!(run(3).data().iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(Tensor::zeros(2, 2));
        assert_eq!(g.backward(x).unwrap_err(), DiffError::NonScalarLoss(2, 2));
    }
}
