//! Dense matrices, a reverse-mode tape and the transformer pieces built on it.
//!
//! Every value is a row-major 2D [`Tensor`]. A [`Graph`] records operations
//! as they run; [`Graph::backward`] walks the record in reverse and returns
//! gradients for every node that depends on a trainable leaf. Models are
//! generic over [`Scalar`], so the same code trains in `f32` and is
//! gradient-checked in `f64`.

mod adam;
mod gradcheck;
mod graph;
mod nn;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::Array2;
use num_traits::Float;
use thiserror::Error;

pub use adam::{Adam, AdamConfig};
pub use gradcheck::{grad_check, GradCheckFailure, GradCheckReport};
pub use graph::{Gradients, Graph, Var};
pub use nn::{
    scaled_dot_product_attention, Bound, LayerNorm, Linear, MultiHeadAttention, ParamId, ParamSet, TransformerBlock,
};

/// Layer-norm variance floor.
pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("{op}: shape mismatch between {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("model dimension {dim} is not divisible by {heads} heads")]
    HeadDivisibility { dim: usize, heads: usize },
    #[error("duplicate parameter name {0:?}")]
    DuplicateParameter(String),
    #[error("{0} elements do not fill a {1}x{2} tensor")]
    ElementCount(usize, usize, usize),
    #[error("backward needs a 1x1 loss, got {0}x{1}")]
    NonScalarLoss(usize, usize),
}

pub trait Scalar: Float + Default + Debug + Display + Send + Sync + Sum + 'static {
    /// `C = alpha * A B + beta * C` over raw strided storage.
    ///
    /// # Safety
    /// The pointers and strides must describe valid `m x k`, `k x n` and
    /// `m x n` matrices, with `c` not aliasing `a` or `b`.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn of(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("f64 converts to every scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Scalar for f64 {
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, DiffError> {
        if data.len() != rows * cols {
            return Err(DiffError::ElementCount(data.len(), rows, cols));
        }
        Ok(Tensor { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Tensor { rows, cols, data }
    }

    pub fn from_array2<U: Copy + Into<f64>>(a: &Array2<U>) -> Self {
        Tensor::from_fn(a.nrows(), a.ncols(), |r, c| T::of(a[[r, c]].into()))
    }

    pub fn to_array2_f64(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.rows, self.cols), |(r, c)| self.get(r, c).as_f64())
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self += alpha * other`, shapes already checked.
    pub(crate) fn axpy(&mut self, alpha: T, other: &Tensor<T>) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + alpha * b;
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor<T>) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).abs().as_f64())
            .fold(0.0, f64::max)
    }
}

/// Shape of `op(t)` where `op` optionally transposes.
fn op_shape<T: Scalar>(t: &Tensor<T>, transpose: bool) -> (usize, usize) {
    if transpose {
        (t.cols, t.rows)
    } else {
        (t.rows, t.cols)
    }
}

fn strides<T: Scalar>(t: &Tensor<T>, transpose: bool) -> (isize, isize) {
    if transpose {
        (1, t.cols as isize)
    } else {
        (t.cols as isize, 1)
    }
}

/// `c = alpha * op(a) op(b) + beta * c`.
pub(crate) fn gemm_into<T: Scalar>(
    alpha: T,
    a: &Tensor<T>,
    ta: bool,
    b: &Tensor<T>,
    tb: bool,
    beta: T,
    c: &mut Tensor<T>,
) {
    let (m, k) = op_shape(a, ta);
    let (k2, n) = op_shape(b, tb);
    assert_eq!(k, k2, "gemm inner dimensions");
    assert_eq!(c.shape(), (m, n), "gemm output shape");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for v in &mut c.data {
            *v = beta * *v;
        }
        return;
    }
    let (rsa, csa) = strides(a, ta);
    let (rsb, csb) = strides(b, tb);
    // SAFETY: shapes and strides were derived from the tensors above and `c`
    // is a distinct, mutably borrowed buffer.
    unsafe {
        T::gemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_transposes() {
        let a = Tensor::<f64>::new(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let b = Tensor::<f64>::new(3, 2, vec![7., 8., 9., 10., 11., 12.]).unwrap();
        let mut c = Tensor::zeros(2, 2);
        gemm_into(1.0, &a, false, &b, false, 0.0, &mut c);
        assert_eq!(c.data(), &[58., 64., 139., 154.]);

        // (A^T)^T B = A B computed through a transposed copy
        let at = Tensor::from_fn(3, 2, |r, k| a.get(k, r));
        let mut c2 = Tensor::zeros(2, 2);
        gemm_into(1.0, &at, true, &b, false, 0.0, &mut c2);
        assert_eq!(c2, c);

        let bt = Tensor::from_fn(2, 3, |r, k| b.get(k, r));
        let mut c3 = Tensor::filled(2, 2, 1.0);
        gemm_into(1.0, &a, false, &bt, true, 1.0, &mut c3);
        assert_eq!(c3.data(), &[59., 65., 140., 155.]);
    }

    #[test]
    fn element_count_is_checked() {
        assert!(Tensor::<f32>::new(2, 2, vec![0.0; 3]).is_err());
    }
}
