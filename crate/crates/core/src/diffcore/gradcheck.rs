use serde::Serialize;

use super::{Bound, DiffError, Graph, ParamSet, Var};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Denominator floor for the relative error.
pub const ABS_FLOOR: f64 = 1e-6;
const MAX_LISTED_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckFailure {
    pub parameter: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub tolerance: f64,
    /// Number of entries above `tolerance`.
    pub n_failures: usize,
    /// The first few failing entries.
    pub failures: Vec<GradCheckFailure>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.n_failures == 0
    }
}

/// Compares reverse-mode gradients of the scalar `f` with central finite
/// differences for every parameter entry. The relative error of an entry is
/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn grad_check<F>(params: &ParamSet<f64>, f: F, tolerance: f64) -> Result<GradCheckReport, DiffError>
where
    F: Fn(&mut Graph<f64>, &Bound) -> Result<Var, DiffError>,
{
    let mut g = Graph::new();
    let bound = params.bind(&mut g);
    let out = f(&mut g, &bound)?;
    let mut grads = g.backward(out)?;
    let analytic = bound.gradients(params, &mut grads);
    drop(g);

    let eval = |p: &ParamSet<f64>| -> Result<f64, DiffError> {
        let mut g = Graph::new();
        let b = p.bind_frozen(&mut g);
        let out = f(&mut g, &b)?;
        let v = g.value(out);
        if v.shape() != (1, 1) {
            return Err(DiffError::NonScalarLoss(v.rows(), v.cols()));
        }
        Ok(v.get(0, 0))
    };

    let mut work = params.clone();
    let mut report = GradCheckReport {
        checked: 0,
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        tolerance,
        n_failures: 0,
        failures: Vec::new(),
    };
    let ids: Vec<_> = params.iter().map(|(id, _, _)| id).collect();
    for (id, grad) in ids.into_iter().zip(&analytic) {
        for i in 0..grad.len() {
            let orig = work.get(id).data()[i];
            work.get_mut(id).data_mut()[i] = orig + FD_STEP;
            let plus = eval(&work)?;
            work.get_mut(id).data_mut()[i] = orig - FD_STEP;
            let minus = eval(&work)?;
            work.get_mut(id).data_mut()[i] = orig;

            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let a = grad.data()[i];
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(ABS_FLOOR);
            report.checked += 1;
            report.max_abs_error = report.max_abs_error.max(abs);
            report.max_rel_error = report.max_rel_error.max(rel);
            // A NaN error counts as a failure.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            let failed = !(rel < tolerance);
            if failed {
                report.n_failures += 1;
                if report.failures.len() < MAX_LISTED_FAILURES {
                    report.failures.push(GradCheckFailure {
                        parameter: params.name(id).to_string(),
                        index: i,
                        analytic: a,
                        numeric,
                        rel_error: rel,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::{Tensor, TransformerBlock};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sum_of_squares() {
        let mut p = ParamSet::new();
        let x = p.add("x", Tensor::new(1, 2, vec![1.0, 2.0]).unwrap()).unwrap();
        let report = grad_check(
            &p,
            |g, b| {
                let sq = g.mul(b.var(x), b.var(x))?;
                Ok(g.sum_all(sq))
            },
            1e-3,
        )
        .unwrap();
        assert!(report.passed());
        assert!(report.max_abs_error < 1e-8);
        assert_eq!(report.checked, 2);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let mut p = ParamSet::new();
        let x = p.add("x", Tensor::new(1, 3, vec![1.0, -2.0, 0.5]).unwrap()).unwrap();
        let mut g = Graph::new();
        let b = p.bind(&mut g);
        let zeroed = g.scale(b.var(x), 0.0);
        let s = g.sum_all(zeroed);
        let c = g.constant(Tensor::filled(1, 1, 4.0));
        let out = g.add(s, c).unwrap();
        let mut grads = g.backward(out).unwrap();
        let gs = b.gradients(&p, &mut grads);
        assert!(gs[0].data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn transformer_block_gradients() {
        let mut p = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let block = TransformerBlock::new(&mut p, "blk", 8, 2, 16, 0.0, &mut rng).unwrap();
        let x = Tensor::from_fn(5, 8, |r, c| ((r * 8 + c) as f64 * 0.7).sin());
        let target = Tensor::from_fn(5, 8, |r, c| ((r + 2 * c) as f64 * 0.3).cos());
        for causal in [false, true] {
            let report = grad_check(
                &p,
                |g, b| {
                    let xv = g.constant(x.clone());
                    let y = block.forward(g, b, xv, causal)?;
                    let t = g.constant(target.clone());
                    g.mse(y, t)
                },
                1e-3,
            )
            .unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn scaled_transposed_matmul_gradients() {
        let mut p = ParamSet::new();
        let a = p.add("a", Tensor::from_fn(3, 4, |r, c| ((r * 4 + c) as f64 * 0.9).sin())).unwrap();
        let b = p.add("b", Tensor::from_fn(5, 4, |r, c| ((r + 3 * c) as f64 * 0.4).cos())).unwrap();
        for (ta, tb) in [(false, true), (true, false)] {
            let report = grad_check(
                &p,
                |g, bd| {
                    let (va, vb) = (bd.var(a), bd.var(b));
                    let y = if ta {
                        let at = g.constant(Tensor::from_fn(3, 2, |r, c| (r as f64 - c as f64) * 0.2));
                        let prod = g.mul(va, va)?;
                        let s = g.matmul_scaled(at, true, prod, false, -0.7)?;
                        g.matmul_scaled(s, false, vb, true, 0.5)?
                    } else {
                        g.matmul_scaled(va, false, vb, tb, 0.5)?
                    };
                    let sq = g.mul(y, y)?;
                    Ok(g.sum_all(sq))
                },
                1e-6,
            )
            .unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }
}
