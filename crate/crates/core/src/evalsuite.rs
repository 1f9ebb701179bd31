//! Kinetic and geometric motion features, Fréchet distance and diversity.
//!
//! Kinetic features are the per-joint, per-axis mean squared velocity
//! (m²/s²) of world joint positions, so `F = 3J`. Geometric features are the
//! fraction of frames on which each pose predicate holds.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::motion::{fk_positions, MotionClip};

const DEFAULT_PREDICATES: &str = include_str!("../data/predicates.tsv");

/// Diagonal jitter added to both covariances before the square root.
pub const FID_JITTER: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("clip has {0} frames; kinetic features need at least 2")]
    TooShort(usize),
    #[error("feature sets of different kinds ({0:?} vs {1:?})")]
    KindMismatch(FeatureKind, FeatureKind),
    #[error("feature widths differ ({0} vs {1})")]
    WidthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("feature matrix contains non-finite values")]
    NonFinite,
    #[error("predicate table line {line}: {message}")]
    Predicates { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Kinetic,
    Geometric,
}

/// One row per clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub kind: FeatureKind,
    pub matrix: Array2<f64>,
}

impl FeatureSet {
    pub fn new(kind: FeatureKind, matrix: Array2<f64>) -> Result<Self, EvalError> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite);
        }
        Ok(FeatureSet { kind, matrix })
    }

    pub fn from_rows(kind: FeatureKind, rows: &[Vec<f64>]) -> Result<Self, EvalError> {
        let width = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(EvalError::WidthMismatch(width, r.len()));
        }
        let matrix = Array2::from_shape_fn((rows.len(), width), |(i, j)| rows[i][j]);
        Self::new(kind, matrix)
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }
}

pub fn kinetic_features(clip: &MotionClip) -> Result<Vec<f64>, EvalError> {
    let n = clip.n_frames();
    if n < 2 {
        return Err(EvalError::TooShort(n));
    }
    let p = fk_positions(clip);
    let j = clip.skeleton().len();
    let fps = clip.fps();
    let mut out = vec![0.0; 3 * j];
    for f in 1..n {
        for k in 0..j {
            for a in 0..3 {
                let v = (p[[f, k, a]] - p[[f - 1, k, a]]) * fps;
                out[3 * k + a] += v * v;
            }
        }
    }
    let steps = (n - 1) as f64;
    out.iter_mut().for_each(|v| *v /= steps);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateKind {
    Diff,
    Near,
    Far,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub kind: PredicateKind,
    pub joint_a: String,
    pub joint_b: String,
    /// Used by `Diff` only.
    pub axis: Option<usize>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateTable {
    pub version: String,
    pub predicates: Vec<Predicate>,
}

impl Default for PredicateTable {
    fn default() -> Self {
        Self::from_tsv(DEFAULT_PREDICATES).expect("bundled predicates are valid")
    }
}

impl PredicateTable {
    pub fn from_tsv(text: &str) -> Result<Self, EvalError> {
        let mut version = String::new();
        let mut predicates: Vec<Predicate> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let err = |m: &str| EvalError::Predicates {
                line: i + 1,
                message: m.to_string(),
            };
            if let Some(rest) = line.strip_prefix("# version\t") {
                version = rest.trim().to_string();
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 {
                return Err(err("expected 6 columns"));
            }
            let kind = match f[1] {
                "diff" => PredicateKind::Diff,
                "near" => PredicateKind::Near,
                "far" => PredicateKind::Far,
                _ => return Err(err("kind must be diff, near or far")),
            };
            let axis = match (kind, f[4]) {
                (PredicateKind::Diff, "x") => Some(0),
                (PredicateKind::Diff, "y") => Some(1),
                (PredicateKind::Diff, "z") => Some(2),
                (PredicateKind::Diff, _) => return Err(err("diff needs axis x, y or z")),
                (_, "-") => None,
                _ => return Err(err("near/far take axis -")),
            };
            let threshold: f64 = f[5].parse().map_err(|_| err("bad threshold"))?;
            if !threshold.is_finite() {
                return Err(err("threshold must be finite"));
            }
            if predicates.iter().any(|p| p.name == f[0]) {
                return Err(err("duplicate predicate name"));
            }
            predicates.push(Predicate {
                name: f[0].to_string(),
                kind,
                joint_a: f[2].to_string(),
                joint_b: f[3].to_string(),
                axis,
                threshold,
            });
        }
        if version.is_empty() {
            return Err(EvalError::Predicates {
                line: 0,
                message: "missing version line".into(),
            });
        }
        Ok(PredicateTable { version, predicates })
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }
}

/// Fraction of frames on which each predicate holds. Predicates that name a
/// joint missing from the clip's skeleton are always 0.
pub fn geometric_features(clip: &MotionClip, table: &PredicateTable) -> Vec<f64> {
    let n = clip.n_frames();
    if n == 0 {
        return vec![0.0; table.len()];
    }
    let p = fk_positions(clip);
    let s = clip.skeleton();
    table
        .predicates
        .iter()
        .map(|pred| {
            let (Some(a), Some(b)) = (s.index_of(&pred.joint_a), s.index_of(&pred.joint_b)) else {
                return 0.0;
            };
            let hits = (0..n)
                .filter(|&f| {
                    let d = |k: usize| p[[f, a, k]] - p[[f, b, k]];
                    match pred.kind {
                        PredicateKind::Diff => d(pred.axis.expect("diff has an axis")) > pred.threshold,
                        PredicateKind::Near => (d(0).powi(2) + d(1).powi(2) + d(2).powi(2)).sqrt() < pred.threshold,
                        PredicateKind::Far => (d(0).powi(2) + d(1).powi(2) + d(2).powi(2)).sqrt() > pred.threshold,
                    }
                })
                .count();
            hits as f64 / n as f64
        })
        .collect()
}

fn moments(m: &Array2<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let (rows, cols) = m.dim();
    let x = DMatrix::from_fn(rows, cols, |i, j| m[[i, j]]);
    let mean = DVector::from_fn(cols, |j, _| x.column(j).sum() / rows as f64);
    let mut centered = x;
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let mut cov = centered.transpose() * &centered / (rows as f64 - 1.0);
    for i in 0..cols {
        cov[(i, i)] += FID_JITTER;
    }
    (mean, cov)
}

/// Symmetric PSD square root with negative eigenvalues clamped to 0.
fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose()
}

fn check_pair(a: &FeatureSet, b: &FeatureSet) -> Result<(), EvalError> {
    if a.kind != b.kind {
        return Err(EvalError::KindMismatch(a.kind, b.kind));
    }
    if a.matrix.ncols() != b.matrix.ncols() {
        return Err(EvalError::WidthMismatch(a.matrix.ncols(), b.matrix.ncols()));
    }
    for s in [a, b] {
        if s.len() < 2 {
            return Err(EvalError::TooFewSamples { needed: 2, found: s.len() });
        }
    }
    Ok(())
}

/// `|mu_a - mu_b|^2 + tr(C_a + C_b - 2 (C_a^1/2 C_b C_a^1/2)^1/2)`, clamped at 0.
pub fn fid(a: &FeatureSet, b: &FeatureSet) -> Result<f64, EvalError> {
    check_pair(a, b)?;
    let (mu_a, cov_a) = moments(&a.matrix);
    let (mu_b, cov_b) = moments(&b.matrix);
    // The eigenvalues of C_a^1/2 C_b C_a^1/2 are the squared singular values
    // of C_b^1/2 C_a^1/2. Summing singular values avoids the square root of
    // tiny, noisy eigenvalues and keeps the result symmetric in a and b.
    let cross = sqrt_psd(&cov_b) * sqrt_psd(&cov_a);
    let tr_cross: f64 = cross.singular_values().iter().sum();
    let d = (mu_a - mu_b).norm_squared() + cov_a.trace() + cov_b.trace() - 2.0 * tr_cross;
    Ok(d.max(0.0))
}

/// Mean Euclidean distance over all unordered row pairs.
pub fn diversity(a: &FeatureSet) -> Result<f64, EvalError> {
    let m = a.len();
    if m < 2 {
        return Err(EvalError::TooFewSamples { needed: 2, found: m });
    }
    let dist = |x: ArrayView1<f64>, y: ArrayView1<f64>| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let mut total = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            total += dist(a.matrix.row(i), a.matrix.row(j));
        }
    }
    Ok(total / (m * (m - 1) / 2) as f64)
}

pub fn kinetic_set(clips: &[MotionClip]) -> Result<FeatureSet, EvalError> {
    let rows = clips.iter().map(kinetic_features).collect::<Result<Vec<_>, _>>()?;
    FeatureSet::from_rows(FeatureKind::Kinetic, &rows)
}

pub fn geometric_set(clips: &[MotionClip], table: &PredicateTable) -> Result<FeatureSet, EvalError> {
    let rows: Vec<_> = clips.iter().map(|c| geometric_features(c, table)).collect();
    FeatureSet::from_rows(FeatureKind::Geometric, &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfigEcho {
    pub predicates_version: String,
    pub n_predicates: usize,
    pub kinetic_dim: usize,
    pub fid_jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fid_k: f64,
    pub fid_g: f64,
    pub dist_k: f64,
    pub dist_g: f64,
    pub m_generated: usize,
    pub m_reference: usize,
    pub config: EvalConfigEcho,
}

/// FID against the reference set plus diversity of the generated set.
pub fn evaluate(generated: &[MotionClip], reference: &[MotionClip], table: &PredicateTable) -> Result<EvalReport, EvalError> {
    for set in [generated, reference] {
        if set.len() < 2 {
            return Err(EvalError::TooFewSamples {
                needed: 2,
                found: set.len(),
            });
        }
    }
    let (gk, rk) = (kinetic_set(generated)?, kinetic_set(reference)?);
    let (gg, rg) = (geometric_set(generated, table)?, geometric_set(reference, table)?);
    Ok(EvalReport {
        fid_k: fid(&gk, &rk)?,
        fid_g: fid(&gg, &rg)?,
        dist_k: diversity(&gk)?,
        dist_g: diversity(&gg)?,
        m_generated: generated.len(),
        m_reference: reference.len(),
        config: EvalConfigEcho {
            predicates_version: table.version.clone(),
            n_predicates: table.len(),
            kinetic_dim: gk.matrix.ncols(),
            fid_jitter: FID_JITTER,
        },
    })
}
