//! Principal component analysis over observation matrices and the
//! per-observation Hotelling T² signature derived from it.
//!
//! The decomposition keeps every component (no dimensionality reduction):
//! coefficients are the covariance eigenvectors, latents the eigenvalues
//! in descending order, and scores the mean-centered data expressed in
//! component coordinates. T² for observation i is the squared distance
//! from the center of the transformed space, `Σ_j score_ij² / λ_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::eigen::eigendecompose_symmetric;
use crate::stats::matrix::{Matrix, SampleMatrix};

/// Fraction of the largest eigenvalue below which a component is treated
/// as degenerate and excluded from the T² sum instead of pseudo-inverted.
pub const DEGENERATE_LATENT_RATIO: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Per-feature sample mean, length p.
    pub mean: Vec<f64>,
    /// p-by-p orthonormal eigenvector columns of the covariance.
    pub coefficients: Matrix,
    /// Eigenvalues in descending order, length p.
    pub latents: Vec<f64>,
    /// n-by-p mean-centered data in component coordinates.
    pub scores: Matrix,
}

/// Per-observation T² values, the memory signature exchanged between
/// replicas.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TSquaredVector {
    pub values: Vec<f64>,
}

impl TSquaredVector {
    pub fn new(values: Vec<f64>) -> Self {
        TSquaredVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-column means of the sample matrix.
pub fn column_means(samples: &SampleMatrix) -> Result<Vec<f64>> {
    if samples.rows() == 0 {
        return Err(Error::EmptySample);
    }
    let n = samples.rows() as f64;
    let mut means = vec![0.0; samples.cols()];
    for i in 0..samples.rows() {
        for (j, m) in means.iter_mut().enumerate() {
            *m += samples.get(i, j);
        }
    }
    for m in &mut means {
        *m /= n;
    }
    Ok(means)
}

/// Sample covariance matrix with n−1 degrees of freedom.
#[allow(clippy::needless_range_loop)]
pub fn covariance_matrix(samples: &SampleMatrix) -> Result<Matrix> {
    if samples.rows() < 2 {
        return Err(Error::InsufficientObservations {
            got: samples.rows(),
        });
    }
    let means = column_means(samples)?;
    let p = samples.cols();
    let denom = (samples.rows() - 1) as f64;
    let mut cov = Matrix::zeros(p, p);
    for i in 0..samples.rows() {
        for a in 0..p {
            let da = samples.get(i, a) - means[a];
            for b in a..p {
                let db = samples.get(i, b) - means[b];
                let v = cov.get(a, b) + da * db;
                cov.set(a, b, v);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = cov.get(a, b) / denom;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    Ok(cov)
}

/// Full-space PCA: mean, eigenvector coefficients, descending eigenvalues
/// and component-space scores. Requires at least two observations.
#[allow(clippy::needless_range_loop)]
pub fn pca(samples: &SampleMatrix) -> Result<PcaModel> {
    let cov = covariance_matrix(samples)?;
    let (mut latents, coefficients) = eigendecompose_symmetric(&cov)?;
    // Covariance is positive semi-definite; clamp rounding-noise negatives.
    let scale = latents.first().copied().unwrap_or(0.0).abs().max(1.0);
    for l in &mut latents {
        if *l < 0.0 && *l > -1e-12 * scale {
            *l = 0.0;
        }
    }
    let means = column_means(samples)?;
    let n = samples.rows();
    let p = samples.cols();
    let mut centered = Matrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            centered.set(i, j, samples.get(i, j) - means[j]);
        }
    }
    let scores = centered.matmul(&coefficients);
    Ok(PcaModel {
        mean: means,
        coefficients,
        latents,
        scores,
    })
}

/// Hotelling T² per observation: `Σ_j score_ij² / λ_j` over the
/// non-degenerate components.
pub fn hotelling_t2(model: &PcaModel) -> TSquaredVector {
    let n = model.scores.rows();
    let p = model.latents.len();
    let lambda_max = model.latents.first().copied().unwrap_or(0.0);
    let eps = DEGENERATE_LATENT_RATIO * lambda_max;
    let mut values = vec![0.0; n];
    for j in 0..p {
        let lambda = model.latents[j];
        if lambda <= eps {
            continue;
        }
        for (i, v) in values.iter_mut().enumerate() {
            let s = model.scores.get(i, j);
            *v += s * s / lambda;
        }
    }
    TSquaredVector::new(values)
}
