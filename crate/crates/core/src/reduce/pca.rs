//! Streaming PCA.
//!
//! Batches are folded into a running mean and scatter matrix with the pairwise
//! merge update, so memory stays at O(d²) regardless of token count and the
//! result is independent of how the stream was chunked up to rounding.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x d`, row-major, rows orthonormal.
    pub components: Vec<f64>,
    /// Variance along each component, non-increasing.
    pub explained_variance: Vec<f64>,
    pub n_samples: u64,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.explained_variance.len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let d = self.input_dim();
        &self.components[i * d..(i + 1) * d]
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.input_dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.len(),
            });
        }
        Ok((0..self.output_dim())
            .map(|i| {
                self.component(i)
                    .iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(c, (v, m))| c * (v - m))
                    .sum()
            })
            .collect())
    }

    /// Map reduced coordinates back into the input space.
    pub fn inverse_transform(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                actual: y.len(),
            });
        }
        let mut out = self.mean.clone();
        for (i, &coef) in y.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.component(i)) {
                *o += coef * c;
            }
        }
        Ok(out)
    }

    /// Keep only the leading `k` components.
    pub fn truncated(&self, k: usize) -> PcaModel {
        let k = k.min(self.output_dim());
        PcaModel {
            mean: self.mean.clone(),
            components: self.components[..k * self.input_dim()].to_vec(),
            explained_variance: self.explained_variance[..k].to_vec(),
            n_samples: self.n_samples,
        }
    }
}

/// Running mean and scatter accumulator.
#[derive(Debug, Clone)]
pub struct IncrementalPca {
    dim: usize,
    n: u64,
    mean: Vec<f64>,
    /// Σ (x - mean)(x - mean)ᵀ, full `d x d`.
    scatter: Vec<f64>,
}

impl IncrementalPca {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            n: 0,
            mean: vec![0.0; dim],
            scatter: vec![0.0; dim * dim],
        }
    }

    pub fn n_samples(&self) -> u64 {
        self.n
    }

    /// Fold one batch of row-major samples into the running statistics.
    pub fn partial_fit(&mut self, batch: &[f64]) -> Result<()> {
        let d = self.dim;
        if !batch.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: batch.len() % d,
            });
        }
        let nb = batch.len() / d;
        if nb == 0 {
            return Ok(());
        }
        let mut bmean = vec![0.0; d];
        for row in batch.chunks_exact(d) {
            for (m, v) in bmean.iter_mut().zip(row) {
                *m += v;
            }
        }
        bmean.iter_mut().for_each(|m| *m /= nb as f64);

        let mut bscatter = vec![0.0; d * d];
        let mut centered = vec![0.0; d];
        for row in batch.chunks_exact(d) {
            for ((c, v), m) in centered.iter_mut().zip(row).zip(&bmean) {
                *c = v - m;
            }
            for i in 0..d {
                let ci = centered[i];
                if ci == 0.0 {
                    continue;
                }
                let out = &mut bscatter[i * d..(i + 1) * d];
                for (o, cj) in out.iter_mut().zip(&centered).skip(i) {
                    *o += ci * cj;
                }
            }
        }

        let n_old = self.n as f64;
        let n_new = n_old + nb as f64;
        let weight = n_old * nb as f64 / n_new;
        let delta: Vec<f64> = bmean.iter().zip(&self.mean).map(|(b, m)| b - m).collect();
        for i in 0..d {
            for j in i..d {
                self.scatter[i * d + j] += bscatter[i * d + j] + weight * delta[i] * delta[j];
            }
        }
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl * nb as f64 / n_new;
        }
        self.n += nb as u64;
        Ok(())
    }

    /// Sample covariance (divisor n - 1).
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let denom = (self.n.max(2) - 1) as f64;
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = self.scatter[i * d + j] / denom;
                cov[i * d + j] = v;
                cov[j * d + i] = v;
            }
        }
        cov
    }

    /// Eigendecompose the covariance and keep the top `k` directions.
    pub fn finish(&self, k: usize) -> Result<PcaModel> {
        let d = self.dim;
        if k == 0 || k > d {
            return Err(Error::Config(format!("target dimension {k} outside 1..={d}")));
        }
        if (self.n as usize) < k {
            return Err(Error::InsufficientData(format!(
                "{} samples cannot determine {k} components",
                self.n
            )));
        }
        let cov = DMatrix::from_row_slice(d, d, &self.covariance());
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut components = Vec::with_capacity(k * d);
        let mut explained_variance = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            let col = eig.eigenvectors.column(idx);
            // Sign convention: largest-magnitude entry positive.
            let pivot = col
                .iter()
                .copied()
                .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            components.extend(col.iter().map(|v| v * sign));
            explained_variance.push(eig.eigenvalues[idx].max(0.0));
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components,
            explained_variance,
            n_samples: self.n,
        })
    }
}
