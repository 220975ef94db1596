//! Very sparse random projection.
//!
//! Each entry of the `k x d` matrix is `+sqrt(s/k)` or `-sqrt(s/k)` with
//! probability `1/(2s)` each and zero otherwise. The default density is
//! `s = sqrt(d)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SrpModel {
    input_dim: usize,
    density: f64,
    seed: u64,
    /// Non-zero entries per output row: `(column, positive)`.
    rows: Vec<Vec<(u32, bool)>>,
}

impl SrpModel {
    /// Draw a projection from `input_dim` to `output_dim` dimensions.
    pub fn generate(input_dim: usize, output_dim: usize, density: Option<f64>, seed: u64) -> Result<Self> {
        if output_dim == 0 || output_dim >= input_dim {
            return Err(Error::Config(format!(
                "target dimension {output_dim} must satisfy 1 <= k < d = {input_dim}"
            )));
        }
        let density = density.unwrap_or_else(|| (input_dim as f64).sqrt());
        if !density.is_finite() || density < 1.0 {
            return Err(Error::Config(format!("density {density} must be >= 1")));
        }
        let p_half = 1.0 / (2.0 * density);
        let p_nonzero = 1.0 / density;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..output_dim)
            .map(|_| {
                (0..input_dim as u32)
                    .filter_map(|c| {
                        let u: f64 = rng.random();
                        if u < p_half {
                            Some((c, true))
                        } else if u < p_nonzero {
                            Some((c, false))
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            input_dim,
            density,
            seed,
            rows,
        })
    }

    pub(crate) fn from_parts(input_dim: usize, density: f64, seed: u64, rows: Vec<Vec<(u32, bool)>>) -> Result<Self> {
        if rows.iter().flatten().any(|&(c, _)| c as usize >= input_dim) {
            return Err(Error::Format("projection column out of range".into()));
        }
        Ok(Self {
            input_dim,
            density,
            seed,
            rows,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> &[Vec<(u32, bool)>] {
        &self.rows
    }

    /// Magnitude of every non-zero entry.
    pub fn scale(&self) -> f64 {
        (self.density / self.output_dim() as f64).sqrt()
    }

    /// Dense `k x d` copy of the matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let scale = self.scale();
        let mut out = vec![0.0; self.output_dim() * self.input_dim];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, pos) in row {
                out[r * self.input_dim + c as usize] = if pos { scale } else { -scale };
            }
        }
        out
    }

    /// Projection without centering.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        let scale = self.scale();
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let s: f64 = row
                    .iter()
                    .map(|&(c, pos)| if pos { x[c as usize] } else { -x[c as usize] })
                    .sum();
                s * scale
            })
            .collect())
    }
}
