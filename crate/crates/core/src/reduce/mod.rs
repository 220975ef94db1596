//! Dimensionality reduction of token vectors before clustering.

pub mod pca;
pub mod srp;

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

pub use pca::{IncrementalPca, PcaModel};
pub use srp::SrpModel;

use crate::error::{Error, Result};
use crate::store::TokenRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pca,
    Srp,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pca" => Ok(Method::Pca),
            "srp" => Ok(Method::Srp),
            other => Err(Error::Config(format!("unknown reduction method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionConfig {
    pub target_dim: usize,
    pub method: Method,
    /// Rows per incremental PCA batch; `None` means five times the input dimension.
    pub batch_size: Option<usize>,
    /// SRP density `s`; `None` means `sqrt(d)`.
    pub density: Option<f64>,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            target_dim: 100,
            method: Method::Pca,
            batch_size: None,
            density: None,
        }
    }
}

impl ReductionConfig {
    pub fn validate(&self, input_dim: usize) -> Result<()> {
        if self.target_dim == 0 || self.target_dim >= input_dim {
            return Err(Error::Config(format!(
                "target dimension {} must satisfy 1 <= k < d = {input_dim}",
                self.target_dim
            )));
        }
        if self.method == Method::Pca && self.batch_size(input_dim) < self.target_dim {
            return Err(Error::Config(format!(
                "batch size {} smaller than target dimension {}",
                self.batch_size(input_dim),
                self.target_dim
            )));
        }
        Ok(())
    }

    pub fn batch_size(&self, input_dim: usize) -> usize {
        self.batch_size.unwrap_or(5 * input_dim)
    }
}

/// Fit PCA over a record stream in fixed-size batches, in stream order.
pub fn fit_incremental_pca<I>(records: I, input_dim: usize, cfg: &ReductionConfig) -> Result<PcaModel>
where
    I: IntoIterator<Item = Result<TokenRecord>>,
{
    cfg.validate(input_dim)?;
    let batch_rows = cfg.batch_size(input_dim);
    let mut acc = IncrementalPca::new(input_dim);
    let mut batch = Vec::with_capacity(batch_rows * input_dim);
    for rec in records {
        let rec = rec?;
        if rec.vector.len() != input_dim {
            return Err(Error::DimensionMismatch {
                expected: input_dim,
                actual: rec.vector.len(),
            });
        }
        batch.extend(rec.vector.iter().map(|&v| v as f64));
        if batch.len() == batch_rows * input_dim {
            acc.partial_fit(&batch)?;
            batch.clear();
        }
    }
    acc.partial_fit(&batch)?;
    if (acc.n_samples() as usize) < cfg.target_dim {
        return Err(Error::InsufficientData(format!(
            "{} tokens, need at least {}",
            acc.n_samples(),
            cfg.target_dim
        )));
    }
    acc.finish(cfg.target_dim)
}

pub fn fit_srp(input_dim: usize, cfg: &ReductionConfig, seed: u64) -> Result<SrpModel> {
    SrpModel::generate(input_dim, cfg.target_dim, cfg.density, seed)
}

/// A fitted reduction of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Reducer {
    Pca(PcaModel),
    Srp(SrpModel),
}

const MODEL_MAGIC: [u8; 4] = *b"TKR1";
const MODEL_VERSION: u32 = 1;

impl Reducer {
    pub fn method(&self) -> Method {
        match self {
            Reducer::Pca(_) => Method::Pca,
            Reducer::Srp(_) => Method::Srp,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Reducer::Pca(m) => m.input_dim(),
            Reducer::Srp(m) => m.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Reducer::Pca(m) => m.output_dim(),
            Reducer::Srp(m) => m.output_dim(),
        }
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Reducer::Pca(m) => m.transform(x),
            Reducer::Srp(m) => m.transform(x),
        }
    }

    pub fn transform_record(&self, rec: &TokenRecord) -> Result<TokenRecord> {
        let x: Vec<f64> = rec.vector.iter().map(|&v| v as f64).collect();
        let y = self.transform(&x)?;
        Ok(TokenRecord {
            vector: y.into_iter().map(|v| v as f32).collect(),
            ..*rec
        })
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&MODEL_MAGIC)?;
        out.write_u32::<LittleEndian>(MODEL_VERSION)?;
        match self {
            Reducer::Pca(m) => {
                out.write_u8(0)?;
                out.write_u32::<LittleEndian>(m.input_dim() as u32)?;
                out.write_u32::<LittleEndian>(m.output_dim() as u32)?;
                out.write_u64::<LittleEndian>(0)?;
                out.write_u64::<LittleEndian>(m.n_samples)?;
                for v in m.mean.iter().chain(&m.components).chain(&m.explained_variance) {
                    out.write_f64::<LittleEndian>(*v)?;
                }
            }
            Reducer::Srp(m) => {
                out.write_u8(1)?;
                out.write_u32::<LittleEndian>(m.input_dim() as u32)?;
                out.write_u32::<LittleEndian>(m.output_dim() as u32)?;
                out.write_u64::<LittleEndian>(m.seed())?;
                out.write_f64::<LittleEndian>(m.density())?;
                for row in m.rows() {
                    out.write_u32::<LittleEndian>(row.len() as u32)?;
                    for &(c, pos) in row {
                        out.write_u32::<LittleEndian>(c)?;
                        out.write_u8(pos as u8)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if magic != MODEL_MAGIC {
            return Err(Error::Format("not a reduction model file".into()));
        }
        let version = input.read_u32::<LittleEndian>()?;
        if version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {version}")));
        }
        let tag = input.read_u8()?;
        let d = input.read_u32::<LittleEndian>()? as usize;
        let k = input.read_u32::<LittleEndian>()? as usize;
        let seed = input.read_u64::<LittleEndian>()?;
        let read_f64s = |n: usize, input: &mut R| -> Result<Vec<f64>> {
            let mut v = vec![0.0; n];
            input.read_f64_into::<LittleEndian>(&mut v)?;
            Ok(v)
        };
        match tag {
            0 => {
                let n_samples = input.read_u64::<LittleEndian>()?;
                let mean = read_f64s(d, &mut input)?;
                let components = read_f64s(k * d, &mut input)?;
                let explained_variance = read_f64s(k, &mut input)?;
                Ok(Reducer::Pca(PcaModel {
                    mean,
                    components,
                    explained_variance,
                    n_samples,
                }))
            }
            1 => {
                let density = input.read_f64::<LittleEndian>()?;
                let mut rows = Vec::with_capacity(k);
                for _ in 0..k {
                    let nnz = input.read_u32::<LittleEndian>()? as usize;
                    let mut row = Vec::with_capacity(nnz);
                    for _ in 0..nnz {
                        let c = input.read_u32::<LittleEndian>()?;
                        let pos = input.read_u8()? != 0;
                        row.push((c, pos));
                    }
                    rows.push(row);
                }
                Ok(Reducer::Srp(SrpModel::from_parts(d, density, seed, rows)?))
            }
            other => Err(Error::Format(format!("unknown reduction method tag {other}"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
