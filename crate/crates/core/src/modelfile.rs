//! Binary file for hard-assignment models. Cluster models and LDA states
//! share it so topic building and evaluation need not know which produced it.
//!
//! Layout, little-endian: magic `TKM1`, version u32, kind u8, k u32, dim u32,
//! seed u64, iterations u32, converged u8, token count u64, trace length u32,
//! then `k * dim` f64 centroids, the u32 assignments and the f64 trace.
//! Nothing time-dependent is stored, so identical runs give identical bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::cluster::ClusterModel;
use crate::error::{Error, Result};
use crate::lda::LdaState;

pub const MODEL_MAGIC: &[u8; 4] = b"TKM1";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    SphericalKMeans,
    Lda,
}

impl ModelKind {
    fn tag(self) -> u8 {
        match self {
            ModelKind::SphericalKMeans => 0,
            ModelKind::Lda => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(ModelKind::SphericalKMeans),
            1 => Ok(ModelKind::Lda),
            t => Err(Error::Format(format!("unknown model kind {t}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SphericalKMeans => "spkmeans",
            ModelKind::Lda => "lda",
        }
    }
}

/// A model reduced to what downstream steps need.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentModel {
    pub kind: ModelKind,
    pub k: usize,
    /// Zero for LDA, which has no centroids.
    pub dim: usize,
    pub seed: u64,
    pub iterations: u32,
    pub converged: bool,
    pub centroids: Vec<f64>,
    pub assignments: Vec<u32>,
    /// Objective per iteration for clustering, empty for LDA.
    pub trace: Vec<f64>,
}

impl From<&ClusterModel> for AssignmentModel {
    fn from(m: &ClusterModel) -> Self {
        Self {
            kind: ModelKind::SphericalKMeans,
            k: m.k(),
            dim: m.dim,
            seed: m.seed,
            iterations: m.iterations_run,
            converged: m.converged,
            centroids: m.centroids.clone(),
            assignments: m.assignments.clone(),
            trace: m.objective_trace.clone(),
        }
    }
}

impl From<&LdaState> for AssignmentModel {
    fn from(s: &LdaState) -> Self {
        Self {
            kind: ModelKind::Lda,
            k: s.k,
            dim: 0,
            seed: s.seed,
            iterations: s.sweeps_run,
            converged: false,
            centroids: Vec::new(),
            assignments: s.assignments.clone(),
            trace: Vec::new(),
        }
    }
}

impl AssignmentModel {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MODEL_MAGIC)?;
        out.write_u32::<LE>(MODEL_VERSION)?;
        out.write_u8(self.kind.tag())?;
        out.write_u32::<LE>(self.k as u32)?;
        out.write_u32::<LE>(self.dim as u32)?;
        out.write_u64::<LE>(self.seed)?;
        out.write_u32::<LE>(self.iterations)?;
        out.write_u8(self.converged as u8)?;
        out.write_u64::<LE>(self.assignments.len() as u64)?;
        out.write_u32::<LE>(self.trace.len() as u32)?;
        for &c in &self.centroids {
            out.write_f64::<LE>(c)?;
        }
        for &a in &self.assignments {
            out.write_u32::<LE>(a)?;
        }
        for &t in &self.trace {
            out.write_f64::<LE>(t)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input
            .read_exact(&mut magic)
            .map_err(|_| Error::Format("model file too short".into()))?;
        if &magic != MODEL_MAGIC {
            return Err(Error::Format("not a model file".into()));
        }
        let body = |e: std::io::Error| Error::Format(format!("truncated model file: {e}"));
        let version = input.read_u32::<LE>().map_err(body)?;
        if version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {version}")));
        }
        let kind = ModelKind::from_tag(input.read_u8().map_err(body)?)?;
        let k = input.read_u32::<LE>().map_err(body)? as usize;
        let dim = input.read_u32::<LE>().map_err(body)? as usize;
        let seed = input.read_u64::<LE>().map_err(body)?;
        let iterations = input.read_u32::<LE>().map_err(body)?;
        let converged = input.read_u8().map_err(body)? != 0;
        let n = input.read_u64::<LE>().map_err(body)? as usize;
        let t = input.read_u32::<LE>().map_err(body)? as usize;
        if k == 0 {
            return Err(Error::Format("model with K = 0".into()));
        }
        let mut centroids = vec![0.0; k * dim];
        input.read_f64_into::<LE>(&mut centroids).map_err(body)?;
        let mut assignments = vec![0u32; n];
        input.read_u32_into::<LE>(&mut assignments).map_err(body)?;
        let mut trace = vec![0.0; t];
        input.read_f64_into::<LE>(&mut trace).map_err(body)?;
        if input.read(&mut [0u8; 1])? != 0 {
            return Err(Error::Format("trailing bytes after model".into()));
        }
        if let Some(&bad) = assignments.iter().find(|&&a| a as usize >= k) {
            return Err(Error::Integrity(format!("assignment {bad} outside K = {k}")));
        }
        Ok(Self {
            kind,
            k,
            dim,
            seed,
            iterations,
            converged,
            centroids,
            assignments,
            trace,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
