//! Collapsed Gibbs sampling for LDA with fixed symmetric priors.
//!
//! Sweeps visit tokens in corpus order and are strictly sequential, so a
//! seed fully determines the final state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::store::Token;

/// Default symmetric word prior.
pub const DEFAULT_BETA: f64 = 0.01;

/// Default per-topic document prior for `k` topics.
pub fn default_alpha(k: usize) -> f64 {
    5.0 / k as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaState {
    pub k: usize,
    pub assignments: Vec<u32>,
    /// `n_dk[d * k + z]`
    pub n_dk: Vec<u32>,
    /// `n_kw[z * n_types + w]`
    pub n_kw: Vec<u32>,
    pub n_k: Vec<u64>,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub sweeps_run: u32,
    doc_of: Vec<u32>,
    type_of: Vec<u32>,
    n_types: usize,
    /// Distinct types present, used as `V` in the `V * beta` denominator.
    vocab_size: usize,
}

impl LdaState {
    /// Random initial assignments drawn uniformly from `rng`.
    fn init(tokens: &[Token], k: usize, alpha: f64, beta: f64, seed: u64, rng: &mut ChaCha8Rng) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if tokens.is_empty() {
            return Err(Error::InsufficientData("empty corpus".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("priors must be positive, got alpha {alpha}, beta {beta}")));
        }
        let n_docs = tokens.iter().map(|t| t.doc_id as usize + 1).max().unwrap_or(0);
        let n_types = tokens.iter().map(|t| t.type_id as usize + 1).max().unwrap_or(0);
        let mut seen = vec![false; n_types];
        for t in tokens {
            seen[t.type_id as usize] = true;
        }
        let vocab_size = seen.iter().filter(|&&s| s).count();
        let mut state = Self {
            k,
            assignments: Vec::with_capacity(tokens.len()),
            n_dk: vec![0; n_docs * k],
            n_kw: vec![0; k * n_types],
            n_k: vec![0; k],
            alpha,
            beta,
            seed,
            sweeps_run: 0,
            doc_of: tokens.iter().map(|t| t.doc_id).collect(),
            type_of: tokens.iter().map(|t| t.type_id).collect(),
            n_types,
            vocab_size,
        };
        for i in 0..tokens.len() {
            let z = rng.random_range(0..k) as u32;
            state.assignments.push(z);
            state.increment(i, z);
        }
        Ok(state)
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn increment(&mut self, i: usize, z: u32) {
        let (d, w, z) = (self.doc_of[i] as usize, self.type_of[i] as usize, z as usize);
        self.n_dk[d * self.k + z] += 1;
        self.n_kw[z * self.n_types + w] += 1;
        self.n_k[z] += 1;
    }

    fn decrement(&mut self, i: usize, z: u32) {
        let (d, w, z) = (self.doc_of[i] as usize, self.type_of[i] as usize, z as usize);
        self.n_dk[d * self.k + z] -= 1;
        self.n_kw[z * self.n_types + w] -= 1;
        self.n_k[z] -= 1;
    }

    /// Take token `i` out of the counts. Pair with [`LdaState::restore`].
    pub fn remove_token(&mut self, i: usize) {
        self.decrement(i, self.assignments[i]);
    }

    pub fn restore(&mut self, i: usize) {
        self.increment(i, self.assignments[i]);
    }

    fn weights_into(&self, i: usize, out: &mut [f64]) {
        let d = self.doc_of[i] as usize;
        let w = self.type_of[i] as usize;
        let vbeta = self.vocab_size as f64 * self.beta;
        for (z, o) in out.iter_mut().enumerate() {
            let ndk = self.n_dk[d * self.k + z] as f64;
            let nkw = self.n_kw[z * self.n_types + w] as f64;
            *o = (ndk + self.alpha) * (nkw + self.beta) / (self.n_k[z] as f64 + vbeta);
        }
    }

    /// Normalized sampling distribution for token `i`, computed with its own
    /// count removed. The state is left unchanged.
    pub fn conditional(&mut self, i: usize) -> Vec<f64> {
        self.remove_token(i);
        let mut p = vec![0.0; self.k];
        self.weights_into(i, &mut p);
        self.restore(i);
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        p
    }

    /// One full sweep over all tokens in order.
    pub fn sweep<R: Rng>(&mut self, rng: &mut R) {
        let mut weights = vec![0.0; self.k];
        for i in 0..self.assignments.len() {
            self.remove_token(i);
            self.weights_into(i, &mut weights);
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut z_new = self.k - 1;
            for (z, &w) in weights.iter().enumerate() {
                if u < w {
                    z_new = z;
                    break;
                }
                u -= w;
            }
            self.assignments[i] = z_new as u32;
            self.restore(i);
        }
        self.sweeps_run += 1;
    }

    /// Recount all tallies from the assignments and compare.
    pub fn check_counts(&self) -> Result<()> {
        let mut n_dk = vec![0u32; self.n_dk.len()];
        let mut n_kw = vec![0u32; self.n_kw.len()];
        let mut n_k = vec![0u64; self.k];
        for (i, &z) in self.assignments.iter().enumerate() {
            let (d, w, z) = (self.doc_of[i] as usize, self.type_of[i] as usize, z as usize);
            n_dk[d * self.k + z] += 1;
            n_kw[z * self.n_types + w] += 1;
            n_k[z] += 1;
        }
        if n_dk != self.n_dk || n_kw != self.n_kw || n_k != self.n_k {
            return Err(Error::Integrity("count tables disagree with assignments".into()));
        }
        Ok(())
    }

    /// Smoothed `Pr(w|z)` row for one topic over type ids `0..n_types`.
    pub fn topic_word(&self, z: usize) -> Vec<f64> {
        let vbeta = self.vocab_size as f64 * self.beta;
        let denom = self.n_k[z] as f64 + vbeta;
        (0..self.n_types)
            .map(|w| (self.n_kw[z * self.n_types + w] as f64 + self.beta) / denom)
            .collect()
    }
}

/// Random initialization followed by `iterations` sweeps.
pub fn gibbs_fit(tokens: &[Token], k: usize, alpha: f64, beta: f64, iterations: u32, seed: u64) -> Result<LdaState> {
    gibbs_fit_observed(tokens, k, alpha, beta, iterations, seed, |_| Ok(()))
}

/// As [`gibbs_fit`], calling `after_sweep` on the state after every sweep.
/// An error from the observer stops sampling and is returned.
pub fn gibbs_fit_observed<F>(
    tokens: &[Token],
    k: usize,
    alpha: f64,
    beta: f64,
    iterations: u32,
    seed: u64,
    mut after_sweep: F,
) -> Result<LdaState>
where
    F: FnMut(&LdaState) -> Result<()>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = LdaState::init(tokens, k, alpha, beta, seed, &mut rng)?;
    for _ in 0..iterations {
        state.sweep(&mut rng);
        after_sweep(&state)?;
    }
    Ok(state)
}
