//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokentopic_core::Token;

/// `n` points in `dim` dimensions scattered around `k` random directions.
pub fn clustered_rows(n: usize, k: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<f64> = (0..k * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    (0..n)
        .flat_map(|i| {
            let c = i % k;
            (0..dim)
                .map(|j| centers[c * dim + j] + 0.2 * rng.random_range(-1.0..1.0))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Documents of `len` tokens drawn uniformly from `vocab` types.
pub fn documents(n_docs: usize, len: usize, vocab: u32, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_docs)
        .map(|_| (0..len).map(|_| rng.random_range(0..vocab)).collect())
        .collect()
}

/// Flatten documents into positioned tokens.
pub fn tokens(docs: &[Vec<u32>]) -> Vec<Token> {
    docs.iter()
        .enumerate()
        .flat_map(|(d, words)| {
            words.iter().enumerate().map(move |(i, &type_id)| Token {
                doc_id: d as u32,
                word_index: i as u32,
                type_id,
            })
        })
        .collect()
}
