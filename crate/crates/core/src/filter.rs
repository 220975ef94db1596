//! Document-frequency filtering of word types before clustering.

use crate::error::{Error, Result};
use crate::store::{TokenRecord, Vocabulary};

/// Drop types found in more than `max_doc_fraction` of documents or in fewer
/// than `min_doc_count` documents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterPolicy {
    max_doc_fraction: f64,
    min_doc_count: u64,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        Self {
            max_doc_fraction: 0.25,
            min_doc_count: 5,
        }
    }
}

impl FilterPolicy {
    pub fn new(max_doc_fraction: f64, min_doc_count: u64) -> Result<Self> {
        if !(max_doc_fraction > 0.0 && max_doc_fraction <= 1.0) {
            return Err(Error::Policy(format!(
                "max_doc_fraction {max_doc_fraction} outside (0, 1]"
            )));
        }
        if min_doc_count == 0 {
            return Err(Error::Policy("min_doc_count must be at least 1".into()));
        }
        Ok(Self {
            max_doc_fraction,
            min_doc_count,
        })
    }

    /// Rejects policies that cannot keep anything for a collection of `total_docs`.
    pub fn validate_for(&self, total_docs: u64) -> Result<()> {
        if (self.min_doc_count as f64) > self.max_doc_fraction * total_docs as f64 {
            return Err(Error::Policy(format!(
                "min_doc_count {} exceeds max_doc_fraction {} x {total_docs} documents; every type would be removed",
                self.min_doc_count, self.max_doc_fraction
            )));
        }
        Ok(())
    }

    pub fn max_doc_fraction(&self) -> f64 {
        self.max_doc_fraction
    }

    pub fn min_doc_count(&self) -> u64 {
        self.min_doc_count
    }

    /// Both bounds strict: removed when `df / total > max_doc_fraction` or `df < min_doc_count`.
    pub fn keeps(&self, doc_frequency: u64, total_docs: u64) -> bool {
        if doc_frequency < self.min_doc_count {
            return false;
        }
        doc_frequency as f64 / total_docs as f64 <= self.max_doc_fraction
    }

    pub fn keep_mask(&self, vocab: &Vocabulary) -> Result<Vec<bool>> {
        self.validate_for(vocab.total_docs())?;
        let mask: Vec<bool> = vocab
            .entries()
            .iter()
            .map(|e| self.keeps(e.doc_frequency, vocab.total_docs()))
            .collect();
        if !mask.iter().any(|&k| k) {
            return Err(Error::Policy(format!(
                "no type survives max_doc_fraction={} min_doc_count={} over {} documents",
                self.max_doc_fraction,
                self.min_doc_count,
                vocab.total_docs()
            )));
        }
        Ok(mask)
    }
}

/// Filter a token stream. Tokens of removed types are dropped; survivors keep
/// their order and type ids.
pub fn filter_tokens<I>(
    tokens: I,
    vocab: &Vocabulary,
    policy: &FilterPolicy,
) -> Result<(FilteredTokens<I::IntoIter>, Vec<bool>)>
where
    I: IntoIterator<Item = Result<TokenRecord>>,
{
    let mask = policy.keep_mask(vocab)?;
    Ok((
        FilteredTokens {
            inner: tokens.into_iter(),
            mask: mask.clone(),
        },
        mask,
    ))
}

pub struct FilteredTokens<I> {
    inner: I,
    mask: Vec<bool>,
}

impl<I> Iterator for FilteredTokens<I>
where
    I: Iterator<Item = Result<TokenRecord>>,
{
    type Item = Result<TokenRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.inner.next()? {
                Err(e) => return Some(Err(e)),
                Ok(rec) => match self.mask.get(rec.type_id as usize) {
                    Some(true) => return Some(Ok(rec)),
                    Some(false) => continue,
                    None => {
                        return Some(Err(Error::Integrity(format!(
                            "type_id {} outside vocabulary of {}",
                            rec.type_id,
                            self.mask.len()
                        ))))
                    }
                },
            }
        }
    }
}
