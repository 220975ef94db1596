//! Topic summaries built from hard token assignments.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::store::{Token, Vocabulary};

/// Word counts of one topic. `Pr(w|z)` is the unsmoothed count ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicSummary {
    pub topic_id: u32,
    pub word_counts: BTreeMap<u32, u64>,
    /// Count-descending, ties by ascending type id.
    pub top_words: Vec<(u32, u64)>,
    pub total_tokens: u64,
}

impl TopicSummary {
    pub fn from_counts(topic_id: u32, word_counts: BTreeMap<u32, u64>, top_n: usize) -> Self {
        let total_tokens = word_counts.values().sum();
        let mut ranked: Vec<(u32, u64)> = word_counts.iter().map(|(&w, &c)| (w, c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(top_n);
        Self {
            topic_id,
            word_counts,
            top_words: ranked,
            total_tokens,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total_tokens == 0
    }

    pub fn prob(&self, type_id: u32) -> f64 {
        if self.total_tokens == 0 {
            return 0.0;
        }
        self.word_counts.get(&type_id).copied().unwrap_or(0) as f64 / self.total_tokens as f64
    }

    /// `(type_id, Pr(w|z))` in type-id order.
    pub fn word_dist(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        let total = self.total_tokens as f64;
        self.word_counts.iter().map(move |(&w, &c)| (w, c as f64 / total))
    }

    pub fn top_word_ids(&self) -> Vec<u32> {
        self.top_words.iter().map(|&(w, _)| w).collect()
    }

    pub fn distinct_words(&self) -> usize {
        self.word_counts.values().filter(|&&c| c > 0).count()
    }
}

fn check_assignments(assignments: &[u32], tokens: &[Token], k: usize) -> Result<()> {
    if assignments.len() != tokens.len() {
        return Err(Error::Integrity(format!(
            "{} assignments for {} tokens",
            assignments.len(),
            tokens.len()
        )));
    }
    if let Some((i, &a)) = assignments.iter().enumerate().find(|(_, &a)| a as usize >= k) {
        return Err(Error::Integrity(format!(
            "token {i} assigned to topic {a}, but K = {k}"
        )));
    }
    Ok(())
}

/// Per-topic word counts and top-`top_n` lists. Every topic id below `k` is
/// returned, empty ones included.
pub fn summarize(
    assignments: &[u32],
    tokens: &[Token],
    k: usize,
    top_n: usize,
) -> Result<Vec<TopicSummary>> {
    check_assignments(assignments, tokens, k)?;
    let mut counts: Vec<BTreeMap<u32, u64>> = vec![BTreeMap::new(); k];
    for (tok, &z) in tokens.iter().zip(assignments) {
        *counts[z as usize].entry(tok.type_id).or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(z, c)| TopicSummary::from_counts(z as u32, c, top_n))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocTopicRow {
    pub doc_id: u32,
    /// Fraction of the document's tokens in each topic; all zero for an empty document.
    pub proportions: Vec<f64>,
}

/// One row per document id from 0 to the largest id present.
pub fn doc_topic_matrix(assignments: &[u32], tokens: &[Token], k: usize) -> Result<Vec<DocTopicRow>> {
    check_assignments(assignments, tokens, k)?;
    let n_docs = tokens.iter().map(|t| t.doc_id as usize + 1).max().unwrap_or(0);
    let mut counts = vec![vec![0u64; k]; n_docs];
    for (tok, &z) in tokens.iter().zip(assignments) {
        counts[tok.doc_id as usize][z as usize] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(d, row)| {
            let total: u64 = row.iter().sum();
            let proportions = if total == 0 {
                vec![0.0; k]
            } else {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            };
            DocTopicRow {
                doc_id: d as u32,
                proportions,
            }
        })
        .collect())
}

/// Tab-separated: topic, token count, distinct types, then `word:count` pairs.
pub fn write_summaries<W: Write>(topics: &[TopicSummary], vocab: &Vocabulary, mut out: W) -> Result<()> {
    writeln!(out, "topic\ttokens\tdistinct\ttop_words")?;
    for t in topics {
        let words: Vec<String> = t
            .top_words
            .iter()
            .map(|&(w, c)| format!("{}:{c}", vocab.surface(w)))
            .collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            t.topic_id,
            t.total_tokens,
            t.distinct_words(),
            words.join(" ")
        )?;
    }
    Ok(())
}

pub fn write_doc_topics<W: Write>(rows: &[DocTopicRow], mut out: W) -> Result<()> {
    let k = rows.first().map_or(0, |r| r.proportions.len());
    write!(out, "doc")?;
    for z in 0..k {
        write!(out, "\tt{z}")?;
    }
    writeln!(out)?;
    for r in rows {
        write!(out, "{}", r.doc_id)?;
        for p in &r.proportions {
            write!(out, "\t{p}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(pairs: &[(u32, u32)]) -> Vec<Token> {
        pairs.iter()
            .enumerate()
            .map(|(i, &(doc, ty))| Token {
                doc_id: doc,
                word_index: i as u32,
                type_id: ty,
            })
            .collect()
    }

    #[test]
    fn all_in_topic_zero() {
        let t = toks(&[(0, 1), (0, 2), (1, 1)]);
        let s = summarize(&[0, 0, 0], &t, 3, 20).unwrap();
        assert_eq!(s[0].total_tokens, 3);
        assert_eq!(s[0].word_counts[&1], 2);
        assert!(s[1].is_empty() && s[2].is_empty());
    }

    #[test]
    fn hand_tally_two_topics() {
        // types:     a a b c a b d d c a
        let t = toks(&[(0, 0), (0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 3), (1, 3), (1, 2), (1, 0)]);
        let z = [0, 0, 1, 1, 0, 1, 1, 1, 0, 1];
        let s = summarize(&z, &t, 2, 20).unwrap();
        let expected0: BTreeMap<u32, u64> = [(0, 3), (2, 1)].into_iter().collect();
        let expected1: BTreeMap<u32, u64> = [(0, 1), (1, 2), (2, 1), (3, 2)].into_iter().collect();
        assert_eq!(s[0].word_counts, expected0);
        assert_eq!(s[1].word_counts, expected1);
        assert_eq!(s[0].total_tokens + s[1].total_tokens, 10);
        assert_eq!(s[1].top_words, vec![(1, 2), (3, 2), (0, 1), (2, 1)]);
    }

    #[test]
    fn fewer_types_than_top_n() {
        let t = toks(&[(0, 5), (0, 5), (0, 9), (0, 7), (0, 7), (0, 7)]);
        let s = summarize(&[0; 6], &t, 1, 20).unwrap();
        assert_eq!(s[0].top_words, vec![(7, 3), (5, 2), (9, 1)]);
        let total: f64 = s[0].word_dist().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_assignment() {
        let t = toks(&[(0, 0)]);
        assert!(matches!(summarize(&[2], &t, 2, 20), Err(Error::Integrity(_))));
        assert!(matches!(summarize(&[], &t, 2, 20), Err(Error::Integrity(_))));
    }

    #[test]
    fn doc_topic_rows() {
        let t = toks(&[(0, 0), (0, 0), (0, 0), (0, 0)]);
        let rows = doc_topic_matrix(&[1, 1, 0, 1], &t, 2).unwrap();
        assert_eq!(rows[0].proportions, vec![0.25, 0.75]);

        let t = toks(&[(0, 3), (0, 4)]);
        let rows = doc_topic_matrix(&[2, 2], &t, 3).unwrap();
        assert_eq!(rows[0].proportions, vec![0.0, 0.0, 1.0]);
    }
}
