//! Post-hoc corpus analysis over a fitted sampling state: topic prevalence
//! per document label, label-uniform topics, ordered time series, polysemy
//! candidates and part-of-speech homogeneity of top words.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::entropy_of_counts;
use crate::store::{DocumentTable, Token, Vocabulary};
use crate::topics::TopicSummary;

/// Tag used for types without a part-of-speech tag.
pub const UNTAGGED: &str = "OTHER";

/// Token counts per topic and label under one partition scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    pub scheme: String,
    /// Numeric order when every label parses as an integer, otherwise lexicographic.
    pub labels: Vec<String>,
    /// `counts[topic][label]`.
    pub counts: Vec<Vec<u64>>,
    pub numeric_labels: bool,
}

impl PartitionTable {
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn topic_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn label_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.labels.len()];
        for row in &self.counts {
            for (t, c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    pub fn total(&self) -> u64 {
        self.topic_totals().iter().sum()
    }

    /// Topics of one label ranked by token count (ties by topic id).
    pub fn prominent(&self, label: &str, top: usize) -> Result<Vec<(u32, u64)>> {
        let col = self
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Metadata(format!("label {label:?} not in scheme {}", self.scheme)))?;
        let mut ranked: Vec<(u32, u64)> = self
            .counts
            .iter()
            .enumerate()
            .map(|(z, row)| (z as u32, row[col]))
            .filter(|&(_, c)| c > 0)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(top);
        Ok(ranked)
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "topic")?;
        for l in &self.labels {
            write!(out, "\t{l}")?;
        }
        writeln!(out)?;
        for (z, row) in self.counts.iter().enumerate() {
            write!(out, "{z}")?;
            for c in row {
                write!(out, "\t{c}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn order_labels(labels: &mut [String]) -> bool {
    let numeric = labels.iter().all(|l| l.trim().parse::<i64>().is_ok());
    if numeric {
        labels.sort_by_key(|l| l.trim().parse::<i64>().unwrap());
    } else {
        labels.sort();
    }
    numeric
}

/// `counts[z][l]` = tokens in documents labelled `l` that are assigned `z`.
pub fn partition_prevalence(
    assignments: &[u32],
    tokens: &[Token],
    meta: &DocumentTable,
    scheme: &str,
    k: usize,
) -> Result<PartitionTable> {
    if assignments.len() != tokens.len() {
        return Err(Error::Integrity(format!(
            "{} assignments for {} tokens",
            assignments.len(),
            tokens.len()
        )));
    }
    let mut labels: Vec<String> = meta
        .iter()
        .filter_map(|d| d.labels.get(scheme).cloned())
        .collect();
    labels.sort();
    labels.dedup();
    let numeric_labels = order_labels(&mut labels);
    let column: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();

    let mut counts = vec![vec![0u64; labels.len()]; k];
    for (tok, &z) in tokens.iter().zip(assignments) {
        if z as usize >= k {
            return Err(Error::Integrity(format!("assignment {z} outside K = {k}")));
        }
        let label = meta.label(tok.doc_id, scheme).ok_or_else(|| {
            Error::Metadata(format!("document {} has no {scheme:?} label", tok.doc_id))
        })?;
        counts[z as usize][column[label]] += 1;
    }
    Ok(PartitionTable {
        scheme: scheme.to_string(),
        labels,
        counts,
        numeric_labels,
    })
}

/// Topics ranked by the entropy (nats) of their distribution over labels,
/// most uniform first; ties by topic id. Empty topics are left out.
pub fn uniform_topics(table: &PartitionTable, top_m: usize) -> Vec<(u32, f64)> {
    let mut ranked: Vec<(u32, f64)> = table
        .counts
        .iter()
        .enumerate()
        .filter(|(_, row)| row.iter().any(|&c| c > 0))
        .map(|(z, row)| (z as u32, entropy_of_counts(row.iter().copied())))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_m);
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalize {
    None,
    PerLabel,
}

impl FromStr for Normalize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalize::None),
            "per-label" => Ok(Normalize::PerLabel),
            other => Err(Error::Config(format!("unknown normalization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicSeries {
    pub topic_id: u32,
    pub values: Vec<f64>,
    /// Mean label position under the topic's own distribution over labels.
    pub mean_position: f64,
}

/// Per-topic series over ordered labels, sorted by mean position (earliest first).
pub fn time_series(table: &PartitionTable, normalize: Normalize) -> Result<Vec<TopicSeries>> {
    if !table.numeric_labels {
        return Err(Error::Config(format!(
            "scheme {:?} has non-numeric labels and no natural order",
            table.scheme
        )));
    }
    let label_totals = table.label_totals();
    let mut series: Vec<TopicSeries> = table
        .counts
        .iter()
        .enumerate()
        .filter(|(_, row)| row.iter().any(|&c| c > 0))
        .map(|(z, row)| {
            let values: Vec<f64> = row
                .iter()
                .zip(&label_totals)
                .map(|(&c, &tot)| match normalize {
                    Normalize::None => c as f64,
                    Normalize::PerLabel if tot == 0 => 0.0,
                    Normalize::PerLabel => c as f64 / tot as f64,
                })
                .collect();
            let mass: f64 = values.iter().sum();
            let mean_position = values.iter().enumerate().map(|(t, v)| t as f64 * v).sum::<f64>() / mass;
            TopicSeries {
                topic_id: z as u32,
                values,
                mean_position,
            }
        })
        .collect();
    series.sort_by(|a, b| {
        a.mean_position
            .total_cmp(&b.mean_position)
            .then(a.topic_id.cmp(&b.topic_id))
    });
    Ok(series)
}

/// Eight-level bar rendering scaled to the series maximum.
pub fn sparkline(values: &[f64]) -> String {
    const BARS: [char; 8] = ['▁', '▂', '▃', '▄', '▅', '▆', '▇', '█'];
    let max = values.iter().copied().fold(0.0f64, f64::max);
    values
        .iter()
        .map(|&v| {
            if max <= 0.0 {
                BARS[0]
            } else {
                let level = ((v / max) * 7.0).round() as usize;
                BARS[level.min(7)]
            }
        })
        .collect()
}

/// Jensen-Shannon divergence (nats) between two topics' word distributions.
pub fn jsd(a: &TopicSummary, b: &TopicSummary) -> f64 {
    let pa: BTreeMap<u32, f64> = a.word_dist().collect();
    let pb: BTreeMap<u32, f64> = b.word_dist().collect();
    jsd_maps(&pa, &pb)
}

fn jsd_maps(p: &BTreeMap<u32, f64>, q: &BTreeMap<u32, f64>) -> f64 {
    let mut div = 0.0;
    for (w, &pw) in p {
        let qw = q.get(w).copied().unwrap_or(0.0);
        if pw > 0.0 {
            div += 0.5 * pw * (pw / (0.5 * (pw + qw))).ln();
        }
    }
    for (w, &qw) in q {
        let pw = p.get(w).copied().unwrap_or(0.0);
        if qw > 0.0 {
            div += 0.5 * qw * (qw / (0.5 * (pw + qw))).ln();
        }
    }
    div.clamp(0.0, std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolysemyCandidate {
    pub type_id: u32,
    /// The most divergent pair of topics listing this type among their top words.
    pub topics: (u32, u32),
    pub jsd: f64,
}

/// Types found among the top `top_n` words of two or more topics, ranked by
/// the largest JSD between any two of those topics (ties by type id).
pub fn polysemy_candidates(topics: &[TopicSummary], top_n: usize) -> Vec<PolysemyCandidate> {
    let mut holders: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, t) in topics.iter().enumerate() {
        for w in t.top_word_ids().into_iter().take(top_n) {
            holders.entry(w).or_default().push(i);
        }
    }
    let dists: Vec<BTreeMap<u32, f64>> = topics.iter().map(|t| t.word_dist().collect()).collect();
    let mut cache: HashMap<(usize, usize), f64> = HashMap::new();
    let mut out = Vec::new();
    for (w, hs) in holders.into_iter().filter(|(_, hs)| hs.len() >= 2) {
        let mut best: Option<(usize, usize, f64)> = None;
        for (x, &i) in hs.iter().enumerate() {
            for &j in &hs[x + 1..] {
                let d = *cache
                    .entry((i, j))
                    .or_insert_with(|| jsd_maps(&dists[i], &dists[j]));
                if best.is_none_or(|(_, _, bd)| d > bd) {
                    best = Some((i, j, d));
                }
            }
        }
        let (i, j, d) = best.expect("at least one pair");
        out.push(PolysemyCandidate {
            type_id: w,
            topics: (topics[i].topic_id, topics[j].topic_id),
            jsd: d,
        });
    }
    out.sort_by(|a, b| {
        b.jsd
            .partial_cmp(&a.jsd)
            .unwrap_or(Ordering::Equal)
            .then(a.type_id.cmp(&b.type_id))
    });
    out
}

fn tag_of(vocab: &Vocabulary, w: u32) -> &str {
    vocab.pos_tag(w).unwrap_or(UNTAGGED)
}

/// Entropy (nats) of the tag histogram over a topic's top words.
pub fn pos_entropy(topic: &TopicSummary, vocab: &Vocabulary, top_n: usize) -> f64 {
    let mut hist: BTreeMap<&str, u64> = BTreeMap::new();
    for w in topic.top_word_ids().into_iter().take(top_n) {
        *hist.entry(tag_of(vocab, w)).or_insert(0) += 1;
    }
    entropy_of_counts(hist.into_values())
}

/// Share of all top-word slots (across every topic) held by each tag.
pub fn pos_composition(topics: &[TopicSummary], vocab: &Vocabulary, top_n: usize) -> BTreeMap<String, f64> {
    let mut hist: BTreeMap<String, u64> = BTreeMap::new();
    let mut slots = 0u64;
    for t in topics {
        for w in t.top_word_ids().into_iter().take(top_n) {
            *hist.entry(tag_of(vocab, w).to_string()).or_insert(0) += 1;
            slots += 1;
        }
    }
    hist.into_iter()
        .map(|(tag, c)| (tag, c as f64 / slots as f64))
        .collect()
}
