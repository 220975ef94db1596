//! Topic quality measures: word entropy, internal (document co-occurrence)
//! and external (reference-window PMI) coherence, exclusivity, and distinct
//! word counts. Natural log throughout.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use crate::cooccur::CooccurrenceCounts;
use crate::error::{Error, Result};
use crate::store::Vocabulary;
use crate::topics::TopicSummary;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceConfig {
    pub top_n: usize,
    pub epsilon: f64,
    /// Sliding window length for the reference corpus.
    pub window: usize,
    /// Topics with fewer reference-attested top words are skipped.
    pub min_attested: usize,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        Self {
            top_n: 20,
            epsilon: 1e-12,
            window: 25,
            min_attested: 10,
        }
    }
}

impl CoherenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.top_n < 2 {
            return Err(Error::Config(format!("top_n {} must be at least 2", self.top_n)));
        }
        if self.window < 2 {
            return Err(Error::Config(format!("window {} must be at least 2", self.window)));
        }
        Ok(())
    }
}

/// `-Σ Pr(w|z) ln Pr(w|z)`; `None` for an empty topic.
pub fn word_entropy(topic: &TopicSummary) -> Option<f64> {
    if topic.is_empty() {
        return None;
    }
    Some(entropy_of_counts(topic.word_counts.values().copied()))
}

/// Entropy in nats of the distribution proportional to `counts`.
pub fn entropy_of_counts<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

pub fn distinct_word_count(topic: &TopicSummary) -> usize {
    topic.distinct_words()
}

/// Document co-occurrence coherence over ranked top words:
/// `Σ_i Σ_{j<i} ln((D(w_i, w_j) + ε) / D(w_j))`, where `w_j` is the
/// earlier-ranked word.
pub fn internal_coherence(
    top_words: &[u32],
    docs: &CooccurrenceCounts<u32>,
    cfg: &CoherenceConfig,
) -> Result<f64> {
    let words = &top_words[..top_words.len().min(cfg.top_n)];
    let mut score = 0.0;
    for (i, wi) in words.iter().enumerate() {
        for wj in &words[..i] {
            let dj = docs.single(wj);
            if dj == 0 {
                return Err(Error::Integrity(format!(
                    "top word {wj} occurs in no document of the working collection"
                )));
            }
            score += ((docs.pair(wi, wj) as f64 + cfg.epsilon) / dj as f64).ln();
        }
    }
    Ok(score)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExternalScore {
    Score(f64),
    /// Fewer than `min_attested` top words appear in the reference corpus.
    Skipped { attested: usize },
}

impl ExternalScore {
    pub fn value(&self) -> Option<f64> {
        match *self {
            ExternalScore::Score(v) => Some(v),
            ExternalScore::Skipped { .. } => None,
        }
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self, ExternalScore::Skipped { .. })
    }
}

/// Reference-window PMI coherence:
/// `Σ_i Σ_{j<i} ln((Pr(w_i, w_j) + ε) / (Pr(w_i) Pr(w_j)))` over the top
/// words attested in the reference windows, in rank order.
pub fn external_coherence<S: AsRef<str>>(
    top_words: &[S],
    windows: &CooccurrenceCounts<String>,
    cfg: &CoherenceConfig,
) -> Result<ExternalScore> {
    if windows.contexts() == 0 {
        return Err(Error::Config("reference index holds no windows".into()));
    }
    let total = windows.contexts() as f64;
    let attested: Vec<String> = top_words
        .iter()
        .take(cfg.top_n)
        .map(|w| w.as_ref().to_string())
        .filter(|w| windows.single(w) > 0)
        .collect();
    if attested.len() < cfg.min_attested {
        return Ok(ExternalScore::Skipped {
            attested: attested.len(),
        });
    }
    let mut score = 0.0;
    for (i, wi) in attested.iter().enumerate() {
        let pi = windows.single(wi) as f64 / total;
        for wj in &attested[..i] {
            let pj = windows.single(wj) as f64 / total;
            let pij = windows.pair(wi, wj) as f64 / total;
            score += ((pij + cfg.epsilon) / (pi * pj)).ln();
        }
    }
    Ok(ExternalScore::Score(score))
}

/// `Σ_z Pr(w|z)` for every word, shared by all exclusivity queries.
#[derive(Debug, Clone)]
pub struct ExclusivityTable {
    mass: HashMap<u32, f64>,
}

impl ExclusivityTable {
    pub fn new(topics: &[TopicSummary]) -> Self {
        let mut mass = HashMap::new();
        for t in topics.iter().filter(|t| !t.is_empty()) {
            for (w, p) in t.word_dist() {
                *mass.entry(w).or_insert(0.0) += p;
            }
        }
        Self { mass }
    }

    /// `Pr(w|z) / Σ_z' Pr(w|z')`.
    pub fn word(&self, topic: &TopicSummary, w: u32) -> Result<f64> {
        match self.mass.get(&w) {
            Some(&m) if m > 0.0 => Ok(topic.prob(w) / m),
            _ => Err(Error::Integrity(format!("word {w} absent from every topic"))),
        }
    }

    /// Mean word exclusivity over the topic's top words; `None` for an empty topic.
    pub fn topic(&self, topic: &TopicSummary, top_n: usize) -> Result<Option<f64>> {
        let words: Vec<u32> = topic.top_word_ids().into_iter().take(top_n).collect();
        if words.is_empty() {
            return Ok(None);
        }
        let mut sum = 0.0;
        for &w in &words {
            sum += self.word(topic, w)?;
        }
        Ok(Some(sum / words.len() as f64))
    }
}

pub fn word_exclusivity(topics: &[TopicSummary], topic_id: usize, w: u32) -> Result<f64> {
    ExclusivityTable::new(topics).word(topic(topics, topic_id)?, w)
}

pub fn exclusivity(topics: &[TopicSummary], topic_id: usize, cfg: &CoherenceConfig) -> Result<Option<f64>> {
    ExclusivityTable::new(topics).topic(topic(topics, topic_id)?, cfg.top_n)
}

fn topic(topics: &[TopicSummary], id: usize) -> Result<&TopicSummary> {
    topics
        .get(id)
        .ok_or_else(|| Error::Integrity(format!("no topic {id} among {}", topics.len())))
}

/// Document-level counts of every top word of every topic.
pub fn working_index(topics: &[TopicSummary], docs: &[Vec<u32>], cfg: &CoherenceConfig) -> CooccurrenceCounts<u32> {
    let targets: HashSet<u32> = topics
        .iter()
        .flat_map(|t| t.top_word_ids().into_iter().take(cfg.top_n))
        .collect();
    CooccurrenceCounts::from_documents(docs.iter().map(|d| d.iter().copied()), Some(&targets))
}

/// Surface forms of every top word, for restricting reference counting.
pub fn reference_targets(topics: &[TopicSummary], vocab: &Vocabulary, cfg: &CoherenceConfig) -> HashSet<String> {
    topics
        .iter()
        .flat_map(|t| t.top_word_ids().into_iter().take(cfg.top_n))
        .map(|w| vocab.surface(w).to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicMetrics {
    pub topic_id: u32,
    pub tokens: u64,
    pub entropy: Option<f64>,
    pub internal: Option<f64>,
    /// `None` when no reference corpus was supplied.
    pub external: Option<ExternalScore>,
    pub exclusivity: Option<f64>,
    pub distinct_words: usize,
}

/// All measures for every topic.
pub fn evaluate(
    topics: &[TopicSummary],
    vocab: &Vocabulary,
    working: &CooccurrenceCounts<u32>,
    reference: Option<&CooccurrenceCounts<String>>,
    cfg: &CoherenceConfig,
) -> Result<Vec<TopicMetrics>> {
    cfg.validate()?;
    let excl = ExclusivityTable::new(topics);
    topics
        .iter()
        .map(|t| {
            let top: Vec<u32> = t.top_word_ids().into_iter().take(cfg.top_n).collect();
            let internal = if top.is_empty() {
                None
            } else {
                Some(internal_coherence(&top, working, cfg)?)
            };
            let external = match reference {
                Some(r) => {
                    let surfaces: Vec<&str> = top.iter().map(|&w| vocab.surface(w)).collect();
                    Some(external_coherence(&surfaces, r, cfg)?)
                }
                None => None,
            };
            Ok(TopicMetrics {
                topic_id: t.topic_id,
                tokens: t.total_tokens,
                entropy: word_entropy(t),
                internal,
                external,
                exclusivity: excl.topic(t, cfg.top_n)?,
                distinct_words: distinct_word_count(t),
            })
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

/// Tab-separated metric table, one row per topic.
pub fn write_report<W: Write>(model: &str, rows: &[TopicMetrics], mut out: W) -> Result<()> {
    writeln!(
        out,
        "model\ttopic\ttokens\tentropy\tinternal\texternal\texclusivity\tdistinct_words"
    )?;
    for r in rows {
        let external = match r.external {
            Some(ExternalScore::Score(v)) => format!("{v:.6}"),
            Some(ExternalScore::Skipped { .. }) => "skipped".to_string(),
            None => "NA".to_string(),
        };
        writeln!(
            out,
            "{model}\t{}\t{}\t{}\t{}\t{external}\t{}\t{}",
            r.topic_id,
            r.tokens,
            fmt_opt(r.entropy),
            fmt_opt(r.internal),
            fmt_opt(r.exclusivity),
            r.distinct_words
        )?;
    }
    Ok(())
}
