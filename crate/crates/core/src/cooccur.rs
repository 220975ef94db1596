//! Context counts for coherence: how many contexts (documents or sliding
//! windows) contain a word, and how many contain both words of a pair.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;
use std::io::BufRead;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceCounts<K: Eq + Hash> {
    contexts: u64,
    singles: HashMap<K, u64>,
    /// Keyed by `(min, max)`.
    pairs: HashMap<(K, K), u64>,
}

impl<K: Eq + Hash> Default for CooccurrenceCounts<K> {
    fn default() -> Self {
        Self {
            contexts: 0,
            singles: HashMap::new(),
            pairs: HashMap::new(),
        }
    }
}

impl<K: Eq + Hash + Ord + Clone> CooccurrenceCounts<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one context. Repeated words inside it count once.
    pub fn add_context<I: IntoIterator<Item = K>>(&mut self, words: I) {
        let mut present: Vec<K> = words.into_iter().collect();
        present.sort();
        present.dedup();
        self.contexts += 1;
        for (i, a) in present.iter().enumerate() {
            *self.singles.entry(a.clone()).or_insert(0) += 1;
            for b in &present[i + 1..] {
                *self.pairs.entry((a.clone(), b.clone())).or_insert(0) += 1;
            }
        }
    }

    pub fn merge(&mut self, other: Self) {
        self.contexts += other.contexts;
        for (k, v) in other.singles {
            *self.singles.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.pairs {
            *self.pairs.entry(k).or_insert(0) += v;
        }
    }

    pub fn contexts(&self) -> u64 {
        self.contexts
    }

    pub fn single(&self, w: &K) -> u64 {
        self.singles.get(w).copied().unwrap_or(0)
    }

    pub fn pair(&self, a: &K, b: &K) -> u64 {
        if a == b {
            return self.single(a);
        }
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.pairs.get(&key).copied().unwrap_or(0)
    }

    /// Each document is one context. With `targets`, only those words are tracked.
    pub fn from_documents<D, I>(docs: D, targets: Option<&HashSet<K>>) -> Self
    where
        D: IntoIterator<Item = I>,
        I: IntoIterator<Item = K>,
    {
        let mut counts = Self::new();
        for doc in docs {
            counts.add_context(doc.into_iter().filter(|w| keep(targets, w)));
        }
        counts
    }

    /// Sliding windows of `window` words, stride 1, inside each document.
    /// A document shorter than the window is one window; empty documents add nothing.
    pub fn from_windows<D>(docs: D, window: usize, targets: Option<&HashSet<K>>) -> Self
    where
        D: IntoIterator,
        D::Item: AsRef<[K]>,
    {
        let mut counts = Self::new();
        for doc in docs {
            counts.add_document_windows(doc.as_ref(), window, targets);
        }
        counts
    }

    pub fn add_document_windows(&mut self, doc: &[K], window: usize, targets: Option<&HashSet<K>>) {
        if doc.is_empty() {
            return;
        }
        let n_windows = doc.len().saturating_sub(window) + 1;
        for start in 0..n_windows {
            let end = (start + window).min(doc.len());
            self.add_context(doc[start..end].iter().filter(|w| keep(targets, w)).cloned());
        }
    }
}

fn keep<K: Eq + Hash>(targets: Option<&HashSet<K>>, w: &K) -> bool {
    targets.is_none_or(|t| t.contains(w))
}

impl CooccurrenceCounts<String> {
    /// Window counts over a plain-text reference corpus: one document per
    /// line, tokens separated by spaces.
    pub fn from_reference<R: BufRead>(
        reader: R,
        window: usize,
        targets: Option<&HashSet<String>>,
    ) -> Result<Self> {
        let mut counts = Self::new();
        for line in reader.lines() {
            let line = line?;
            let doc: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            counts.add_document_windows(&doc, window, targets);
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_counts() {
        let docs = vec![vec![1u32, 2, 2, 3], vec![2, 3], vec![4]];
        let c = CooccurrenceCounts::from_documents(docs, None);
        assert_eq!(c.contexts(), 3);
        assert_eq!(c.single(&2), 2);
        assert_eq!(c.pair(&2, &3), 2);
        assert_eq!(c.pair(&3, &2), 2);
        assert_eq!(c.pair(&1, &4), 0);
        assert_eq!(c.single(&9), 0);
    }

    #[test]
    fn window_totals() {
        let long: Vec<u32> = (0..30).collect();
        let short: Vec<u32> = vec![100, 101];
        let c = CooccurrenceCounts::from_windows([long, short, vec![]], 25, None);
        // 30 - 24 windows for the long document, one for the short one.
        assert_eq!(c.contexts(), 6 + 1);
        assert_eq!(c.single(&0), 1);
        assert_eq!(c.single(&10), 6);
        assert_eq!(c.pair(&0, &24), 1);
        assert_eq!(c.pair(&0, &25), 0);
        assert_eq!(c.pair(&100, &101), 1);
    }

    #[test]
    fn targets_restrict_tracking() {
        let targets: HashSet<u32> = [1, 3].into_iter().collect();
        let c = CooccurrenceCounts::from_documents(vec![vec![1u32, 2, 3]], Some(&targets));
        assert_eq!(c.single(&2), 0);
        assert_eq!(c.pair(&1, &3), 1);
        assert_eq!(c.contexts(), 1);
    }

    #[test]
    fn reference_text() {
        let text = "a b c\n\nb c d e\n";
        let c = CooccurrenceCounts::from_reference(text.as_bytes(), 3, None).unwrap();
        // "a b c" -> 1 window; "b c d e" -> 2 windows
        assert_eq!(c.contexts(), 3);
        assert_eq!(c.single(&"c".to_string()), 3);
        assert_eq!(c.pair(&"b".to_string(), &"e".to_string()), 0);
    }
}
