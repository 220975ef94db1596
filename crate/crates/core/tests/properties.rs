use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Cursor;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tokentopic_core::analysis::{jsd, partition_prevalence, pos_entropy, time_series, Normalize};
use tokentopic_core::cluster::{self, KMeansConfig, UnitVectors};
use tokentopic_core::filter::filter_tokens;
use tokentopic_core::lda::gibbs_fit;
use tokentopic_core::metrics::{entropy_of_counts, internal_coherence, word_entropy, CoherenceConfig, ExclusivityTable};
use tokentopic_core::reduce::srp::SrpModel;
use tokentopic_core::reduce::IncrementalPca;
use tokentopic_core::store::{merge_subwords, CorpusReader, CorpusWriter, DocumentMeta, DocumentTable};
use tokentopic_core::topics::{doc_topic_matrix, summarize, TopicSummary};
use tokentopic_core::{
    AssignmentModel, CooccurrenceCounts, FilterPolicy, ModelKind, Token, TokenRecord, VocabEntry, Vocabulary,
};

fn finite() -> impl Strategy<Value = f32> {
    -1.0e3f32..1.0e3
}

/// Records ordered by document then word, `n_docs` documents of up to 6 words.
fn records(dim: usize) -> impl Strategy<Value = Vec<TokenRecord>> {
    prop::collection::vec(prop::collection::vec((0u32..12, prop::collection::vec(finite(), dim)), 0..6), 1..5)
        .prop_map(|docs| {
            let mut out = Vec::new();
            for (d, words) in docs.into_iter().enumerate() {
                for (w, (type_id, vector)) in words.into_iter().enumerate() {
                    out.push(TokenRecord {
                        doc_id: d as u32,
                        word_index: w as u32,
                        type_id,
                        vector,
                    });
                }
            }
            out
        })
}

fn encode(records: &[TokenRecord], dim: usize, subword: bool) -> Vec<u8> {
    let mut w = CorpusWriter::new(Cursor::new(Vec::new()), dim, subword).unwrap();
    for r in records {
        w.write(r).unwrap();
    }
    w.finish().unwrap().into_inner()
}

fn decode(bytes: Vec<u8>) -> Vec<TokenRecord> {
    CorpusReader::new(Cursor::new(bytes)).unwrap().collect::<Result<_, _>>().unwrap()
}

/// Documents as lists of type ids and a vocabulary whose frequencies match them.
fn documents() -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0u32..15, 0..12), 2..12)
}

fn vocab_for(docs: &[Vec<u32>], n_types: u32) -> Vocabulary {
    let mut df = vec![0u64; n_types as usize];
    for d in docs {
        for t in d.iter().collect::<HashSet<_>>() {
            df[*t as usize] += 1;
        }
    }
    let entries = (0..n_types)
        .map(|t| VocabEntry {
            surface: format!("w{t}"),
            doc_frequency: df[t as usize].max(1),
            pos_tag: Some(["NOUN", "VERB", "ADJ"][t as usize % 3].to_string()),
        })
        .collect();
    Vocabulary::new(entries, docs.len() as u64).unwrap()
}

fn tokens_of(docs: &[Vec<u32>]) -> Vec<Token> {
    docs.iter()
        .enumerate()
        .flat_map(|(d, words)| {
            words.iter().enumerate().map(move |(i, &t)| Token {
                doc_id: d as u32,
                word_index: i as u32,
                type_id: t,
            })
        })
        .collect()
}

fn topics_from(counts: &[Vec<u64>]) -> Vec<TopicSummary> {
    counts
        .iter()
        .enumerate()
        .map(|(z, row)| {
            let map: BTreeMap<u32, u64> =
                row.iter().enumerate().filter(|(_, &c)| c > 0).map(|(w, &c)| (w as u32, c)).collect();
            TopicSummary::from_counts(z as u32, map, 20)
        })
        .collect()
}

fn gaussian_rows(n: usize, dim: usize, seed: u64) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// True if `a` and `b` are the same partition under some relabeling.
fn same_partition(a: &[u32], b: &[u32]) -> bool {
    let mut fwd = HashMap::new();
    let mut back = HashMap::new();
    a.iter().zip(b).all(|(x, y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corpus_round_trip_is_bit_exact(recs in records(3)) {
        let back = decode(encode(&recs, 3, false));
        prop_assert_eq!(back.len(), recs.len());
        for (a, b) in recs.iter().zip(&back) {
            prop_assert_eq!(a.token(), b.token());
            let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a.vector), bits(&b.vector));
        }
    }

    #[test]
    fn merge_counts_groups_and_ignores_row_order(recs in records(2), reps in prop::collection::vec(1usize..4, 30), seed in any::<u64>()) {
        // Expand every word into several subword rows.
        let mut rows = Vec::new();
        for (r, &n) in recs.iter().zip(reps.iter().cycle()) {
            for j in 0..n {
                let mut row = r.clone();
                row.vector = r.vector.iter().map(|v| v + j as f32).collect();
                rows.push(row);
            }
        }
        let merged: Vec<TokenRecord> = merge_subwords(rows.clone().into_iter().map(Ok)).collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(merged.len(), recs.len());

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = Vec::new();
        for group in rows.chunk_by(|a, b| (a.doc_id, a.word_index) == (b.doc_id, b.word_index)) {
            let mut g = group.to_vec();
            g.shuffle(&mut rng);
            shuffled.extend(g);
        }
        let again: Vec<TokenRecord> = merge_subwords(shuffled.into_iter().map(Ok)).collect::<Result<_, _>>().unwrap();
        for (a, b) in merged.iter().zip(&again) {
            for (x, y) in a.vector.iter().zip(&b.vector) {
                prop_assert!((*x as f64 - *y as f64).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn filter_is_idempotent_and_counts_match(docs in documents(), frac in 0.2f64..1.0, min_docs in 1u64..3) {
        let vocab = vocab_for(&docs, 15);
        let policy = FilterPolicy::new(frac, min_docs).unwrap();
        let recs: Vec<TokenRecord> = tokens_of(&docs)
            .into_iter()
            .map(|t| TokenRecord { doc_id: t.doc_id, word_index: t.word_index, type_id: t.type_id, vector: vec![1.0] })
            .collect();
        let Ok((once, mask)) = filter_tokens(recs.clone().into_iter().map(Ok), &vocab, &policy) else {
            return Ok(());
        };
        let once: Vec<TokenRecord> = once.collect::<Result<_, _>>().unwrap();
        let (twice, _) = filter_tokens(once.clone().into_iter().map(Ok), &vocab, &policy).unwrap();
        let twice: Vec<TokenRecord> = twice.collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(&once, &twice);

        let mut per_type = HashMap::new();
        for r in &recs {
            *per_type.entry(r.type_id).or_insert(0usize) += 1;
        }
        let expected: usize = per_type.iter().filter(|(t, _)| mask[**t as usize]).map(|(_, c)| c).sum();
        prop_assert_eq!(once.len(), expected);
    }

    #[test]
    fn summaries_conserve_tokens_and_ignore_order(docs in documents(), k in 1usize..5, seed in any::<u64>()) {
        let tokens = tokens_of(&docs);
        let assignments: Vec<u32> = (0..tokens.len()).map(|i| ((i as u64 ^ seed) % k as u64) as u32).collect();
        let topics = summarize(&assignments, &tokens, k, 20).unwrap();
        let total: u64 = topics.iter().map(|t| t.word_counts.values().sum::<u64>()).sum();
        prop_assert_eq!(total, tokens.len() as u64);
        for t in topics.iter().filter(|t| !t.is_empty()) {
            let s: f64 = t.word_dist().map(|(_, p)| p).sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            for w in t.top_words.windows(2) {
                prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
            }
        }

        let mut order: Vec<usize> = (0..tokens.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let t2: Vec<Token> = order.iter().map(|&i| tokens[i]).collect();
        let a2: Vec<u32> = order.iter().map(|&i| assignments[i]).collect();
        prop_assert_eq!(summarize(&a2, &t2, k, 20).unwrap(), topics);

        for row in doc_topic_matrix(&assignments, &tokens, k).unwrap() {
            let s: f64 = row.proportions.iter().sum();
            prop_assert!(s == 0.0 || (s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_and_exclusivity_bounds(counts in prop::collection::vec(prop::collection::vec(0u64..20, 10), 1..6)) {
        let topics = topics_from(&counts);
        for t in &topics {
            match word_entropy(t) {
                Some(h) => prop_assert!(h >= 0.0 && h <= (t.distinct_words() as f64).ln() + 1e-12),
                None => prop_assert!(t.is_empty()),
            }
        }
        let table = ExclusivityTable::new(&topics);
        let present: HashSet<u32> = topics.iter().flat_map(|t| t.word_counts.keys().copied()).collect();
        for w in present {
            let sum: f64 = topics.iter().filter(|t| !t.is_empty()).map(|t| table.word(t, w).unwrap()).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "word {} sums to {}", w, sum);
        }
    }

    #[test]
    fn internal_coherence_bounded_and_order_free(docs in documents(), seed in any::<u64>()) {
        let cfg = CoherenceConfig::default();
        let mut present: Vec<u32> = docs.iter().flatten().copied().collect::<HashSet<_>>().into_iter().collect();
        present.sort();
        prop_assume!(present.len() >= 2);
        let index = CooccurrenceCounts::from_documents(docs.iter().map(|d| d.iter().copied()), None);
        let score = internal_coherence(&present, &index, &cfg).unwrap();
        prop_assert!(score <= 400.0 * cfg.epsilon);

        let mut shuffled = docs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let index2 = CooccurrenceCounts::from_documents(shuffled.iter().map(|d| d.iter().copied()), None);
        prop_assert_eq!(internal_coherence(&present, &index2, &cfg).unwrap(), score);

        for a in &present {
            for b in &present {
                prop_assert_eq!(index.pair(a, b), index.pair(b, a));
                prop_assert!(index.pair(a, b) <= index.single(a).min(index.single(b)));
            }
        }
    }

    #[test]
    fn jsd_symmetric_and_bounded(counts in prop::collection::vec(prop::collection::vec(0u64..9, 8), 2)) {
        let topics = topics_from(&counts);
        prop_assume!(!topics[0].is_empty() && !topics[1].is_empty());
        let ab = jsd(&topics[0], &topics[1]);
        let ba = jsd(&topics[1], &topics[0]);
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=std::f64::consts::LN_2).contains(&ab));
        prop_assert!(jsd(&topics[0], &topics[0]).abs() <= 1e-12);
    }

    #[test]
    fn pos_entropy_ignores_top_list_order(row in prop::collection::vec(1u64..50, 3..15)) {
        let docs = vec![(0..row.len() as u32).collect::<Vec<_>>()];
        let vocab = vocab_for(&docs, row.len() as u32);
        let topic = topics_from(std::slice::from_ref(&row)).remove(0);
        let h = pos_entropy(&topic, &vocab, 20);
        let mut reversed = topic.clone();
        reversed.top_words.reverse();
        prop_assert!((pos_entropy(&reversed, &vocab, 20) - h).abs() < 1e-12);
        prop_assert!(h <= 3f64.ln() + 1e-12);
        prop_assert!((entropy_of_counts([5, 5]) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn partition_and_series_reconcile(docs in documents(), k in 1usize..4) {
        let tokens = tokens_of(&docs);
        prop_assume!(!tokens.is_empty());
        let assignments: Vec<u32> = tokens.iter().map(|t| t.type_id % k as u32).collect();
        let meta = DocumentTable::new((0..docs.len() as u32).map(|d| DocumentMeta {
            doc_id: d,
            labels: BTreeMap::from([("year".to_string(), (2000 + d % 3).to_string())]),
        }))
        .unwrap();
        let table = partition_prevalence(&assignments, &tokens, &meta, "year", k).unwrap();
        prop_assert_eq!(table.total(), tokens.len() as u64);
        let topic_totals = table.topic_totals();
        for (z, &total) in topic_totals.iter().enumerate() {
            let direct = assignments.iter().filter(|&&a| a as usize == z).count() as u64;
            prop_assert_eq!(total, direct);
        }
        let label_totals = table.label_totals();
        let series = time_series(&table, Normalize::PerLabel).unwrap();
        for (l, total) in label_totals.iter().enumerate() {
            if *total > 0 {
                let s: f64 = series.iter().map(|t| t.values[l]).sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn model_file_round_trip(k in 1usize..6, dim in 0usize..4, n in 0usize..40, seed in any::<u64>(), lda in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let model = AssignmentModel {
            kind: if lda { ModelKind::Lda } else { ModelKind::SphericalKMeans },
            k,
            dim,
            seed,
            iterations: rng.random_range(0..100),
            converged: rng.random(),
            centroids: (0..k * dim).map(|_| rng.random()).collect(),
            assignments: (0..n).map(|_| rng.random_range(0..k as u32)).collect(),
            trace: (0..rng.random_range(0..5)).map(|_| rng.random()).collect(),
        };
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        prop_assert_eq!(AssignmentModel::read_from(Cursor::new(buf)).unwrap(), model);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kmeans_scale_invariant_with_unit_centroids(seed in any::<u64>(), k in 1usize..6, scale in prop::sample::select(vec![1e-3, 0.5, 2.0, 7.25, 1e3])) {
        let dim = 4;
        let rows = gaussian_rows(60, dim, seed);
        let scaled: Vec<f64> = rows.iter().map(|v| v * scale).collect();
        let cfg = KMeansConfig::new(k, seed);
        let a = cluster::fit(&UnitVectors::from_rows(dim, &rows).unwrap(), &cfg).unwrap();
        let b = cluster::fit(&UnitVectors::from_rows(dim, &scaled).unwrap(), &cfg).unwrap();
        prop_assert_eq!(&a.assignments, &b.assignments);
        for c in a.centroids.chunks(dim) {
            let norm: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-9);
        }
        prop_assert!(a.assignments.iter().all(|&z| (z as usize) < k));
        let points = UnitVectors::from_rows(dim, &rows).unwrap();
        prop_assert!((a.recompute_objective(&points) - a.objective).abs() < 1e-6);
        for w in a.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn kmeans_permutation_equivariant(seed in any::<u64>(), k in 2usize..5) {
        let dim = 3;
        let n = 50;
        let rows = gaussian_rows(n, dim, seed);
        let points = UnitVectors::from_rows(dim, &rows).unwrap();
        let init = cluster::spkmpp_init(&points, k, 1, seed).unwrap();
        let a = cluster::fit_from(&points, init.clone(), 500, seed).unwrap();

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let permuted: Vec<f64> = order.iter().flat_map(|&i| rows[i * dim..(i + 1) * dim].to_vec()).collect();
        let b = cluster::fit_from(&UnitVectors::from_rows(dim, &permuted).unwrap(), init, 500, seed).unwrap();
        let b_back: Vec<u32> = {
            let mut v = vec![0; n];
            for (pos, &i) in order.iter().enumerate() {
                v[i] = b.assignments[pos];
            }
            v
        };
        prop_assert!(same_partition(&a.assignments, &b_back));
    }

    #[test]
    fn lda_counts_conserved_and_seeded(docs in documents(), k in 1usize..4, seed in any::<u64>()) {
        let tokens = tokens_of(&docs);
        prop_assume!(!tokens.is_empty());
        let a = gibbs_fit(&tokens, k, 0.5, 0.01, 5, seed).unwrap();
        a.check_counts().unwrap();
        prop_assert_eq!(a.n_k.iter().sum::<u64>(), tokens.len() as u64);
        prop_assert_eq!(gibbs_fit(&tokens, k, 0.5, 0.01, 5, seed).unwrap(), a.clone());

        let mut s = a.clone();
        for i in 0..tokens.len() {
            s.remove_token(i);
            s.restore(i);
        }
        prop_assert_eq!(s, a);
    }

    #[test]
    fn srp_is_linear_and_uncentered(seed in any::<u64>(), x in prop::collection::vec(-5.0f64..5.0, 16), y in prop::collection::vec(-5.0f64..5.0, 16), c in -3.0f64..3.0) {
        let srp = SrpModel::generate(16, 4, None, seed).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + c * b).collect();
        let (px, py, pc) = (srp.transform(&x).unwrap(), srp.transform(&y).unwrap(), srp.transform(&combo).unwrap());
        for i in 0..4 {
            prop_assert!((pc[i] - (px[i] + c * py[i])).abs() < 1e-9);
        }
        prop_assert!(srp.transform(&[0.0; 16]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pca_components_orthonormal_and_sorted(seed in any::<u64>(), batch in 3usize..40) {
        let dim = 6;
        let rows = gaussian_rows(120, dim, seed);
        let mut ipca = IncrementalPca::new(dim);
        for chunk in rows.chunks(batch * dim) {
            ipca.partial_fit(chunk).unwrap();
        }
        let model = ipca.finish(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = model.component(i).iter().zip(model.component(j)).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - want).abs() < 1e-6);
            }
        }
        for w in model.explained_variance.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        // Reconstruction error never grows as components are added.
        let mut last = f64::INFINITY;
        for k in 1..=4 {
            let m = model.truncated(k);
            let err: f64 = rows
                .chunks(dim)
                .map(|x| {
                    let back = m.inverse_transform(&m.transform(x).unwrap()).unwrap();
                    x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                })
                .sum();
            prop_assert!(err <= last + 1e-9);
            last = err;
        }
    }
}
