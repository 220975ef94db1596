use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use tokentopic_core::analysis::{
    partition_prevalence, polysemy_candidates, pos_composition, pos_entropy, sparkline, time_series,
    uniform_topics, Normalize, PartitionTable, UNTAGGED,
};
use tokentopic_core::cluster::{self, default_local_trials, KMeansConfig, UnitVectors};
use tokentopic_core::lda::{default_alpha, gibbs_fit};
use tokentopic_core::metrics::{evaluate, reference_targets, working_index, write_report, CoherenceConfig};
use tokentopic_core::reduce::{fit_incremental_pca, fit_srp, Reducer};
use tokentopic_core::store::{
    create_corpus, merge_subwords, meta_path, read_corpus, vocab_path, Corpus, DocumentTable, Token,
    Vocabulary,
};
use tokentopic_core::topics::{doc_topic_matrix, summarize, write_doc_topics, write_summaries, TopicSummary};
use tokentopic_core::{
    AssignmentModel, CooccurrenceCounts, Error, FilterPolicy, Method, ReductionConfig,
};

use crate::args::*;
use crate::manifest::Recorder;
use crate::{CliError, CliResult};

pub fn run(cli: Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
    }
    let threads = rayon::current_num_threads();
    let name = cli.command.name();
    match cli.command {
        Command::Ingest(a) => ingest(Recorder::new(name, &a, threads), a),
        Command::Filter(a) => filter(Recorder::new(name, &a, threads), a),
        Command::Reduce(a) => reduce(Recorder::new(name, &a, threads), a),
        Command::Cluster(a) => cluster_cmd(Recorder::new(name, &a, threads), a),
        Command::Lda(a) => lda(Recorder::new(name, &a, threads), a),
        Command::Topics(a) => topics(Recorder::new(name, &a, threads), a),
        Command::Eval(a) => eval(Recorder::new(name, &a, threads), a),
        Command::Analyze(cmd) => match cmd {
            AnalyzeCommand::Prevalence(a) => prevalence(Recorder::new(name, &a, threads), a),
            AnalyzeCommand::Uniform(a) => uniform(Recorder::new(name, &a, threads), a),
            AnalyzeCommand::Timeseries(a) => timeseries(Recorder::new(name, &a, threads), a),
            AnalyzeCommand::Polysemy(a) => polysemy(Recorder::new(name, &a, threads), a),
            AnalyzeCommand::Pos(a) => pos(Recorder::new(name, &a, threads), a),
        },
    }
}

/// Refuse to write over any input.
fn distinct(inputs: &[&Path], outputs: &[&Path]) -> CliResult<()> {
    let canon = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let ins: HashSet<PathBuf> = inputs.iter().map(|p| canon(p)).collect();
    for out in outputs {
        if ins.contains(&canon(out)) {
            return Err(CliError::Usage(format!(
                "output {} would overwrite an input",
                out.display()
            )));
        }
    }
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn parse_auto<T: std::str::FromStr>(flag: &str, value: &str) -> CliResult<Option<T>> {
    if value == "auto" {
        return Ok(None);
    }
    value
        .parse()
        .map(Some)
        .map_err(|_| CliError::Usage(format!("invalid value {value:?} for --{flag}")))
}

/// `out` itself for a single run, otherwise `<stem>-seed<S>.<ext>`.
fn seeded_path(out: &Path, seed: u64, runs: u64) -> PathBuf {
    if runs == 1 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}-seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}-seed{seed}"),
    };
    out.with_file_name(name)
}

fn load_vocab(rec: &mut Recorder, corpus: &Path) -> CliResult<Vocabulary> {
    let path = vocab_path(corpus);
    rec.input(&path)?;
    Ok(Vocabulary::load(&path)?)
}

/// Copy the vocabulary and, if present, metadata sidecars to a new corpus path.
fn copy_sidecars(rec: &mut Recorder, from: &Path, to: &Path) -> CliResult<()> {
    for (src, dst) in [(vocab_path(from), vocab_path(to)), (meta_path(from), meta_path(to))] {
        if src.exists() {
            fs::copy(&src, &dst)?;
            rec.output(&dst);
        }
    }
    Ok(())
}

fn load_corpus(rec: &mut Recorder, path: &Path) -> CliResult<(Corpus, Vocabulary)> {
    rec.input(path)?;
    let corpus = Corpus::load(path)?;
    let vocab = load_vocab(rec, path)?;
    corpus.check_types(&vocab)?;
    Ok((corpus, vocab))
}

struct Fitted {
    corpus: Corpus,
    vocab: Vocabulary,
    model: AssignmentModel,
}

fn load_fitted(rec: &mut Recorder, input: &ModelInput) -> CliResult<Fitted> {
    let (corpus, vocab) = load_corpus(rec, &input.corpus)?;
    rec.input(&input.model)?;
    let model = AssignmentModel::load(&input.model)?;
    if model.assignments.len() != corpus.len() {
        return Err(Error::Integrity(format!(
            "model holds {} assignments but the corpus has {} tokens",
            model.assignments.len(),
            corpus.len()
        ))
        .into());
    }
    Ok(Fitted { corpus, vocab, model })
}

impl Fitted {
    fn topics(&self, top_n: usize) -> CliResult<Vec<TopicSummary>> {
        Ok(summarize(&self.model.assignments, self.corpus.tokens(), self.model.k, top_n)?)
    }
}

fn ingest(mut rec: Recorder, a: IngestArgs) -> CliResult<()> {
    let vocab_in = a.vocab.clone().unwrap_or_else(|| vocab_path(&a.input));
    let meta_in = a.meta.clone().or_else(|| Some(meta_path(&a.input)).filter(|p| p.exists()));
    let mut inputs = vec![a.input.as_path(), vocab_in.as_path()];
    inputs.extend(meta_in.as_deref());
    let (vocab_out, meta_out) = (vocab_path(&a.out), meta_path(&a.out));
    distinct(&inputs, &[&a.out, &vocab_out, &meta_out])?;

    rec.input(&a.input)?;
    rec.input(&vocab_in)?;
    let reader = read_corpus(&a.input)?;
    let header = *reader.header();
    let dim = header.dim as usize;
    let corpus = if header.has_subword_groups {
        Corpus::from_records(dim, merge_subwords(reader))?
    } else {
        Corpus::from_records(dim, reader)?
    };
    let given = Vocabulary::load(&vocab_in)?;
    corpus.check_types(&given)?;
    let surfaces: Vec<(String, Option<String>)> = given
        .entries()
        .iter()
        .map(|e| (e.surface.clone(), e.pos_tag.clone()))
        .collect();
    let (vocab, remap) = Vocabulary::rebuild(&surfaces, &corpus.documents())?;

    let mismatched = given
        .entries()
        .iter()
        .zip(&remap)
        .filter(|(e, new)| match new {
            Some(id) => vocab.get(*id).map(|v| v.doc_frequency) != Some(e.doc_frequency),
            None => true,
        })
        .count();
    if mismatched > 0 {
        eprintln!("warning\t{mismatched} vocabulary entries had document frequencies that differ from the tokens; recounted");
    }

    let tokens: Vec<Token> = corpus
        .tokens()
        .iter()
        .map(|t| Token {
            type_id: remap[t.type_id as usize].expect("every present type is kept"),
            ..*t
        })
        .collect();
    let merged = Corpus::from_parts(dim, tokens, corpus.vectors().to_vec())?;

    if let Some(meta) = &meta_in {
        rec.input(meta)?;
        let table = DocumentTable::load(meta)?;
        table.check_covers(&merged)?;
        table.save(&meta_out)?;
        rec.output(&meta_out);
    }
    merged.save(&a.out)?;
    vocab.save(&vocab_out)?;
    rec.output(&a.out);
    rec.output(&vocab_out);
    rec.finish(&a.out)
}

fn filter(mut rec: Recorder, a: FilterArgs) -> CliResult<()> {
    distinct(&[&a.input], &[&a.out, &vocab_path(&a.out), &meta_path(&a.out)])?;
    let policy = FilterPolicy::new(a.max_doc_frac, a.min_docs)?;
    rec.input(&a.input)?;
    let vocab = load_vocab(&mut rec, &a.input)?;
    let reader = read_corpus(&a.input)?;
    let header = *reader.header();
    if header.has_subword_groups {
        return Err(Error::Format("corpus holds subword rows; run ingest first".into()).into());
    }
    let (kept, mask) = tokentopic_core::filter::filter_tokens(reader, &vocab, &policy)?;
    let mut writer = create_corpus(&a.out, header.dim as usize, false)?;
    for rec in kept {
        writer.write(&rec?)?;
    }
    let written = writer.count();
    writer.finish()?;
    eprintln!(
        "filter\tkept_types={}\tremoved_types={}\ttokens={written}",
        mask.iter().filter(|&&k| k).count(),
        mask.iter().filter(|&&k| !k).count()
    );
    rec.output(&a.out);
    copy_sidecars(&mut rec, &a.input, &a.out)?;
    rec.finish(&a.out)
}

fn reduce(mut rec: Recorder, a: ReduceArgs) -> CliResult<()> {
    let model_out = a.model_out.clone().unwrap_or_else(|| a.out.with_extension("reducer"));
    distinct(&[&a.input], &[&a.out, &model_out, &vocab_path(&a.out), &meta_path(&a.out)])?;
    let method: Method = a.method.parse()?;
    let cfg = ReductionConfig {
        target_dim: a.dim,
        method,
        batch_size: parse_auto("batch-size", &a.batch_size)?,
        density: parse_auto("density", &a.density)?,
    };
    rec.input(&a.input)?;
    let reader = read_corpus(&a.input)?;
    let header = *reader.header();
    if header.has_subword_groups {
        return Err(Error::Format("corpus holds subword rows; run ingest first".into()).into());
    }
    let d = header.dim as usize;
    cfg.validate(d)?;
    let reducer = match method {
        Method::Pca => Reducer::Pca(fit_incremental_pca(reader, d, &cfg)?),
        Method::Srp => {
            rec.seed(a.seed);
            Reducer::Srp(fit_srp(d, &cfg, a.seed)?)
        }
    };
    let mut writer = create_corpus(&a.out, reducer.output_dim(), false)?;
    for r in read_corpus(&a.input)? {
        writer.write(&reducer.transform_record(&r?)?)?;
    }
    writer.finish()?;
    reducer.save(&model_out)?;
    rec.output(&a.out);
    rec.output(&model_out);
    copy_sidecars(&mut rec, &a.input, &a.out)?;
    rec.finish(&a.out)
}

fn cluster_cmd(mut rec: Recorder, a: ClusterArgs) -> CliResult<()> {
    let k = a.k as usize;
    let trials = parse_auto("local-trials", &a.local_trials)?.unwrap_or_else(|| default_local_trials(k));
    let outs: Vec<PathBuf> = (0..a.seeds).map(|i| seeded_path(&a.out, a.seed + i, a.seeds)).collect();
    distinct(&[&a.input], &outs.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;
    rec.input(&a.input)?;
    let corpus = Corpus::load(&a.input)?;
    let points = UnitVectors::from_corpus(&corpus)?;
    for (i, out) in outs.iter().enumerate() {
        let seed = a.seed + i as u64;
        let cfg = KMeansConfig {
            k,
            max_iter: a.max_iter,
            seed,
            local_trials: trials,
        };
        let model = cluster::fit(&points, &cfg)?;
        eprintln!(
            "cluster\tseed={seed}\tobjective={:.6}\titerations={}\tconverged={}",
            model.objective, model.iterations_run, model.converged
        );
        AssignmentModel::from(&model).save(out)?;
        rec.seed(seed);
        rec.output(out);
    }
    rec.finish(&a.out)
}

fn lda(mut rec: Recorder, a: LdaArgs) -> CliResult<()> {
    let k = a.k as usize;
    let alpha = parse_auto("alpha", &a.alpha)?.unwrap_or_else(|| default_alpha(k));
    let outs: Vec<PathBuf> = (0..a.seeds).map(|i| seeded_path(&a.out, a.seed + i, a.seeds)).collect();
    distinct(&[&a.input], &outs.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;
    rec.input(&a.input)?;
    let corpus = Corpus::load(&a.input)?;
    for (i, out) in outs.iter().enumerate() {
        let seed = a.seed + i as u64;
        let state = gibbs_fit(corpus.tokens(), k, alpha, a.beta, a.iters, seed)?;
        AssignmentModel::from(&state).save(out)?;
        rec.seed(seed);
        rec.output(out);
    }
    rec.finish(&a.out)
}

fn topics(mut rec: Recorder, a: TopicsArgs) -> CliResult<()> {
    let mut outs = vec![a.out.as_path()];
    outs.extend(a.doc_topics.as_deref());
    distinct(&[&a.input.corpus, &a.input.model], &outs)?;
    let fitted = load_fitted(&mut rec, &a.input)?;
    let topics = fitted.topics(a.top_n)?;
    write_summaries(&topics, &fitted.vocab, create(&a.out)?)?;
    rec.output(&a.out);
    if let Some(path) = &a.doc_topics {
        let rows = doc_topic_matrix(&fitted.model.assignments, fitted.corpus.tokens(), fitted.model.k)?;
        write_doc_topics(&rows, create(path)?)?;
        rec.output(path);
    }
    rec.finish(&a.out)
}

fn eval(mut rec: Recorder, a: EvalArgs) -> CliResult<()> {
    let mut ins = vec![a.input.corpus.as_path(), a.input.model.as_path()];
    ins.extend(a.reference.as_deref());
    distinct(&ins, &[&a.out])?;
    let cfg = CoherenceConfig {
        top_n: a.top_n,
        epsilon: a.epsilon,
        window: a.window,
        min_attested: a.min_attested,
    };
    cfg.validate()?;
    let fitted = load_fitted(&mut rec, &a.input)?;
    let topics = fitted.topics(cfg.top_n)?;
    let working = working_index(&topics, &fitted.corpus.documents(), &cfg);
    let reference = match &a.reference {
        Some(path) => {
            rec.input(path)?;
            let targets = reference_targets(&topics, &fitted.vocab, &cfg);
            let reader = BufReader::new(File::open(path)?);
            Some(CooccurrenceCounts::from_reference(reader, cfg.window, Some(&targets))?)
        }
        None => None,
    };
    let rows = evaluate(&topics, &fitted.vocab, &working, reference.as_ref(), &cfg)?;
    write_report(&a.name, &rows, create(&a.out)?)?;
    rec.output(&a.out);
    rec.finish(&a.out)
}

fn partition(rec: &mut Recorder, s: &SchemeInput) -> CliResult<(Fitted, PartitionTable)> {
    let fitted = load_fitted(rec, &s.input)?;
    let meta_file = s.meta.clone().unwrap_or_else(|| meta_path(&s.input.corpus));
    rec.input(&meta_file)?;
    let meta = DocumentTable::load(&meta_file)?;
    let table = partition_prevalence(
        &fitted.model.assignments,
        fitted.corpus.tokens(),
        &meta,
        &s.scheme,
        fitted.model.k,
    )?;
    Ok((fitted, table))
}

fn scheme_inputs(s: &SchemeInput) -> Vec<PathBuf> {
    let mut v = vec![s.input.corpus.clone(), s.input.model.clone()];
    v.push(s.meta.clone().unwrap_or_else(|| meta_path(&s.input.corpus)));
    v
}

fn prevalence(mut rec: Recorder, a: PrevalenceArgs) -> CliResult<()> {
    let ins = scheme_inputs(&a.input);
    let mut outs = vec![a.out.as_path()];
    outs.extend(a.prominent.as_deref());
    distinct(&ins.iter().map(PathBuf::as_path).collect::<Vec<_>>(), &outs)?;
    let (_, table) = partition(&mut rec, &a.input)?;
    table.write_tsv(create(&a.out)?)?;
    rec.output(&a.out);
    if let Some(path) = &a.prominent {
        let mut w = create(path)?;
        writeln!(w, "label\trank\ttopic\ttokens")?;
        for label in &table.labels {
            for (rank, (z, c)) in table.prominent(label, a.top)?.into_iter().enumerate() {
                writeln!(w, "{label}\t{}\t{z}\t{c}", rank + 1)?;
            }
        }
        w.flush()?;
        rec.output(path);
    }
    rec.finish(&a.out)
}

fn uniform(mut rec: Recorder, a: UniformArgs) -> CliResult<()> {
    let ins = scheme_inputs(&a.input);
    distinct(&ins.iter().map(PathBuf::as_path).collect::<Vec<_>>(), &[&a.out])?;
    let (fitted, table) = partition(&mut rec, &a.input)?;
    let topics = fitted.topics(5)?;
    let mut w = create(&a.out)?;
    writeln!(w, "topic\tlabel_entropy\ttokens\ttop_words")?;
    for (z, h) in uniform_topics(&table, a.top) {
        let t = &topics[z as usize];
        let words: Vec<&str> = t.top_word_ids().iter().map(|&w| fitted.vocab.surface(w)).collect();
        writeln!(w, "{z}\t{h:.6}\t{}\t{}", t.total_tokens, words.join(" "))?;
    }
    w.flush()?;
    rec.output(&a.out);
    rec.finish(&a.out)
}

fn timeseries(mut rec: Recorder, a: TimeseriesArgs) -> CliResult<()> {
    let ins = scheme_inputs(&a.input);
    distinct(&ins.iter().map(PathBuf::as_path).collect::<Vec<_>>(), &[&a.out])?;
    let normalize: Normalize = a.normalize.parse()?;
    let (_, table) = partition(&mut rec, &a.input)?;
    let series = time_series(&table, normalize)?;
    let mut w = create(&a.out)?;
    write!(w, "topic\tmean_position")?;
    for l in &table.labels {
        write!(w, "\t{l}")?;
    }
    if a.sparkline {
        write!(w, "\tsparkline")?;
    }
    writeln!(w)?;
    for s in &series {
        write!(w, "{}\t{:.6}", s.topic_id, s.mean_position)?;
        for v in &s.values {
            write!(w, "\t{v}")?;
        }
        if a.sparkline {
            write!(w, "\t{}", sparkline(&s.values))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    rec.output(&a.out);
    rec.finish(&a.out)
}

fn polysemy(mut rec: Recorder, a: PolysemyArgs) -> CliResult<()> {
    distinct(&[&a.input.corpus, &a.input.model], &[&a.out])?;
    let fitted = load_fitted(&mut rec, &a.input)?;
    let topics = fitted.topics(a.top_n)?;
    let mut candidates = polysemy_candidates(&topics, a.top_n);
    if a.limit > 0 {
        candidates.truncate(a.limit);
    }
    let mut w = create(&a.out)?;
    writeln!(w, "word\tjsd\ttopic_a\ttopic_b")?;
    for c in &candidates {
        writeln!(
            w,
            "{}\t{:.6}\t{}\t{}",
            fitted.vocab.surface(c.type_id),
            c.jsd,
            c.topics.0,
            c.topics.1
        )?;
    }
    w.flush()?;
    rec.output(&a.out);
    rec.finish(&a.out)
}

fn pos(mut rec: Recorder, a: PosArgs) -> CliResult<()> {
    let mut outs = vec![a.out.as_path()];
    outs.extend(a.composition.as_deref());
    distinct(&[&a.input.corpus, &a.input.model], &outs)?;
    let fitted = load_fitted(&mut rec, &a.input)?;
    let topics: Vec<TopicSummary> = fitted.topics(a.top_n)?.into_iter().filter(|t| !t.is_empty()).collect();
    let mut w = create(&a.out)?;
    writeln!(w, "topic\tpos_entropy\ttags\ttop_words")?;
    for t in &topics {
        let mut tags: BTreeMap<&str, usize> = BTreeMap::new();
        let ids = t.top_word_ids();
        for &id in &ids {
            *tags.entry(fitted.vocab.pos_tag(id).unwrap_or(UNTAGGED)).or_default() += 1;
        }
        let tag_list: Vec<String> = tags.iter().map(|(t, c)| format!("{t}:{c}")).collect();
        let words: Vec<&str> = ids.iter().map(|&id| fitted.vocab.surface(id)).collect();
        writeln!(
            w,
            "{}\t{:.6}\t{}\t{}",
            t.topic_id,
            pos_entropy(t, &fitted.vocab, a.top_n),
            tag_list.join(" "),
            words.join(" ")
        )?;
    }
    w.flush()?;
    rec.output(&a.out);
    if let Some(path) = &a.composition {
        let mut w = create(path)?;
        writeln!(w, "tag\tshare")?;
        for (tag, share) in pos_composition(&topics, &fitted.vocab, a.top_n) {
            writeln!(w, "{tag}\t{share:.6}")?;
        }
        w.flush()?;
        rec.output(path);
    }
    rec.finish(&a.out)
}
