use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Topic models from clustered token embeddings.
#[derive(Debug, Parser)]
#[command(name = "tokentopic", version, about, propagate_version = true)]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on this value.
    #[arg(long, global = true, env = "TOKENTOPIC_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// File of `key=value` lines standing in for flags. Flags given on the
    /// command line win; keys unknown to the subcommand are ignored.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Merge subword rows, recount document frequencies and compact type ids.
    Ingest(IngestArgs),
    /// Drop word types that are too rare or too common.
    Filter(FilterArgs),
    /// Fit a dimensionality reduction and project every token vector.
    Reduce(ReduceArgs),
    /// Spherical k-means over unit-normalized token vectors.
    Cluster(ClusterArgs),
    /// Collapsed Gibbs LDA baseline over the same tokens.
    Lda(LdaArgs),
    /// Topic word lists and document-topic proportions from a model.
    Topics(TopicsArgs),
    /// Coherence, entropy and exclusivity for every topic.
    Eval(EvalArgs),
    /// Corpus analyses over a fitted model.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Ingest(_) => "ingest".into(),
            Command::Filter(_) => "filter".into(),
            Command::Reduce(_) => "reduce".into(),
            Command::Cluster(_) => "cluster".into(),
            Command::Lda(_) => "lda".into(),
            Command::Topics(_) => "topics".into(),
            Command::Eval(_) => "eval".into(),
            Command::Analyze(a) => format!("analyze {}", a.name()),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Token or subword-row corpus file.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Vocabulary sidecar; defaults to the input path with a `.vocab` extension.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Metadata sidecar; defaults to the input path with a `.meta` extension if present.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Output corpus; sidecars are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FilterArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Remove types found in more than this fraction of documents.
    #[arg(long, default_value_t = 0.25)]
    pub max_doc_frac: f64,
    /// Remove types found in fewer than this many documents.
    #[arg(long, default_value_t = 5)]
    pub min_docs: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ReduceArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Reduced corpus.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to store the fitted reducer; defaults to the output path with a `.reducer` extension.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// `pca` (incremental) or `srp` (sparse random projection).
    #[arg(long, default_value = "pca")]
    pub method: String,
    /// Target dimension.
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    /// PCA batch size in rows; `auto` is five times the input dimension.
    #[arg(long, default_value = "auto")]
    pub batch_size: String,
    /// SRP density parameter s; `auto` is the square root of the input dimension.
    #[arg(long, default_value = "auto")]
    pub density: String,
    /// Seed for the random projection.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Model file. With `--seeds` above 1 each run writes `<stem>-seed<S>.<ext>`.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of clusters.
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of runs, with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Seeding candidates per step; `auto` is 2 + floor(ln K), 1 is plain spkm++.
    #[arg(long, default_value = "auto")]
    pub local_trials: String,
}

#[derive(Debug, Args, Serialize)]
pub struct LdaArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Model file. With `--seeds` above 1 each run writes `<stem>-seed<S>.<ext>`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    /// Symmetric document prior per topic; `auto` is 5/K.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    /// Symmetric word prior.
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    /// Gibbs sweeps.
    #[arg(long, default_value_t = 1000)]
    pub iters: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
}

/// Inputs shared by everything that reads a fitted model.
#[derive(Debug, Args, Serialize)]
pub struct ModelInput {
    /// Corpus the model was fitted on; its `.vocab` sidecar is read too.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TopicsArgs {
    #[command(flatten)]
    pub input: ModelInput,
    /// Topic summary table.
    #[arg(long)]
    pub out: PathBuf,
    /// Document-topic proportion table.
    #[arg(long)]
    pub doc_topics: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub top_n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: ModelInput,
    #[arg(long)]
    pub out: PathBuf,
    /// Tokenized reference corpus, one document per line, for external coherence.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Model label for the report's first column.
    #[arg(long, default_value = "model")]
    pub name: String,
    #[arg(long, default_value_t = 20)]
    pub top_n: usize,
    /// Reference window length in words.
    #[arg(long, default_value_t = 25)]
    pub window: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub epsilon: f64,
    /// Topics with fewer attested top words get no external score.
    #[arg(long, default_value_t = 10)]
    pub min_attested: usize,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Tokens per topic within each label of a metadata scheme.
    Prevalence(PrevalenceArgs),
    /// Topics spread most evenly across the labels of a scheme.
    Uniform(UniformArgs),
    /// Topic shares over ordered numeric labels, earliest-peaking first.
    Timeseries(TimeseriesArgs),
    /// Words at the top of dissimilar topics.
    Polysemy(PolysemyArgs),
    /// Part-of-speech entropy of each topic's top words.
    Pos(PosArgs),
}

impl AnalyzeCommand {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyzeCommand::Prevalence(_) => "prevalence",
            AnalyzeCommand::Uniform(_) => "uniform",
            AnalyzeCommand::Timeseries(_) => "timeseries",
            AnalyzeCommand::Polysemy(_) => "polysemy",
            AnalyzeCommand::Pos(_) => "pos",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SchemeInput {
    #[command(flatten)]
    pub input: ModelInput,
    /// Metadata sidecar; defaults to the corpus path with a `.meta` extension.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Metadata field to partition documents by.
    #[arg(long)]
    pub scheme: String,
}

#[derive(Debug, Args, Serialize)]
pub struct PrevalenceArgs {
    #[command(flatten)]
    pub input: SchemeInput,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the most prominent topics of each label to this file.
    #[arg(long)]
    pub prominent: Option<PathBuf>,
    /// Topics per label in the `--prominent` table.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct UniformArgs {
    #[command(flatten)]
    pub input: SchemeInput,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TimeseriesArgs {
    #[command(flatten)]
    pub input: SchemeInput,
    #[arg(long)]
    pub out: PathBuf,
    /// `none` for raw counts or `per-label` for shares of each label's tokens.
    #[arg(long, default_value = "per-label")]
    pub normalize: String,
    /// Append a bar rendering of each series.
    #[arg(long)]
    pub sparkline: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PolysemyArgs {
    #[command(flatten)]
    pub input: ModelInput,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub top_n: usize,
    /// Rows to report; 0 reports all.
    #[arg(long, default_value_t = 0)]
    pub limit: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PosArgs {
    #[command(flatten)]
    pub input: ModelInput,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write each tag's share of all top-word slots to this file.
    #[arg(long)]
    pub composition: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub top_n: usize,
}
