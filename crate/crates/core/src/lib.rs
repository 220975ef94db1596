//! Topic modeling by clustering token-level contextual embeddings.
//!
//! The pipeline: read a binary token corpus ([`store`]), drop too rare and
//! too common types ([`filter`]), optionally project vectors to fewer
//! dimensions ([`reduce`]), cluster unit vectors with spherical k-means
//! ([`cluster`]) or sample an LDA baseline ([`lda`]), summarize hard
//! assignments as topics ([`topics`]), and score or analyze them
//! ([`metrics`], [`analysis`]).

pub mod analysis;
pub mod cluster;
pub mod cooccur;
pub mod error;
pub mod filter;
pub mod lda;
pub mod metrics;
pub mod modelfile;
pub mod reduce;
pub mod store;
pub mod topics;

pub use cluster::{ClusterModel, KMeansConfig, UnitVectors};
pub use cooccur::CooccurrenceCounts;
pub use error::{Error, Result};
pub use filter::FilterPolicy;
pub use lda::LdaState;
pub use metrics::{CoherenceConfig, ExternalScore, TopicMetrics};
pub use modelfile::{AssignmentModel, ModelKind};
pub use reduce::{Method, Reducer, ReductionConfig};
pub use store::{
    Corpus, CorpusHeader, DocumentMeta, DocumentTable, Token, TokenRecord, VocabEntry, Vocabulary,
};
pub use topics::TopicSummary;
