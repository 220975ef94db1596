//! Corpus data model and the binary token-embedding format.
//!
//! A corpus file holds a fixed 24-byte header followed by fixed-width records.
//! All integers and floats are little-endian:
//!
//! ```text
//! header : magic "TKC1" | version u32 | dim u32 | token_count u64 | flags u32
//! record : doc_id u32 | word_index u32 | type_id u32 | dim x f32
//! ```
//!
//! Flag bit 0 marks a file whose records are subword rows that still need to be
//! averaged into word tokens (see [`merge_subwords`]). Word types and document
//! labels live in tab-separated sidecar files next to the binary file.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

pub const CORPUS_MAGIC: [u8; 4] = *b"TKC1";
pub const CORPUS_VERSION: u32 = 1;
pub const HEADER_LEN: u64 = 24;

const FLAG_SUBWORD_GROUPS: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusHeader {
    pub version: u32,
    pub dim: u32,
    pub token_count: u64,
    pub has_subword_groups: bool,
}

impl CorpusHeader {
    pub fn record_len(&self) -> u64 {
        record_len(self.dim as usize)
    }

    /// Exact file length implied by the header.
    pub fn file_len(&self) -> u64 {
        HEADER_LEN + self.token_count * self.record_len()
    }
}

fn record_len(dim: usize) -> u64 {
    12 + 4 * dim as u64
}

/// One token occurrence together with its embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenRecord {
    pub doc_id: u32,
    pub word_index: u32,
    pub type_id: u32,
    pub vector: Vec<f32>,
}

impl TokenRecord {
    pub fn token(&self) -> Token {
        Token {
            doc_id: self.doc_id,
            word_index: self.word_index,
            type_id: self.type_id,
        }
    }
}

/// Position and type of a token without its vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Token {
    pub doc_id: u32,
    pub word_index: u32,
    pub type_id: u32,
}

/// Read `buf.len()` bytes unless EOF comes first; returns how many were read.
fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Sequential decoder over a corpus byte stream.
///
/// Yields exactly `header.token_count` records, then verifies the stream is
/// exhausted.
pub struct CorpusReader<R> {
    inner: R,
    header: CorpusHeader,
    offset: u64,
    yielded: u64,
    last: Option<(u32, u32)>,
    buf: Vec<u8>,
    done: bool,
}

impl<R: Read> CorpusReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut raw = [0u8; HEADER_LEN as usize];
        let got = read_full(&mut inner, &mut raw)?;
        if got >= 4 && raw[..4] != CORPUS_MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                &raw[..4],
                CORPUS_MAGIC
            )));
        }
        if got < raw.len() {
            return Err(Error::Corruption {
                offset: got as u64,
                reason: "truncated header".into(),
            });
        }
        let mut cur = &raw[4..];
        let version = cur.read_u32::<LittleEndian>()?;
        let dim = cur.read_u32::<LittleEndian>()?;
        let token_count = cur.read_u64::<LittleEndian>()?;
        let flags = cur.read_u32::<LittleEndian>()?;
        if version != CORPUS_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {version}, expected {CORPUS_VERSION}"
            )));
        }
        if dim == 0 {
            return Err(Error::Format("dimension must be positive".into()));
        }
        if flags & !FLAG_SUBWORD_GROUPS != 0 {
            return Err(Error::Format(format!("unknown flag bits {flags:#x}")));
        }
        let header = CorpusHeader {
            version,
            dim,
            token_count,
            has_subword_groups: flags & FLAG_SUBWORD_GROUPS != 0,
        };
        Ok(Self {
            inner,
            buf: vec![0u8; header.record_len() as usize],
            header,
            offset: HEADER_LEN,
            yielded: 0,
            last: None,
            done: false,
        })
    }

    pub fn header(&self) -> &CorpusHeader {
        &self.header
    }

    fn next_record(&mut self) -> Result<Option<TokenRecord>> {
        if self.yielded == self.header.token_count {
            let mut probe = [0u8; 1];
            if read_full(&mut self.inner, &mut probe)? != 0 {
                return Err(Error::Corruption {
                    offset: self.offset,
                    reason: format!(
                        "trailing bytes after {} declared records",
                        self.header.token_count
                    ),
                });
            }
            return Ok(None);
        }
        let got = read_full(&mut self.inner, &mut self.buf)?;
        if got < self.buf.len() {
            return Err(Error::Corruption {
                offset: self.offset + got as u64,
                reason: format!(
                    "truncated inside record {} of {}",
                    self.yielded, self.header.token_count
                ),
            });
        }
        let mut cur = &self.buf[..];
        let doc_id = cur.read_u32::<LittleEndian>()?;
        let word_index = cur.read_u32::<LittleEndian>()?;
        let type_id = cur.read_u32::<LittleEndian>()?;
        let mut vector = vec![0f32; self.header.dim as usize];
        cur.read_f32_into::<LittleEndian>(&mut vector)?;
        if let Some(bad) = vector.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "record {} component {bad} is not finite",
                self.yielded
            )));
        }
        if let Some((prev_doc, prev_word)) = self.last {
            if prev_doc == doc_id && word_index < prev_word {
                return Err(Error::Ordering(format!(
                    "record {}: word_index {word_index} follows {prev_word} in document {doc_id}",
                    self.yielded
                )));
            }
        }
        self.last = Some((doc_id, word_index));
        self.offset += self.buf.len() as u64;
        self.yielded += 1;
        Ok(Some(TokenRecord {
            doc_id,
            word_index,
            type_id,
            vector,
        }))
    }
}

impl<R: Read> Iterator for CorpusReader<R> {
    type Item = Result<TokenRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Ok(Some(rec)) => Some(Ok(rec)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Open a corpus file for streaming.
///
/// A file longer than its header implies is rejected up front: the payload
/// cannot be `token_count` records of the declared dimension.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<CorpusReader<BufReader<File>>> {
    let file = File::open(path.as_ref())?;
    let len = file.metadata()?.len();
    let reader = CorpusReader::new(BufReader::new(file))?;
    let expected = reader.header().file_len();
    if len > expected {
        return Err(Error::Format(format!(
            "file holds {len} bytes but dim {} x {} records needs {expected}",
            reader.header().dim,
            reader.header().token_count
        )));
    }
    Ok(reader)
}

/// Encoder for the corpus format. The token count is patched on [`finish`](Self::finish).
pub struct CorpusWriter<W: Write + Seek> {
    inner: W,
    dim: usize,
    count: u64,
}

impl<W: Write + Seek> CorpusWriter<W> {
    pub fn new(mut inner: W, dim: usize, has_subword_groups: bool) -> Result<Self> {
        if dim == 0 || dim > u32::MAX as usize {
            return Err(Error::Format(format!("invalid dimension {dim}")));
        }
        inner.write_all(&CORPUS_MAGIC)?;
        inner.write_u32::<LittleEndian>(CORPUS_VERSION)?;
        inner.write_u32::<LittleEndian>(dim as u32)?;
        inner.write_u64::<LittleEndian>(0)?;
        inner.write_u32::<LittleEndian>(if has_subword_groups {
            FLAG_SUBWORD_GROUPS
        } else {
            0
        })?;
        Ok(Self {
            inner,
            dim,
            count: 0,
        })
    }

    pub fn write_parts(&mut self, token: Token, vector: &[f32]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("refusing to write a non-finite component".into()));
        }
        self.inner.write_u32::<LittleEndian>(token.doc_id)?;
        self.inner.write_u32::<LittleEndian>(token.word_index)?;
        self.inner.write_u32::<LittleEndian>(token.type_id)?;
        for &v in vector {
            self.inner.write_f32::<LittleEndian>(v)?;
        }
        self.count += 1;
        Ok(())
    }

    pub fn write(&mut self, record: &TokenRecord) -> Result<()> {
        self.write_parts(record.token(), &record.vector)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.seek(SeekFrom::Start(12))?;
        self.inner.write_u64::<LittleEndian>(self.count)?;
        self.inner.seek(SeekFrom::End(0))?;
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Create a corpus file at `path`.
pub fn create_corpus(
    path: impl AsRef<Path>,
    dim: usize,
    has_subword_groups: bool,
) -> Result<CorpusWriter<BufWriter<File>>> {
    let file = File::create(path.as_ref())?;
    CorpusWriter::new(BufWriter::new(file), dim, has_subword_groups)
}

/// Word-level corpus held in memory, vectors stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    dim: usize,
    tokens: Vec<Token>,
    vectors: Vec<f32>,
}

impl Corpus {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            tokens: Vec::new(),
            vectors: Vec::new(),
        }
    }

    pub fn from_parts(dim: usize, tokens: Vec<Token>, vectors: Vec<f32>) -> Result<Self> {
        if vectors.len() != tokens.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: tokens.len() * dim,
                actual: vectors.len(),
            });
        }
        Ok(Self {
            dim,
            tokens,
            vectors,
        })
    }

    pub fn from_records<I>(dim: usize, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = Result<TokenRecord>>,
    {
        let mut corpus = Corpus::new(dim);
        for rec in records {
            corpus.push(rec?)?;
        }
        Ok(corpus)
    }

    /// Load a word-level corpus. Files that still carry subword rows are rejected.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let reader = read_corpus(path)?;
        let header = *reader.header();
        if header.has_subword_groups {
            return Err(Error::Format(
                "corpus holds subword rows; merge them first".into(),
            ));
        }
        let mut corpus = Corpus::new(header.dim as usize);
        corpus.tokens.reserve(header.token_count as usize);
        for rec in reader {
            corpus.push(rec?)?;
        }
        Ok(corpus)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = create_corpus(path, self.dim, false)?;
        for (i, tok) in self.tokens.iter().enumerate() {
            writer.write_parts(*tok, self.vector(i))?;
        }
        writer.finish()?;
        Ok(())
    }

    pub fn push(&mut self, record: TokenRecord) -> Result<()> {
        if record.vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: record.vector.len(),
            });
        }
        self.tokens.push(record.token());
        self.vectors.extend_from_slice(&record.vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    /// One past the largest document id present.
    pub fn doc_count(&self) -> usize {
        self.tokens
            .iter()
            .map(|t| t.doc_id as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn records(&self) -> impl Iterator<Item = TokenRecord> + '_ {
        self.tokens.iter().enumerate().map(|(i, t)| TokenRecord {
            doc_id: t.doc_id,
            word_index: t.word_index,
            type_id: t.type_id,
            vector: self.vector(i).to_vec(),
        })
    }

    /// Type ids of each document in token order; index = doc id.
    pub fn documents(&self) -> Vec<Vec<u32>> {
        let mut docs = vec![Vec::new(); self.doc_count()];
        for t in &self.tokens {
            docs[t.doc_id as usize].push(t.type_id);
        }
        docs
    }

    /// Check every token's type id against the vocabulary.
    pub fn check_types(&self, vocab: &Vocabulary) -> Result<()> {
        if let Some((i, t)) = self
            .tokens
            .iter()
            .enumerate()
            .find(|(_, t)| t.type_id as usize >= vocab.len())
        {
            return Err(Error::Integrity(format!(
                "token {i} has type_id {} but vocabulary holds {} types",
                t.type_id,
                vocab.len()
            )));
        }
        Ok(())
    }
}

/// Average subword rows into word tokens.
///
/// Rows must arrive grouped by `(doc_id, word_index)`, documents contiguous.
/// Each group becomes one record whose vector is the component-wise mean of
/// its rows, accumulated in `f64`.
pub fn merge_subwords<I>(rows: I) -> MergeSubwords<I::IntoIter>
where
    I: IntoIterator<Item = Result<TokenRecord>>,
{
    MergeSubwords {
        rows: rows.into_iter(),
        pending: None,
        finished_docs: HashSet::new(),
        done: false,
    }
}

pub struct MergeSubwords<I> {
    rows: I,
    pending: Option<TokenRecord>,
    finished_docs: HashSet<u32>,
    done: bool,
}

impl<I> MergeSubwords<I>
where
    I: Iterator<Item = Result<TokenRecord>>,
{
    fn take_next(&mut self) -> Result<Option<TokenRecord>> {
        let first = match self.pending.take() {
            Some(r) => r,
            None => match self.rows.next() {
                Some(r) => r?,
                None => return Ok(None),
            },
        };
        let dim = first.vector.len();
        let mut sum: Vec<f64> = first.vector.iter().map(|&v| v as f64).collect();
        let mut n = 1usize;
        loop {
            match self.rows.next() {
                None => break,
                Some(row) => {
                    let row = row?;
                    if row.doc_id == first.doc_id && row.word_index == first.word_index {
                        if row.type_id != first.type_id {
                            return Err(Error::Integrity(format!(
                                "subword group ({}, {}) mixes type ids {} and {}",
                                first.doc_id, first.word_index, first.type_id, row.type_id
                            )));
                        }
                        if row.vector.len() != dim {
                            return Err(Error::DimensionMismatch {
                                expected: dim,
                                actual: row.vector.len(),
                            });
                        }
                        for (s, &v) in sum.iter_mut().zip(&row.vector) {
                            *s += v as f64;
                        }
                        n += 1;
                    } else {
                        self.check_order(&first, &row)?;
                        self.pending = Some(row);
                        break;
                    }
                }
            }
        }
        let vector = sum.into_iter().map(|s| (s / n as f64) as f32).collect();
        Ok(Some(TokenRecord {
            vector,
            ..first
        }))
    }

    fn check_order(&mut self, prev: &TokenRecord, next: &TokenRecord) -> Result<()> {
        if next.doc_id == prev.doc_id {
            if next.word_index < prev.word_index {
                return Err(Error::Ordering(format!(
                    "document {}: word {} appears after word {}",
                    next.doc_id, next.word_index, prev.word_index
                )));
            }
        } else {
            self.finished_docs.insert(prev.doc_id);
            if self.finished_docs.contains(&next.doc_id) {
                return Err(Error::Ordering(format!(
                    "document {} resumes after other documents",
                    next.doc_id
                )));
            }
        }
        Ok(())
    }
}

impl<I> Iterator for MergeSubwords<I>
where
    I: Iterator<Item = Result<TokenRecord>>,
{
    type Item = Result<TokenRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.take_next() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub surface: String,
    pub doc_frequency: u64,
    pub pos_tag: Option<String>,
}

/// Word-type table. Type id = position in `entries`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, u32>,
    total_docs: u64,
}

impl Vocabulary {
    pub fn new(entries: Vec<VocabEntry>, total_docs: u64) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.surface.is_empty() || e.surface.contains(['\t', '\n', '\r']) {
                return Err(Error::Format(format!(
                    "type {i}: surface form {:?} is empty or contains tab/newline",
                    e.surface
                )));
            }
            if e.doc_frequency == 0 || e.doc_frequency > total_docs {
                return Err(Error::Integrity(format!(
                    "type {:?}: doc_frequency {} outside 1..={total_docs}",
                    e.surface, e.doc_frequency
                )));
            }
            if index.insert(e.surface.clone(), i as u32).is_some() {
                return Err(Error::Integrity(format!(
                    "duplicate surface form {:?}",
                    e.surface
                )));
            }
        }
        Ok(Self {
            entries,
            index,
            total_docs,
        })
    }

    /// Build a vocabulary whose doc frequencies are counted from `docs`
    /// (type ids per document). Types that never occur are dropped and the
    /// returned remap gives each old id its new id.
    pub fn rebuild(
        surfaces: &[(String, Option<String>)],
        docs: &[Vec<u32>],
    ) -> Result<(Vocabulary, Vec<Option<u32>>)> {
        let mut df = vec![0u64; surfaces.len()];
        let mut seen = HashSet::new();
        for doc in docs {
            seen.clear();
            for &t in doc {
                let slot = df.get_mut(t as usize).ok_or_else(|| {
                    Error::Integrity(format!(
                        "type_id {t} outside vocabulary of {}",
                        surfaces.len()
                    ))
                })?;
                if seen.insert(t) {
                    *slot += 1;
                }
            }
        }
        let total_docs = docs.iter().filter(|d| !d.is_empty()).count() as u64;
        let mut remap = vec![None; surfaces.len()];
        let mut entries = Vec::new();
        for (i, ((surface, pos), &count)) in surfaces.iter().zip(&df).enumerate() {
            if count > 0 {
                remap[i] = Some(entries.len() as u32);
                entries.push(VocabEntry {
                    surface: surface.clone(),
                    doc_frequency: count,
                    pos_tag: pos.clone(),
                });
            }
        }
        Ok((Vocabulary::new(entries, total_docs)?, remap))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_docs(&self) -> u64 {
        self.total_docs
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn get(&self, type_id: u32) -> Option<&VocabEntry> {
        self.entries.get(type_id as usize)
    }

    pub fn surface(&self, type_id: u32) -> &str {
        &self.entries[type_id as usize].surface
    }

    pub fn id_of(&self, surface: &str) -> Option<u32> {
        self.index.get(surface).copied()
    }

    pub fn pos_tag(&self, type_id: u32) -> Option<&str> {
        self.get(type_id).and_then(|e| e.pos_tag.as_deref())
    }

    /// Parse the sidecar: an optional `# total_docs=N` line, then
    /// `surface \t doc_frequency \t pos` per type (`-` for no tag).
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut total_docs = None;
        let mut entries = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("total_docs=") {
                    total_docs = Some(v.trim().parse::<u64>().map_err(|e| {
                        Error::Format(format!("line {}: bad total_docs: {e}", lineno + 1))
                    })?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Format(format!(
                    "vocabulary line {}: expected 3 tab-separated fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let doc_frequency = fields[1].parse::<u64>().map_err(|e| {
                Error::Format(format!("vocabulary line {}: bad doc_frequency: {e}", lineno + 1))
            })?;
            let pos_tag = match fields[2] {
                "-" | "" => None,
                tag => Some(tag.to_string()),
            };
            entries.push(VocabEntry {
                surface: fields[0].to_string(),
                doc_frequency,
                pos_tag,
            });
        }
        let total_docs = match total_docs {
            Some(n) => n,
            None => entries.iter().map(|e| e.doc_frequency).max().unwrap_or(0),
        };
        Vocabulary::new(entries, total_docs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# total_docs={}", self.total_docs)?;
        for e in &self.entries {
            writeln!(
                out,
                "{}\t{}\t{}",
                e.surface,
                e.doc_frequency,
                e.pos_tag.as_deref().unwrap_or("-")
            )?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

/// Labels attached to one document, keyed by partition scheme.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DocumentMeta {
    pub doc_id: u32,
    pub labels: BTreeMap<String, String>,
}

/// All documents' metadata, each doc id exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DocumentTable {
    docs: BTreeMap<u32, DocumentMeta>,
}

impl DocumentTable {
    pub fn new(docs: impl IntoIterator<Item = DocumentMeta>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for d in docs {
            let id = d.doc_id;
            if map.insert(id, d).is_some() {
                return Err(Error::Metadata(format!("doc_id {id} listed twice")));
            }
        }
        Ok(Self { docs: map })
    }

    pub fn get(&self, doc_id: u32) -> Option<&DocumentMeta> {
        self.docs.get(&doc_id)
    }

    pub fn label(&self, doc_id: u32, scheme: &str) -> Option<&str> {
        self.get(doc_id)
            .and_then(|d| d.labels.get(scheme))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DocumentMeta> {
        self.docs.values()
    }

    /// Every document id used by `corpus` must be present.
    pub fn check_covers(&self, corpus: &Corpus) -> Result<()> {
        for t in corpus.tokens() {
            if !self.docs.contains_key(&t.doc_id) {
                return Err(Error::Metadata(format!(
                    "doc_id {} has no metadata entry",
                    t.doc_id
                )));
            }
        }
        Ok(())
    }

    /// `doc_id \t name=value \t name=value ...` per line.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut docs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let doc_id = fields
                .next()
                .unwrap_or_default()
                .trim()
                .parse::<u32>()
                .map_err(|e| Error::Format(format!("metadata line {}: bad doc_id: {e}", lineno + 1)))?;
            let mut labels = BTreeMap::new();
            for pair in fields.filter(|f| !f.is_empty()) {
                let (name, value) = pair.split_once('=').ok_or_else(|| {
                    Error::Format(format!(
                        "metadata line {}: expected name=value, got {pair:?}",
                        lineno + 1
                    ))
                })?;
                labels.insert(name.to_string(), value.to_string());
            }
            docs.push(DocumentMeta { doc_id, labels });
        }
        DocumentTable::new(docs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        for d in self.docs.values() {
            write!(out, "{}", d.doc_id)?;
            for (k, v) in &d.labels {
                write!(out, "\t{k}={v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

/// Conventional sidecar locations next to a corpus file.
pub fn vocab_path(corpus: &Path) -> PathBuf {
    corpus.with_extension("vocab")
}

pub fn meta_path(corpus: &Path) -> PathBuf {
    corpus.with_extension("meta")
}
