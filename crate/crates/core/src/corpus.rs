//! Parallel corpora and system outputs in line-delimited JSON.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lang::LanguageTag;
use crate::text::nfc;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("empty corpus")]
    Empty,
    #[error("duplicate pair id {0:?}")]
    DuplicateId(String),
    #[error("duplicate output for pair {pair_id:?} from system {system:?}")]
    DuplicateOutput { pair_id: String, system: String },
    #[error("train size {train_size} exceeds corpus size {len}")]
    SplitTooLarge { train_size: usize, len: usize },
}

fn record_error(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Record {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    /// Serialized as `null`.
    #[serde(skip)]
    Unsplit,
}

/// A toxic sentence with its human-written non-toxic references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelPair {
    pub id: String,
    pub lang: LanguageTag,
    pub toxic: String,
    pub references: Vec<String>,
    pub split: Split,
}

impl ParallelPair {
    /// The reference used when an analysis needs exactly one.
    pub fn first_reference(&self) -> &str {
        &self.references[0]
    }
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    id: String,
    lang: LanguageTag,
    toxic: String,
    references: Vec<String>,
    split: Option<Split>,
}

impl From<&ParallelPair> for PairRecord {
    fn from(p: &ParallelPair) -> Self {
        PairRecord {
            id: p.id.clone(),
            lang: p.lang,
            toxic: p.toxic.clone(),
            references: p.references.clone(),
            split: match p.split {
                Split::Unsplit => None,
                s => Some(s),
            },
        }
    }
}

/// Pairs of a single language, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub lang: LanguageTag,
    pub pairs: Vec<ParallelPair>,
}

impl Corpus {
    /// Builds a corpus after checking language agreement, non-empty fields
    /// and id uniqueness. Text is NFC-normalized.
    pub fn new(lang: LanguageTag, pairs: Vec<ParallelPair>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(pairs.len());
        for (i, p) in pairs.into_iter().enumerate() {
            let pair = validate_pair(p, lang, i + 1)?;
            if !seen.insert(pair.id.clone()) {
                return Err(CorpusError::DuplicateId(pair.id));
            }
            out.push(pair);
        }
        Ok(Corpus { lang, pairs: out })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ParallelPair> {
        self.pairs.iter().find(|p| p.id == id)
    }

    pub fn index(&self) -> HashMap<&str, &ParallelPair> {
        self.pairs.iter().map(|p| (p.id.as_str(), p)).collect()
    }

    /// Pairs whose split tag equals `split`.
    pub fn filter_split(&self, split: Split) -> Corpus {
        Corpus {
            lang: self.lang,
            pairs: self.pairs.iter().filter(|p| p.split == split).cloned().collect(),
        }
    }

    /// `(train, test)` counts among tagged pairs.
    pub fn split_counts(&self) -> (usize, usize) {
        self.pairs.iter().fold((0, 0), |(tr, te), p| match p.split {
            Split::Train => (tr + 1, te),
            Split::Test => (tr, te + 1),
            Split::Unsplit => (tr, te),
        })
    }
}

fn validate_pair(mut p: ParallelPair, lang: LanguageTag, line: usize) -> Result<ParallelPair, CorpusError> {
    if p.lang != lang {
        return Err(record_error(
            line,
            format!("language mismatch: record is {}, corpus is {}", p.lang, lang),
        ));
    }
    if p.id.is_empty() {
        return Err(record_error(line, "empty id"));
    }
    p.toxic = nfc(&p.toxic);
    if p.toxic.trim().is_empty() {
        return Err(record_error(line, "empty toxic text"));
    }
    if p.references.is_empty() {
        return Err(record_error(line, "no references"));
    }
    for r in p.references.iter_mut() {
        *r = nfc(r);
        if r.trim().is_empty() {
            return Err(record_error(line, "empty reference"));
        }
    }
    Ok(p)
}

fn read_file(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses corpus records from line-delimited JSON. Blank lines are skipped
/// but still counted for line numbers.
pub fn parse_corpus(content: &str, lang: LanguageTag) -> Result<Corpus, CorpusError> {
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PairRecord =
            serde_json::from_str(line).map_err(|e| record_error(lineno, format!("malformed record: {e}")))?;
        let pair = validate_pair(
            ParallelPair {
                id: rec.id,
                lang: rec.lang,
                toxic: rec.toxic,
                references: rec.references,
                split: rec.split.unwrap_or(Split::Unsplit),
            },
            lang,
            lineno,
        )?;
        if !seen.insert(pair.id.clone()) {
            return Err(record_error(lineno, format!("duplicate pair id {:?}", pair.id)));
        }
        pairs.push(pair);
    }
    if pairs.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(Corpus { lang, pairs })
}

pub fn load_corpus(path: impl AsRef<Path>, lang: LanguageTag) -> Result<Corpus, CorpusError> {
    parse_corpus(&read_file(path.as_ref())?, lang)
}

/// Canonical serialization: one record per line, fixed key order, NFC text.
pub fn corpus_to_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    for p in &corpus.pairs {
        out.push_str(&serde_json::to_string(&PairRecord::from(p)).expect("corpus record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<(), CorpusError> {
    write_file(path.as_ref(), &corpus_to_jsonl(corpus))
}

fn write_file(path: &Path, content: &str) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(content.as_bytes()).map_err(io_err)
}

/// Seeded Fisher-Yates shuffle followed by a prefix split into
/// `(train, test)`.
pub fn split_corpus(corpus: &Corpus, train_size: usize, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    if train_size > corpus.len() {
        return Err(CorpusError::SplitTooLarge {
            train_size,
            len: corpus.len(),
        });
    }
    let mut pairs = corpus.pairs.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    let test: Vec<ParallelPair> = pairs
        .split_off(train_size)
        .into_iter()
        .map(|mut p| {
            p.split = Split::Test;
            p
        })
        .collect();
    for p in pairs.iter_mut() {
        p.split = Split::Train;
    }
    Ok((
        Corpus {
            lang: corpus.lang,
            pairs,
        },
        Corpus {
            lang: corpus.lang,
            pairs: test,
        },
    ))
}

/// One detoxified sentence produced by a system for a corpus pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemOutput {
    pub pair_id: String,
    pub lang: LanguageTag,
    pub system: String,
    pub detoxified: String,
    /// Audit data such as backtranslation intermediates or the
    /// fully-deleted marker.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Map<String, serde_json::Value>>,
}

impl SystemOutput {
    pub fn new(pair: &ParallelPair, system: &str, detoxified: String) -> Self {
        SystemOutput {
            pair_id: pair.id.clone(),
            lang: pair.lang,
            system: system.to_string(),
            detoxified,
            meta: None,
        }
    }

    pub fn with_meta(mut self, key: &str, value: serde_json::Value) -> Self {
        self.meta.get_or_insert_with(Default::default).insert(key.to_string(), value);
        self
    }

    pub fn meta_flag(&self, key: &str) -> bool {
        self.meta
            .as_ref()
            .and_then(|m| m.get(key))
            .and_then(|v| v.as_bool())
            .unwrap_or(false)
    }
}

/// Parses system outputs. Pair ids are not resolved here; joining against a
/// corpus happens at evaluation time.
pub fn parse_outputs(content: &str) -> Result<Vec<SystemOutput>, CorpusError> {
    let mut outputs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut out: SystemOutput =
            serde_json::from_str(line).map_err(|e| record_error(lineno, format!("malformed output: {e}")))?;
        out.detoxified = nfc(&out.detoxified);
        if !seen.insert((out.pair_id.clone(), out.system.clone())) {
            return Err(CorpusError::DuplicateOutput {
                pair_id: out.pair_id,
                system: out.system,
            });
        }
        outputs.push(out);
    }
    Ok(outputs)
}

pub fn load_outputs(path: impl AsRef<Path>) -> Result<Vec<SystemOutput>, CorpusError> {
    parse_outputs(&read_file(path.as_ref())?)
}

pub fn outputs_to_jsonl(outputs: &[SystemOutput]) -> String {
    let mut out = String::new();
    for o in outputs {
        out.push_str(&serde_json::to_string(o).expect("output record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_outputs(path: impl AsRef<Path>, outputs: &[SystemOutput]) -> Result<(), CorpusError> {
    write_file(path.as_ref(), &outputs_to_jsonl(outputs))
}
