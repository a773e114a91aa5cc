//! Labeled corpora: loading, statistics and seeded few-shot sampling.
//!
//! Labels are interned to dense ids in first-appearance order. CSV
//! files need `text,label` columns (RFC 4180 quoting); JSONL files
//! need one object per line with string `"text"` and `"label"` keys.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One text instance: UTF-8 content plus an optional label id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: usize,
    pub text: String,
    pub label: Option<u32>,
}

impl Document {
    pub fn bytes(&self) -> &[u8] {
        self.text.as_bytes()
    }

    /// Unicode scalar count of the text.
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// Input file format for corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown corpus format \"{other}\" (expected csv or jsonl)"),
            }),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Csv => "csv",
            CorpusFormat::Jsonl => "jsonl",
        })
    }
}

/// Ordered document collection with a label vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub docs: Vec<Document>,
    pub label_names: Vec<String>,
}

/// Table-style dataset statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_docs: usize,
    pub n_classes: usize,
    pub avg_words: f64,
    pub avg_chars: f64,
    pub vocab_size: usize,
}

impl LabeledCorpus {
    pub fn new(docs: Vec<Document>, label_names: Vec<String>) -> Self {
        LabeledCorpus { docs, label_names }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn label_name(&self, id: u32) -> &str {
        &self.label_names[id as usize]
    }

    /// Gold labels in document order; errors if any document is unlabeled.
    pub fn labels(&self) -> Result<Vec<u32>> {
        self.docs
            .iter()
            .map(|d| {
                d.label.ok_or_else(|| Error::Parse {
                    line: d.id + 1,
                    message: "document has no label".to_string(),
                })
            })
            .collect()
    }

    /// Document indices per class, class id ascending.
    pub fn docs_by_class(&self) -> Vec<Vec<usize>> {
        let mut per_class = vec![Vec::new(); self.label_names.len()];
        for (i, doc) in self.docs.iter().enumerate() {
            if let Some(l) = doc.label {
                per_class[l as usize].push(i);
            }
        }
        per_class
    }
}

struct LabelInterner {
    names: Vec<String>,
}

impl LabelInterner {
    fn new() -> Self {
        LabelInterner { names: Vec::new() }
    }

    fn intern(&mut self, name: &str) -> u32 {
        match self.names.iter().position(|n| n == name) {
            Some(i) => i as u32,
            None => {
                self.names.push(name.to_string());
                (self.names.len() - 1) as u32
            }
        }
    }
}

/// Load a labeled corpus from disk.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LabeledCorpus> {
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let corpus = match format {
        CorpusFormat::Csv => load_csv(file),
        CorpusFormat::Jsonl => load_jsonl(file),
    }?;
    if corpus.docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(corpus)
}

fn load_csv(file: File) -> Result<LabeledCorpus> {
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader.headers()?.clone();
    let text_col = headers.iter().position(|h| h == "text");
    let label_col = headers.iter().position(|h| h == "label");
    let (text_col, label_col) = match (text_col, label_col) {
        (Some(t), Some(l)) => (t, l),
        (None, _) => {
            return Err(Error::Parse {
                line: 1,
                message: "missing required column \"text\"".to_string(),
            })
        }
        (_, None) => {
            return Err(Error::Parse {
                line: 1,
                message: "missing required column \"label\"".to_string(),
            })
        }
    };

    let mut interner = LabelInterner::new();
    let mut docs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let text = record.get(text_col).ok_or_else(|| Error::Parse {
            line,
            message: "missing \"text\" field".to_string(),
        })?;
        let label = record.get(label_col).ok_or_else(|| Error::Parse {
            line,
            message: "missing \"label\" field".to_string(),
        })?;
        docs.push(Document {
            id: docs.len(),
            text: text.to_string(),
            label: Some(interner.intern(label)),
        });
    }
    Ok(LabeledCorpus::new(docs, interner.names))
}

fn load_jsonl(file: File) -> Result<LabeledCorpus> {
    #[derive(Deserialize)]
    struct Row {
        text: String,
        label: String,
    }

    let mut interner = LabelInterner::new();
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        docs.push(Document {
            id: docs.len(),
            text: row.text,
            label: Some(interner.intern(&row.label)),
        });
    }
    Ok(LabeledCorpus::new(docs, interner.names))
}

/// Write a corpus back out in the given format. Reloading yields
/// identical documents and label ids.
pub fn save_corpus(corpus: &LabeledCorpus, path: &Path, format: CorpusFormat) -> Result<()> {
    let file = File::create(path)?;
    match format {
        CorpusFormat::Csv => {
            let mut writer = csv::Writer::from_writer(file);
            writer.write_record(["text", "label"])?;
            for doc in &corpus.docs {
                let label = doc.label.map(|l| corpus.label_name(l)).unwrap_or("");
                writer.write_record([doc.text.as_str(), label])?;
            }
            writer.flush()?;
        }
        CorpusFormat::Jsonl => {
            let mut writer = std::io::BufWriter::new(file);
            for doc in &corpus.docs {
                let label = doc.label.map(|l| corpus.label_name(l)).unwrap_or("");
                let obj = serde_json::json!({ "text": doc.text, "label": label });
                writeln!(writer, "{obj}")?;
            }
        }
    }
    Ok(())
}

/// Whitespace-token and character statistics over the whole corpus.
/// Tokenization splits on Unicode whitespace, case-sensitive, no
/// punctuation stripping.
pub fn corpus_stats(corpus: &LabeledCorpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut total_words = 0usize;
    let mut total_chars = 0usize;
    let mut vocab: HashSet<&str> = HashSet::new();
    for doc in &corpus.docs {
        for token in doc.text.split_whitespace() {
            total_words += 1;
            vocab.insert(token);
        }
        total_chars += doc.char_len();
    }
    let n = corpus.len() as f64;
    Ok(CorpusStats {
        n_docs: corpus.len(),
        n_classes: corpus.n_classes(),
        avg_words: total_words as f64 / n,
        avg_chars: total_chars as f64 / n,
        vocab_size: vocab.len(),
    })
}

/// Seeded RNG used everywhere sampling happens. ChaCha20 keyed with
/// the 64-bit seed, so draws are identical across platforms.
pub fn sampling_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Draw exactly `n` documents per class without replacement.
///
/// Output order is class id ascending, then draw order. Document ids
/// are preserved from the parent corpus.
pub fn few_shot_sample(corpus: &LabeledCorpus, n: usize, seed: u64) -> Result<LabeledCorpus> {
    let mut rng = sampling_rng(seed);
    few_shot_sample_with_rng(corpus, n, &mut rng)
}

/// Like [`few_shot_sample`] but advancing a caller-owned RNG, so one
/// seed can drive several draws in a fixed sequence.
pub fn few_shot_sample_with_rng(
    corpus: &LabeledCorpus,
    n: usize,
    rng: &mut ChaCha20Rng,
) -> Result<LabeledCorpus> {
    let per_class = corpus.docs_by_class();
    let mut docs = Vec::with_capacity(n * per_class.len());
    for (class, members) in per_class.iter().enumerate() {
        if members.len() < n {
            return Err(Error::NotEnoughDocs {
                class: corpus.label_names[class].clone(),
                available: members.len(),
                requested: n,
            });
        }
        for idx in sample_indices(rng, members.len(), n) {
            docs.push(corpus.docs[members[idx]].clone());
        }
    }
    Ok(LabeledCorpus::new(docs, corpus.label_names.clone()))
}

/// Uniform subsample of up to `n` documents, order of draw.
pub fn subsample_docs(
    corpus: &LabeledCorpus,
    n: usize,
    rng: &mut ChaCha20Rng,
) -> LabeledCorpus {
    if n >= corpus.len() {
        return corpus.clone();
    }
    let picked = sample_indices(rng, corpus.len(), n);
    let docs = picked.into_iter().map(|i| corpus.docs[i].clone()).collect();
    LabeledCorpus::new(docs, corpus.label_names.clone())
}

/// Partial Fisher-Yates: `n` distinct indices from `0..len` in draw
/// order. Spelled out here so the sampling algorithm is pinned by
/// this crate rather than by a dependency's internals.
fn sample_indices(rng: &mut ChaCha20Rng, len: usize, n: usize) -> Vec<usize> {
    use rand::Rng;
    debug_assert!(n <= len);
    let mut pool: Vec<usize> = (0..len).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let j = rng.gen_range(i..len);
        pool.swap(i, j);
        out.push(pool[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn four_class_corpus(per_class: usize) -> LabeledCorpus {
        let names = ["w", "x", "y", "z"];
        let mut docs = Vec::new();
        for i in 0..per_class {
            for (c, name) in names.iter().enumerate() {
                docs.push(Document {
                    id: docs.len(),
                    text: format!("{name} doc {i}"),
                    label: Some(c as u32),
                });
            }
        }
        LabeledCorpus::new(docs, names.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn csv_load_interns_labels_in_order() {
        let f = write_temp("text,label\nhello,a\nworld,b\n", ".csv");
        let c = load_corpus(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.label_names, vec!["a", "b"]);
        assert_eq!(c.docs[0].label, Some(0));
        assert_eq!(c.docs[1].label, Some(1));
    }

    #[test]
    fn jsonl_duplicate_labels_share_id() {
        let f = write_temp(
            "{\"text\":\"one\",\"label\":\"sports\"}\n{\"text\":\"two\",\"label\":\"sports\"}\n",
            ".jsonl",
        );
        let c = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(c.label_names, vec!["sports"]);
        assert_eq!(c.docs[0].label, c.docs[1].label);
    }

    #[test]
    fn csv_missing_label_column_is_named() {
        let f = write_temp("text,category\nhello,a\n", ".csv");
        match load_corpus(f.path(), CorpusFormat::Csv) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("label")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_error() {
        let f = write_temp("", ".csv");
        assert!(load_corpus(f.path(), CorpusFormat::Csv).is_err());
    }

    #[test]
    fn stats_small_examples() {
        let c = LabeledCorpus::new(
            vec![
                Document {
                    id: 0,
                    text: "a b".into(),
                    label: Some(0),
                },
                Document {
                    id: 1,
                    text: "a".into(),
                    label: Some(0),
                },
            ],
            vec!["only".into()],
        );
        let s = corpus_stats(&c).unwrap();
        assert_eq!(s.avg_words, 1.5);
        assert_eq!(s.avg_chars, 2.0);
        assert_eq!(s.vocab_size, 2);

        let single = LabeledCorpus::new(
            vec![Document {
                id: 0,
                text: "xx".into(),
                label: Some(0),
            }],
            vec!["only".into()],
        );
        let s = corpus_stats(&single).unwrap();
        assert_eq!(s.avg_words, 1.0);
        assert_eq!(s.avg_chars, 2.0);
        assert_eq!(s.vocab_size, 1);
    }

    #[test]
    fn few_shot_counts_and_determinism() {
        let c = four_class_corpus(8);
        let s = few_shot_sample(&c, 5, 42).unwrap();
        assert_eq!(s.len(), 20);
        let per_class = s.docs_by_class();
        assert!(per_class.iter().all(|m| m.len() == 5));

        let again = few_shot_sample(&c, 5, 42).unwrap();
        let ids: Vec<usize> = s.docs.iter().map(|d| d.id).collect();
        let ids2: Vec<usize> = again.docs.iter().map(|d| d.id).collect();
        assert_eq!(ids, ids2);
    }

    #[test]
    fn few_shot_too_small_class_names_it() {
        let c = four_class_corpus(3);
        match few_shot_sample(&c, 5, 1) {
            Err(Error::NotEnoughDocs { class, .. }) => assert_eq!(class, "w"),
            other => panic!("expected sampling error, got {other:?}"),
        }
    }

    #[test]
    fn seeds_differ_with_high_probability() {
        let c = four_class_corpus(16);
        let base: Vec<usize> = few_shot_sample(&c, 5, 0)
            .unwrap()
            .docs
            .iter()
            .map(|d| d.id)
            .collect();
        let mut distinct = 0;
        for seed in 1..=100u64 {
            let ids: Vec<usize> = few_shot_sample(&c, 5, seed)
                .unwrap()
                .docs
                .iter()
                .map(|d| d.id)
                .collect();
            if ids != base {
                distinct += 1;
            }
        }
        assert!(distinct >= 99, "only {distinct}/100 seeds differed");
    }

    #[test]
    fn round_trip_csv_and_jsonl() {
        let c = four_class_corpus(2);
        for format in [CorpusFormat::Csv, CorpusFormat::Jsonl] {
            let f = tempfile::NamedTempFile::new().unwrap();
            save_corpus(&c, f.path(), format).unwrap();
            let reloaded = load_corpus(f.path(), format).unwrap();
            assert_eq!(reloaded, c, "{format}");
        }
    }
}
