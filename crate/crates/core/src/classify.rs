//! Label prediction from distances or compressed lengths.
//!
//! Three deciders share this module: kNN over a distance row, the
//! cross-entropy compressor classifier over per-class concatenated
//! buffers, and the text-length baseline that feeds the same kNN path.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compressor::CompressorBackend;
use crate::corpus::{Document, LabeledCorpus};
use crate::distance::{joint_len, JOIN_SEPARATOR};
use crate::error::{Error, Result};

/// Deterministic replacement for majority-vote tie behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Among vote-tied labels, pick the one whose closest member is
    /// nearest; remaining ties fall back to the lowest label id.
    NearestAmongTied,
    /// Always the smallest tied label id.
    LowestLabelId,
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" | "nearest-among-tied" => Ok(TiePolicy::NearestAmongTied),
            "lowest" | "lowest-label-id" => Ok(TiePolicy::LowestLabelId),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown tie policy \"{other}\""),
            }),
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiePolicy::NearestAmongTied => "nearest-among-tied",
            TiePolicy::LowestLabelId => "lowest-label-id",
        })
    }
}

/// How a prediction is counted against the gold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoringMode {
    /// 1 iff the resolved prediction equals gold.
    Strict,
    /// 1 iff gold is among the labels tied for the top vote count in
    /// the k-neighborhood, i.e. the most favorable tie resolution.
    MaxPossible,
}

impl FromStr for ScoringMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(ScoringMode::Strict),
            "max-possible" | "max_possible" => Ok(ScoringMode::MaxPossible),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown scoring mode \"{other}\""),
            }),
        }
    }
}

impl fmt::Display for ScoringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoringMode::Strict => "strict",
            ScoringMode::MaxPossible => "max-possible",
        })
    }
}

/// The k smallest distances in ascending order; equal distances keep
/// ascending train-index order.
pub fn knn_neighbors(row: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
    if k == 0 || k > row.len() {
        return Err(Error::InvalidK { k, cols: row.len() });
    }
    let mut order: Vec<usize> = (0..row.len()).collect();
    // Stable sort on distance only, so ties keep index order.
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    Ok(order.into_iter().take(k).map(|i| (i, row[i])).collect())
}

/// Labels tied for the maximum vote count among the k neighbors,
/// each with the distance of its closest member. Sorted by label id.
fn vote_leaders(
    neighbors: &[(usize, f64)],
    labels: &[u32],
) -> Vec<(u32, f64)> {
    use std::collections::BTreeMap;
    let mut votes: BTreeMap<u32, (usize, f64)> = BTreeMap::new();
    for &(idx, dist) in neighbors {
        let entry = votes.entry(labels[idx]).or_insert((0, f64::INFINITY));
        entry.0 += 1;
        if dist < entry.1 {
            entry.1 = dist;
        }
    }
    let max_votes = votes.values().map(|(c, _)| *c).max().unwrap_or(0);
    votes
        .into_iter()
        .filter(|(_, (c, _))| *c == max_votes)
        .map(|(label, (_, nearest))| (label, nearest))
        .collect()
}

/// Majority label among the k nearest neighbors, with deterministic
/// tie resolution.
pub fn knn_predict(row: &[f64], labels: &[u32], k: usize, policy: TiePolicy) -> Result<u32> {
    let neighbors = knn_neighbors(row, k)?;
    let leaders = vote_leaders(&neighbors, labels);
    let winner = match policy {
        TiePolicy::LowestLabelId => leaders[0].0,
        TiePolicy::NearestAmongTied => {
            // BTreeMap order makes the first minimum the lowest label id.
            let mut best = leaders[0];
            for &cand in &leaders[1..] {
                if cand.1 < best.1 {
                    best = cand;
                }
            }
            best.0
        }
    };
    Ok(winner)
}

/// 0/1 correctness of one row under the given scoring mode.
pub fn knn_score(
    row: &[f64],
    labels: &[u32],
    k: usize,
    gold: u32,
    mode: ScoringMode,
    policy: TiePolicy,
) -> Result<bool> {
    match mode {
        ScoringMode::Strict => Ok(knn_predict(row, labels, k, policy)? == gold),
        ScoringMode::MaxPossible => {
            let neighbors = knn_neighbors(row, k)?;
            let leaders = vote_leaders(&neighbors, labels);
            Ok(leaders.iter().any(|&(l, _)| l == gold))
        }
    }
}

/// Per-class concatenated training buffers with cached base lengths.
#[derive(Debug, Clone)]
pub struct CeModel {
    backend: CompressorBackend,
    classes: Vec<CeClass>,
}

#[derive(Debug, Clone)]
struct CeClass {
    label: u32,
    buffer: Vec<u8>,
    base_len: u64,
}

impl CeModel {
    pub fn backend(&self) -> &CompressorBackend {
        &self.backend
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn base_len(&self, label: u32) -> Option<u64> {
        self.classes
            .iter()
            .find(|c| c.label == label)
            .map(|c| c.base_len)
    }

    pub fn buffer(&self, label: u32) -> Option<&[u8]> {
        self.classes
            .iter()
            .find(|c| c.label == label)
            .map(|c| c.buffer.as_slice())
    }
}

/// Build per-class buffers in training-set order, documents joined
/// with one ASCII space, and measure each buffer once.
pub fn ce_train(backend: &CompressorBackend, train: &LabeledCorpus) -> Result<CeModel> {
    let per_class = train.docs_by_class();
    let mut classes = Vec::with_capacity(per_class.len());
    for (label, members) in per_class.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::EmptyClass(train.label_names[label].clone()));
        }
        let mut buffer = Vec::new();
        for (n, &idx) in members.iter().enumerate() {
            if n > 0 {
                buffer.push(JOIN_SEPARATOR);
            }
            buffer.extend_from_slice(train.docs[idx].bytes());
        }
        let base_len = backend.compressed_len(&buffer)?;
        classes.push(CeClass {
            label: label as u32,
            buffer,
            base_len,
        });
    }
    Ok(CeModel {
        backend: *backend,
        classes,
    })
}

/// argmin over classes of C(buffer <space> doc) - C(buffer); ties go
/// to the lowest label id.
pub fn ce_predict(model: &CeModel, doc: &Document) -> Result<u32> {
    let mut best: Option<(u32, i64)> = None;
    for class in &model.classes {
        let joint = joint_len(&model.backend, &class.buffer, doc.bytes())?;
        // joint >= base_len is not guaranteed for every backend; keep
        // the cost signed.
        let cost = joint as i64 - class.base_len as i64;
        // Classes iterate in ascending label order, so strict < keeps
        // the lowest label id on ties.
        if best.map_or(true, |(_, b)| cost < b) {
            best = Some((class.label, cost));
        }
    }
    Ok(best.expect("ce model has at least one class").0)
}

/// Distance row for the text-length baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    /// Unicode scalar values (default).
    Chars,
    Bytes,
}

pub fn textlength_distance_row(
    test: &Document,
    train: &[Document],
    unit: LengthUnit,
) -> Vec<f64> {
    let measure = |d: &Document| -> i64 {
        match unit {
            LengthUnit::Chars => d.char_len() as i64,
            LengthUnit::Bytes => d.bytes().len() as i64,
        }
    };
    let t = measure(test);
    train.iter().map(|d| (t - measure(d)).abs() as f64).collect()
}
