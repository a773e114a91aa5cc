//! Accuracy aggregation, confidence intervals and analysis statistics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::classify::{ScoringMode, TiePolicy};
use crate::compressor::CompressorBackend;
use crate::corpus::{sampling_rng, subsample_docs, LabeledCorpus};
use crate::error::{Error, Result};

/// Outcome of one seeded trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub n_test: usize,
    pub accuracy: f64,
    pub scoring: ScoringMode,
    pub policy: TiePolicy,
    pub backend: String,
    pub k: usize,
}

/// Confidence-interval method. The default is Student-t with n-1
/// degrees of freedom; a plain normal interval is available for
/// comparison since published tables rarely state which was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    StudentT,
    Normal,
}

impl FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "student_t" | "student-t" | "t" => Ok(CiMethod::StudentT),
            "normal" => Ok(CiMethod::Normal),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown CI method \"{other}\""),
            }),
        }
    }
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CiMethod::StudentT => "student_t",
            CiMethod::Normal => "normal",
        })
    }
}

/// Mean with a 95% confidence half-width over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiSummary {
    pub mean: f64,
    pub half_width: f64,
    pub n_trials: usize,
    pub level: f64,
    pub method: CiMethod,
}

/// Per-(dataset, backend) analysis quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub dataset: String,
    pub bpc: f64,
    pub compression_ratio: f64,
    pub vocab_size: usize,
    pub normalized_rank: Option<f64>,
}

/// Top-level machine-readable evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub backend: String,
    pub k: usize,
    pub scoring: ScoringMode,
    pub policy: TiePolicy,
    pub shots: Option<usize>,
    pub trials: Vec<TrialResult>,
    pub ci: CiSummary,
    pub analysis: Option<AnalysisRecord>,
}

/// Mean of 0/1 scores.
pub fn accuracy(scores: &[bool]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let correct = scores.iter().filter(|s| **s).count();
    Ok(correct as f64 / scores.len() as f64)
}

/// 95% confidence interval over trial values.
pub fn trial_ci(values: &[f64], method: CiMethod) -> Result<CiSummary> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewValues { needed: 2, got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let s = var.sqrt();
    let factor = match method {
        CiMethod::Normal => 1.96,
        CiMethod::StudentT => StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("valid dof")
            .inverse_cdf(0.975),
    };
    Ok(CiSummary {
        mean,
        half_width: factor * s / (n as f64).sqrt(),
        n_trials: n,
        level: 0.95,
        method,
    })
}

/// Bits per character over a seeded document sample: total compressed
/// bits divided by total Unicode scalar count. When `sample_size`
/// exceeds the corpus the whole corpus is used.
pub fn bpc(
    backend: &CompressorBackend,
    corpus: &LabeledCorpus,
    sample_size: usize,
    seed: u64,
) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = sampling_rng(seed);
    let sample = subsample_docs(corpus, sample_size, &mut rng);
    let mut bits = 0u64;
    let mut chars = 0u64;
    for doc in &sample.docs {
        bits += 8 * backend.compressed_len(doc.bytes())?;
        chars += doc.char_len() as u64;
    }
    if chars == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(bits as f64 / chars as f64)
}

/// Corpus-level compression ratio over the same kind of seeded sample:
/// total original bytes / total compressed bytes.
pub fn corpus_compression_ratio(
    backend: &CompressorBackend,
    corpus: &LabeledCorpus,
    sample_size: usize,
    seed: u64,
) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = sampling_rng(seed);
    let sample = subsample_docs(corpus, sample_size, &mut rng);
    let mut original = 0u64;
    let mut compressed = 0u64;
    for doc in &sample.docs {
        original += doc.bytes().len() as u64;
        compressed += backend.compressed_len(doc.bytes())?;
    }
    if compressed == 0 {
        return Err(Error::EmptyPayload);
    }
    Ok(original as f64 / compressed as f64)
}

fn check_paired(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::TooFewValues {
            needed: 3,
            got: xs.len(),
        });
    }
    Ok(())
}

/// Product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_paired(xs, ys)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx).powi(2);
        vy += (y - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Mid-ranks with average-rank handling of ties (1-based).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share the same value; assign their mean.
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson over average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_paired(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Rank of `target_acc` among `all_accs` (1 = best by descending
/// accuracy, ties take the best rank) divided by the candidate count.
pub fn normalized_rank_percentage(target_acc: f64, all_accs: &[f64]) -> Result<f64> {
    if !all_accs.contains(&target_acc) {
        return Err(Error::TargetNotFound(target_acc));
    }
    let better = all_accs.iter().filter(|&&a| a > target_acc).count();
    Ok((better + 1) as f64 / all_accs.len() as f64)
}
