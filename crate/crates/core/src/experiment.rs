//! Seeded few-shot experiment runner shared by the CLI and the
//! acceptance suite.
//!
//! One trial: seed the RNG with `base_seed + trial`, draw an n-shot
//! stratified training sample, optionally cap the test set with a
//! uniform subsample from the same RNG stream, build the distance
//! matrix (or the cross-entropy model) and score every test row.

use serde::{Deserialize, Serialize};

use crate::classify::{ce_predict, ce_train, knn_score, ScoringMode, TiePolicy};
use crate::compressor::CompressorBackend;
use crate::corpus::{few_shot_sample_with_rng, sampling_rng, subsample_docs, LabeledCorpus};
use crate::distance::distance_matrix;
use crate::error::Result;
use crate::eval::{accuracy, trial_ci, CiMethod, CiSummary, EvalReport, TrialResult};

/// Which decision rule a few-shot run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Knn,
    CrossEntropy,
}

/// Everything a few-shot run needs besides the corpora.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FewShotConfig {
    pub method: Method,
    pub shots: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub k: usize,
    pub scoring: ScoringMode,
    pub policy: TiePolicy,
    pub workers: usize,
    /// Cap on test documents per trial; `None` scores the full test set.
    pub test_sample: Option<usize>,
    pub ci_method: CiMethod,
}

impl FewShotConfig {
    pub fn knn(shots: usize, trials: usize, base_seed: u64, workers: usize) -> Self {
        FewShotConfig {
            method: Method::Knn,
            shots,
            trials,
            base_seed,
            k: 2,
            scoring: ScoringMode::MaxPossible,
            policy: TiePolicy::NearestAmongTied,
            workers,
            test_sample: None,
            ci_method: CiMethod::StudentT,
        }
    }
}

/// Accuracy of one seeded trial.
pub fn run_trial(
    backend: &CompressorBackend,
    train: &LabeledCorpus,
    test: &LabeledCorpus,
    config: &FewShotConfig,
    seed: u64,
) -> Result<TrialResult> {
    let mut rng = sampling_rng(seed);
    let train_sample = few_shot_sample_with_rng(train, config.shots, &mut rng)?;
    let test_sample = match config.test_sample {
        Some(cap) => subsample_docs(test, cap, &mut rng),
        None => test.clone(),
    };

    let scores = match config.method {
        Method::Knn => {
            let matrix = distance_matrix(
                backend,
                &test_sample.docs,
                &train_sample.docs,
                config.workers,
            )?;
            let labels = train_sample.labels()?;
            let golds = test_sample.labels()?;
            let mut scores = Vec::with_capacity(test_sample.len());
            for (i, gold) in golds.iter().enumerate() {
                scores.push(knn_score(
                    matrix.row(i),
                    &labels,
                    config.k,
                    *gold,
                    config.scoring,
                    config.policy,
                )?);
            }
            scores
        }
        Method::CrossEntropy => {
            let model = ce_train(backend, &train_sample)?;
            let golds = test_sample.labels()?;
            let mut scores = Vec::with_capacity(test_sample.len());
            for (doc, gold) in test_sample.docs.iter().zip(&golds) {
                scores.push(ce_predict(&model, doc)? == *gold);
            }
            scores
        }
    };

    Ok(TrialResult {
        seed,
        n_test: scores.len(),
        accuracy: accuracy(&scores)?,
        scoring: config.scoring,
        policy: config.policy,
        backend: backend.name().to_string(),
        k: config.k,
    })
}

/// Run `trials` seeded trials (seeds base, base+1, ...) and aggregate.
pub fn run_few_shot(
    backend: &CompressorBackend,
    train: &LabeledCorpus,
    test: &LabeledCorpus,
    config: &FewShotConfig,
    dataset: &str,
) -> Result<EvalReport> {
    let mut trials = Vec::with_capacity(config.trials);
    for t in 0..config.trials {
        trials.push(run_trial(
            backend,
            train,
            test,
            config,
            config.base_seed + t as u64,
        )?);
    }
    let values: Vec<f64> = trials.iter().map(|t| t.accuracy).collect();
    let ci: CiSummary = trial_ci(&values, config.ci_method)?;
    Ok(EvalReport {
        dataset: dataset.to_string(),
        backend: backend.name().to_string(),
        k: config.k,
        scoring: config.scoring,
        policy: config.policy,
        shots: Some(config.shots),
        trials,
        ci,
        analysis: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compressor::BackendKind;
    use crate::corpus::Document;

    fn synthetic_corpus(per_class: usize, seed_phrase: &[&str]) -> LabeledCorpus {
        let mut docs = Vec::new();
        for i in 0..per_class {
            for (c, phrase) in seed_phrase.iter().enumerate() {
                docs.push(Document {
                    id: docs.len(),
                    text: format!("{phrase} {phrase} sample {i} {phrase}"),
                    label: Some(c as u32),
                });
            }
        }
        LabeledCorpus::new(
            docs,
            seed_phrase.iter().map(|p| p.to_string()).collect(),
        )
    }

    #[test]
    fn few_shot_report_is_deterministic() {
        let phrases = ["football match stadium goal", "stock market shares profit"];
        let train = synthetic_corpus(12, &phrases);
        let test = synthetic_corpus(6, &phrases);
        let backend = CompressorBackend::with_default_level(BackendKind::Gzip);
        let config = FewShotConfig {
            trials: 3,
            test_sample: Some(8),
            ..FewShotConfig::knn(5, 3, 42, 4)
        };
        let a = run_few_shot(&backend, &train, &test, &config, "demo").unwrap();
        let b = run_few_shot(&backend, &train, &test, &config, "demo").unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.trials.len(), 3);
        assert_eq!(a.trials[0].n_test, 8);
    }

    #[test]
    fn knn_separates_distinct_vocabularies() {
        let phrases = [
            "goalkeeper penalty referee halftime",
            "dividend inflation quarterly earnings",
        ];
        let train = synthetic_corpus(10, &phrases);
        let test = synthetic_corpus(10, &phrases);
        let backend = CompressorBackend::with_default_level(BackendKind::Gzip);
        let config = FewShotConfig::knn(5, 2, 1, 2);
        let report = run_few_shot(&backend, &train, &test, &config, "demo").unwrap();
        assert!(report.ci.mean > 0.9, "mean {}", report.ci.mean);
    }

    #[test]
    fn ce_runner_works() {
        let phrases = [
            "goalkeeper penalty referee halftime",
            "dividend inflation quarterly earnings",
        ];
        let train = synthetic_corpus(10, &phrases);
        let test = synthetic_corpus(5, &phrases);
        let backend = CompressorBackend::with_default_level(BackendKind::Gzip);
        let config = FewShotConfig {
            method: Method::CrossEntropy,
            scoring: ScoringMode::Strict,
            ..FewShotConfig::knn(5, 2, 1, 2)
        };
        let report = run_few_shot(&backend, &train, &test, &config, "demo").unwrap();
        assert!(report.ci.mean > 0.9, "mean {}", report.ci.mean);
    }
}
