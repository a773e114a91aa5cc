use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ncd_core::{
    bpc, corpus_compression_ratio, corpus_stats, distance_matrix, knn_predict, knn_score,
    load_corpus, normalized_rank_percentage, pearson, run_few_shot, spearman, CiMethod,
    CompressorBackend, CorpusFormat, DistanceMatrix, Error as CoreError, FewShotConfig,
    LabeledCorpus, Method, ScoringMode, TiePolicy,
};

use crate::config::{resolve_workers, RunConfig};

#[derive(Parser)]
#[command(
    name = "ncd",
    version,
    about = "Text classification with compressors: NCD distances plus a kNN decision rule"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a test set against a training set and write predictions
    Classify(ClassifyArgs),
    /// Run seeded n-shot trials and report accuracy with confidence intervals
    Fewshot(FewshotArgs),
    /// Per-(corpus, backend) compressibility and rank statistics
    Analyze(AnalyzeArgs),
    /// Dataset statistics (documents, classes, words, chars, vocabulary)
    Stats(StatsArgs),
    /// Compute a distance matrix and store it for reuse
    Matrix(MatrixArgs),
}

#[derive(Args)]
struct CommonDataArgs {
    /// Training corpus file
    #[arg(long)]
    train: PathBuf,
    /// Test corpus file
    #[arg(long)]
    test: PathBuf,
    /// Corpus file format
    #[arg(long, default_value = "csv")]
    format: String,
    /// Compressor backend: gzip, bz2, lzma, zstd or identity
    #[arg(long, default_value = "gzip")]
    backend: String,
    /// Compression level (backend default when omitted)
    #[arg(long)]
    level: Option<u32>,
    /// Worker threads (NCD_WORKERS, then all cores, when omitted)
    #[arg(long)]
    workers: Option<usize>,
    /// Omit the timestamp so identical runs produce identical bytes
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    data: CommonDataArgs,
    /// Number of nearest neighbors
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Scoring mode: strict or max-possible
    #[arg(long, default_value = "max-possible")]
    scoring: String,
    /// Tie policy: nearest-among-tied or lowest-label-id
    #[arg(long, default_value = "nearest-among-tied")]
    tie_policy: String,
    /// Predictions CSV output path; a JSON summary lands next to it
    #[arg(long)]
    out: PathBuf,
    /// Reuse (or create) a binary distance-matrix cache at this path
    #[arg(long)]
    matrix_cache: Option<PathBuf>,
}

#[derive(Args)]
struct FewshotArgs {
    #[command(flatten)]
    data: CommonDataArgs,
    /// Labeled examples per class
    #[arg(long)]
    shots: usize,
    /// Seeded trials; trial t uses seed + t
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Base seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value = "max-possible")]
    scoring: String,
    #[arg(long, default_value = "nearest-among-tied")]
    tie_policy: String,
    /// Cap on test documents per trial
    #[arg(long)]
    test_sample: Option<usize>,
    /// Decision rule: knn or cross-entropy
    #[arg(long, default_value = "knn")]
    method: String,
    /// Confidence interval method: student_t or normal
    #[arg(long, default_value = "student_t")]
    ci_method: String,
    /// Dataset name echoed into the report (train file stem when omitted)
    #[arg(long)]
    dataset: Option<String>,
    /// Report path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Corpus files; the dataset name is the file stem
    #[arg(long = "corpus")]
    corpora: Vec<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Backends to sweep
    #[arg(long = "backend", default_values_t = vec!["gzip".to_string()])]
    backends: Vec<String>,
    /// Documents sampled per corpus for bpc / ratio
    #[arg(long, default_value_t = 1000)]
    sample_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV of method accuracies (dataset,method,accuracy) for rank columns
    #[arg(long)]
    ranks: Option<PathBuf>,
    /// Method whose normalized rank is reported
    #[arg(long, default_value = "gzip")]
    rank_method: String,
    /// Plot-ready CSV output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    data: CommonDataArgs,
    /// Binary matrix output path (NCDM format)
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV export alongside the binary
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// CLI failure with its exit-code category.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Backend(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Backend(m) => f.write_str(m),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::UnknownBackend(_)
            | CoreError::InvalidLevel { .. }
            | CoreError::InvalidK { .. }
            | CoreError::TooFewValues { .. } => CliError::Usage(e.to_string()),
            CoreError::Compression { .. } | CoreError::MatrixCell { .. } => {
                CliError::Backend(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Classify(args) => cmd_classify(args),
        Command::Fewshot(args) => cmd_fewshot(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Matrix(args) => cmd_matrix(args),
    }
}

fn parse_usage<T: std::str::FromStr<Err = CoreError>>(value: &str) -> CliResult<T> {
    value
        .parse::<T>()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn load(path: &Path, format: CorpusFormat) -> CliResult<LabeledCorpus> {
    load_corpus(path, format).map_err(CliError::from)
}

fn write_json(out: Option<&Path>, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match out {
        Some(path) => {
            let mut f = File::create(path)?;
            writeln!(f, "{text}")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

/// Attach the resolved config (and version) to a serializable payload.
fn with_config<T: serde::Serialize>(payload: &T, config: &RunConfig) -> serde_json::Value {
    let mut value = serde_json::to_value(payload).expect("serializable");
    value
        .as_object_mut()
        .expect("object payload")
        .insert("config".to_string(), serde_json::to_value(config).unwrap());
    value
}

fn cmd_classify(args: ClassifyArgs) -> CliResult<()> {
    let format: CorpusFormat = parse_usage(&args.data.format)?;
    // Validated for early feedback; the CSV reports both scoring modes.
    let _: ScoringMode = parse_usage(&args.scoring)?;
    let policy: TiePolicy = parse_usage(&args.tie_policy)?;
    let backend = CompressorBackend::from_name(&args.data.backend, args.data.level)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let workers = resolve_workers(args.data.workers);

    let train = load(&args.data.train, format)?;
    let test = load(&args.data.test, format)?;
    if args.k == 0 || args.k > train.len() {
        return Err(CliError::Usage(format!(
            "k must be in 1..={}, got {}",
            train.len(),
            args.k
        )));
    }

    let matrix = obtain_matrix(
        &backend,
        &test,
        &train,
        workers,
        args.matrix_cache.as_deref(),
    )?;

    let labels = train.labels()?;
    let mut writer = csv::Writer::from_path(&args.out).map_err(|e| CliError::Data(e.to_string()))?;
    writer
        .write_record([
            "test_index",
            "predicted_label",
            "gold_label",
            "correct_strict",
            "correct_max_possible",
        ])
        .map_err(|e| CliError::Data(e.to_string()))?;

    let mut strict_correct = 0usize;
    let mut max_correct = 0usize;
    let mut scored = 0usize;
    for (i, doc) in test.docs.iter().enumerate() {
        let row = matrix.row(i);
        let pred = knn_predict(row, &labels, args.k, policy)?;
        let (gold_name, strict, maxp) = match doc.label {
            Some(gold) => {
                let s = knn_score(row, &labels, args.k, gold, ScoringMode::Strict, policy)?;
                let m = knn_score(row, &labels, args.k, gold, ScoringMode::MaxPossible, policy)?;
                scored += 1;
                strict_correct += s as usize;
                max_correct += m as usize;
                (
                    test.label_name(gold).to_string(),
                    (s as u8).to_string(),
                    (m as u8).to_string(),
                )
            }
            None => (String::new(), String::new(), String::new()),
        };
        writer
            .write_record([
                i.to_string(),
                train.label_name(pred).to_string(),
                gold_name,
                strict,
                maxp,
            ])
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    writer.flush()?;

    let config = run_config("classify", &args.data, Some(&args))?;
    let summary = serde_json::json!({
        "n_test": test.len(),
        "n_scored": scored,
        "accuracy_strict": if scored > 0 { Some(strict_correct as f64 / scored as f64) } else { None },
        "accuracy_max_possible": if scored > 0 { Some(max_correct as f64 / scored as f64) } else { None },
        "predictions": args.out.display().to_string(),
    });
    let summary_path = args.out.with_extension("summary.json");
    write_json(Some(&summary_path), &with_config(&summary, &config))?;
    Ok(())
}

fn obtain_matrix(
    backend: &CompressorBackend,
    test: &LabeledCorpus,
    train: &LabeledCorpus,
    workers: usize,
    cache: Option<&Path>,
) -> CliResult<DistanceMatrix> {
    if let Some(path) = cache {
        if path.exists() {
            let m = DistanceMatrix::read_binary(path, backend.name())?;
            if m.rows() != test.len() || m.cols() != train.len() {
                return Err(CliError::Data(format!(
                    "matrix cache {} is {}x{}, corpus needs {}x{}",
                    path.display(),
                    m.rows(),
                    m.cols(),
                    test.len(),
                    train.len()
                )));
            }
            return Ok(m);
        }
    }
    let m = distance_matrix(backend, &test.docs, &train.docs, workers)?;
    if let Some(path) = cache {
        m.write_binary(path)?;
    }
    Ok(m)
}

fn cmd_fewshot(args: FewshotArgs) -> CliResult<()> {
    let format: CorpusFormat = parse_usage(&args.data.format)?;
    let scoring: ScoringMode = parse_usage(&args.scoring)?;
    let policy: TiePolicy = parse_usage(&args.tie_policy)?;
    let ci_method: CiMethod = parse_usage(&args.ci_method)?;
    let backend = CompressorBackend::from_name(&args.data.backend, args.data.level)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let workers = resolve_workers(args.data.workers);
    let method = match args.method.as_str() {
        "knn" => Method::Knn,
        "ce" | "cross-entropy" => Method::CrossEntropy,
        other => return Err(CliError::Usage(format!("unknown method \"{other}\""))),
    };
    if args.trials < 2 {
        return Err(CliError::Usage(format!(
            "need at least 2 trials for a confidence interval, got {}",
            args.trials
        )));
    }

    let train = load(&args.data.train, format)?;
    let test = load(&args.data.test, format)?;
    let k = args.k;
    if method == Method::Knn && (k == 0 || k > args.shots * train.n_classes()) {
        return Err(CliError::Usage(format!(
            "k must be in 1..={}, got {k}",
            args.shots * train.n_classes()
        )));
    }

    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.data
            .train
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_string())
    });

    let config = FewShotConfig {
        method,
        shots: args.shots,
        trials: args.trials,
        base_seed: args.seed,
        k,
        scoring,
        policy,
        workers,
        test_sample: args.test_sample,
        ci_method,
    };
    let report = run_few_shot(&backend, &train, &test, &config, &dataset)?;

    let run_config = run_config_fewshot(&args, workers)?;
    write_json(args.out.as_deref(), &with_config(&report, &run_config))?;
    Ok(())
}

#[derive(serde::Deserialize)]
struct RankRow {
    dataset: String,
    method: String,
    accuracy: f64,
}

fn cmd_analyze(args: AnalyzeArgs) -> CliResult<()> {
    let format: CorpusFormat = parse_usage(&args.format)?;
    if args.corpora.is_empty() && args.ranks.is_none() {
        return Err(CliError::Usage(
            "analyze needs at least one --corpus or a --ranks file".to_string(),
        ));
    }
    let backends: Vec<CompressorBackend> = args
        .backends
        .iter()
        .map(|name| {
            CompressorBackend::from_name(name, None).map_err(|e| CliError::Usage(e.to_string()))
        })
        .collect::<CliResult<_>>()?;

    // Normalized rank of the chosen method per dataset, if supplied.
    let mut ranks: BTreeMap<String, f64> = BTreeMap::new();
    let mut rank_accuracy: BTreeMap<String, f64> = BTreeMap::new();
    if let Some(path) = &args.ranks {
        let mut reader =
            csv::Reader::from_path(path).map_err(|e| CliError::Data(e.to_string()))?;
        let mut per_dataset: BTreeMap<String, Vec<RankRow>> = BTreeMap::new();
        for row in reader.deserialize::<RankRow>() {
            let row = row.map_err(|e| CliError::Data(e.to_string()))?;
            per_dataset.entry(row.dataset.clone()).or_default().push(row);
        }
        for (dataset, rows) in per_dataset {
            let accs: Vec<f64> = rows.iter().map(|r| r.accuracy).collect();
            let target = rows
                .iter()
                .find(|r| r.method == args.rank_method)
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "method \"{}\" missing for dataset \"{dataset}\" in ranks file",
                        args.rank_method
                    ))
                })?;
            ranks.insert(
                dataset.clone(),
                normalized_rank_percentage(target.accuracy, &accs)?,
            );
            rank_accuracy.insert(dataset, target.accuracy);
        }
    }

    #[derive(serde::Serialize)]
    struct AnalysisRow {
        dataset: String,
        backend: String,
        bpc: Option<f64>,
        compression_ratio: Option<f64>,
        vocab_size: Option<usize>,
        normalized_rank: Option<f64>,
    }

    let mut rows: Vec<AnalysisRow> = Vec::new();
    for path in &args.corpora {
        let dataset = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let corpus = load(path, format)?;
        let stats = corpus_stats(&corpus)?;
        for backend in &backends {
            rows.push(AnalysisRow {
                dataset: dataset.clone(),
                backend: backend.name().to_string(),
                bpc: Some(bpc(backend, &corpus, args.sample_size, args.seed)?),
                compression_ratio: Some(corpus_compression_ratio(
                    backend,
                    &corpus,
                    args.sample_size,
                    args.seed,
                )?),
                vocab_size: Some(stats.vocab_size),
                normalized_rank: ranks.get(&dataset).copied(),
            });
        }
    }
    // Datasets that only appear in the ranks file still get a row.
    for (dataset, rank) in &ranks {
        if !rows.iter().any(|r| &r.dataset == dataset) {
            rows.push(AnalysisRow {
                dataset: dataset.clone(),
                backend: String::new(),
                bpc: None,
                compression_ratio: None,
                vocab_size: None,
                normalized_rank: Some(*rank),
            });
        }
    }

    let csv_text = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "dataset",
            "backend",
            "bpc",
            "compression_ratio",
            "vocab_size",
            "normalized_rank",
        ])
        .map_err(|e| CliError::Data(e.to_string()))?;
        let fmt_opt = |v: Option<f64>| v.map(|v| format!("{v}")).unwrap_or_default();
        for r in &rows {
            w.write_record([
                r.dataset.clone(),
                r.backend.clone(),
                fmt_opt(r.bpc),
                fmt_opt(r.compression_ratio),
                r.vocab_size.map(|v| v.to_string()).unwrap_or_default(),
                fmt_opt(r.normalized_rank),
            ])
            .map_err(|e| CliError::Data(e.to_string()))?;
        }
        String::from_utf8(w.into_inner().map_err(|e| CliError::Data(e.to_string()))?)
            .expect("utf8 csv")
    };
    match &args.out {
        Some(path) => std::fs::write(path, &csv_text)?,
        None => print!("{csv_text}"),
    }

    // Cross-dataset correlations per backend, when enough points exist.
    let mut correlations = serde_json::Map::new();
    for backend in &backends {
        let points: Vec<(&AnalysisRow, f64)> = rows
            .iter()
            .filter(|r| r.backend == backend.name() && r.normalized_rank.is_some())
            .map(|r| (r, r.normalized_rank.unwrap()))
            .collect();
        if points.len() >= 3 {
            let bpcs: Vec<f64> = points.iter().filter_map(|(r, _)| r.bpc).collect();
            let rank_vals: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
            let vocab: Vec<f64> = points
                .iter()
                .filter_map(|(r, _)| r.vocab_size.map(|v| v as f64))
                .collect();
            let ratios: Vec<f64> = points
                .iter()
                .filter_map(|(r, _)| r.compression_ratio)
                .collect();
            let accs: Vec<f64> = points
                .iter()
                .filter_map(|(r, _)| rank_accuracy.get(&r.dataset).copied())
                .collect();
            let mut per_backend = serde_json::Map::new();
            if let Ok(v) = spearman(&bpcs, &rank_vals) {
                per_backend.insert("spearman_bpc_rank".into(), v.into());
            }
            if let Ok(v) = spearman(&vocab, &rank_vals) {
                per_backend.insert("spearman_vocab_rank".into(), v.into());
            }
            if accs.len() == ratios.len() {
                if let Ok(v) = pearson(&ratios, &accs) {
                    per_backend.insert("pearson_ratio_accuracy".into(), v.into());
                }
            }
            correlations.insert(backend.name().to_string(), per_backend.into());
        }
    }

    let config = RunConfig {
        command: "analyze".to_string(),
        train_path: None,
        test_path: None,
        format: args.format.clone(),
        backend: args.backends.join(","),
        level: None,
        k: 0,
        scoring: String::new(),
        tie_policy: String::new(),
        shots: None,
        trials: 0,
        seed: args.seed,
        workers: 1,
        test_sample: Some(args.sample_size),
        out: args.out.as_ref().map(|p| p.display().to_string()),
        matrix_cache: None,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: RunConfig::timestamp(args.no_timestamp),
    };
    let summary = serde_json::json!({ "correlations": correlations });
    let summary_path = args
        .out
        .as_ref()
        .map(|p| p.with_extension("summary.json"));
    if summary_path.is_some() || !correlations_is_empty(&summary) {
        write_json(summary_path.as_deref(), &with_config(&summary, &config))?;
    }
    Ok(())
}

fn correlations_is_empty(summary: &serde_json::Value) -> bool {
    summary["correlations"]
        .as_object()
        .map(|m| m.is_empty())
        .unwrap_or(true)
}

fn cmd_stats(args: StatsArgs) -> CliResult<()> {
    let format: CorpusFormat = parse_usage(&args.format)?;
    let corpus = load(&args.corpus, format)?;
    let stats = corpus_stats(&corpus)?;
    let config = RunConfig {
        command: "stats".to_string(),
        train_path: Some(args.corpus.display().to_string()),
        test_path: None,
        format: args.format.clone(),
        backend: String::new(),
        level: None,
        k: 0,
        scoring: String::new(),
        tie_policy: String::new(),
        shots: None,
        trials: 0,
        seed: 0,
        workers: 1,
        test_sample: None,
        out: args.out.as_ref().map(|p| p.display().to_string()),
        matrix_cache: None,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: RunConfig::timestamp(args.no_timestamp),
    };
    write_json(args.out.as_deref(), &with_config(&stats, &config))?;
    Ok(())
}

fn cmd_matrix(args: MatrixArgs) -> CliResult<()> {
    let format: CorpusFormat = parse_usage(&args.data.format)?;
    let backend = CompressorBackend::from_name(&args.data.backend, args.data.level)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let workers = resolve_workers(args.data.workers);
    let train = load(&args.data.train, format)?;
    let test = load(&args.data.test, format)?;
    let matrix = distance_matrix(&backend, &test.docs, &train.docs, workers)?;
    matrix.write_binary(&args.out)?;
    if let Some(csv_path) = &args.csv {
        let file = File::create(csv_path)?;
        matrix.write_csv(file)?;
    }
    Ok(())
}

fn run_config(command: &str, data: &CommonDataArgs, classify: Option<&ClassifyArgs>) -> CliResult<RunConfig> {
    Ok(RunConfig {
        command: command.to_string(),
        train_path: Some(data.train.display().to_string()),
        test_path: Some(data.test.display().to_string()),
        format: data.format.clone(),
        backend: data.backend.clone(),
        level: data.level,
        k: classify.map(|c| c.k).unwrap_or(0),
        scoring: classify.map(|c| c.scoring.clone()).unwrap_or_default(),
        tie_policy: classify.map(|c| c.tie_policy.clone()).unwrap_or_default(),
        shots: None,
        trials: 0,
        seed: 0,
        workers: resolve_workers(data.workers),
        test_sample: None,
        out: classify.map(|c| c.out.display().to_string()),
        matrix_cache: classify
            .and_then(|c| c.matrix_cache.as_ref())
            .map(|p| p.display().to_string()),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: RunConfig::timestamp(data.no_timestamp),
    })
}

fn run_config_fewshot(args: &FewshotArgs, workers: usize) -> CliResult<RunConfig> {
    Ok(RunConfig {
        command: "fewshot".to_string(),
        train_path: Some(args.data.train.display().to_string()),
        test_path: Some(args.data.test.display().to_string()),
        format: args.data.format.clone(),
        backend: args.data.backend.clone(),
        level: args.data.level,
        k: args.k,
        scoring: args.scoring.clone(),
        tie_policy: args.tie_policy.clone(),
        shots: Some(args.shots),
        trials: args.trials,
        seed: args.seed,
        workers,
        test_sample: args.test_sample,
        out: args.out.as_ref().map(|p| p.display().to_string()),
        matrix_cache: None,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: RunConfig::timestamp(args.data.no_timestamp),
    })
}
