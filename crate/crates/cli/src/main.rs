//! `atrb` — command-line front end for the attribution laboratory.
//!
//! Subcommands cover the whole experimental loop: `prepare` filters and
//! narrows a raw JSONL corpus, `synth` generates labelled test corpora,
//! `train` fits one configured method and saves a model container,
//! `predict` labels new documents with a saved model, `benchmark` runs the
//! full method-by-author-count grid into CSV and SVG reports, and
//! `gradcheck` verifies the network gradients against finite differences.
//!
//! Every command is a pure function of its input files, configuration and
//! seeds: running it twice produces byte-identical outputs, except for
//! wall-clock timing columns in benchmark CSVs and the timestamped log
//! lines on stderr.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error
//! (unreadable, malformed or incompatible inputs), 3 numeric failure.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use atrb_core::eval::{emit_report, render_csv, train_method, TrainedMethod};
use atrb_core::nnet::gradcheck::{run_suite, TOLERANCE};
use atrb_core::{generate_synthetic, Corpus, SyntheticSpec};

use crate::config::ExperimentConfig;

/// Errors carry the exit code class; the message is printed to stderr.
#[derive(Debug)]
pub enum AppError {
    /// Bad flags or a bad configuration file — exit 1.
    Usage(String),
    /// Unreadable, malformed, empty or incompatible data — exit 2.
    Data(String),
    /// A numeric computation failed — exit 3.
    Numeric(String),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Numeric(_) => 3,
        }
    }

    /// Prefixes the message with where it happened.
    fn context(self, what: impl fmt::Display) -> AppError {
        match self {
            AppError::Usage(m) => AppError::Usage(format!("{what}: {m}")),
            AppError::Data(m) => AppError::Data(format!("{what}: {m}")),
            AppError::Numeric(m) => AppError::Numeric(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "{m}"),
            AppError::Data(m) => write!(f, "{m}"),
            AppError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl From<atrb_core::Error> for AppError {
    fn from(e: atrb_core::Error) -> Self {
        use atrb_core::Error as E;
        match &e {
            E::InvalidParameter(_) => AppError::Usage(e.to_string()),
            E::NonFiniteLoss { .. }
            | E::LengthMismatch { .. }
            | E::WindowTooLarge { .. }
            | E::EmptyFeatureMap => AppError::Numeric(e.to_string()),
            _ => AppError::Data(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "atrb",
    version,
    about = "Authorship attribution laboratory: corpus preparation, model training, prediction and benchmarking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a JSONL corpus and print its summary statistics
    Prepare(PrepareArgs),
    /// Generate a synthetic corpus with planted author signatures
    Synth(SynthArgs),
    /// Train one configured method and save the model container
    Train(TrainArgs),
    /// Label documents with a saved model, one JSON object per line
    Predict(PredictArgs),
    /// Run the full method-by-author-count grid into CSV/SVG reports
    Benchmark(BenchmarkArgs),
    /// Check network gradients against finite differences
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct PrepareArgs {
    /// Input corpus: one {"author", "text"} JSON object per line
    #[arg(long, env = "ATRB_INPUT")]
    input: PathBuf,
    /// Where the filtered corpus is written
    #[arg(long, env = "ATRB_OUTPUT")]
    output: PathBuf,
    /// Drop documents with fewer tokens
    #[arg(long)]
    min_tokens: Option<usize>,
    /// Keep only the N authors with the most documents
    #[arg(long)]
    top_authors: Option<usize>,
    /// Dataset name in the stats line (default: input file stem)
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of authors
    #[arg(long)]
    authors: usize,
    /// Documents per author
    #[arg(long)]
    docs_per_author: usize,
    /// Signature style: char, word, or topic
    #[arg(long)]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where the generated corpus is written
    #[arg(long, env = "ATRB_OUTPUT")]
    output: PathBuf,
    /// Dataset name in the stats line
    #[arg(long, default_value = "synthetic")]
    name: String,
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment configuration file (TOML)
    #[arg(long, env = "ATRB_CONFIG")]
    config: PathBuf,
    /// Method to train (overrides [train].method)
    #[arg(long)]
    method: Option<String>,
    /// Where the model container is written (overrides [train].model_path)
    #[arg(long, env = "ATRB_MODEL")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model container
    #[arg(long, env = "ATRB_MODEL")]
    model: PathBuf,
    /// Documents to label: one {"doc_id", "text"} JSON object per line
    #[arg(long, env = "ATRB_INPUT")]
    input: PathBuf,
    /// Where predictions are written (default: stdout)
    #[arg(long, env = "ATRB_OUTPUT")]
    output: Option<PathBuf>,
    /// Alphabet file the input was meant for; must match the model's
    #[arg(long, env = "ATRB_ALPHABET")]
    alphabet: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Experiment configuration file (TOML)
    #[arg(long, env = "ATRB_CONFIG")]
    config: PathBuf,
    /// CSV output path (overrides benchmark.csv_path)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// SVG plot path (overrides benchmark.svg_path)
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Number of random models to check across all five variants
    #[arg(long, default_value_t = 20)]
    models: usize,
    #[arg(long, default_value_t = 2753)]
    seed: u64,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed; real
            // parse errors go to stderr with the usage exit code.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Prepare(args) => cmd_prepare(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Prints the dataset summary: a CSV header and one row, matching the shape
/// attribution datasets are usually described in.
fn print_stats(name: &str, corpus: &Corpus) -> AppResult<()> {
    let s = corpus.stats()?;
    println!("name,authors,documents,median_docs_per_author,docs_per_author_stddev,median_tokens_per_doc");
    println!(
        "{name},{},{},{},{},{}",
        s.authors, s.documents, s.median_docs_per_author, s.docs_per_author_stddev, s.median_tokens_per_doc
    );
    Ok(())
}

fn cmd_prepare(args: PrepareArgs) -> AppResult<()> {
    let corpus = Corpus::load_jsonl(&args.input)?;
    let corpus = match args.min_tokens {
        Some(min) if min > 0 => corpus.filter_min_tokens(min)?,
        _ => corpus,
    };
    let corpus = match args.top_authors {
        Some(n) => corpus.top_n_authors(n)?,
        None => corpus,
    };
    corpus.save_jsonl(&args.output)?;
    let name = match &args.name {
        Some(name) => name.clone(),
        None => args
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".into()),
    };
    log::info!("wrote {} documents to {}", corpus.len(), args.output.display());
    print_stats(&name, &corpus)
}

fn cmd_synth(args: SynthArgs) -> AppResult<()> {
    let spec = SyntheticSpec {
        authors: args.authors,
        docs_per_author: args.docs_per_author,
        mode: config::signature_mode(&args.mode)?,
        seed: args.seed,
    };
    let corpus = generate_synthetic(&spec)?;
    corpus.save_jsonl(&args.output)?;
    log::info!("wrote {} documents to {}", corpus.len(), args.output.display());
    print_stats(&args.name, &corpus)
}

fn cmd_train(args: TrainArgs) -> AppResult<()> {
    let config = ExperimentConfig::load(&args.config)?;
    let method_name = match (&args.method, &config.train) {
        (Some(name), _) => name.clone(),
        (None, Some(section)) => section.method.clone(),
        (None, None) => {
            return Err(AppError::Usage(
                "no method selected: pass --method or add a [train] section".into(),
            ))
        }
    };
    let spec = config.methods.resolve(&method_name)?;
    let output = match (&args.output, &config.train) {
        (Some(path), _) => path.clone(),
        (None, Some(section)) => match &section.model_path {
            Some(path) => path.clone(),
            None => {
                return Err(AppError::Usage(
                    "no output path: pass --output or set [train].model_path".into(),
                ))
            }
        },
        (None, None) => {
            return Err(AppError::Usage(
                "no output path: pass --output or set [train].model_path".into(),
            ))
        }
    };
    let corpus = config.load_corpus()?;
    let (train, dev, _test) = corpus.stratified_split(&config.split_spec())?;
    log::info!(
        "training {method_name} on {} documents ({} authors), {} dev documents",
        train.len(),
        train.author_count(),
        dev.len()
    );
    let (model, seconds) = train_method(&spec, &train, &dev)?;
    model.save(&output)?;
    log::info!("trained {method_name} in {seconds:.2}s");
    println!("{}", output.display());
    Ok(())
}

/// One line of `predict` input. Extra keys are tolerated; a missing `text`
/// is a data error.
#[derive(Deserialize)]
struct PredictLine {
    #[serde(default, alias = "id")]
    doc_id: Option<String>,
    text: String,
}

/// One line of `predict` output; field order is the wire order.
#[derive(Serialize)]
struct PredictRecord<'a> {
    doc_id: &'a str,
    author: &'a str,
    score: f64,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    low_confidence: bool,
}

fn cmd_predict(args: PredictArgs) -> AppResult<()> {
    let model = TrainedMethod::load(&args.model)?;
    if let Some(alphabet_path) = &args.alphabet {
        match &model {
            TrainedMethod::Cnn(network) => {
                let provided = config::load_alphabet(alphabet_path)?;
                if provided.to_lines() != network.alphabet.to_lines() {
                    return Err(atrb_core::Error::Incompatible(format!(
                        "model {} was trained with a different alphabet than {} \
                         ({} symbols in the model, {} in the file)",
                        args.model.display(),
                        alphabet_path.display(),
                        network.alphabet.size(),
                        provided.size(),
                    ))
                    .into());
                }
            }
            _ => log::warn!("--alphabet only applies to convolutional models; ignored"),
        }
    }
    let raw = std::fs::read_to_string(&args.input)
        .map_err(|e| AppError::Data(format!("{}: {e}", args.input.display())))?;
    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            AppError::Data(format!("{}: {e}", path.display()))
        })?)),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut labelled = 0usize;
    for (index, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: PredictLine = serde_json::from_str(line).map_err(|e| {
            AppError::Data(format!("{}:{}: {e}", args.input.display(), index + 1))
        })?;
        let doc_id = parsed.doc_id.unwrap_or_else(|| format!("line-{}", index + 1));
        let prediction = model
            .predict(&parsed.text)
            .map_err(|e| AppError::from(e).context(format_args!("document {doc_id}")))?;
        let record = PredictRecord {
            doc_id: &doc_id,
            author: &prediction.author,
            score: prediction.score,
            low_confidence: prediction.low_confidence,
        };
        serde_json::to_writer(&mut out, &record)
            .and_then(|()| {
                use std::io::Write as _;
                writeln!(out).map_err(serde_json::Error::io)
            })
            .map_err(|e| AppError::Data(format!("writing predictions: {e}")))?;
        labelled += 1;
    }
    out.flush().map_err(|e| AppError::Data(format!("writing predictions: {e}")))?;
    log::info!("labelled {labelled} documents");
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> AppResult<()> {
    let config = ExperimentConfig::load(&args.config)?;
    let bench = config
        .benchmark
        .clone()
        .ok_or_else(|| AppError::Usage("config has no [benchmark] section".into()))?;
    let names = config.benchmark_method_names()?;
    let mut specs = Vec::with_capacity(names.len());
    for name in &names {
        specs.push(config.methods.resolve(name)?);
    }
    let csv_path = args
        .csv
        .or(bench.csv_path)
        .ok_or_else(|| AppError::Usage("no CSV path: pass --csv or set benchmark.csv_path".into()))?;
    let svg_path = args.svg.or(bench.svg_path);
    let corpus = config.load_corpus()?;
    let reports = atrb_core::eval::run_experiment(
        &specs,
        &corpus,
        &config.dataset.name,
        &bench.author_counts,
        &config.split_spec(),
    )?;
    for report in &reports {
        log::info!(
            "{} / {} authors: micro-F1 {:.4}",
            report.method,
            report.authors,
            report.micro_f1
        );
    }
    match &svg_path {
        Some(svg) => emit_report(&reports, &csv_path, svg)?,
        None => write_text(&csv_path, &render_csv(&reports))?,
    }
    println!("{}", csv_path.display());
    if let Some(svg) = &svg_path {
        println!("{}", svg.display());
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> AppResult<()> {
    std::fs::write(path, text).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

fn cmd_gradcheck(args: GradcheckArgs) -> AppResult<()> {
    if args.models == 0 {
        return Err(AppError::Usage("--models must be positive".into()));
    }
    let report = run_suite(args.models, args.seed)?;
    for (index, model) in report.models.iter().enumerate() {
        println!(
            "model {index:>2}  {:<18}  {:>5} parameters  max rel err {:.3e}",
            model.variant.name(),
            model.parameters_checked,
            model.max_rel_err
        );
    }
    println!(
        "max relative error {:.6e} over {} parameters in {} models (tolerance {TOLERANCE:e})",
        report.max_rel_err,
        report.parameters_checked,
        report.models.len()
    );
    if report.passed() {
        println!("PASS");
        Ok(())
    } else {
        Err(AppError::Numeric(format!(
            "gradient check failed: max relative error {:.6e} exceeds {TOLERANCE:e}",
            report.max_rel_err
        )))
    }
}
