//! Command-line front end.
//!
//! `transform`, `cluster` and `eval` expose one pipeline stage each and talk
//! through files; `experiment` runs the whole pipeline and prints one report
//! section per algorithm, always in the order squeezer, kmodes, lcbcdc.
//!
//! Reports contain no timings so that equal configurations give equal bytes.
//! Wall-clock time per algorithm goes to standard error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::baselines::{self, BaselineError, KModesConfig, SqueezerConfig};
use crate::dataset::{
    load_table, ClassColumn, DatasetError, IngestOptions, LabeledDataset, MissingPolicy,
};
use crate::eval::{self, accuracy_error, confusion, ConfusionMatrix, EvalError, EvalReport};
use crate::groupmodel::{LinkModelParams, ModelError};
use crate::hillclimb::{fit_lcbcdc, FitError, OptimizerConfig, RestartReport};
use crate::transform::{to_link_dataset, write_links, TransformError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadConfig(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::BadConfig(_) | CliError::Data(_) => 1,
        }
    }

    fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::BadConfig(e.to_string())
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::BadConfig(m) => CliError::BadConfig(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        CliError::BadConfig(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "linkclust",
    version,
    about = "Categorical clustering through link group detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the link dataset of a categorical table.
    Transform(TransformArgs),
    /// Cluster a table and write one label per record.
    Cluster(ClusterArgs),
    /// Score a label file against the class column of a table.
    Eval(EvalArgs),
    /// Load, cluster with the selected algorithms, and report.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lcbcdc,
    Kmodes,
    Squeezer,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Missing {
    #[default]
    Keep,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Tsv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// first, last, none, or a zero-based column index.
    #[arg(long, default_value = "none")]
    pub class_col: ClassColumn,
    #[arg(long, value_enum, default_value_t = Missing::Keep)]
    pub missing: Missing,
    #[arg(long, default_value = "?")]
    pub missing_token: String,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// First non-blank line holds attribute names.
    #[arg(long)]
    pub header: bool,
}

impl DataArgs {
    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            delimiter: self.delimiter,
            class_column: self.class_col,
            missing_token: self.missing_token.clone(),
            missing_policy: match self.missing {
                Missing::Keep => MissingPolicy::KeepAsCategory,
                Missing::Drop => MissingPolicy::DropRow,
            },
            has_header: self.header,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Number of groups (lcbcdc) or clusters (kmodes).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub pi: f64,
    #[arg(long, default_value_t = 0.1)]
    pub pr: f64,
    /// Squeezer similarity threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Cluster count the Squeezer threshold search aims for (default: --k).
    #[arg(long)]
    pub target_k: Option<usize>,
    #[arg(long, default_value_t = OptimizerConfig::default().restarts)]
    pub restarts: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().noise_prob)]
    pub noise: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().max_sweeps)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run restarts one after another instead of on the thread pool.
    #[arg(long)]
    pub serial: bool,
}

impl ModelArgs {
    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            k: self.k,
            restarts: self.restarts,
            max_sweeps: self.max_sweeps,
            noise_prob: self.noise,
            seed: self.seed,
            parallel: !self.serial,
            ..OptimizerConfig::default()
        }
    }

    fn squeezer_threshold(&self) -> ThresholdChoice {
        match (self.threshold, self.target_k) {
            (Some(s), _) => ThresholdChoice::Fixed(s),
            (None, Some(k)) => ThresholdChoice::Search(k),
            (None, None) => ThresholdChoice::Search(self.k),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Also write the lcbcdc chart (`group TAB ids`) here.
    #[arg(long)]
    pub chart: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Label file as written by `cluster`.
    #[arg(long)]
    pub labels: PathBuf,
    /// Count outliers as a cluster of their own.
    #[arg(long)]
    pub include_outliers: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Algorithm::All)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ThresholdChoice {
    Fixed(f64),
    Search(usize),
}

/// Everything one experiment run depends on.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub ingest: IngestOptions,
    pub algorithm: Algorithm,
    pub kmodes_k: usize,
    pub squeezer_threshold: Option<f64>,
    pub squeezer_target_k: Option<usize>,
    pub params: LinkModelParams,
    pub optimizer: OptimizerConfig,
}

impl ExperimentConfig {
    pub fn from_args(args: &ExperimentArgs) -> Result<Self, CliError> {
        let params = LinkModelParams::new(args.model.pi, args.model.pr)?;
        let optimizer = args.model.optimizer_config();
        optimizer.validate()?;
        let (squeezer_threshold, squeezer_target_k) = match args.model.squeezer_threshold() {
            ThresholdChoice::Fixed(s) => (Some(s), None),
            ThresholdChoice::Search(k) => (None, Some(k)),
        };
        Ok(Self {
            data: args.data.data.clone(),
            ingest: args.data.ingest_options(),
            algorithm: args.algo,
            kmodes_k: args.model.k,
            squeezer_threshold,
            squeezer_target_k,
            params,
            optimizer,
        })
    }

    fn runs(&self, algorithm: Algorithm) -> bool {
        self.algorithm == Algorithm::All || self.algorithm == algorithm
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfusionRecord {
    pub rows: Vec<String>,
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl From<&ConfusionMatrix> for ConfusionRecord {
    fn from(m: &ConfusionMatrix) -> Self {
        Self {
            rows: m.rows.iter().map(ToString::to_string).collect(),
            classes: m.classes.clone(),
            counts: m.counts.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Evaluated {
        confusion: ConfusionRecord,
        accuracy: f64,
        error: f64,
        /// Records counted in the matrix over records in the dataset.
        coverage: f64,
        counted: usize,
        records: usize,
    },
    /// No class column: the labels are reported instead.
    NoLabels {
        labels: Vec<Option<usize>>,
    },
    Failed {
        reason: String,
    },
}

impl Outcome {
    fn evaluate(labels: Vec<Option<usize>>, truth: Option<&[String]>) -> Outcome {
        let Some(truth) = truth else {
            return Outcome::NoLabels { labels };
        };
        let report = confusion(&labels, truth, false).and_then(|m| Ok((accuracy_error(&m)?, m)));
        match report {
            Ok((r, m)) => Outcome::Evaluated {
                confusion: ConfusionRecord::from(&m),
                accuracy: r.accuracy,
                error: r.error,
                coverage: r.coverage(),
                counted: r.counted,
                records: r.records,
            },
            Err(e) => Outcome::Failed {
                reason: e.to_string(),
            },
        }
    }

    pub fn error(&self) -> Option<f64> {
        match self {
            Outcome::Evaluated { error, .. } => Some(*error),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Diagnostics {
    Squeezer {
        threshold: Option<f64>,
        clusters: usize,
    },
    KModes {
        k: usize,
        iterations: usize,
        cost: usize,
    },
    Lcbcdc {
        k: usize,
        log_likelihood: f64,
        coverage: usize,
        chosen_restart: usize,
        group_sizes: Vec<usize>,
        restarts: Vec<RestartReport>,
    },
    None {},
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub algorithm: Algorithm,
    pub diagnostics: Diagnostics,
    #[serde(flatten)]
    pub outcome: Outcome,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub data: String,
    pub records: usize,
    pub attributes: usize,
    pub sections: Vec<Section>,
}

impl ExperimentReport {
    pub fn section(&self, algorithm: Algorithm) -> Option<&Section> {
        self.sections.iter().find(|s| s.algorithm == algorithm)
    }
}

fn read_dataset(path: &Path, opts: &IngestOptions) -> Result<LabeledDataset, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    load_table(BufReader::new(file), opts).map_err(|e| match e {
        DatasetError::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        DatasetError::BadConfig(m) => CliError::BadConfig(m),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

fn run_squeezer(config: &ExperimentConfig, data: &LabeledDataset) -> Section {
    let start = Instant::now();
    let threshold = match (config.squeezer_threshold, config.squeezer_target_k) {
        (Some(s), _) => Ok(s),
        (None, Some(k)) => baselines::find_threshold_for_k(&data.table, k),
        (None, None) => baselines::find_threshold_for_k(&data.table, config.kmodes_k),
    };
    let run = threshold.and_then(|threshold| {
        baselines::squeezer(&data.table, &SqueezerConfig { threshold }).map(|l| (threshold, l))
    });
    let (diagnostics, outcome) = match run {
        Ok((threshold, labels)) => (
            Diagnostics::Squeezer {
                threshold: Some(threshold),
                clusters: labels.iter().max().map_or(0, |m| m + 1),
            },
            Outcome::evaluate(
                labels.into_iter().map(Some).collect(),
                data.labels.as_deref(),
            ),
        ),
        Err(e) => (
            Diagnostics::Squeezer {
                threshold: config.squeezer_threshold,
                clusters: 0,
            },
            Outcome::Failed {
                reason: e.to_string(),
            },
        ),
    };
    Section {
        algorithm: Algorithm::Squeezer,
        diagnostics,
        outcome,
        elapsed: start.elapsed(),
    }
}

fn run_kmodes(config: &ExperimentConfig, data: &LabeledDataset) -> Section {
    let start = Instant::now();
    let (diagnostics, outcome) =
        match baselines::kmodes(&data.table, &KModesConfig::new(config.kmodes_k)) {
            Ok(res) => (
                Diagnostics::KModes {
                    k: config.kmodes_k,
                    iterations: res.iterations,
                    cost: res.cost,
                },
                Outcome::evaluate(
                    res.labels.into_iter().map(Some).collect(),
                    data.labels.as_deref(),
                ),
            ),
            Err(e) => (
                Diagnostics::None {},
                Outcome::Failed {
                    reason: e.to_string(),
                },
            ),
        };
    Section {
        algorithm: Algorithm::Kmodes,
        diagnostics,
        outcome,
        elapsed: start.elapsed(),
    }
}

fn run_lcbcdc(config: &ExperimentConfig, data: &LabeledDataset) -> Section {
    let start = Instant::now();
    let (diagnostics, outcome) = match fit_lcbcdc(data, config.params, &config.optimizer) {
        Ok(fit) => (
            Diagnostics::Lcbcdc {
                k: config.optimizer.k,
                log_likelihood: fit.diagnostics.log_likelihood,
                coverage: fit.diagnostics.coverage,
                chosen_restart: fit.diagnostics.chosen_restart,
                group_sizes: fit.diagnostics.group_sizes,
                restarts: fit.diagnostics.restarts,
            },
            Outcome::evaluate(fit.result.assignment, data.labels.as_deref()),
        ),
        Err(e) => (
            Diagnostics::None {},
            Outcome::Failed {
                reason: e.to_string(),
            },
        ),
    };
    Section {
        algorithm: Algorithm::Lcbcdc,
        diagnostics,
        outcome,
        elapsed: start.elapsed(),
    }
}

/// Loads the data once and runs the selected algorithms, the baselines
/// alongside the optimizer. A failing algorithm yields a `Failed` section;
/// only loading errors abort the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    let data = read_dataset(&config.data, &config.ingest)?;
    let (baseline_sections, lcbcdc) = rayon::join(
        || {
            let mut out = Vec::new();
            if config.runs(Algorithm::Squeezer) {
                out.push(run_squeezer(config, &data));
            }
            if config.runs(Algorithm::Kmodes) {
                out.push(run_kmodes(config, &data));
            }
            out
        },
        || {
            config
                .runs(Algorithm::Lcbcdc)
                .then(|| run_lcbcdc(config, &data))
        },
    );
    let mut sections = baseline_sections;
    sections.extend(lcbcdc);
    Ok(ExperimentReport {
        data: config.data.file_name().map_or_else(
            || config.data.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        ),
        records: data.table.n(),
        attributes: data.table.r(),
        sections,
    })
}

fn section_title(section: &Section) -> String {
    match &section.diagnostics {
        Diagnostics::Squeezer {
            threshold: Some(s), ..
        } => format!("squeezer s={s}"),
        Diagnostics::Squeezer {
            threshold: None, ..
        } => "squeezer".to_string(),
        Diagnostics::KModes { k, .. } => format!("kmodes k={k}"),
        Diagnostics::Lcbcdc { k, coverage, .. } => format!("lcbcdc K={k} covered={coverage}"),
        Diagnostics::None {} => match section.algorithm {
            Algorithm::Kmodes => "kmodes".to_string(),
            _ => "lcbcdc".to_string(),
        },
    }
}

/// One block per section: a header line (the algorithm, its parameters and
/// the class names), one row per cluster, then `error TAB value` rounded to
/// three decimals. Blocks are separated by a blank line.
pub fn write_tsv<W: Write>(out: &mut W, report: &ExperimentReport) -> io::Result<()> {
    for (i, section) in report.sections.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        let title = section_title(section);
        match &section.outcome {
            Outcome::Evaluated {
                confusion, error, ..
            } => {
                writeln!(out, "{title}\t{}", confusion.classes.join("\t"))?;
                for (row, counts) in confusion.rows.iter().zip(&confusion.counts) {
                    let counts: Vec<String> = counts.iter().map(ToString::to_string).collect();
                    writeln!(out, "{row}\t{}", counts.join("\t"))?;
                }
                writeln!(out, "error\t{:.3}", eval::round3(*error))?;
            }
            Outcome::NoLabels { labels } => {
                writeln!(out, "{title}")?;
                writeln!(out, "note\tno labels")?;
                eval::write_labels(out, labels)?;
            }
            Outcome::Failed { reason } => {
                writeln!(out, "{title}")?;
                writeln!(out, "note\t{reason}")?;
            }
        }
    }
    Ok(())
}

fn eval_tsv<W: Write>(out: &mut W, m: &ConfusionMatrix, r: &EvalReport) -> io::Result<()> {
    writeln!(out, "cluster\t{}", m.classes.join("\t"))?;
    for (row, counts) in m.rows.iter().zip(&m.counts) {
        let counts: Vec<String> = counts.iter().map(ToString::to_string).collect();
        writeln!(out, "{row}\t{}", counts.join("\t"))?;
    }
    writeln!(out, "error\t{:.3}", eval::round3(r.error))
}

fn with_output<F>(out: &Option<PathBuf>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(CliError::io(path))?;
            let mut w = BufWriter::new(file);
            body(&mut w)
                .and_then(|_| w.flush())
                .map_err(CliError::io(path))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)
                .and_then(|_| w.flush())
                .map_err(CliError::io(Path::new("<stdout>")))
        }
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)
}

#[derive(Serialize)]
struct LinkRecord<'a> {
    attribute: usize,
    value: &'a str,
    members: Vec<usize>,
}

fn cmd_transform(args: &TransformArgs) -> Result<(), CliError> {
    let data = read_dataset(&args.data.data, &args.data.ingest_options())?;
    let links = to_link_dataset(&data.table)?;
    with_output(&args.output.out, |mut w| match args.output.format {
        Format::Tsv => write_links(&mut w, &links),
        Format::Json => {
            let records: Vec<LinkRecord> = links
                .links()
                .iter()
                .map(|l| LinkRecord {
                    attribute: l.source_attribute,
                    value: &l.source_value,
                    members: l.members.iter().map(|e| e + 1).collect(),
                })
                .collect();
            write_json(
                w,
                &serde_json::json!({ "entities": links.n_entities(), "links": records }),
            )
        }
    })
}

fn cmd_cluster(args: &ClusterArgs) -> Result<(), CliError> {
    let data = read_dataset(&args.data.data, &args.data.ingest_options())?;
    let labels: Vec<Option<usize>> = match args.algo {
        Algorithm::All => {
            return Err(CliError::BadConfig(
                "cluster takes a single algorithm; use experiment for all".into(),
            ))
        }
        Algorithm::Squeezer => {
            let threshold = match args.model.squeezer_threshold() {
                ThresholdChoice::Fixed(s) => s,
                ThresholdChoice::Search(k) => baselines::find_threshold_for_k(&data.table, k)?,
            };
            let labels = baselines::squeezer(&data.table, &SqueezerConfig { threshold })?;
            labels.into_iter().map(Some).collect()
        }
        Algorithm::Kmodes => {
            let res = baselines::kmodes(&data.table, &KModesConfig::new(args.model.k))?;
            res.labels.into_iter().map(Some).collect()
        }
        Algorithm::Lcbcdc => {
            let params = LinkModelParams::new(args.model.pi, args.model.pr)?;
            let fit = fit_lcbcdc(&data, params, &args.model.optimizer_config())?;
            if let Some(path) = &args.chart {
                with_output(&Some(path.clone()), |mut w| fit.chart.write(&mut w))?;
            }
            fit.result.assignment
        }
    };
    with_output(&args.output.out, |mut w| match args.output.format {
        Format::Tsv => eval::write_labels(&mut w, &labels),
        Format::Json => write_json(&mut w, &serde_json::json!({ "labels": labels })),
    })
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let data = read_dataset(&args.data.data, &args.data.ingest_options())?;
    let truth = data.labels.ok_or_else(|| {
        CliError::BadConfig("eval needs --class-col to name the class column".into())
    })?;
    let file = File::open(&args.labels).map_err(CliError::io(&args.labels))?;
    let labels = eval::read_labels(BufReader::new(file))?;
    let m = confusion(&labels, &truth, args.include_outliers)?;
    let r = accuracy_error(&m)?;
    with_output(&args.output.out, |mut w| match args.output.format {
        Format::Tsv => eval_tsv(&mut w, &m, &r),
        Format::Json => write_json(
            w,
            &serde_json::json!({
                "confusion": ConfusionRecord::from(&m),
                "accuracy": r.accuracy,
                "error": r.error,
                "coverage": r.coverage(),
                "counted": r.counted,
                "records": r.records,
            }),
        ),
    })
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let config = ExperimentConfig::from_args(args)?;
    let report = run_experiment(&config)?;
    for section in &report.sections {
        eprintln!(
            "{:?}: {:.3} s",
            section.algorithm,
            section.elapsed.as_secs_f64()
        );
    }
    with_output(&args.output.out, |mut w| match args.output.format {
        Format::Tsv => write_tsv(&mut w, &report),
        Format::Json => write_json(&mut w, &report),
    })
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Transform(a) => cmd_transform(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

/// Parses `args`, runs, and maps the outcome to the process exit code:
/// 0 on success, 1 for usage or configuration errors, 2 for I/O errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("linkclust: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
