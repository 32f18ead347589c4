//! The `qkm` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 non-convergence,
//! 4 data error.

pub mod benchmark;
pub mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::data::{
    self, bundled, make_blobs, subsample_split, BlobSpec, Dataset, FittedScaler, ScaleTarget,
};
use crate::distance::{SampleMode, DEFAULT_SHOTS};
use crate::error::{QkmError, Result};
use crate::kmeans::{self, DistanceKind, InitMethod, KMeansConfig};
use crate::qkernel::{kernel_gram, KernelGram};
use crate::svm::{
    fit_ovr, fit_ovr_gram, predict_ovr, predict_ovr_rows, rbf_gamma_scale, KernelSpec, OvrModel,
    SmoConfig,
};

use benchmark::{run_benchmark, BenchDataset, BenchmarkConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_DATA: i32 = 4;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "QKM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "qkm",
    version,
    about = "Swap-test K-means and quantum-kernel SVM experiments"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON object of flag values; explicit flags take precedence
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate isotropic Gaussian blobs
    GenBlobs(GenBlobsArgs),
    /// Run K-means with a classical or swap-test distance
    Cluster(ClusterArgs),
    /// Train a one-against-rest SVM and predict
    Svm(SvmArgs),
    /// Export the quantum kernel Gram matrix of a dataset
    Kernel(KernelArgs),
    /// Compare the four algorithms on repeated splits
    Benchmark(BenchmarkArgs),
    /// Scatter plot of an assignments CSV as SVG
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Bundled {
    Wine,
    Iris,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Classical,
    QuantumExact,
    QuantumShots,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Random,
    #[value(name = "kmeans++")]
    KMeansPlusPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    None,
    UnitInterval,
    AngleInterval,
    Standardize,
}

impl From<ScaleArg> for ScaleTarget {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::None => ScaleTarget::None,
            ScaleArg::UnitInterval => ScaleTarget::UnitInterval,
            ScaleArg::AngleInterval => ScaleTarget::AngleInterval,
            ScaleArg::Standardize => ScaleTarget::Standardize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Quantum,
    Rbf,
    Precomputed,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Input CSV (one header row)
    #[arg(long, short = 'i', conflicts_with = "dataset")]
    pub input: Option<PathBuf>,
    /// Use a bundled table instead of a file
    #[arg(long, value_enum)]
    pub dataset: Option<Bundled>,
    #[arg(long, default_value = data::LABEL_COLUMN)]
    pub label_column: String,
    /// Feature columns to keep, e.g. 0,6
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct GenBlobsArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub std: f64,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub mean_low: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub mean_high: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; the spec is written next to it with a .json extension
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "quantum-exact")]
    pub distance: DistanceArg,
    /// Shots per swap test with --distance quantum-shots
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// Stop once at most this fraction of points changes cluster
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "random")]
    pub init: InitArg,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value = "unit-interval")]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Assignments CSV: the input features plus a cluster column
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    /// Per-iteration trace and centroids as JSON
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    #[command(flatten)]
    pub source: Source,
    /// Separate labeled test CSV; otherwise the input is split or, without
    /// --n-train, predicted on itself
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, requires = "n_test")]
    pub n_train: Option<usize>,
    #[arg(long, requires = "n_train")]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub no_stratify: bool,
    #[arg(long, value_enum, default_value = "quantum")]
    pub kernel: KernelArg,
    /// Gram matrix over every input row, for --kernel precomputed
    #[arg(long)]
    pub gram: Option<PathBuf>,
    /// Estimate kernel entries from this many shots instead of exactly
    #[arg(long)]
    pub shots: Option<u64>,
    /// RBF width; defaults to 1 / (features · variance)
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 50)]
    pub max_passes: usize,
    #[arg(long, value_enum, default_value = "angle-interval")]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Predictions CSV
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum, default_value = "angle-interval")]
    pub scale: ScaleArg,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_enum, default_value = "wine")]
    pub dataset: BenchDataset,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 30)]
    pub n_train: usize,
    #[arg(long, default_value_t = 30)]
    pub n_test: usize,
    /// Defaults: wine 0,6; iris 0,1; blobs all
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// K-means restarts per fit (lowest WCSS kept)
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    /// Use exact probabilities for the quantum algorithms
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Feature scaling for both SVMs, fitted on each training split
    #[arg(long, value_enum, default_value = "angle-interval")]
    pub svm_scale: ScaleArg,
    #[arg(long, default_value_t = 100)]
    pub blob_n: usize,
    #[arg(long, default_value_t = 5)]
    pub blob_dims: usize,
    #[arg(long, default_value_t = 3.0)]
    pub blob_std: f64,
    /// Report JSON
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Also write the text table here
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Record wall-clock seconds in the report (makes it non-reproducible)
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Assignments or dataset CSV
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Feature pair to plot, e.g. 0,1
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0,1")]
    pub pair: Vec<usize>,
    #[arg(long, default_value = data::LABEL_COLUMN)]
    pub label_column: String,
    #[arg(long, default_value = "cluster")]
    pub cluster_column: String,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

/// Splices flags from the file named by `--config` in front of the explicit
/// ones, so later (explicit) occurrences win.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, arg) in argv.iter().enumerate().skip(1) {
        let Some(s) = arg.to_str() else { continue };
        if s == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| QkmError::io(&path, e))?;
    let value: Value = serde_json::from_str(&text)?;
    let Value::Object(map) = value else {
        return Err(QkmError::Argument(format!(
            "{}: config must be a JSON object",
            path.display()
        )));
    };
    let mut injected = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let rendered = match v {
            Value::Null | Value::Bool(false) => continue,
            Value::Bool(true) => {
                injected.push(OsString::from(flag));
                continue;
            }
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            Value::Array(items) => items
                .iter()
                .map(|item| match item {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            Value::Object(_) => {
                return Err(QkmError::Argument(format!(
                    "config key {key:?}: nested objects are not flags"
                )))
            }
        };
        injected.push(OsString::from(flag));
        injected.push(OsString::from(rendered));
    }
    let split = 2.min(argv.len());
    let mut out = argv[..split].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[split..]);
    Ok(out)
}

pub fn exit_code(err: &QkmError) -> i32 {
    match err {
        QkmError::Capacity(_)
        | QkmError::Precondition(_)
        | QkmError::Bounds { .. }
        | QkmError::Alias(_)
        | QkmError::Argument(_) => EXIT_USAGE,
        QkmError::DegenerateInput(_)
        | QkmError::Shape(_)
        | QkmError::InsufficientData(_)
        | QkmError::ClassCount(_)
        | QkmError::Parse { .. }
        | QkmError::Data(_)
        | QkmError::Io { .. }
        | QkmError::Json(_) => EXIT_DATA,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        QkmError::Argument(format!("{THREADS_ENV}={raw:?} is not a positive integer"))
    })?;
    // a pool that already exists (tests calling in twice) is fine
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args(argv: Vec<OsString>) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::GenBlobs(a) => cmd_gen_blobs(&a),
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Svm(a) => cmd_svm(&a),
        Command::Kernel(a) => cmd_kernel(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Plot(a) => cmd_plot(&a),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| QkmError::io(path, e))
}

fn to_json(value: &impl serde::Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn has_column(text: &str, name: &str) -> bool {
    text.lines()
        .next()
        .is_some_and(|h| h.split(',').any(|c| c.trim().trim_matches('"') == name))
}

fn load_path(path: &Path, label_column: &str, require_labels: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| QkmError::io(path, e))?;
    let label = if has_column(&text, label_column) {
        Some(label_column)
    } else if require_labels {
        return Err(QkmError::Data(format!(
            "{}: no label column named {label_column:?}",
            path.display()
        )));
    } else {
        None
    };
    data::parse_csv(&text, &path.display().to_string(), label)
}

fn load_source(src: &Source, require_labels: bool) -> Result<Dataset> {
    let data = match (&src.input, src.dataset) {
        (Some(path), _) => load_path(path, &src.label_column, require_labels)?,
        (None, Some(Bundled::Wine)) => bundled("wine")?,
        (None, Some(Bundled::Iris)) => bundled("iris")?,
        (None, None) => {
            return Err(QkmError::Argument(
                "one of --input or --dataset is required".into(),
            ))
        }
    };
    if data.is_empty() {
        return Err(QkmError::InsufficientData("input has no rows".into()));
    }
    match &src.features {
        Some(cols) => data.select_features(cols),
        None => Ok(data),
    }
}

fn cmd_gen_blobs(a: &GenBlobsArgs) -> Result<i32> {
    let spec = BlobSpec {
        n_points: a.n,
        dims: a.dims,
        k_clusters: a.k,
        std: a.std,
        mean_range: (a.mean_low, a.mean_high),
        seed: a.seed,
    };
    let (dataset, centers) = make_blobs(&spec)?;
    write(&a.output, &dataset.to_csv())?;
    let sidecar = a.output.with_extension("json");
    write(
        &sidecar,
        &to_json(&json!({ "spec": spec, "centers": centers }))?,
    )?;
    println!("wrote {} rows to {}", dataset.len(), a.output.display());
    Ok(EXIT_OK)
}

fn cmd_cluster(a: &ClusterArgs) -> Result<i32> {
    let distance = match a.distance {
        DistanceArg::Classical => DistanceKind::Classical,
        DistanceArg::QuantumExact => DistanceKind::QuantumExact,
        DistanceArg::QuantumShots => DistanceKind::QuantumShots(a.shots),
    };
    let init = match a.init {
        InitArg::Random => InitMethod::RandomPoints,
        InitArg::KMeansPlusPlus => InitMethod::KMeansPlusPlus,
    };
    let config = KMeansConfig {
        k: a.k,
        distance,
        max_iterations: a.max_iterations,
        epsilon: a.epsilon,
        init,
        seed: a.seed,
        restarts: a.restarts,
    };
    config.validate()?;
    let data = load_source(&a.source, false)?;
    let scaler = FittedScaler::fit(&data.features, a.scale.into())?;
    let scaled = scaler.transform(&data.features)?;
    let model = kmeans::fit(&scaled, &config)?;

    let accuracy = data
        .labels
        .as_ref()
        .map(|labels| kmeans::cluster_accuracy(&model.assignments, labels))
        .transpose()?;
    write(
        &a.output,
        &data.to_csv_with(&[("cluster", &model.assignments)]),
    )?;
    if let Some(path) = &a.trace {
        let report = json!({
            "config": config,
            "scale": ScaleTarget::from(a.scale),
            "converged": model.converged,
            "iterations_run": model.iterations_run,
            "restart": model.restart,
            "trace": model.trace,
            "centroids": scaler.inverse_transform(&model.centroids),
            "accuracy": accuracy,
        });
        write(path, &to_json(&report)?)?;
    }
    match accuracy {
        Some(acc) => println!("accuracy {acc:.4}"),
        None => println!("clustered {} points", data.len()),
    }
    if model.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "warning: stopped after {} iterations without converging",
            model.iterations_run
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_svm(a: &SvmArgs) -> Result<i32> {
    if let Some(s) = a.shots {
        SampleMode::Shots(s).validate()?;
    }
    if a.kernel == KernelArg::Precomputed && a.gram.is_none() {
        return Err(QkmError::Argument(
            "--kernel precomputed needs --gram".into(),
        ));
    }
    if a.kernel == KernelArg::Precomputed && a.test.is_some() {
        return Err(QkmError::Argument(
            "--kernel precomputed indexes rows of --input; use --n-train/--n-test instead of --test".into(),
        ));
    }
    let data = load_source(&a.source, true)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let (train_idx, test_idx, test_data) = match (&a.test, a.n_train, a.n_test) {
        (Some(path), _, _) => {
            let mut test = load_path(path, &a.source.label_column, false)?;
            if let Some(cols) = &a.source.features {
                test = test.select_features(cols)?;
            }
            (all.clone(), None, test)
        }
        (None, Some(n_train), Some(n_test)) => {
            let split = subsample_split(&data, n_train, n_test, !a.no_stratify, a.seed)?;
            (split.train_indices, Some(split.test_indices), split.test)
        }
        _ => (all.clone(), Some(all.clone()), data.clone()),
    };
    let train = data.subset(&train_idx);
    let train_labels = train.labels.clone().expect("labels required above");
    let classes = data.num_classes();
    let smo = SmoConfig {
        c: a.c,
        tolerance: a.tolerance,
        max_passes: a.max_passes,
        seed: a.seed,
        ..SmoConfig::default()
    };

    let (predictions, model, scaler) = if a.kernel == KernelArg::Precomputed {
        let gram = KernelGram::read(a.gram.as_deref().expect("checked above"))?;
        if gram.len() != data.len() {
            return Err(QkmError::Shape(format!(
                "gram is {0}×{0} but the input has {1} rows",
                gram.len(),
                data.len()
            )));
        }
        let test_idx = test_idx.as_deref().expect("no --test with precomputed");
        let models = fit_ovr_gram(
            &gram.select(&train_idx, &train_idx),
            &train_labels,
            classes,
            &smo,
        )?;
        let model = OvrModel {
            classes: (0..classes).collect(),
            models,
            kernel: KernelSpec::Precomputed,
            training_points: Vec::new(),
        };
        let rows = gram.select(test_idx, &train_idx);
        (predict_ovr_rows(&model, &rows)?, model, None)
    } else {
        let scaler = FittedScaler::fit(&train.features, a.scale.into())?;
        let train_x = scaler.transform(&train.features)?;
        let test_x = scaler.transform(&test_data.features)?;
        let kernel = match a.kernel {
            KernelArg::Rbf => KernelSpec::Rbf {
                gamma: a.gamma.unwrap_or_else(|| rbf_gamma_scale(&train_x)),
            },
            _ => KernelSpec::Quantum {
                mode: a.shots.map_or(SampleMode::Exact, SampleMode::Shots),
                seed: a.seed,
            },
        };
        let model = fit_ovr(&train_x, &train_labels, classes, kernel, &smo)?;
        (predict_ovr(&model, &test_x)?, model, Some(scaler))
    };

    let rows: Vec<usize> = test_idx.unwrap_or_else(|| (0..test_data.len()).collect());
    let mut csv = String::from(if test_data.labels.is_some() {
        "row,label,predicted\n"
    } else {
        "row,predicted\n"
    });
    for (i, (&row, &p)) in rows.iter().zip(&predictions).enumerate() {
        match &test_data.labels {
            Some(l) => csv.push_str(&format!("{row},{},{p}\n", l[i])),
            None => csv.push_str(&format!("{row},{p}\n")),
        }
    }
    write(&a.output, &csv)?;
    let accuracy = test_data.labels.as_ref().map(|labels| {
        predictions
            .iter()
            .zip(labels)
            .filter(|(p, l)| p == l)
            .count() as f64
            / labels.len().max(1) as f64
    });
    if let Some(path) = &a.model {
        let report = json!({
            "features": a.source.features,
            "scaler": scaler,
            "model": model,
            "accuracy": accuracy,
        });
        write(path, &to_json(&report)?)?;
    }
    match accuracy {
        Some(acc) => println!("accuracy {acc:.4}"),
        None => println!("predicted {} rows", predictions.len()),
    }
    let converged = model.models.iter().all(|m| m.converged);
    if converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("warning: SMO hit its sweep limit for at least one class");
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_kernel(a: &KernelArgs) -> Result<i32> {
    let data = load_source(&a.source, false)?;
    let scaled = FittedScaler::fit(&data.features, a.scale.into())?.transform(&data.features)?;
    let mode = a.shots.map_or(SampleMode::Exact, SampleMode::Shots);
    let gram = kernel_gram(&scaled, mode, a.seed)?;
    gram.write(&a.output)?;
    println!("wrote {0}×{0} gram to {1}", gram.len(), a.output.display());
    Ok(EXIT_OK)
}

fn cmd_benchmark(a: &BenchmarkArgs) -> Result<i32> {
    let defaults = BenchmarkConfig::default();
    let config = BenchmarkConfig {
        dataset: a.dataset,
        trials: a.trials,
        n_train: a.n_train,
        n_test: a.n_test,
        features: a.features.clone(),
        seed: a.seed,
        restarts: a.restarts,
        shots: (!a.exact).then_some(a.shots),
        c: a.c,
        svm_scale: a.svm_scale.into(),
        blobs: BlobSpec {
            n_points: a.blob_n,
            dims: a.blob_dims,
            std: a.blob_std,
            seed: a.seed,
            ..defaults.blobs
        },
    };
    let report = run_benchmark(&config, a.timings)?;
    let table = report.table();
    print!("{table}");
    if let Some(path) = &a.output {
        write(path, &to_json(&report)?)?;
    }
    if let Some(path) = &a.table {
        write(path, &table)?;
    }
    Ok(EXIT_OK)
}

fn cmd_plot(a: &PlotArgs) -> Result<i32> {
    let [fx, fy] = a.pair[..] else {
        return Err(QkmError::Argument(
            "--pair takes exactly two feature indices".into(),
        ));
    };
    let text = std::fs::read_to_string(&a.input).map_err(|e| QkmError::io(&a.input, e))?;
    let input = plot::PlotInput::parse(
        &text,
        &a.input.display().to_string(),
        &a.label_column,
        &a.cluster_column,
    )?;
    let svg = plot::render_svg(&input, fx, fy)?;
    write(&a.output, &svg)?;
    println!("wrote {}", a.output.display());
    Ok(EXIT_OK)
}
