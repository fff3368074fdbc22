//! The `icll` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.

pub mod benchmark;
pub mod method;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset, MinMax};
use crate::error::{Error, Result};
use crate::evaluation::{auc, ScoreTable};
use crate::layering::write_groups_csv;
use crate::learners::Classifier;
pub use benchmark::{run_benchmark, BenchmarkConfig, BenchmarkOutput, Fitted};
pub use method::Method;
pub use report::{aggregate, Report, ReportConfig};

#[derive(Debug, Parser)]
#[command(name = "icll", version, about = "Cluster-defined two-layer classifier for imbalanced binary data")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one method on a dataset and save the model as JSON.
    Fit(FitArgs),
    /// Score a dataset with a saved model.
    Score(ScoreArgs),
    /// Run the cross-validated comparison and write all reports.
    Benchmark(BenchmarkArgs),
    /// Recompute the reports from an existing score table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// KEEL `.dat`/`.arff` or `.csv` file.
    pub dataset: PathBuf,
    #[arg(long, default_value = "ICLL", value_parser = parse_method)]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Min-max scale features before fitting.
    #[arg(long)]
    pub minmax: bool,
    /// Class column for CSV input.
    #[arg(long, default_value = "class")]
    pub label_column: String,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Write the group of every training row (two-layer methods only).
    #[arg(long)]
    pub groups_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub model: PathBuf,
    pub dataset: PathBuf,
    #[arg(long, default_value = "class")]
    pub label_column: String,
    /// Output CSV `index,label,score`; stdout if omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Method the percentage differences and ROPE outcomes are measured against.
    #[arg(long, default_value = "ICLL+SMOTE(L2)", value_parser = parse_method)]
    pub reference: Method,
    /// Method whose AUC decides which datasets are difficult.
    #[arg(long, default_value = "NoResample-RF", value_parser = parse_method)]
    pub baseline: Method,
    /// Half-width of the region of practical equivalence, in percent.
    #[arg(long, default_value_t = 1.0)]
    pub rope: f64,
    /// Baseline AUC below which a dataset counts as difficult.
    #[arg(long, default_value_t = 0.9)]
    pub cutoff: f64,
    /// Keep datasets whose mixed group was empty in some fold.
    #[arg(long)]
    pub keep_degenerate: bool,
}

impl AggregateArgs {
    fn config(&self) -> ReportConfig {
        ReportConfig {
            reference: self.reference.name().to_string(),
            baseline: self.baseline.name().to_string(),
            rope: self.rope,
            cutoff: self.cutoff,
            keep_degenerate: self.keep_degenerate,
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Directory of datasets (`.dat`, `.arff`, `.csv`).
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Individual dataset files; may be repeated.
    #[arg(long = "dataset")]
    pub datasets: Vec<PathBuf>,
    /// Comma-separated method names; all methods if omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 2)]
    pub repeats: usize,
    /// Worker threads; all cores if omitted.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long)]
    pub minmax: bool,
    #[arg(long, default_value = "class")]
    pub label_column: String,
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub aggregate: AggregateArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Score table written by `benchmark`.
    pub scores: PathBuf,
    /// Degeneracy table; defaults to `degeneracy.csv` next to the scores.
    #[arg(long)]
    pub degeneracy: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub aggregate: AggregateArgs,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A fitted method plus what is needed to apply it to new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub method: Method,
    pub feature_names: Vec<String>,
    pub minmax: Option<MinMax>,
    pub model: Fitted,
}

impl SavedModel {
    pub fn score(&self, d: &Dataset) -> Result<Vec<f64>> {
        if d.feature_names() != self.feature_names.as_slice() {
            return Err(Error::FeatureMismatch {
                expected: self.feature_names.clone(),
                found: d.feature_names().to_vec(),
            });
        }
        Ok(match &self.minmax {
            Some(s) => self.model.score(s.apply(d.features()).view()),
            None => self.model.score(d.features()),
        })
    }
}

/// A usage problem (exit 1) or a runtime failure (exit 2).
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .try_init();
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Score(a) => cmd_score(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn cmd_fit(a: &FitArgs) -> std::result::Result<(), Failure> {
    let raw = data::load_path(&a.dataset, &a.label_column)?;
    let s = raw.summary();
    println!(
        "{}: {} rows, {} features, {} majority / {} minority (ratio {:.2})",
        raw.name(),
        raw.n_rows(),
        raw.n_features(),
        s.n_majority,
        s.n_minority,
        s.imbalance_ratio
    );
    let minmax = a.minmax.then(|| MinMax::fit(raw.features()));
    let d = match &minmax {
        Some(m) => raw.derive(m.apply(raw.features()), raw.labels().to_vec())?,
        None => raw.clone(),
    };
    let model = benchmark::fit_method(a.method, &d, a.seed, a.trees)?;
    if let Fitted::Icll(m) = &model {
        println!("groups: {}", m.groups().counts);
        println!("degenerate: {}", m.degeneracy());
        if m.fallback_single_model() {
            println!("no pure majority group at any cut; fitted a single model");
        }
        if let Some(path) = &a.groups_out {
            write_groups_csv(m.groups(), d.labels(), BufWriter::new(File::create(path).map_err(Error::from)?))?;
        }
    } else if a.groups_out.is_some() {
        return Err(Failure::Usage(format!("--groups-out needs a two-layer method, not {}", a.method)));
    }
    let saved = SavedModel {
        method: a.method,
        feature_names: raw.feature_names().to_vec(),
        minmax,
        model,
    };
    std::fs::write(&a.out, serde_json::to_string(&saved).map_err(Error::from)?).map_err(Error::from)?;
    println!("saved {} model to {}", a.method, a.out.display());
    Ok(())
}

fn cmd_score(a: &ScoreArgs) -> std::result::Result<(), Failure> {
    let saved: SavedModel =
        serde_json::from_str(&std::fs::read_to_string(&a.model).map_err(Error::from)?).map_err(Error::from)?;
    let d = data::load_path(&a.dataset, &a.label_column)?;
    let scores = saved.score(&d)?;
    let mut text = String::from("index,label,score\n");
    for (i, (y, s)) in d.labels().iter().zip(&scores).enumerate() {
        text.push_str(&format!("{i},{y},{s}\n"));
    }
    match &a.out {
        Some(p) => std::fs::write(p, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    if let Ok(v) = auc(&scores, d.labels()) {
        eprintln!("AUC: {v}");
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
    f(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_benchmark(a: &BenchmarkArgs) -> std::result::Result<(), Failure> {
    let mut paths = a.datasets.clone();
    if let Some(dir) = &a.data_dir {
        paths.extend(benchmark::dataset_paths(dir)?);
    }
    if paths.is_empty() {
        return Err(Failure::Usage("no datasets given; use --data-dir or --dataset".into()));
    }
    let defaults = BenchmarkConfig::default();
    let cfg = BenchmarkConfig {
        methods: if a.methods.is_empty() { defaults.methods.clone() } else { a.methods.clone() },
        repeats: a.repeats,
        folds: a.folds,
        seed: a.seed,
        workers: a.workers.unwrap_or(defaults.workers),
        trees: a.trees,
        minmax: a.minmax,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let rcfg = a.aggregate.config();
    for m in [&rcfg.reference, &rcfg.baseline] {
        if !cfg.methods.iter().any(|x| x.name() == m) {
            return Err(Failure::Usage(format!("{m} must be among the benchmarked methods")));
        }
    }

    let (datasets, mut failures) = benchmark::load_datasets(&paths, &a.label_column);
    let out = run_benchmark(&datasets, &cfg)?;
    failures.extend(out.failures.iter().cloned());

    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    write_file(&a.out, "scores.csv", |w| out.scores.write_csv(w))?;
    write_file(&a.out, "failures.csv", |w| report::write_failures(w, &failures))?;
    write_file(&a.out, "degeneracy.csv", |w| report::write_degeneracy(w, &out.degeneracy))?;
    let rep = aggregate(&out.scores, &out.degeneracy, &failures, &rcfg)?;
    rep.write(&a.out)?;
    print!("{}", rep.text());
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> std::result::Result<(), Failure> {
    let scores = ScoreTable::read_csv(File::open(&a.scores).map_err(Error::from)?)?;
    let dir = a.scores.parent().unwrap_or(Path::new("."));
    let degeneracy_path = a.degeneracy.clone().unwrap_or_else(|| dir.join("degeneracy.csv"));
    let degeneracy = if degeneracy_path.exists() {
        report::read_degeneracy(File::open(&degeneracy_path).map_err(Error::from)?)?
    } else {
        if a.degeneracy.is_some() {
            return Err(Error::InvalidInput(format!("{} does not exist", degeneracy_path.display())).into());
        }
        Vec::new()
    };
    let failures_path = dir.join("failures.csv");
    let failures = if failures_path.exists() {
        report::read_failures(File::open(&failures_path).map_err(Error::from)?)?
    } else {
        Vec::new()
    };
    let rep = aggregate(&scores, &degeneracy, &failures, &a.aggregate.config())?;
    rep.write(&a.out)?;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(rep.text().as_bytes());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(["icll"]), 1);
        assert_eq!(run(["icll", "fit"]), 1);
        assert_eq!(run(["icll", "benchmark", "--out", "x", "--methods", "SVM"]), 1);
        assert_eq!(run(["icll", "--help"]), 0);
    }

    #[test]
    fn benchmark_without_datasets_is_usage() {
        assert_eq!(run(["icll", "benchmark", "--out", "/nonexistent/x"]), 1);
    }

    #[test]
    fn missing_file_is_runtime() {
        assert_eq!(run(["icll", "fit", "/nonexistent.dat", "--out", "/tmp/never.json"]), 2);
    }
}
