//! The cross-validated comparison grid.
//!
//! Every (dataset, repeat, fold) cell fits all requested methods on the same
//! training fold with the same cell seed. Cells run on a bounded rayon pool
//! and are reassembled in grid order, so the score table does not depend on
//! the number of workers. A dataset with any failing cell is dropped and
//! recorded as a failure.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::method::Method;
use crate::data::{self, Dataset, MinMax};
use crate::error::{Error, Result};
use crate::evaluation::{auc, stratified_kfold, FoldPlan, ScoreTable};
use crate::icll::{self, IcllConfig, IcllModel, Layer, LayerPlan, Variant};
use crate::layering::{DegeneracyKind, GroupCounts};
use crate::learners::{Classifier, ForestConfig, LearnerSpec, LogisticConfig, Model};
use crate::resampling::{resample, ResampleMethod, ResamplePlan};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub methods: Vec<Method>,
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
    pub workers: usize,
    /// Trees per random forest.
    pub trees: usize,
    /// Min-max scale features with training-fold statistics.
    pub minmax: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            repeats: 2,
            folds: 5,
            seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            trees: 100,
            minmax: false,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("no methods selected".into()));
        }
        let unique: HashSet<_> = self.methods.iter().collect();
        if unique.len() != self.methods.len() {
            return Err(Error::InvalidInput("a method is listed twice".into()));
        }
        if self.workers == 0 || self.trees == 0 {
            return Err(Error::InvalidInput("workers and trees must be at least 1".into()));
        }
        Ok(())
    }

    fn forest(&self) -> LearnerSpec {
        LearnerSpec::Forest(ForestConfig {
            n_trees: self.trees,
            ..ForestConfig::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub dataset: String,
    pub reason: String,
}

/// Group structure of the ICLL layers in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyRecord {
    pub dataset: String,
    pub repeat: usize,
    pub fold: usize,
    pub initial: DegeneracyKind,
    pub degeneracy: DegeneracyKind,
    pub fallback_single_model: bool,
    pub counts: GroupCounts,
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkOutput {
    pub scores: ScoreTable,
    pub failures: Vec<Failure>,
    pub degeneracy: Vec<DegeneracyRecord>,
}

/// A fitted baseline or two-layer model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fitted {
    Single(Model),
    Icll(IcllModel),
}

impl Classifier for Fitted {
    fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        match self {
            Fitted::Single(m) => m.score(x),
            Fitted::Icll(m) => m.score(x),
        }
    }
}

/// The two-layer configuration used for `variant` with forests of `trees` trees.
pub fn icll_config(variant: Variant, seed: u64, trees: usize) -> IcllConfig {
    IcllConfig {
        base_learner: LearnerSpec::Forest(ForestConfig {
            n_trees: trees,
            ..ForestConfig::default()
        }),
        ..IcllConfig::new(variant, seed)
    }
}

/// Fits `method` on `train`. Resamplers draw from `derive(seed, [0])` and
/// learners from `derive(seed, [1])`; two-layer models use `seed` directly.
pub fn fit_method(method: Method, train: &Dataset, seed: u64, trees: usize) -> Result<Fitted> {
    let forest = LearnerSpec::Forest(ForestConfig {
        n_trees: trees,
        ..ForestConfig::default()
    });
    let learner_seed = seed::derive(seed, &[1]);
    let fit_on = |spec: &LearnerSpec, d: &Dataset| spec.fit(d.features(), d.labels(), learner_seed);
    Ok(match method {
        Method::NoResampleRf => Fitted::Single(fit_on(&forest, train)?),
        Method::NoResampleLr => Fitted::Single(fit_on(&LearnerSpec::Logistic(LogisticConfig::default()), train)?),
        Method::Resample(m) => {
            let plan = ResamplePlan::new(m, seed::derive(seed, &[0]));
            Fitted::Single(fit_on(&forest, &resample(train, &plan)?.data)?)
        }
        Method::BalancedRf => {
            let spec = LearnerSpec::BalancedForest(ForestConfig {
                n_trees: trees,
                ..ForestConfig::default()
            });
            Fitted::Single(fit_on(&spec, train)?)
        }
        Method::Icll(v) => Fitted::Icll(icll::fit(train, &icll_config(v, seed, trees))?),
    })
}

/// `.dat`, `.arff` and `.csv` files directly inside `dir`, sorted by name.
pub fn dataset_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| matches!(e, "dat" | "arff" | "csv"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Loads every path; unreadable datasets become failures.
pub fn load_datasets(paths: &[PathBuf], label_column: &str) -> (Vec<Dataset>, Vec<Failure>) {
    let mut datasets: Vec<Dataset> = Vec::new();
    let mut failures = Vec::new();
    for p in paths {
        match data::load_path(p, label_column) {
            Ok(d) if datasets.iter().any(|e| e.name() == d.name()) => failures.push(Failure {
                dataset: d.name().to_string(),
                reason: format!("duplicate dataset name ({})", p.display()),
            }),
            Ok(d) => datasets.push(d),
            Err(e) => failures.push(Failure {
                dataset: p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()),
                reason: e.to_string(),
            }),
        }
    }
    (datasets, failures)
}

struct CellResult {
    aucs: Vec<f64>,
    degeneracy: Option<DegeneracyRecord>,
}

/// Seed shared by every method in one cell.
pub fn cell_seed(master: u64, dataset: &str, repeat: usize, fold: usize) -> u64 {
    seed::derive(master, &[seed::hash_str(dataset), repeat as u64, fold as u64])
}

/// Training and test folds, min-max scaled with training statistics if asked.
fn split(d: &Dataset, folds: &FoldPlan, repeat: usize, fold: usize, minmax: bool) -> Result<(Dataset, Dataset)> {
    let train = d.subset(&folds.train_indices(repeat, fold))?;
    let test = d.subset(&folds.test_indices(repeat, fold))?;
    if !minmax {
        return Ok((train, test));
    }
    let scaling = MinMax::fit(train.features());
    Ok((
        train.derive(scaling.apply(train.features()), train.labels().to_vec())?,
        test.derive(scaling.apply(test.features()), test.labels().to_vec())?,
    ))
}

/// Test scores of every requested two-layer variant, fitting each distinct
/// layer model once. Equal to fitting each variant separately.
fn icll_scores(
    train: &Dataset,
    test: &Dataset,
    plan: &LayerPlan,
    variants: &[Variant],
    cfg: &BenchmarkConfig,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let learner = cfg.forest();
    let smote_plan = ResamplePlan::new(ResampleMethod::Smote, seed);
    let needs = |layer: Layer, smoted: bool| {
        variants.iter().any(|&v| {
            let used = match v {
                Variant::IcllL1Only => layer == Layer::One,
                Variant::IcllL2Only => layer == Layer::Two,
                _ => true,
            };
            used && v.smote_in(layer) == smoted
        })
    };
    let jobs: Vec<(Layer, bool)> = [(Layer::One, false), (Layer::One, true), (Layer::Two, false), (Layer::Two, true)]
        .into_iter()
        .filter(|&(l, s)| needs(l, s))
        .collect();
    let fitted: Vec<((Layer, bool), Vec<f64>)> = jobs
        .par_iter()
        .map(|&(layer, smoted)| {
            let sp = smoted.then_some(&smote_plan);
            let model = icll::fit_layer(train, plan, layer, &learner, sp, seed)?;
            Ok(((layer, smoted), model.score(test.features())))
        })
        .collect::<Result<_>>()?;
    let get = |layer: Layer, smoted: bool| -> &Vec<f64> {
        &fitted.iter().find(|(k, _)| *k == (layer, smoted)).expect("layer fitted").1
    };
    Ok(variants
        .iter()
        .map(|&v| {
            let l1 = || get(Layer::One, v.smote_in(Layer::One));
            let l2 = || get(Layer::Two, v.smote_in(Layer::Two));
            match v {
                Variant::IcllL1Only => l1().clone(),
                Variant::IcllL2Only => l2().clone(),
                _ => l1().iter().zip(l2()).map(|(a, b)| a * b).collect(),
            }
        })
        .collect())
}

fn evaluate_cell(d: &Dataset, folds: &FoldPlan, repeat: usize, fold: usize, cfg: &BenchmarkConfig) -> Result<CellResult> {
    let (train, test) = split(d, folds, repeat, fold, cfg.minmax)?;
    let seed = cell_seed(cfg.seed, d.name(), repeat, fold);
    let variants: Vec<Variant> = cfg
        .methods
        .iter()
        .filter_map(|m| match m {
            Method::Icll(v) => Some(*v),
            _ => None,
        })
        .collect();
    let mut scores: Vec<Option<Vec<f64>>> = vec![None; cfg.methods.len()];
    let mut degeneracy = None;
    if !variants.is_empty() {
        let plan = icll::prepare_layers(&train)?;
        degeneracy = Some(DegeneracyRecord {
            dataset: d.name().to_string(),
            repeat,
            fold,
            initial: plan.initial_degeneracy,
            degeneracy: plan.degeneracy,
            fallback_single_model: plan.fallback_single_model,
            counts: plan.groups.counts,
        });
        let mut per_variant = icll_scores(&train, &test, &plan, &variants, cfg, seed)?.into_iter();
        for (slot, m) in scores.iter_mut().zip(&cfg.methods) {
            if matches!(m, Method::Icll(_)) {
                *slot = per_variant.next();
            }
        }
    }
    for (slot, &m) in scores.iter_mut().zip(&cfg.methods) {
        if slot.is_none() {
            *slot = Some(fit_method(m, &train, seed, cfg.trees)?.score(test.features()));
        }
    }
    let aucs = scores
        .into_iter()
        .zip(&cfg.methods)
        .map(|(s, m)| {
            auc(&s.expect("every method scored"), test.labels())
                .map_err(|e| Error::InvalidInput(format!("{m}: {e}")))
        })
        .collect::<Result<_>>()?;
    Ok(CellResult { aucs, degeneracy })
}

/// Runs the full grid over `datasets`.
pub fn run_benchmark(datasets: &[Dataset], cfg: &BenchmarkConfig) -> Result<BenchmarkOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_grid(datasets, cfg))
}

fn run_grid(datasets: &[Dataset], cfg: &BenchmarkConfig) -> Result<BenchmarkOutput> {
    let mut out = BenchmarkOutput::default();
    let mut plans = Vec::new();
    for d in datasets {
        let fold_seed = seed::derive(cfg.seed, &[seed::hash_str(d.name())]);
        match stratified_kfold(d, cfg.repeats, cfg.folds, fold_seed) {
            Ok(p) => plans.push((d, p)),
            Err(e) => out.failures.push(Failure {
                dataset: d.name().to_string(),
                reason: e.to_string(),
            }),
        }
    }
    let cells: Vec<(usize, usize, usize)> = (0..plans.len())
        .flat_map(|i| (0..cfg.repeats).flat_map(move |r| (0..cfg.folds).map(move |f| (i, r, f))))
        .collect();
    let results: Vec<Result<CellResult>> = cells
        .par_iter()
        .map(|&(i, r, f)| evaluate_cell(plans[i].0, &plans[i].1, r, f, cfg))
        .collect();

    let per_dataset = cfg.repeats * cfg.folds;
    for (i, chunk) in results.chunks(per_dataset).enumerate() {
        let d = plans[i].0;
        if let Some(Err(e)) = chunk.iter().find(|c| c.is_err()) {
            log::warn!("{}: skipped ({e})", d.name());
            out.failures.push(Failure {
                dataset: d.name().to_string(),
                reason: e.to_string(),
            });
            continue;
        }
        let ok: Vec<&CellResult> = chunk.iter().map(|c| c.as_ref().expect("checked")).collect();
        for (j, m) in cfg.methods.iter().enumerate() {
            for (c, cell) in ok.iter().enumerate() {
                out.scores.push(d.name(), m.name(), c / cfg.folds, c % cfg.folds, cell.aucs[j]);
            }
        }
        out.degeneracy.extend(ok.iter().filter_map(|c| c.degeneracy.clone()));
        log::info!("{}: done", d.name());
    }
    Ok(out)
}
