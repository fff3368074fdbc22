//! The two-layer model.
//!
//! Fitting clusters the training rows, derives the layer tasks from the group
//! assignment and fits one classifier per layer. Scoring multiplies the two
//! layer scores. When no pure-majority group exists the cut is lowered in
//! steps of `sigma / 2`; if that never produces one, layer 1 degenerates to
//! the constant 1 and layer 2 is trained on the full task.

use std::path::Path;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::hcluster::{self, CutParameters};
use crate::layering::{assign_groups, classify_degenerate, DegeneracyKind, GroupAssignment, LayerTargets};
use crate::learners::{Classifier, LearnerSpec, Model};
use crate::resampling::{smote, ResampleMethod, ResamplePlan};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Icll,
    IcllSmote,
    IcllSmoteL1,
    IcllSmoteL2,
    IcllL1Only,
    IcllL2Only,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Icll,
        Variant::IcllSmote,
        Variant::IcllSmoteL1,
        Variant::IcllSmoteL2,
        Variant::IcllL1Only,
        Variant::IcllL2Only,
    ];

    pub fn smote_in(self, layer: Layer) -> bool {
        match self {
            Variant::IcllSmote => true,
            Variant::IcllSmoteL1 => layer == Layer::One,
            Variant::IcllSmoteL2 => layer == Layer::Two,
            _ => false,
        }
    }

    pub fn uses_smote(self) -> bool {
        self.smote_in(Layer::One) || self.smote_in(Layer::Two)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layer {
    One,
    Two,
}

impl Layer {
    fn id(self) -> u64 {
        match self {
            Layer::One => 1,
            Layer::Two => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcllConfig {
    pub base_learner: LearnerSpec,
    pub variant: Variant,
    /// Present exactly when the variant applies SMOTE.
    pub smote_plan: Option<ResamplePlan>,
    pub seed: u64,
}

impl IcllConfig {
    /// Random-forest layers; SMOTE with default settings where the variant needs it.
    pub fn new(variant: Variant, seed: u64) -> Self {
        Self {
            base_learner: LearnerSpec::random_forest(),
            variant,
            smote_plan: variant
                .uses_smote()
                .then(|| ResamplePlan::new(ResampleMethod::Smote, seed)),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.smote_plan, self.variant.uses_smote()) {
            (None, true) => Err(Error::InvalidInput(format!(
                "variant {:?} needs a SMOTE plan",
                self.variant
            ))),
            (Some(_), false) => Err(Error::InvalidInput(format!(
                "variant {:?} does not use SMOTE",
                self.variant
            ))),
            (Some(p), true) => p.validate(),
            (None, false) => Ok(()),
        }
    }
}

/// Group structure and layer tasks of one training set, reusable across variants.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerPlan {
    pub groups: GroupAssignment,
    pub targets: LayerTargets,
    /// Degeneracy of the groups the layers are built from.
    pub degeneracy: DegeneracyKind,
    /// Degeneracy at the automatic cut, before any lowering.
    pub initial_degeneracy: DegeneracyKind,
    pub cut: CutParameters,
    /// The cut actually used.
    pub tau: f64,
    /// No pure-majority group could be formed; layer 1 is the constant 1.
    pub fallback_single_model: bool,
}

/// Clusters `d` and derives both layer tasks.
pub fn prepare_layers(d: &Dataset) -> Result<LayerPlan> {
    let analysis = hcluster::cluster(d.features())?;
    let cut = analysis.cut;
    let mut groups = assign_groups(d.labels(), &analysis.clustering)?;
    let initial_degeneracy = classify_degenerate(&groups);
    let mut tau = cut.tau;
    if initial_degeneracy == DegeneracyKind::EmptyCmaj && cut.sigma > 0.0 {
        while groups.counts.majority == 0 && tau >= cut.min_log_height {
            tau -= cut.sigma / 2.0;
            let clustering = hcluster::form_clusters(&analysis.tree, tau);
            groups = assign_groups(d.labels(), &clustering)?;
        }
    }
    let degeneracy = classify_degenerate(&groups);
    let fallback_single_model = degeneracy == DegeneracyKind::EmptyCmaj;
    if tau != cut.tau {
        log::info!(
            "{}: cut lowered from {:.4} to {:.4} to form a pure-majority group",
            d.name(),
            cut.tau,
            tau
        );
    }
    if fallback_single_model {
        log::warn!("{}: no pure-majority group, using a single model", d.name());
    }
    let targets = LayerTargets::derive(d.labels(), &groups);
    Ok(LayerPlan {
        groups,
        targets,
        degeneracy,
        initial_degeneracy,
        cut,
        tau,
        fallback_single_model,
    })
}

/// Balances a binary task to parity with SMOTE, whichever label is rarer.
/// Tasks that are single-class, or whose rarer class has fewer than two
/// rows, are returned unchanged.
fn smote_to_parity(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    plan: &ResamplePlan,
    seed: u64,
) -> Result<Option<(ndarray::Array2<f64>, Vec<u8>)>> {
    let ones = y.iter().filter(|&&v| v == 1).count();
    let zeros = y.len() - ones;
    if ones.min(zeros) < 2 || ones == zeros {
        return Ok(None);
    }
    let flip = ones > zeros;
    let relabel = |v: u8| if flip { 1 - v } else { v };
    let names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
    let task = Dataset::new("layer", x.to_owned(), y.iter().map(|&v| relabel(v)).collect(), names)?;
    let plan = ResamplePlan {
        method: ResampleMethod::Smote,
        target_ratio: 1.0,
        seed,
        ..plan.clone()
    };
    let out = smote(&task, &plan)?.data;
    let labels = out.labels().iter().map(|&v| relabel(v)).collect();
    Ok(Some((out.features().to_owned(), labels)))
}

/// Fits one layer of `plan`. Seeds depend only on `master_seed` and the
/// layer, so a layer fitted here equals the same layer inside any variant.
pub fn fit_layer(
    d: &Dataset,
    plan: &LayerPlan,
    layer: Layer,
    learner: &LearnerSpec,
    smote_plan: Option<&ResamplePlan>,
    master_seed: u64,
) -> Result<Model> {
    let layer_seed = seed::derive(master_seed, &[layer.id()]);
    let (x, y) = match layer {
        Layer::One => (d.features().to_owned(), plan.targets.layer1.y_l1.clone()),
        Layer::Two => (
            d.features().select(Axis(0), &plan.targets.layer2.indices),
            plan.targets.layer2.y_l2.clone(),
        ),
    };
    let fit_seed = seed::derive(layer_seed, &[1]);
    if let Some(sp) = smote_plan {
        if let Some((xs, ys)) = smote_to_parity(x.view(), &y, sp, seed::derive(layer_seed, &[0]))? {
            return learner.fit(xs.view(), &ys, fit_seed);
        }
    }
    learner.fit(x.view(), &y, fit_seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcllModel {
    f_l1: Model,
    f_l2: Model,
    groups: GroupAssignment,
    degeneracy: DegeneracyKind,
    initial_degeneracy: DegeneracyKind,
    tau: f64,
    fallback_single_model: bool,
    config: IcllConfig,
}

/// Clusters, derives the layers and fits both layer classifiers.
pub fn fit(d: &Dataset, config: &IcllConfig) -> Result<IcllModel> {
    config.validate()?;
    let s = d.summary();
    if s.n_minority == 0 {
        return Err(Error::SingleClass(0));
    }
    if s.n_majority == 0 {
        return Err(Error::SingleClass(1));
    }
    let plan = prepare_layers(d)?;
    fit_prepared(d, &plan, config)
}

/// [`fit`] with a precomputed [`LayerPlan`].
pub fn fit_prepared(d: &Dataset, plan: &LayerPlan, config: &IcllConfig) -> Result<IcllModel> {
    config.validate()?;
    let smote_for = |layer| config.smote_plan.as_ref().filter(|_| config.variant.smote_in(layer));
    let (f_l1, f_l2) = rayon::join(
        || fit_layer(d, plan, Layer::One, &config.base_learner, smote_for(Layer::One), config.seed),
        || fit_layer(d, plan, Layer::Two, &config.base_learner, smote_for(Layer::Two), config.seed),
    );
    Ok(IcllModel::from_parts(f_l1?, f_l2?, plan, config.clone()))
}

impl IcllModel {
    /// Assembles a model from separately fitted layers.
    pub fn from_parts(f_l1: Model, f_l2: Model, plan: &LayerPlan, config: IcllConfig) -> Self {
        Self {
            f_l1,
            f_l2,
            groups: plan.groups.clone(),
            degeneracy: plan.degeneracy,
            initial_degeneracy: plan.initial_degeneracy,
            tau: plan.tau,
            fallback_single_model: plan.fallback_single_model,
            config,
        }
    }

    pub fn f_l1(&self) -> &Model {
        &self.f_l1
    }

    pub fn f_l2(&self) -> &Model {
        &self.f_l2
    }

    pub fn groups(&self) -> &GroupAssignment {
        &self.groups
    }

    pub fn degeneracy(&self) -> DegeneracyKind {
        self.degeneracy
    }

    pub fn initial_degeneracy(&self) -> DegeneracyKind {
        self.initial_degeneracy
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fallback_single_model(&self) -> bool {
        self.fallback_single_model
    }

    pub fn config(&self) -> &IcllConfig {
        &self.config
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    /// `(f_l1, f_l2)` scores per row.
    pub fn layer_scores(&self, x: ArrayView2<'_, f64>) -> (Vec<f64>, Vec<f64>) {
        (self.f_l1.score(x), self.f_l2.score(x))
    }

    /// `f_l1 * f_l2`, or a single layer's score for the single-layer variants.
    pub fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        match self.config.variant {
            Variant::IcllL1Only => self.f_l1.score(x),
            Variant::IcllL2Only => self.f_l2.score(x),
            _ => {
                let (a, b) = self.layer_scores(x);
                a.iter().zip(&b).map(|(u, v)| u * v).collect()
            }
        }
    }

    pub fn predict_class(&self, x: ArrayView2<'_, f64>, threshold: f64) -> Vec<u8> {
        self.score(x).into_iter().map(|s| u8::from(s >= threshold)).collect()
    }

    /// Class 1 where every used layer predicts 1 at threshold 0.5.
    pub fn predict_hard(&self, x: ArrayView2<'_, f64>) -> Vec<u8> {
        let l1 = self.f_l1.predict(x, 0.5);
        let l2 = self.f_l2.predict(x, 0.5);
        match self.config.variant {
            Variant::IcllL1Only => l1,
            Variant::IcllL2Only => l2,
            _ => l1.iter().zip(&l2).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Classifier for IcllModel {
    fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        IcllModel::score(self, x)
    }
}
