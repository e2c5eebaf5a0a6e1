//! Binary trojan classifiers: random forest, gradient boosting, Gaussian
//! naive Bayes and a one-hidden-layer neural network.
//!
//! Trees consume raw features; naive Bayes and the network embed a
//! [`Standardizer`](crate::features::Standardizer) fitted on their own
//! training set.

mod bayes;
mod boosting;
mod forest;
mod mlp;
pub mod tree;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use bayes::NaiveBayes;
pub use boosting::{log_loss, GradientBoosting, HESSIAN_FLOOR};
pub use forest::RandomForest;
pub use mlp::{MlpGradients, MlpWeights, NeuralNetwork, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, SchemaId};

/// Model families, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NeuralNetwork,
    GradientBoosting,
    RandomForest,
    NaiveBayes,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] =
        [ModelKind::NeuralNetwork, ModelKind::GradientBoosting, ModelKind::RandomForest, ModelKind::NaiveBayes];

    /// Machine tag used in files and configs.
    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::NeuralNetwork => "neural_network",
            ModelKind::GradientBoosting => "gradient_boosting",
            ModelKind::RandomForest => "random_forest",
            ModelKind::NaiveBayes => "naive_bayes",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Human-readable column title.
    pub fn title(self) -> &'static str {
        match self {
            ModelKind::NeuralNetwork => "Neural Network",
            ModelKind::GradientBoosting => "Gradient Boosting",
            ModelKind::RandomForest => "Random Forest",
            ModelKind::NaiveBayes => "Naive Bayes",
        }
    }
}

impl core::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomForestParams {
    pub n_trees: usize,
    /// Candidate features per node; `None` means `floor(√d)`.
    pub max_features: Option<usize>,
    pub min_leaf: usize,
}

impl Default for RandomForestParams {
    fn default() -> Self {
        Self { n_trees: 10, max_features: None, min_leaf: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientBoostingParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
}

impl Default for GradientBoostingParams {
    fn default() -> Self {
        Self { n_trees: 100, learning_rate: 0.1, max_depth: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuralNetworkParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub early_stop_patience: usize,
    pub val_fraction: f64,
}

impl Default for NeuralNetworkParams {
    fn default() -> Self {
        Self {
            hidden: 100,
            learning_rate: 0.001,
            l2: 0.0001,
            max_epochs: 200,
            batch_size: 64,
            early_stop_patience: 10,
            val_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaiveBayesParams {
    pub var_smoothing_ratio: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        Self { var_smoothing_ratio: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub model_kind: ModelKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rf: RandomForestParams,
    #[serde(default)]
    pub gb: GradientBoostingParams,
    #[serde(default)]
    pub nn: NeuralNetworkParams,
    #[serde(default)]
    pub nb: NaiveBayesParams,
}

impl TrainConfig {
    pub fn new(model_kind: ModelKind, seed: u64) -> Self {
        Self {
            model_kind,
            seed,
            rf: Default::default(),
            gb: Default::default(),
            nn: Default::default(),
            nb: Default::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: &str) -> Result<()> {
            Err(Error::Config { field, reason: String::from(reason) })
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match self.model_kind {
            ModelKind::RandomForest => {
                if self.rf.n_trees == 0 {
                    return bad("rf.n_trees", "must be positive");
                }
                if self.rf.min_leaf == 0 {
                    return bad("rf.min_leaf", "must be positive");
                }
                if self.rf.max_features == Some(0) {
                    return bad("rf.max_features", "must be positive");
                }
            }
            ModelKind::GradientBoosting => {
                // zero trees is allowed: the model is then the prior log-odds
                if !positive(self.gb.learning_rate) {
                    return bad("gb.learning_rate", "must be positive");
                }
                if self.gb.max_depth == 0 {
                    return bad("gb.max_depth", "must be positive");
                }
            }
            ModelKind::NeuralNetwork => {
                let nn = &self.nn;
                if nn.hidden == 0 {
                    return bad("nn.hidden", "must be positive");
                }
                if !positive(nn.learning_rate) {
                    return bad("nn.learning_rate", "must be positive");
                }
                if !(nn.l2.is_finite() && nn.l2 >= 0.0) {
                    return bad("nn.l2", "must be non-negative");
                }
                if nn.max_epochs == 0 || nn.batch_size == 0 || nn.early_stop_patience == 0 {
                    return bad("nn", "epochs, batch size and patience must be positive");
                }
                if !(nn.val_fraction > 0.0 && nn.val_fraction < 1.0) {
                    return bad("nn.val_fraction", "must lie in (0, 1)");
                }
            }
            ModelKind::NaiveBayes => {
                if !(self.nb.var_smoothing_ratio.is_finite() && self.nb.var_smoothing_ratio >= 0.0) {
                    return bad("nb.var_smoothing_ratio", "must be non-negative");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Model {
    NeuralNetwork(NeuralNetwork),
    GradientBoosting(GradientBoosting),
    RandomForest(RandomForest),
    NaiveBayes(NaiveBayes),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::NeuralNetwork(_) => ModelKind::NeuralNetwork,
            Model::GradientBoosting(_) => ModelKind::GradientBoosting,
            Model::RandomForest(_) => ModelKind::RandomForest,
            Model::NaiveBayes(_) => ModelKind::NaiveBayes,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::NeuralNetwork(m) => m.n_features,
            Model::GradientBoosting(m) => m.n_features,
            Model::RandomForest(m) => m.n_features,
            Model::NaiveBayes(m) => m.n_features,
        }
    }
}

/// A fitted classifier bound to the feature schema it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema: SchemaId,
    pub model: Model,
}

/// Row matrix and labels of a uniform-schema training set.
fn design(train: &[FeatureVector]) -> Result<(SchemaId, Vec<Vec<f64>>, Vec<bool>)> {
    let first = train.first().ok_or(Error::EmptyDataset)?;
    let (schema, d) = (first.schema, first.dim());
    for v in train {
        if v.schema != schema || v.dim() != d {
            return Err(Error::Schema(alloc::format!(
                "training vectors disagree: schema {} ({} features) vs {} ({} features)",
                schema,
                d,
                v.schema,
                v.dim()
            )));
        }
        if let Some(index) = v.values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    let x = train.iter().map(|v| v.values.clone()).collect();
    let y = train.iter().map(|v| v.is_positive()).collect();
    Ok((schema, x, y))
}

/// Fits the model selected by `config.model_kind`.
pub fn train(train_set: &[FeatureVector], config: &TrainConfig) -> Result<TrainedModel> {
    config.validate()?;
    let (schema, x, y) = design(train_set)?;
    let pos = y.iter().filter(|&&b| b).count();
    let neg = y.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateTraining);
    }
    if pos < 2 || neg < 2 {
        return Err(Error::ClassCoverage(alloc::format!(
            "need at least 2 vectors per class, got {neg} disabled / {pos} triggered"
        )));
    }
    let model = match config.model_kind {
        ModelKind::RandomForest => Model::RandomForest(RandomForest::fit(&x, &y, &config.rf, config.seed)),
        ModelKind::GradientBoosting => Model::GradientBoosting(GradientBoosting::fit(&x, &y, &config.gb)),
        ModelKind::NaiveBayes => Model::NaiveBayes(NaiveBayes::fit(&x, &y, &config.nb)?),
        ModelKind::NeuralNetwork => Model::NeuralNetwork(NeuralNetwork::fit(&x, &y, &config.nn, config.seed)?),
    };
    Ok(TrainedModel { schema, model })
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    fn check(&self, v: &FeatureVector) -> Result<()> {
        if v.schema != self.schema || v.dim() != self.model.n_features() {
            return Err(Error::Schema(alloc::format!(
                "model expects schema {} with {} features, got {} with {}",
                self.schema,
                self.model.n_features(),
                v.schema,
                v.dim()
            )));
        }
        Ok(())
    }

    /// Probability that `v` is a triggered trace.
    pub fn predict_proba(&self, v: &FeatureVector) -> Result<f64> {
        self.check(v)?;
        Ok(self.proba_unchecked(&v.values))
    }

    /// Probability on raw values, skipping the schema check.
    pub fn proba_unchecked(&self, x: &[f64]) -> f64 {
        match &self.model {
            Model::RandomForest(m) => m.predict_proba(x),
            Model::GradientBoosting(m) => m.predict_proba(x),
            Model::NaiveBayes(m) => m.predict_proba(x),
            Model::NeuralNetwork(m) => m.predict_proba(x),
        }
    }

    /// `predict_proba(v) >= 0.5`.
    pub fn predict(&self, v: &FeatureVector) -> Result<bool> {
        Ok(decide(self.predict_proba(v)?))
    }
}

/// Decision rule shared by every model.
pub fn decide(proba: f64) -> bool {
    proba >= 0.5
}
