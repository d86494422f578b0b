//! Loss, constraint handling, initialization and the training loop.
//!
//! Training follows the mini-batch update `θ ← θ − (η/|B|) Σ ∇H` with
//! either Adam or plain SGD. Constraints are enforced in one of two ways:
//!
//! - **Projection**: gradients of the raw response; parameters are
//!   re-projected onto the constraint set after each epoch (per step as a
//!   config switch).
//! - **WeightNormalized**: row normalization and the positivity map are
//!   folded into the response itself, so plain gradient descent respects
//!   the constraints implicitly. With `track_k` the output-weight sum is
//!   carried as the forward factor `K` instead of being divided out.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod adam;
mod finitediff;
mod grad;
pub mod gradcheck;

pub use adam::{sgd_step, AdamParams, AdamState};
pub use finitediff::{
    finite_diff, finite_diff_scalar, max_deviation, within_tolerance, DEFAULT_H,
};
pub use grad::{
    batch_grad_classical, batch_grad_mixture_projection, batch_grad_mixture_weightnorm,
    batch_grad_superposition, grad_classical, grad_projection_mode, grad_superposition,
    grad_weightnorm_mixture, GradientSet,
};

use crate::dataio::{DatasetSplit, LabeledExample};
use crate::models::{
    predict, sigmoid, tuned_sigmoid, ClassicalModel, MixtureModel, Model, ModelError,
    PositivityMap, SuperpositionModel,
};

/// Predicted probabilities are clipped to `[CLIP, 1−CLIP]` before logs.
pub const BCE_CLIP: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty example set")]
    EmptySet,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How constraints are enforced during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Projection,
    WeightNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mixture,
    Superposition,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// When projection-mode constraints are re-applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionSchedule {
    PerEpoch,
    PerStep,
}

/// Full specification of a training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub model_kind: ModelKind,
    pub neurons: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    #[serde(default)]
    pub adam: AdamParams,
    pub seed: u64,
    pub mode: Mode,
    #[serde(default = "default_true")]
    pub track_k: bool,
    #[serde(default)]
    pub positivity: PositivityMap,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub projection: ProjectionSchedule,
    /// Classical baseline only: train with the mixture constraint set.
    #[serde(default)]
    pub constrained: bool,
    /// `C = ‖I‖²·Tr ρ` hyperparameter; 1 for normalized states.
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_true() -> bool {
    true
}

fn default_optimizer() -> OptimizerKind {
    OptimizerKind::Adam
}

fn default_c() -> f64 {
    1.0
}

impl Default for ProjectionSchedule {
    fn default() -> Self {
        ProjectionSchedule::PerEpoch
    }
}

impl TrainConfig {
    /// Hyperparameters of the reference runs: Adam, batch 1000, η = 0.03,
    /// weight-normalized constraints with K-tracking.
    pub fn new(model_kind: ModelKind, neurons: usize) -> Self {
        Self {
            model_kind,
            neurons,
            epochs: 150,
            batch_size: 1000,
            learning_rate: 0.03,
            adam: AdamParams::default(),
            seed: 0,
            mode: match model_kind {
                ModelKind::Classical => Mode::Projection,
                _ => Mode::WeightNormalized,
            },
            track_k: true,
            positivity: PositivityMap::default(),
            optimizer: match model_kind {
                ModelKind::Classical => OptimizerKind::Sgd,
                _ => OptimizerKind::Adam,
            },
            projection: match model_kind {
                ModelKind::Classical => ProjectionSchedule::PerStep,
                _ => ProjectionSchedule::PerEpoch,
            },
            constrained: false,
            c: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.neurons == 0 {
            return Err(TrainError::InvalidConfig("neurons must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        for (name, b) in [("beta1", self.adam.beta1), ("beta2", self.adam.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(TrainError::InvalidConfig(format!("{name} must be in [0, 1)")));
            }
        }
        match (self.model_kind, self.mode) {
            (ModelKind::Superposition, Mode::Projection) => Err(TrainError::ModeMismatch(
                "superposition trains only with analytic (weight-normalized) constraints".into(),
            )),
            (ModelKind::Classical, Mode::WeightNormalized) => Err(TrainError::ModeMismatch(
                "the classical baseline constrains by projection only".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Per-epoch training metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_loss: f64,
    pub test_acc: f64,
}

/// Binary cross-entropy with the prediction clipped to `[1e-7, 1−1e-7]`.
pub fn bce(y: u8, output: f64) -> f64 {
    let f = output.clamp(BCE_CLIP, 1.0 - BCE_CLIP);
    -(y as f64) * f.ln() - (1.0 - y as f64) * (1.0 - f).ln()
}

/// Chain factor `∂H/∂ξ = ∂H/∂F · ∂F/∂ξ` for `F` produced by a sigmoid of
/// slope `slope` (1 for σ, 11 for the tuned σ̃). Zero where the clip makes
/// the loss flat.
pub(crate) fn bce_chain(y: u8, output: f64, slope: f64) -> f64 {
    if output <= BCE_CLIP || output >= 1.0 - BCE_CLIP {
        return 0.0;
    }
    let dh_df = -(y as f64) / output + (1.0 - y as f64) / (1.0 - output);
    dh_df * slope * output * (1.0 - output)
}

/// Glorot-uniform initialization: hidden entries in `±√(6/(N+M))`, output
/// weights in `±√(6/(M+1))` (the output layer is M→1). The hidden matrix is
/// drawn row-major, then the output vector.
pub fn glorot_init<R: Rng>(neurons: usize, dim: usize, rng: &mut R) -> (Array2<f64>, Array1<f64>) {
    let hb = (6.0 / (dim + neurons) as f64).sqrt();
    let ob = (6.0 / (neurons + 1) as f64).sqrt();
    let hidden = Array2::from_shape_fn((neurons, dim), |_| rng.gen_range(-hb..hb));
    let out = Array1::from_shape_fn(neurons, |_| rng.gen_range(-ob..ob));
    (hidden, out)
}

/// Glorot bound used when re-randomizing a hidden row that collapsed to
/// zero norm.
fn glorot_bound(neurons: usize, dim: usize) -> f64 {
    (6.0 / (dim + neurons) as f64).sqrt()
}

fn normalize_rows<R: Rng>(hidden: &mut Array2<f64>, rng: &mut R) -> usize {
    let bound = glorot_bound(hidden.nrows(), hidden.ncols());
    let mut redrawn = 0;
    for mut row in hidden.outer_iter_mut() {
        let mut norm = row.dot(&row).sqrt();
        while norm == 0.0 {
            redrawn += 1;
            row.mapv_inplace(|_| rng.gen_range(-bound..bound));
            norm = row.dot(&row).sqrt();
        }
        row.mapv_inplace(|v| v / norm);
    }
    redrawn
}

/// Projects a mixture model onto its constraint set: rows to unit norm
/// (zero rows re-randomized from the Glorot distribution), output weights
/// through the positivity map, and divided by their sum unless K is
/// tracked. Returns the number of re-randomized rows.
pub fn project_constraints<R: Rng>(m: &mut MixtureModel, rng: &mut R) -> usize {
    let redrawn = normalize_rows(&mut m.hidden, rng);
    if redrawn > 0 {
        log::warn!("re-randomized {redrawn} zero-norm hidden row(s)");
    }
    let positivity = m.positivity;
    m.out_weights.mapv_inplace(|w| positivity.apply(w));
    if !m.track_k {
        let total = m.out_weights.sum();
        if total > 0.0 {
            m.out_weights /= total;
        } else {
            log::warn!("output weights collapsed to zero; reset to uniform");
            let uniform = 1.0 / m.neurons() as f64;
            m.out_weights.fill(uniform);
        }
    }
    redrawn
}

/// Projects a constrained classical model: rows to unit norm, output
/// weights clipped nonnegative.
pub fn project_classical<R: Rng>(m: &mut ClassicalModel, rng: &mut R) -> usize {
    let redrawn = normalize_rows(&mut m.hidden, rng);
    m.out_weights.mapv_inplace(|w| w.max(0.0));
    redrawn
}

/// Packs examples into a `(features, labels)` pair of dense arrays.
pub fn features_matrix(examples: &[LabeledExample]) -> Result<(Array2<f64>, Vec<u8>), TrainError> {
    let first = examples.first().ok_or(TrainError::EmptySet)?;
    let dim = first.features.len();
    let mut xs = Array2::zeros((examples.len(), dim));
    let mut ys = Vec::with_capacity(examples.len());
    for (i, ex) in examples.iter().enumerate() {
        if ex.features.len() != dim {
            return Err(TrainError::ShapeMismatch(format!(
                "example {i} has {} features, expected {dim}",
                ex.features.len()
            )));
        }
        xs.row_mut(i).assign(ex.features.as_array());
        ys.push(ex.label);
    }
    Ok((xs, ys))
}

/// Batched canonical outputs for any model (same functions as
/// [`Model::output`], evaluated through matrix products).
pub fn batch_outputs(model: &Model, xs: ArrayView2<f64>) -> Array1<f64> {
    match model {
        Model::Mixture(m) => {
            let mapped: Array1<f64> = m
                .out_weights
                .iter()
                .map(|&w| m.positivity.apply(w))
                .collect();
            let total = mapped.sum();
            let scale: Array1<f64> = if m.track_k {
                mapped
            } else if total > 0.0 {
                mapped / total
            } else {
                Array1::zeros(m.neurons())
            };
            let mut a = xs.dot(&m.hidden.t());
            for (c, mut col) in a.axis_iter_mut(Axis(1)).enumerate() {
                let row = m.hidden.row(c);
                let norm_sq = row.dot(&row);
                col.mapv_inplace(|v| if norm_sq > 0.0 { v * v / norm_sq } else { 0.0 });
            }
            a.dot(&scale).mapv(|f| sigmoid(f + m.bias))
        }
        Model::Superposition(m) => {
            let v = m.collapsed();
            let t = v.dot(&v);
            if t == 0.0 {
                return Array1::from_elem(xs.nrows(), sigmoid(m.bias));
            }
            xs.dot(&v).mapv(|b| sigmoid(b * b / t + m.bias))
        }
        Model::Classical(m) => {
            let a = xs.dot(&m.hidden.t());
            (&a * &a)
                .dot(&m.out_weights)
                .mapv(|f| tuned_sigmoid(f + m.bias))
        }
    }
}

fn metrics(outputs: &Array1<f64>, ys: &[u8]) -> (f64, f64) {
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (&f, &y) in outputs.iter().zip(ys) {
        loss += bce(y, f);
        if predict(f, 0.5) == y {
            correct += 1;
        }
    }
    (loss / ys.len() as f64, correct as f64 / ys.len() as f64)
}

/// Mean BCE and accuracy of a model over an example set.
pub fn evaluate(model: &Model, examples: &[LabeledExample]) -> Result<(f64, f64), TrainError> {
    let (xs, ys) = features_matrix(examples)?;
    let dim = model.input_dim();
    if xs.ncols() != dim {
        return Err(TrainError::ShapeMismatch(format!(
            "examples have {} features, model expects {dim}",
            xs.ncols()
        )));
    }
    Ok(metrics(&batch_outputs(model, xs.view()), &ys))
}

enum Trainee {
    Mixture(MixtureModel, Mode),
    Superposition(SuperpositionModel),
    Classical(ClassicalModel),
}

impl Trainee {
    fn init(cfg: &TrainConfig, dim: usize, rng: &mut ChaCha12Rng) -> Self {
        let (hidden, out) = glorot_init(cfg.neurons, dim, rng);
        match cfg.model_kind {
            ModelKind::Mixture => {
                let mut m = MixtureModel::new(hidden, out, 0.0);
                m.track_k = cfg.track_k;
                m.positivity = cfg.positivity;
                m.c = cfg.c;
                // Start from a feasible point: rows unit, weights positive
                // and summing to one (so K starts at 1 when tracked).
                normalize_rows(&mut m.hidden, rng);
                let positivity = m.positivity;
                m.out_weights.mapv_inplace(|w| positivity.apply(w));
                let total = m.out_weights.sum();
                if total > 0.0 {
                    m.out_weights /= total;
                }
                Trainee::Mixture(m, cfg.mode)
            }
            ModelKind::Superposition => Trainee::Superposition(SuperpositionModel::new(
                hidden, out, 0.0,
            )),
            ModelKind::Classical => {
                let mut m = ClassicalModel::new(hidden, out, 0.0, cfg.constrained);
                if m.constrained {
                    project_classical(&mut m, rng);
                }
                Trainee::Classical(m)
            }
        }
    }

    fn batch_grads(&self, xs: ArrayView2<f64>, ys: &[u8]) -> GradientSet {
        match self {
            Trainee::Mixture(m, Mode::Projection) => batch_grad_mixture_projection(m, xs, ys),
            Trainee::Mixture(m, Mode::WeightNormalized) => {
                batch_grad_mixture_weightnorm(m, xs, ys)
            }
            Trainee::Superposition(m) => batch_grad_superposition(m, xs, ys),
            Trainee::Classical(m) => batch_grad_classical(m, xs, ys),
        }
    }

    fn params_mut(&mut self) -> (&mut Array2<f64>, &mut Array1<f64>, &mut f64) {
        match self {
            Trainee::Mixture(m, _) => (&mut m.hidden, &mut m.out_weights, &mut m.bias),
            Trainee::Superposition(m) => (&mut m.hidden, &mut m.out_weights, &mut m.bias),
            Trainee::Classical(m) => (&mut m.hidden, &mut m.out_weights, &mut m.bias),
        }
    }

    /// Projection-mode constraint enforcement; no-op for analytic modes.
    fn project(&mut self, rng: &mut ChaCha12Rng) {
        match self {
            Trainee::Mixture(m, Mode::Projection) => {
                project_constraints(m, rng);
            }
            Trainee::Classical(m) if m.constrained => {
                project_classical(m, rng);
            }
            _ => {}
        }
    }

    fn as_model(&self) -> Model {
        match self {
            Trainee::Mixture(m, _) => Model::Mixture(m.clone()),
            Trainee::Superposition(m) => Model::Superposition(m.clone()),
            Trainee::Classical(m) => Model::Classical(m.clone()),
        }
    }
}

/// Trains a model on the split per the config and records per-epoch metrics
/// on the train and test sets.
///
/// Identical `(split, cfg)` produce bit-identical histories: the seeded
/// generator drives initialization, the per-epoch shuffles and any zero-row
/// re-randomization, in that order.
pub fn train(
    split: &DatasetSplit,
    cfg: &TrainConfig,
) -> Result<(Model, Vec<EpochRecord>), TrainError> {
    cfg.validate()?;
    let (xtr, ytr) = features_matrix(&split.train)?;
    let (xte, yte) = features_matrix(&split.test)?;
    if xtr.ncols() != xte.ncols() {
        return Err(TrainError::ShapeMismatch(format!(
            "train features {} vs test features {}",
            xtr.ncols(),
            xte.ncols()
        )));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut trainee = Trainee::init(cfg, xtr.ncols(), &mut rng);
    let mut adam = AdamState::new(cfg.neurons, xtr.ncols(), cfg.adam);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..xtr.nrows()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let xb = xtr.select(Axis(0), batch);
            let yb: Vec<u8> = batch.iter().map(|&i| ytr[i]).collect();
            let grads = trainee.batch_grads(xb.view(), &yb);
            let (hidden, out, bias) = trainee.params_mut();
            match cfg.optimizer {
                OptimizerKind::Adam => adam.step(hidden, out, bias, &grads, cfg.learning_rate)?,
                OptimizerKind::Sgd => sgd_step(hidden, out, bias, &grads, cfg.learning_rate)?,
            }
            if cfg.projection == ProjectionSchedule::PerStep {
                trainee.project(&mut rng);
            }
        }
        if cfg.projection == ProjectionSchedule::PerEpoch {
            trainee.project(&mut rng);
        }
        let model = trainee.as_model();
        let (train_loss, train_acc) = metrics(&batch_outputs(&model, xtr.view()), &ytr);
        let (test_loss, test_acc) = metrics(&batch_outputs(&model, xte.view()), &yte);
        history.push(EpochRecord {
            epoch: epoch + 1,
            train_loss,
            train_acc,
            test_loss,
            test_acc,
        });
    }
    Ok((trainee.as_model(), history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::TaskDescriptor;
    use crate::statevec::FeatureVector;

    fn toy_split(n_per_class: usize, seed: u64) -> DatasetSplit {
        // Two separable clusters on the unit circle.
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut make = |center: f64, label: u8| -> Vec<LabeledExample> {
            (0..n_per_class)
                .map(|_| {
                    let angle = center + rng.gen_range(-0.25..0.25);
                    LabeledExample {
                        features: FeatureVector::from_vec(vec![angle.cos(), angle.sin()])
                            .unwrap(),
                        label,
                    }
                })
                .collect()
        };
        let mut train = make(0.3, 0);
        train.extend(make(1.8, 1));
        let mut test = make(0.3, 0);
        test.extend(make(1.8, 1));
        DatasetSplit {
            train,
            test,
            seed,
            task: TaskDescriptor {
                dataset: "toy".into(),
                class_a: 0,
                class_b: 1,
            },
        }
    }

    fn toy_config(kind: ModelKind, mode: Mode, epochs: usize) -> TrainConfig {
        let mut cfg = TrainConfig::new(kind, 2);
        cfg.mode = mode;
        cfg.epochs = epochs;
        cfg.batch_size = 16;
        cfg.seed = 5;
        cfg
    }

    #[test]
    fn bce_reference_values() {
        assert!((bce(1, 0.5) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce(0, 0.5) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(bce(1, 1.0 - 1e-9) < 1e-6);
        // Clipping keeps the loss finite at the boundaries.
        assert!(bce(1, 0.0).is_finite());
        assert!(bce(0, 1.0).is_finite());
    }

    #[test]
    fn glorot_bounds_and_determinism() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let (hidden, out) = glorot_init(2, 1024, &mut rng);
        let hb = (6.0f64 / 1026.0).sqrt();
        assert!((hb - 0.076472).abs() < 1e-6);
        assert!(hidden.iter().all(|&v| v.abs() < hb));
        let ob = (6.0f64 / 3.0).sqrt();
        assert!(out.iter().all(|&v| v.abs() < ob));

        let mut rng2 = ChaCha12Rng::seed_from_u64(3);
        let (hidden2, _) = glorot_init(2, 1024, &mut rng2);
        assert_eq!(hidden, hidden2);
    }

    #[test]
    fn projection_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let mut m = MixtureModel::new(
            ndarray::array![[3.0, 4.0, 0.0], [0.0, 1.0, 0.0]],
            ndarray::array![-0.2, 0.8],
            0.0,
        );
        m.track_k = false;
        project_constraints(&mut m, &mut rng);
        assert!((m.hidden[[0, 0]] - 0.6).abs() < 1e-12);
        assert!((m.hidden[[0, 1]] - 0.8).abs() < 1e-12);
        // P = |·| then sum-normalized: (0.2, 0.8)/1.0.
        assert!((m.out_weights[0] - 0.2).abs() < 1e-12);
        assert!((m.out_weights[1] - 0.8).abs() < 1e-12);

        // Idempotence on an already valid model.
        let before = m.clone();
        project_constraints(&mut m, &mut rng);
        assert!((&before.hidden - &m.hidden).iter().all(|d| d.abs() < 1e-12));
        assert!((&before.out_weights - &m.out_weights)
            .iter()
            .all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn zero_rows_are_redrawn() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mut m = MixtureModel::new(
            ndarray::array![[0.0, 0.0], [1.0, 0.0]],
            ndarray::array![0.5, 0.5],
            0.0,
        );
        let redrawn = project_constraints(&mut m, &mut rng);
        assert_eq!(redrawn, 1);
        let row = m.hidden.row(0);
        assert!((row.dot(&row).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_epochs_returns_initialized_model() {
        let split = toy_split(20, 9);
        let cfg = toy_config(ModelKind::Mixture, Mode::WeightNormalized, 0);
        let (model, history) = train(&split, &cfg).unwrap();
        assert!(history.is_empty());
        assert_eq!(model.neurons(), 2);
    }

    #[test]
    fn separable_toy_set_reaches_full_accuracy() {
        let split = toy_split(40, 11);
        for (kind, mode) in [
            (ModelKind::Mixture, Mode::WeightNormalized),
            (ModelKind::Mixture, Mode::Projection),
            (ModelKind::Classical, Mode::Projection),
        ] {
            let cfg = toy_config(kind, mode, 50);
            let (_, history) = train(&split, &cfg).unwrap();
            let last = history.last().unwrap();
            assert!(
                last.train_acc == 1.0,
                "{kind:?}/{mode:?} train acc {}",
                last.train_acc
            );
            assert!(
                last.train_loss < history[0].train_loss,
                "loss did not decrease for {kind:?}/{mode:?}"
            );
        }
    }

    #[test]
    fn history_is_deterministic() {
        let split = toy_split(25, 2);
        let cfg = toy_config(ModelKind::Mixture, Mode::WeightNormalized, 12);
        let (_, h1) = train(&split, &cfg).unwrap();
        let (_, h2) = train(&split, &cfg).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn superposition_rejects_projection_mode() {
        let split = toy_split(10, 0);
        let cfg = toy_config(ModelKind::Superposition, Mode::Projection, 1);
        assert!(matches!(
            train(&split, &cfg),
            Err(TrainError::ModeMismatch(_))
        ));
    }

    #[test]
    fn evaluate_matches_last_history_record() {
        let split = toy_split(30, 4);
        let cfg = toy_config(ModelKind::Mixture, Mode::WeightNormalized, 8);
        let (model, history) = train(&split, &cfg).unwrap();
        let last = history.last().unwrap();
        let (loss, acc) = evaluate(&model, &split.test).unwrap();
        assert!((loss - last.test_loss).abs() < 1e-12);
        assert_eq!(acc, last.test_acc);
    }

    #[test]
    fn evaluate_rejects_empty_and_mismatched() {
        let split = toy_split(5, 0);
        let cfg = toy_config(ModelKind::Mixture, Mode::WeightNormalized, 1);
        let (model, _) = train(&split, &cfg).unwrap();
        assert!(matches!(evaluate(&model, &[]), Err(TrainError::EmptySet)));
        let bad = vec![LabeledExample {
            features: FeatureVector::from_vec(vec![1.0, 0.0, 0.0]).unwrap(),
            label: 0,
        }];
        assert!(matches!(
            evaluate(&model, &bad),
            Err(TrainError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn constant_model_on_balanced_set_scores_half() {
        // Zero weights and zero bias give F = 0.5 everywhere: accuracy 1/2
        // on a balanced set (ties predict class 1), loss ln 2.
        let split = toy_split(16, 7);
        let model = Model::Mixture(MixtureModel::new(
            ndarray::array![[1.0, 0.0]],
            ndarray::array![0.0],
            0.0,
        ));
        let (loss, acc) = evaluate(&model, &split.test).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((acc - 0.5).abs() < 1e-12);
    }
}
