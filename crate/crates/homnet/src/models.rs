//! Forward passes of the four classifiers.
//!
//! - [`MixtureModel`]: hidden state as a convex combination of `M` patterns,
//!   response `f = Σᵢ wᵢ ⟨x, Wᵢ⟩²` (a shallow network with square
//!   activation).
//! - [`SuperpositionModel`]: coherent sum of patterns,
//!   `f = (Σᵢ wᵢ ⟨x, Wᵢ⟩)²`; collapses to a single effective neuron.
//! - single-neuron response [`forward_single`]: `f = ⟨x, W⟩²`.
//! - [`ClassicalModel`]: same architecture evaluated through the tuned
//!   sigmoid `σ̃(x) = 1/(1+exp(−11x+5.5))`, with or without constraints.
//!
//! The canonical inference path for the mixture applies the constraints
//! inside the response (rows divided by their norms, output weights through
//! the positivity map): on a constraint-satisfying model it coincides with
//! the raw response, and it is exactly the function trained in
//! weight-normalized mode.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statevec::FeatureVector;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("length mismatch: model expects {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("range violation: {0}")]
    RangeViolation(String),
}

/// Logistic sigmoid `σ(x) = 1/(1+e^{−x})`.
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Tuned sigmoid `σ̃(x) = 1/(1+exp(−11x+5.5))` used by the classical
/// baseline; midpoint at `x = 0.5`.
pub fn tuned_sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-11.0 * x + 5.5).exp())
}

/// Map enforcing positivity of the output weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PositivityMap {
    #[default]
    Abs,
    Sigmoid,
    Relu,
}

impl PositivityMap {
    pub fn apply(&self, w: f64) -> f64 {
        match self {
            PositivityMap::Abs => w.abs(),
            PositivityMap::Sigmoid => sigmoid(w),
            PositivityMap::Relu => w.max(0.0),
        }
    }

    /// Derivative `P'(w)`; the kink of |·| and ReLU at 0 uses the
    /// right-sided value.
    pub fn derivative(&self, w: f64) -> f64 {
        match self {
            PositivityMap::Abs => {
                if w < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            PositivityMap::Sigmoid => {
                let s = sigmoid(w);
                s * (1.0 - s)
            }
            PositivityMap::Relu => {
                if w < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Trainable mixture network: `M×N` hidden patterns, `M` output weights,
/// bias, and the `C = ‖I‖² Tr ρ` hyperparameter (1 for normalized states).
///
/// With `track_k = false` the output weights are probabilities
/// (`wᵢ ≥ 0`, `Σwᵢ = 1`); with `track_k = true` only positivity is kept and
/// the normalization `K = Σwᵢ` rides along as a forward-pass scale factor.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    pub hidden: Array2<f64>,
    pub out_weights: Array1<f64>,
    pub bias: f64,
    pub track_k: bool,
    pub c: f64,
    pub positivity: PositivityMap,
}

impl MixtureModel {
    pub fn new(hidden: Array2<f64>, out_weights: Array1<f64>, bias: f64) -> Self {
        Self {
            hidden,
            out_weights,
            bias,
            track_k: true,
            c: 1.0,
            positivity: PositivityMap::default(),
        }
    }

    pub fn neurons(&self) -> usize {
        self.hidden.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.ncols()
    }

    fn check_len(&self, x: &FeatureVector) -> Result<(), ModelError> {
        if x.len() != self.input_dim() {
            return Err(ModelError::LengthMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Tracked normalization `K = Σᵢ P(wᵢ)`; 1 when `track_k` is off.
    pub fn k(&self) -> f64 {
        if self.track_k {
            self.out_weights.iter().map(|&w| self.positivity.apply(w)).sum()
        } else {
            1.0
        }
    }

    /// Raw response `f = Σᵢ wᵢ ⟨x, Wᵢ⟩²` with the parameters as stored.
    pub fn response(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        self.check_len(x)?;
        let prods = self.hidden.dot(x.as_array());
        Ok(prods
            .iter()
            .zip(self.out_weights.iter())
            .map(|(&a, &w)| w * a * a)
            .sum())
    }

    /// Weight-normalized response: rows divided by their norms, output
    /// weights through the positivity map, and (when `track_k` is off)
    /// divided by `Σⱼ P(wⱼ)`.
    pub fn response_weightnorm(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        self.check_len(x)?;
        let prods = self.hidden.dot(x.as_array());
        let mut f = 0.0;
        for (c, &a) in prods.iter().enumerate() {
            let row = self.hidden.row(c);
            let norm_sq = row.dot(&row);
            if norm_sq > 0.0 {
                f += self.positivity.apply(self.out_weights[c]) * a * a / norm_sq;
            }
        }
        if self.track_k {
            Ok(f)
        } else {
            let total: f64 = self
                .out_weights
                .iter()
                .map(|&w| self.positivity.apply(w))
                .sum();
            Ok(if total > 0.0 { f / total } else { 0.0 })
        }
    }

    /// Post-processed output `F = σ(f + β)` through the canonical
    /// (weight-normalized) response. In K-tracked form that response already
    /// equals `K·f_phys`, so this is `σ(K f + β)`.
    pub fn output(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        Ok(sigmoid(self.response_weightnorm(x)? + self.bias))
    }

    /// Mixture probabilities used by the physical sampler:
    /// `P(wᵢ)/Σⱼ P(wⱼ)`.
    pub fn physical_weights(&self) -> Array1<f64> {
        let mapped: Array1<f64> = self
            .out_weights
            .iter()
            .map(|&w| self.positivity.apply(w))
            .collect();
        let total = mapped.sum();
        if total > 0.0 {
            mapped / total
        } else {
            mapped
        }
    }

    /// Per-neuron products against unit-normalized rows,
    /// `âᵢ = ⟨x, Wᵢ/‖Wᵢ‖⟩`.
    pub fn unit_products(&self, x: &FeatureVector) -> Result<Array1<f64>, ModelError> {
        self.check_len(x)?;
        let mut prods = self.hidden.dot(x.as_array());
        for (c, p) in prods.iter_mut().enumerate() {
            let row = self.hidden.row(c);
            let norm = row.dot(&row).sqrt();
            if norm > 0.0 {
                *p /= norm;
            }
        }
        Ok(prods)
    }

    /// True when rows are unit-norm, weights nonnegative and (unless
    /// K-tracked) summing to one, all within `tol`.
    pub fn satisfies_constraints(&self, tol: f64) -> bool {
        let rows_ok = self
            .hidden
            .outer_iter()
            .all(|row| (row.dot(&row).sqrt() - 1.0).abs() <= tol);
        let positive = self.out_weights.iter().all(|&w| w >= -tol);
        let sum_ok = self.track_k || (self.out_weights.sum() - 1.0).abs() <= tol;
        rows_ok && positive && sum_ok
    }
}

/// Coherent-encoding network; output weights may be negative.
///
/// The training response is trace-normalized (`f = B²/T` with
/// `B = Σᵢ wᵢ ⟨x, Wᵢ⟩`, `T = ‖Σᵢ wᵢ Wᵢ‖²`), so the normalization
/// constraint holds analytically inside the forward.
#[derive(Debug, Clone)]
pub struct SuperpositionModel {
    pub hidden: Array2<f64>,
    pub out_weights: Array1<f64>,
    pub bias: f64,
}

impl SuperpositionModel {
    pub fn new(hidden: Array2<f64>, out_weights: Array1<f64>, bias: f64) -> Self {
        Self {
            hidden,
            out_weights,
            bias,
        }
    }

    pub fn neurons(&self) -> usize {
        self.hidden.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.ncols()
    }

    fn check_len(&self, x: &FeatureVector) -> Result<(), ModelError> {
        if x.len() != self.input_dim() {
            return Err(ModelError::LengthMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Collapsed pattern `v = Σᵢ wᵢ Wᵢ`.
    pub fn collapsed(&self) -> Array1<f64> {
        self.hidden.t().dot(&self.out_weights)
    }

    /// Raw response `f = (Σᵢ wᵢ ⟨x, Wᵢ⟩)²`; equals the normalized response
    /// when the trace constraint holds.
    pub fn response_raw(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        self.check_len(x)?;
        let b = self.collapsed().dot(x.as_array());
        Ok(b * b)
    }

    /// Trace-normalized response `f = ⟨x, v⟩² / ‖v‖²`.
    pub fn response(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        self.check_len(x)?;
        let v = self.collapsed();
        let t = v.dot(&v);
        if t == 0.0 {
            return Ok(0.0);
        }
        let b = v.dot(x.as_array());
        Ok(b * b / t)
    }

    pub fn output(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        Ok(sigmoid(self.response(x)? + self.bias))
    }
}

/// Classical shallow baseline with square activation and tuned sigmoid.
#[derive(Debug, Clone)]
pub struct ClassicalModel {
    pub hidden: Array2<f64>,
    pub out_weights: Array1<f64>,
    pub bias: f64,
    pub constrained: bool,
}

impl ClassicalModel {
    pub fn new(hidden: Array2<f64>, out_weights: Array1<f64>, bias: f64, constrained: bool) -> Self {
        Self {
            hidden,
            out_weights,
            bias,
            constrained,
        }
    }

    pub fn neurons(&self) -> usize {
        self.hidden.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.ncols()
    }

    /// Pre-activation `Σᵢ wᵢ ⟨x, Wᵢ⟩²`.
    pub fn response(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        if x.len() != self.input_dim() {
            return Err(ModelError::LengthMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let prods = self.hidden.dot(x.as_array());
        Ok(prods
            .iter()
            .zip(self.out_weights.iter())
            .map(|(&a, &w)| w * a * a)
            .sum())
    }

    /// `F = σ̃(Σᵢ wᵢ ⟨x, Wᵢ⟩² + β)`.
    pub fn output(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        Ok(tuned_sigmoid(self.response(x)? + self.bias))
    }
}

/// Any trained classifier, as stored in checkpoints.
#[derive(Debug, Clone)]
pub enum Model {
    Mixture(MixtureModel),
    Superposition(SuperpositionModel),
    Classical(ClassicalModel),
}

impl Model {
    pub fn neurons(&self) -> usize {
        match self {
            Model::Mixture(m) => m.neurons(),
            Model::Superposition(m) => m.neurons(),
            Model::Classical(m) => m.neurons(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Model::Mixture(m) => m.input_dim(),
            Model::Superposition(m) => m.input_dim(),
            Model::Classical(m) => m.input_dim(),
        }
    }

    /// Post-processed probability of class 1.
    pub fn output(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        match self {
            Model::Mixture(m) => m.output(x),
            Model::Superposition(m) => m.output(x),
            Model::Classical(m) => m.output(x),
        }
    }
}

/// Mixture response through the stored parameters (Eq. of the mixture
/// coincidence rate).
pub fn forward_mixture(m: &MixtureModel, x: &FeatureVector) -> Result<f64, ModelError> {
    m.response(x)
}

/// Superposition response `(Σᵢ wᵢ ⟨x, Wᵢ⟩)²`.
pub fn forward_superposition(m: &SuperpositionModel, x: &FeatureVector) -> Result<f64, ModelError> {
    m.response_raw(x)
}

/// Single-neuron response `f = ⟨x, W⟩²` for unit-norm states.
pub fn forward_single(pattern: &FeatureVector, x: &FeatureVector) -> Result<f64, ModelError> {
    if pattern.len() != x.len() {
        return Err(ModelError::LengthMismatch {
            expected: pattern.len(),
            got: x.len(),
        });
    }
    let a = pattern.as_array().dot(x.as_array());
    Ok(a * a)
}

/// Coincidence probability `p = (C − f)/2` for response `f ∈ [0, C]`.
pub fn coincidence_prob(f: f64, c: f64) -> Result<f64, ModelError> {
    if !(0.0..=c).contains(&f) {
        return Err(ModelError::RangeViolation(format!(
            "response {f} outside [0, {c}]"
        )));
    }
    Ok((c - f) / 2.0)
}

/// Post-processed output `F = σ(K·f + β)`; `K = 1` when the normalization
/// is not tracked.
pub fn postprocess(f: f64, beta: f64, k: f64) -> f64 {
    sigmoid(k * f + beta)
}

/// Decision rule: class 1 iff `F ≥ threshold`. Ties resolve to class 1.
pub fn predict(output: f64, threshold: f64) -> u8 {
    u8::from(output >= threshold)
}
