//! Photon-counting emulation and sample-complexity tooling.
//!
//! A classification instance is estimated from `n` shots. Each shot draws a
//! hidden neuron from the mixture probabilities and a coincidence event
//! from the per-neuron rate `pᵢ = (1 − ⟨x, Wᵢ⟩²)/2`; the empirical
//! coincidence frequency then estimates `f` through `f = 1 − 2p`.
//!
//! The photon budget for accuracy `ε` at confidence `1−δ` comes from
//! Hoeffding's inequality and is independent of both the input size and the
//! number of neurons; [`m_independence_study`] checks that independence
//! empirically by bootstrapping the agnostic estimator across `M`.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::models::{MixtureModel, ModelError, PositivityMap};
use crate::statevec::FeatureVector;

#[derive(Debug, Error)]
pub enum PhotonicsError {
    #[error("range violation: {0}")]
    RangeViolation(String),
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Tally of one shot experiment.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ShotExperiment {
    pub n_shots: u64,
    pub coincidences: u64,
    pub seed: u64,
    /// `1 − 2·(coincidences/n_shots)`, the estimator of the response (C=1).
    pub estimate_f: f64,
    /// 95% half-width of `estimate_f`: twice the binomial half-width of the
    /// coincidence frequency, since `f = 1 − 2p`.
    pub half_width: f64,
}

/// Draws an index from a normalized weight vector by inverse CDF.
fn draw_index<R: Rng>(weights: &Array1<f64>, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Simulates `n` shots of the interferometer for one input.
///
/// Each shot samples a pure component agnostically (the experiment does not
/// record which one) and a Bernoulli coincidence at that component's rate.
///
/// The device realizes the normalized states `Wᵢ/‖Wᵢ‖` with probabilities
/// `P(wᵢ)/ΣⱼP(wⱼ)`, so the model must be physically realizable: no
/// zero-norm pattern and at least one nonzero mapped weight.
pub fn sample_shots(
    m: &MixtureModel,
    x: &FeatureVector,
    n: u64,
    seed: u64,
) -> Result<ShotExperiment, PhotonicsError> {
    if n == 0 {
        return Err(PhotonicsError::RangeViolation("n must be >= 1".into()));
    }
    for (i, row) in m.hidden.outer_iter().enumerate() {
        if row.dot(&row) == 0.0 {
            return Err(PhotonicsError::ConstraintViolation(format!(
                "hidden pattern {i} has zero norm"
            )));
        }
    }
    let weights = m.physical_weights();
    if weights.sum() <= 0.0 {
        return Err(PhotonicsError::ConstraintViolation(
            "all output weights map to zero".into(),
        ));
    }
    let rates: Vec<f64> = m
        .unit_products(x)?
        .iter()
        .map(|&a| ((1.0 - a * a) / 2.0).clamp(0.0, 0.5))
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut coincidences = 0u64;
    for _ in 0..n {
        let i = draw_index(&weights, &mut rng);
        if rng.gen::<f64>() < rates[i] {
            coincidences += 1;
        }
    }
    let freq = coincidences as f64 / n as f64;
    Ok(ShotExperiment {
        n_shots: n,
        coincidences,
        seed,
        estimate_f: 1.0 - 2.0 * freq,
        half_width: 2.0 * binomial_halfwidth(freq, n),
    })
}

/// Binomial half-width `ε = 2√(f(1−f)/n)` for an empirical frequency `f`;
/// the factor 2 approximates a 95% confidence level. Bounded by `1/√n`.
pub fn binomial_halfwidth(freq: f64, n: u64) -> f64 {
    2.0 * (freq * (1.0 - freq) / n as f64).sqrt()
}

/// Photon budget from Hoeffding's inequality.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PhotonBudget {
    pub epsilon: f64,
    pub delta: f64,
    pub n_required: u64,
}

/// Shots needed to estimate a coincidence rate within `ε` at confidence
/// `1−δ`: `n = ⌈ln(2/δ)/(2ε²)⌉`, independent of `M` and `N`.
pub fn hoeffding_budget(epsilon: f64, delta: f64) -> Result<PhotonBudget, PhotonicsError> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(PhotonicsError::RangeViolation(format!(
            "epsilon {epsilon} outside (0, 1)"
        )));
    }
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(PhotonicsError::RangeViolation(format!(
            "delta {delta} outside (0, 1)"
        )));
    }
    let n = ((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64;
    Ok(PhotonBudget {
        epsilon,
        delta,
        n_required: n,
    })
}

/// Estimation strategies compared by the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Sample components without tracking which one produced each outcome;
    /// the budget is M-independent.
    Agnostic,
    /// Reconstruct each pure component separately from `n/M` shots apiece;
    /// the same total budget is split M ways.
    Tracked,
}

/// One row of the M-independence table.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub m: usize,
    pub n: u64,
    pub mean_est: f64,
    pub std_est: f64,
    pub coverage: f64,
}

/// Worst-case design for the bootstrap: uniform weights with per-neuron
/// outcomes at the extremes of `[0, ½]` — half the patterns equal to the
/// input (p = 0), half orthogonal to it (p = ½) — so the outcome variance
/// is the same for every `M`.
pub fn worst_case_design(m: usize, dim: usize, rng: &mut ChaCha12Rng) -> (MixtureModel, FeatureVector) {
    let x = FeatureVector::basis(dim, 0);
    let mut hidden = ndarray::Array2::<f64>::zeros((m, dim));
    for (i, mut row) in hidden.outer_iter_mut().enumerate() {
        if i % 2 == 0 {
            row[0] = 1.0;
        } else {
            // Random unit vector orthogonal to x.
            for v in row.iter_mut().skip(1) {
                *v = rng.gen_range(-1.0..1.0);
            }
            let norm = row.dot(&row).sqrt();
            row.mapv_inplace(|v| v / norm);
        }
    }
    let weights = Array1::from_elem(m, 1.0 / m as f64);
    let mut model = MixtureModel::new(hidden, weights, 0.0);
    model.track_k = false;
    model.positivity = PositivityMap::Abs;
    (model, x)
}

fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    // splitmix-style mixing of (seed, M, repeat) into one stream seed
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bootstrap estimate of the response for one repeat.
fn bootstrap_estimate(
    model: &MixtureModel,
    x: &FeatureVector,
    n: u64,
    mode: SamplingMode,
    rng: &mut ChaCha12Rng,
) -> f64 {
    let weights = model.physical_weights();
    let rates: Vec<f64> = model
        .unit_products(x)
        .expect("dimensions checked by caller")
        .iter()
        .map(|&a| ((1.0 - a * a) / 2.0).clamp(0.0, 0.5))
        .collect();
    match mode {
        SamplingMode::Agnostic => {
            // Sample average of the outcome-valued variable: each shot
            // contributes the rate of the component it happened to use.
            let mut sum = 0.0;
            for _ in 0..n {
                sum += rates[draw_index(&weights, rng)];
            }
            1.0 - 2.0 * (sum / n as f64)
        }
        SamplingMode::Tracked => {
            // The same total budget split over M separate experiments.
            let per = (n / rates.len() as u64).max(1);
            let mut p_hat = 0.0;
            for (i, &rate) in rates.iter().enumerate() {
                let mut clicks = 0u64;
                for _ in 0..per {
                    if rng.gen::<f64>() < rate {
                        clicks += 1;
                    }
                }
                p_hat += weights[i] * clicks as f64 / per as f64;
            }
            1.0 - 2.0 * p_hat
        }
    }
}

/// Bootstraps the estimator spread for each `M`, all at the same photon
/// budget `n = hoeffding_budget(ε, δ)`.
///
/// Reports the empirical standard deviation of `estimate_f` and the
/// fraction of repeats with `|estimate_f − f| ≤ ε`. With a single repeat
/// the standard deviation is undefined and reported as NaN.
pub fn m_independence_study(
    m_values: &[usize],
    epsilon: f64,
    delta: f64,
    repeats: usize,
    seed: u64,
    mode: SamplingMode,
) -> Result<Vec<StudyRow>, PhotonicsError> {
    if repeats == 0 {
        return Err(PhotonicsError::RangeViolation("repeats must be >= 1".into()));
    }
    let n = hoeffding_budget(epsilon, delta)?.n_required;
    let dim = 32;
    let mut rows = Vec::with_capacity(m_values.len());
    for (mi, &m) in m_values.iter().enumerate() {
        if m == 0 {
            return Err(PhotonicsError::RangeViolation("M must be >= 1".into()));
        }
        let mut design_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, mi as u64, u64::MAX));
        let (model, x) = worst_case_design(m, dim, &mut design_rng);
        let f_true = model
            .response_weightnorm(&x)
            .expect("design dimensions agree");
        let estimates: Vec<f64> = (0..repeats)
            .map(|r| {
                let mut rng =
                    ChaCha12Rng::seed_from_u64(derive_seed(seed, mi as u64, r as u64));
                bootstrap_estimate(&model, &x, n, mode, &mut rng)
            })
            .collect();
        let mean = estimates.iter().sum::<f64>() / repeats as f64;
        let std = if repeats > 1 {
            (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64)
                .sqrt()
        } else {
            f64::NAN
        };
        let covered = estimates
            .iter()
            .filter(|&&e| (e - f_true).abs() <= epsilon)
            .count();
        rows.push(StudyRow {
            m,
            n,
            mean_est: mean,
            std_est: std,
            coverage: covered as f64 / repeats as f64,
        });
    }
    Ok(rows)
}

/// Serializes study rows with the header `M,n,mean_est,std_est,coverage`.
pub fn study_to_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("M,n,mean_est,std_est,coverage\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.m, row.n, row.mean_est, row.std_est, row.coverage
        ));
    }
    out
}
