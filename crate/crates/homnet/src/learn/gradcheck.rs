//! Randomized comparison of analytic gradients against the
//! finite-difference oracle.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::finitediff::{finite_diff, max_deviation, within_tolerance, DEFAULT_H};
use super::grad::{
    grad_classical, grad_projection_mode, grad_superposition, grad_weightnorm_mixture,
};
use super::{bce, Mode, ModelKind, TrainError};
use crate::models::{
    sigmoid, tuned_sigmoid, ClassicalModel, MixtureModel, PositivityMap, SuperpositionModel,
};
use crate::statevec::FeatureVector;

/// Tolerances of the gradient acceptance criterion:
/// `|analytic − fd| ≤ max(ABS_TOL, REL_TOL·|fd|)` componentwise.
pub const ABS_TOL: f64 = 1e-4;
pub const REL_TOL: f64 = 1e-5;

/// Outcome of a randomized gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub kind: ModelKind,
    pub mode: Mode,
    pub track_k: bool,
    pub trials: usize,
    pub failures: usize,
    pub max_abs: f64,
    pub max_rel: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn random_params(
    neurons: usize,
    dim: usize,
    rng: &mut ChaCha12Rng,
) -> (Array2<f64>, Array1<f64>, f64) {
    let mut hidden = Array2::<f64>::zeros((neurons, dim));
    for mut row in hidden.outer_iter_mut() {
        loop {
            row.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
            if row.dot(&row).sqrt() > 0.3 {
                break;
            }
        }
    }
    // Keep output weights away from the |·|/ReLU kink at zero so the
    // centered difference does not straddle it.
    let out = Array1::from_shape_fn(neurons, |_| loop {
        let w: f64 = rng.gen_range(-1.0..1.0);
        if w.abs() > 1e-3 {
            break w;
        }
    });
    let bias = rng.gen_range(-0.5..0.5);
    (hidden, out, bias)
}

fn random_input(dim: usize, rng: &mut ChaCha12Rng) -> FeatureVector {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    FeatureVector::from_vec(v).expect("finite")
}

/// Runs `trials` random instances (N ≤ 16, M ≤ 4) of the requested
/// model/mode against central finite differences at `h = 1e-6`.
pub fn run(
    kind: ModelKind,
    mode: Mode,
    track_k: bool,
    trials: usize,
    seed: u64,
) -> Result<GradCheckReport, TrainError> {
    if trials == 0 {
        return Err(TrainError::InvalidConfig("trials must be >= 1".into()));
    }
    if kind == ModelKind::Superposition && mode == Mode::Projection {
        return Err(TrainError::ModeMismatch(
            "superposition gradients exist only in weight-normalized form".into(),
        ));
    }
    if kind == ModelKind::Classical && mode == Mode::WeightNormalized {
        return Err(TrainError::ModeMismatch(
            "the classical baseline has no weight-normalized gradients".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut report = GradCheckReport {
        kind,
        mode,
        track_k,
        trials,
        failures: 0,
        max_abs: 0.0,
        max_rel: 0.0,
    };
    let maps = [PositivityMap::Abs, PositivityMap::Sigmoid, PositivityMap::Relu];
    for trial in 0..trials {
        let neurons = rng.gen_range(1..=4);
        let dim = rng.gen_range(2..=16);
        let (hidden, out, bias) = random_params(neurons, dim, &mut rng);
        let x = random_input(dim, &mut rng);
        let y: u8 = rng.gen_range(0..2);
        let positivity = maps[trial % maps.len()];

        let (analytic, oracle) = match kind {
            ModelKind::Mixture => {
                let mut m = MixtureModel::new(hidden.clone(), out.clone(), bias);
                m.track_k = track_k;
                m.positivity = positivity;
                let analytic = match mode {
                    Mode::Projection => grad_projection_mode(&m, &x, y)?,
                    Mode::WeightNormalized => grad_weightnorm_mixture(&m, &x, y)?,
                };
                let loss = |hd: &Array2<f64>, o: &Array1<f64>, b: f64| {
                    let mut probe = m.clone();
                    probe.hidden = hd.clone();
                    probe.out_weights = o.clone();
                    probe.bias = b;
                    let f = match mode {
                        Mode::Projection => probe.response(&x).unwrap(),
                        Mode::WeightNormalized => probe.response_weightnorm(&x).unwrap(),
                    };
                    bce(y, sigmoid(f + b))
                };
                (analytic, finite_diff(loss, &hidden, &out, bias, DEFAULT_H))
            }
            ModelKind::Superposition => {
                let m = SuperpositionModel::new(hidden.clone(), out.clone(), bias);
                let analytic = grad_superposition(&m, &x, y)?;
                let loss = |hd: &Array2<f64>, o: &Array1<f64>, b: f64| {
                    let probe = SuperpositionModel::new(hd.clone(), o.clone(), b);
                    bce(y, sigmoid(probe.response(&x).unwrap() + b))
                };
                (analytic, finite_diff(loss, &hidden, &out, bias, DEFAULT_H))
            }
            ModelKind::Classical => {
                let m = ClassicalModel::new(hidden.clone(), out.clone(), bias, false);
                let analytic = grad_classical(&m, &x, y)?;
                let loss = |hd: &Array2<f64>, o: &Array1<f64>, b: f64| {
                    let probe = ClassicalModel::new(hd.clone(), o.clone(), b, false);
                    bce(y, tuned_sigmoid(probe.response(&x).unwrap() + b))
                };
                (analytic, finite_diff(loss, &hidden, &out, bias, DEFAULT_H))
            }
        };
        let (abs, rel) = max_deviation(&analytic, &oracle);
        report.max_abs = report.max_abs.max(abs);
        report.max_rel = report.max_rel.max(rel);
        if !within_tolerance(&analytic, &oracle, ABS_TOL, REL_TOL) {
            report.failures += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::GradientSet;

    #[test]
    fn all_targets_pass_quick_check() {
        for (kind, mode, track_k) in [
            (ModelKind::Mixture, Mode::Projection, true),
            (ModelKind::Mixture, Mode::WeightNormalized, true),
            (ModelKind::Mixture, Mode::WeightNormalized, false),
            (ModelKind::Superposition, Mode::WeightNormalized, false),
            (ModelKind::Classical, Mode::Projection, false),
        ] {
            let report = run(kind, mode, track_k, 20, 123).unwrap();
            assert!(
                report.passed(),
                "{kind:?}/{mode:?} track_k={track_k}: {} failures, max_abs {:e}",
                report.failures,
                report.max_abs
            );
        }
    }

    #[test]
    fn sign_flip_is_detected() {
        // Negative control: a corrupted gradient must fail the tolerance.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let (hidden, out, bias) = random_params(3, 6, &mut rng);
        let x = random_input(6, &mut rng);
        let m = MixtureModel::new(hidden.clone(), out.clone(), bias);
        let mut broken = grad_projection_mode(&m, &x, 1).unwrap();
        broken.d_hidden.mapv_inplace(|g| -g);
        let oracle = finite_diff(
            |hd, o, b| {
                let mut probe = m.clone();
                probe.hidden = hd.clone();
                probe.out_weights = o.clone();
                probe.bias = b;
                bce(1, sigmoid(probe.response(&x).unwrap() + b))
            },
            &hidden,
            &out,
            bias,
            DEFAULT_H,
        );
        assert!(!within_tolerance(&broken, &oracle, ABS_TOL, REL_TOL));
        let zeroed = GradientSet::zeros(3, 6);
        assert!(!within_tolerance(&zeroed, &oracle, ABS_TOL, REL_TOL));
    }

    #[test]
    fn invalid_combinations_rejected() {
        assert!(matches!(
            run(ModelKind::Superposition, Mode::Projection, false, 1, 0),
            Err(TrainError::ModeMismatch(_))
        ));
        assert!(matches!(
            run(ModelKind::Classical, Mode::WeightNormalized, false, 1, 0),
            Err(TrainError::ModeMismatch(_))
        ));
        assert!(matches!(
            run(ModelKind::Mixture, Mode::Projection, true, 0, 0),
            Err(TrainError::InvalidConfig(_))
        ));
    }
}
