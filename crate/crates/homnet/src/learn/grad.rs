//! Analytic gradients of the binary cross-entropy for every model kind and
//! constraint mode.
//!
//! Per-sample functions are the reference forms checked against finite
//! differences; the `batch_*` variants compute the same quantities for a
//! whole mini-batch through matrix products and are what the training loop
//! uses. A unit test pins batch = mean of per-sample.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::{bce_chain, TrainError};
use crate::models::{sigmoid, tuned_sigmoid, ClassicalModel, MixtureModel, SuperpositionModel};
use crate::statevec::FeatureVector;

/// Gradient of the loss with respect to every trainable parameter block.
#[derive(Debug, Clone)]
pub struct GradientSet {
    pub d_hidden: Array2<f64>,
    pub d_out: Array1<f64>,
    pub d_bias: f64,
}

impl GradientSet {
    pub fn zeros(neurons: usize, dim: usize) -> Self {
        Self {
            d_hidden: Array2::zeros((neurons, dim)),
            d_out: Array1::zeros(neurons),
            d_bias: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_bias.is_finite()
            && self.d_out.iter().all(|g| g.is_finite())
            && self.d_hidden.iter().all(|g| g.is_finite())
    }
}

fn check_dims(dim: usize, x: &FeatureVector) -> Result<(), TrainError> {
    if x.len() != dim {
        return Err(TrainError::ShapeMismatch(format!(
            "input has {} entries, model expects {dim}",
            x.len()
        )));
    }
    Ok(())
}

/// Gradient of `H(y, σ(Σᵢ wᵢ⟨x,Wᵢ⟩² + β))` with the parameters as stored
/// (projection mode: constraints are restored between epochs, not inside
/// the response).
pub fn grad_projection_mode(
    m: &MixtureModel,
    x: &FeatureVector,
    y: u8,
) -> Result<GradientSet, TrainError> {
    check_dims(m.input_dim(), x)?;
    let prods = m.hidden.dot(x.as_array());
    let f: f64 = prods
        .iter()
        .zip(m.out_weights.iter())
        .map(|(&a, &w)| w * a * a)
        .sum();
    let big_f = sigmoid(f + m.bias);
    let g = bce_chain(y, big_f, 1.0);

    let mut grads = GradientSet::zeros(m.neurons(), m.input_dim());
    grads.d_bias = g;
    for c in 0..m.neurons() {
        let a = prods[c];
        grads.d_out[c] = g * a * a;
        let coeff = g * 2.0 * m.out_weights[c] * a;
        grads
            .d_hidden
            .row_mut(c)
            .iter_mut()
            .zip(x.as_slice())
            .for_each(|(o, &xd)| *o = coeff * xd);
    }
    Ok(grads)
}

/// Gradient of the weight-normalized mixture loss: rows divided by their
/// norms and output weights through the positivity map inside the response.
///
/// With `track_k` the response is `Σᵢ P(wᵢ)âᵢ²`; without it the mapped
/// weights are additionally divided by their sum.
pub fn grad_weightnorm_mixture(
    m: &MixtureModel,
    x: &FeatureVector,
    y: u8,
) -> Result<GradientSet, TrainError> {
    check_dims(m.input_dim(), x)?;
    let f = m.response_weightnorm(x).map_err(TrainError::from)?;
    let big_f = sigmoid(f + m.bias);
    let g = bce_chain(y, big_f, 1.0);

    let prods = m.hidden.dot(x.as_array());
    let mapped: Vec<f64> = m
        .out_weights
        .iter()
        .map(|&w| m.positivity.apply(w))
        .collect();
    let total: f64 = mapped.iter().sum();

    let mut grads = GradientSet::zeros(m.neurons(), m.input_dim());
    grads.d_bias = g;
    for c in 0..m.neurons() {
        let row = m.hidden.row(c);
        let norm_sq = row.dot(&row);
        if norm_sq == 0.0 {
            continue;
        }
        let a = prods[c];
        let a_hat_sq = a * a / norm_sq;
        let p_prime = m.positivity.derivative(m.out_weights[c]);
        let (dw, scale) = if m.track_k {
            (p_prime * a_hat_sq, mapped[c])
        } else if total > 0.0 {
            (p_prime / total * (a_hat_sq - f), mapped[c] / total)
        } else {
            (0.0, 0.0)
        };
        grads.d_out[c] = g * dw;
        let lead = g * 2.0 * scale / norm_sq;
        grads
            .d_hidden
            .row_mut(c)
            .iter_mut()
            .zip(x.as_slice().iter().zip(row.iter()))
            .for_each(|(o, (&xd, &wd))| *o = lead * (a * xd - a_hat_sq * wd));
    }
    Ok(grads)
}

/// Gradient of the trace-normalized superposition loss
/// `H(y, σ(⟨x,v⟩²/‖v‖² + β))` with `v = Σᵢ wᵢWᵢ`.
pub fn grad_superposition(
    m: &SuperpositionModel,
    x: &FeatureVector,
    y: u8,
) -> Result<GradientSet, TrainError> {
    check_dims(m.input_dim(), x)?;
    let v = m.collapsed();
    let t = v.dot(&v);
    let mut grads = GradientSet::zeros(m.neurons(), m.input_dim());
    if t == 0.0 {
        grads.d_bias = bce_chain(y, sigmoid(m.bias), 1.0);
        return Ok(grads);
    }
    let b = v.dot(x.as_array());
    let f = b * b / t;
    let big_f = sigmoid(f + m.bias);
    let g = bce_chain(y, big_f, 1.0);

    let prods = m.hidden.dot(x.as_array());
    let overlaps = m.hidden.dot(&v);
    grads.d_bias = g;
    for c in 0..m.neurons() {
        grads.d_out[c] = g * 2.0 / t * (b * prods[c] - f * overlaps[c]);
        let wc = m.out_weights[c];
        grads
            .d_hidden
            .row_mut(c)
            .iter_mut()
            .zip(x.as_slice().iter().zip(v.iter()))
            .for_each(|(o, (&xd, &vd))| *o = g * 2.0 * wc / t * (b * xd - f * vd));
    }
    Ok(grads)
}

/// Gradient of the classical loss `H(y, σ̃(Σᵢ wᵢ⟨x,Wᵢ⟩² + β))`.
pub fn grad_classical(
    m: &ClassicalModel,
    x: &FeatureVector,
    y: u8,
) -> Result<GradientSet, TrainError> {
    check_dims(m.input_dim(), x)?;
    let prods = m.hidden.dot(x.as_array());
    let f: f64 = prods
        .iter()
        .zip(m.out_weights.iter())
        .map(|(&a, &w)| w * a * a)
        .sum();
    let big_f = tuned_sigmoid(f + m.bias);
    let g = bce_chain(y, big_f, 11.0);

    let mut grads = GradientSet::zeros(m.neurons(), m.input_dim());
    grads.d_bias = g;
    for c in 0..m.neurons() {
        let a = prods[c];
        grads.d_out[c] = g * a * a;
        let coeff = g * 2.0 * m.out_weights[c] * a;
        grads
            .d_hidden
            .row_mut(c)
            .iter_mut()
            .zip(x.as_slice())
            .for_each(|(o, &xd)| *o = coeff * xd);
    }
    Ok(grads)
}

/// Chain factors shared by the batched gradients: per-sample `g_s` already
/// divided by the batch size, so the result is the mean gradient.
fn batch_chain(outputs: &Array1<f64>, ys: &[u8], slope: f64) -> Array1<f64> {
    let inv = 1.0 / ys.len() as f64;
    outputs
        .iter()
        .zip(ys)
        .map(|(&f, &y)| bce_chain(y, f, slope) * inv)
        .collect()
}

/// Mean projection-mode gradient over a batch (rows of `xs`).
pub fn batch_grad_mixture_projection(
    m: &MixtureModel,
    xs: ArrayView2<f64>,
    ys: &[u8],
) -> GradientSet {
    let a = xs.dot(&m.hidden.t()); // B×M raw products
    let f = (&a * &a).dot(&m.out_weights);
    let outputs = f.mapv(|fi| sigmoid(fi + m.bias));
    let g = batch_chain(&outputs, ys, 1.0);

    let weighted = &a * &g.view().insert_axis(Axis(1)); // g_s · a_sc
    let mut d_hidden = weighted.t().dot(&xs);
    for (c, mut row) in d_hidden.outer_iter_mut().enumerate() {
        row.mapv_inplace(|v| 2.0 * m.out_weights[c] * v);
    }
    GradientSet {
        d_hidden,
        d_out: (&a * &a).t().dot(&g),
        d_bias: g.sum(),
    }
}

/// Mean weight-normalized mixture gradient over a batch.
pub fn batch_grad_mixture_weightnorm(
    m: &MixtureModel,
    xs: ArrayView2<f64>,
    ys: &[u8],
) -> GradientSet {
    let norms_sq: Array1<f64> = m
        .hidden
        .outer_iter()
        .map(|row| row.dot(&row))
        .collect();
    let mapped: Array1<f64> = m
        .out_weights
        .iter()
        .map(|&w| m.positivity.apply(w))
        .collect();
    let total = mapped.sum();

    let a = xs.dot(&m.hidden.t()); // B×M raw products
    let mut a_hat_sq = &a * &a; // becomes â² = a²/‖W‖²
    for (c, mut col) in a_hat_sq.axis_iter_mut(Axis(1)).enumerate() {
        let n = norms_sq[c];
        col.mapv_inplace(|v| if n > 0.0 { v / n } else { 0.0 });
    }
    let scale: Array1<f64> = if m.track_k {
        mapped.clone()
    } else if total > 0.0 {
        &mapped / total
    } else {
        Array1::zeros(m.neurons())
    };
    let f = a_hat_sq.dot(&scale);
    let outputs = f.mapv(|fi| sigmoid(fi + m.bias));
    let g = batch_chain(&outputs, ys, 1.0);

    let mut d_out = Array1::zeros(m.neurons());
    for c in 0..m.neurons() {
        let p_prime = m.positivity.derivative(m.out_weights[c]);
        d_out[c] = if m.track_k {
            p_prime * a_hat_sq.column(c).dot(&g)
        } else if total > 0.0 {
            let centered = a_hat_sq.column(c).to_owned() - &f;
            p_prime / total * centered.dot(&g)
        } else {
            0.0
        };
    }

    let weighted = &a * &g.view().insert_axis(Axis(1));
    let ga = weighted.t().dot(&xs); // Σ_s g_s a_sc x_s
    let r = a_hat_sq.t().dot(&g); // Σ_s g_s â_sc²
    let mut d_hidden = ga;
    for (c, mut row) in d_hidden.outer_iter_mut().enumerate() {
        let n = norms_sq[c];
        if n == 0.0 {
            row.fill(0.0);
            continue;
        }
        let lead = 2.0 * scale[c] / n;
        let rc = r[c];
        row.iter_mut()
            .zip(m.hidden.row(c))
            .for_each(|(o, &wd)| *o = lead * (*o - rc * wd));
    }
    GradientSet {
        d_hidden,
        d_out,
        d_bias: g.sum(),
    }
}

/// Mean superposition gradient over a batch.
pub fn batch_grad_superposition(
    m: &SuperpositionModel,
    xs: ArrayView2<f64>,
    ys: &[u8],
) -> GradientSet {
    let v = m.collapsed();
    let t = v.dot(&v);
    if t == 0.0 {
        let mut grads = GradientSet::zeros(m.neurons(), m.input_dim());
        let big_f = sigmoid(m.bias);
        grads.d_bias = ys
            .iter()
            .map(|&y| bce_chain(y, big_f, 1.0))
            .sum::<f64>()
            / ys.len() as f64;
        return grads;
    }
    let a = xs.dot(&m.hidden.t()); // B×M products b_sc
    let b = xs.dot(&v); // B
    let f = b.mapv(|bi| bi * bi / t);
    let outputs = f.mapv(|fi| sigmoid(fi + m.bias));
    let g = batch_chain(&outputs, ys, 1.0);

    let overlaps = m.hidden.dot(&v); // ⟨W_c, v⟩
    let gb = &g * &b; // g_s B_s
    let gf = g.dot(&f); // Σ g_s f_s
    let d_out = (a.t().dot(&gb) - &overlaps * gf) * (2.0 / t);

    let q = xs.t().dot(&gb); // Σ_s g_s B_s x_s
    let mut d_hidden = Array2::zeros((m.neurons(), m.input_dim()));
    for (c, mut row) in d_hidden.outer_iter_mut().enumerate() {
        let wc = 2.0 * m.out_weights[c] / t;
        row.iter_mut()
            .zip(q.iter().zip(v.iter()))
            .for_each(|(o, (&qd, &vd))| *o = wc * (qd - gf * vd));
    }
    GradientSet {
        d_hidden,
        d_out,
        d_bias: g.sum(),
    }
}

/// Mean classical gradient over a batch.
pub fn batch_grad_classical(m: &ClassicalModel, xs: ArrayView2<f64>, ys: &[u8]) -> GradientSet {
    let a = xs.dot(&m.hidden.t());
    let f = (&a * &a).dot(&m.out_weights);
    let outputs = f.mapv(|fi| tuned_sigmoid(fi + m.bias));
    let g = batch_chain(&outputs, ys, 11.0);

    let weighted = &a * &g.view().insert_axis(Axis(1));
    let mut d_hidden = weighted.t().dot(&xs);
    for (c, mut row) in d_hidden.outer_iter_mut().enumerate() {
        row.mapv_inplace(|v| 2.0 * m.out_weights[c] * v);
    }
    GradientSet {
        d_hidden,
        d_out: (&a * &a).t().dot(&g),
        d_bias: g.sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::PositivityMap;
    use ndarray::array;

    fn fv(v: Vec<f64>) -> FeatureVector {
        FeatureVector::from_vec(v).unwrap()
    }

    #[test]
    fn projection_gradient_reference_point() {
        // x=(1,0), W=(0.6,0.8), w=1: ∇_w f = 0.36, ∇_λ f = (1.2, 0).
        let mut m = MixtureModel::new(array![[0.6, 0.8]], array![1.0], 0.0);
        m.track_k = true;
        let x = fv(vec![1.0, 0.0]);
        let grads = grad_projection_mode(&m, &x, 1).unwrap();
        let g = grads.d_bias; // = ∂H/∂ξ
        assert!(g.is_finite() && g != 0.0);
        assert!((grads.d_out[0] / g - 0.36).abs() < 1e-12);
        assert!((grads.d_hidden[[0, 0]] / g - 1.2).abs() < 1e-12);
        assert!((grads.d_hidden[[0, 1]] / g).abs() < 1e-12);
    }

    #[test]
    fn projection_gradient_vanishing_factors() {
        // w_c = 0 kills the hidden gradient of that neuron; x ⊥ W_c kills both.
        let m = MixtureModel::new(array![[1.0, 0.0], [0.0, 1.0]], array![0.0, 1.0], 0.0);
        let x = fv(vec![1.0, 0.0]);
        let grads = grad_projection_mode(&m, &x, 0).unwrap();
        assert_eq!(grads.d_hidden.row(0).iter().map(|v| v.abs()).sum::<f64>(), 0.0);
        // Row 1 is orthogonal to x: product a = 0 ⇒ both contributions vanish.
        assert_eq!(grads.d_out[1], 0.0);
        assert_eq!(grads.d_hidden.row(1).iter().map(|v| v.abs()).sum::<f64>(), 0.0);
    }

    #[test]
    fn weightnorm_single_component_out_gradient_vanishes() {
        // Sum normalization with M=1 makes f independent of w_0.
        let mut m = MixtureModel::new(array![[0.6, 0.8]], array![0.7], 0.1);
        m.track_k = false;
        m.positivity = PositivityMap::Abs;
        let grads = grad_weightnorm_mixture(&m, &fv(vec![1.0, 0.0]), 1).unwrap();
        assert!(grads.d_out[0].abs() < 1e-15);
    }

    #[test]
    fn superposition_zero_weight_kills_hidden_gradient() {
        let m = SuperpositionModel::new(array![[1.0, 0.0], [0.0, 1.0]], array![1.0, 0.0], 0.0);
        let grads = grad_superposition(&m, &fv(vec![0.6, 0.8]), 1).unwrap();
        assert_eq!(
            grads.d_hidden.row(1).iter().map(|v| v.abs()).sum::<f64>(),
            0.0
        );
    }

    #[test]
    fn batch_gradients_equal_mean_of_per_sample() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let (neurons, dim, batch) = (3, 5, 7);
        let hidden =
            Array2::from_shape_fn((neurons, dim), |_| rng.gen_range(-1.0..1.0));
        let out = Array1::from_shape_fn(neurons, |_| rng.gen_range(-1.0..1.0));
        let xs = Array2::from_shape_fn((batch, dim), |_| rng.gen_range(-1.0..1.0));
        let ys: Vec<u8> = (0..batch).map(|_| rng.gen_range(0..2)).collect();

        let mut mix = MixtureModel::new(hidden.clone(), out.clone(), 0.2);
        mix.track_k = true;
        let sup = SuperpositionModel::new(hidden.clone(), out.clone(), -0.1);
        let cls = ClassicalModel::new(hidden.clone(), out.clone(), 0.05, false);

        let cases: Vec<(GradientSet, Box<dyn Fn(&FeatureVector, u8) -> GradientSet>)> = vec![
            (
                batch_grad_mixture_projection(&mix, xs.view(), &ys),
                Box::new(|x, y| grad_projection_mode(&mix, x, y).unwrap()),
            ),
            (
                batch_grad_mixture_weightnorm(&mix, xs.view(), &ys),
                Box::new(|x, y| grad_weightnorm_mixture(&mix, x, y).unwrap()),
            ),
            (
                batch_grad_superposition(&sup, xs.view(), &ys),
                Box::new(|x, y| grad_superposition(&sup, x, y).unwrap()),
            ),
            (
                batch_grad_classical(&cls, xs.view(), &ys),
                Box::new(|x, y| grad_classical(&cls, x, y).unwrap()),
            ),
        ];
        for (batched, per_sample) in cases {
            let mut mean = GradientSet::zeros(neurons, dim);
            for (row, &y) in xs.outer_iter().zip(&ys) {
                let x = fv(row.to_vec());
                let g = per_sample(&x, y);
                mean.d_hidden += &g.d_hidden;
                mean.d_out += &g.d_out;
                mean.d_bias += g.d_bias;
            }
            let inv = 1.0 / batch as f64;
            mean.d_hidden *= inv;
            mean.d_out *= inv;
            mean.d_bias *= inv;
            assert!((batched.d_bias - mean.d_bias).abs() < 1e-12);
            for (a, b) in batched.d_out.iter().zip(mean.d_out.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in batched.d_hidden.iter().zip(mean.d_hidden.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
