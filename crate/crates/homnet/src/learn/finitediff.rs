//! Central finite differences over the three parameter blocks.
//!
//! This is the independent oracle for every analytic gradient in this
//! crate: it only evaluates the loss, never the gradient code.

use ndarray::{Array1, Array2};

use super::grad::GradientSet;

/// Default displacement for the gradient checks.
pub const DEFAULT_H: f64 = 1e-6;

/// Central difference `(L(θ+h) − L(θ−h)) / 2h` for every component of
/// `(hidden, out, bias)`.
pub fn finite_diff<L>(
    mut loss: L,
    hidden: &Array2<f64>,
    out: &Array1<f64>,
    bias: f64,
    h: f64,
) -> GradientSet
where
    L: FnMut(&Array2<f64>, &Array1<f64>, f64) -> f64,
{
    let mut hidden_p = hidden.clone();
    let mut out_p = out.clone();
    let mut grads = GradientSet::zeros(hidden.nrows(), hidden.ncols());

    for idx in 0..hidden.len() {
        let (r, c) = (idx / hidden.ncols(), idx % hidden.ncols());
        let orig = hidden_p[[r, c]];
        hidden_p[[r, c]] = orig + h;
        let plus = loss(&hidden_p, &out_p, bias);
        hidden_p[[r, c]] = orig - h;
        let minus = loss(&hidden_p, &out_p, bias);
        hidden_p[[r, c]] = orig;
        grads.d_hidden[[r, c]] = (plus - minus) / (2.0 * h);
    }
    for c in 0..out.len() {
        let orig = out_p[c];
        out_p[c] = orig + h;
        let plus = loss(&hidden_p, &out_p, bias);
        out_p[c] = orig - h;
        let minus = loss(&hidden_p, &out_p, bias);
        out_p[c] = orig;
        grads.d_out[c] = (plus - minus) / (2.0 * h);
    }
    let plus = loss(&hidden_p, &out_p, bias + h);
    let minus = loss(&hidden_p, &out_p, bias - h);
    grads.d_bias = (plus - minus) / (2.0 * h);
    grads
}

/// Scalar central difference, for sanity checks of the oracle itself.
pub fn finite_diff_scalar<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Componentwise comparison of an analytic gradient against the oracle:
/// returns the worst `(absolute, relative)` deviation over all components.
pub fn max_deviation(analytic: &GradientSet, oracle: &GradientSet) -> (f64, f64) {
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut track = |a: f64, o: f64| {
        let abs = (a - o).abs();
        max_abs = max_abs.max(abs);
        if o.abs() > 1e-12 {
            max_rel = max_rel.max(abs / o.abs());
        }
    };
    for (a, o) in analytic.d_hidden.iter().zip(oracle.d_hidden.iter()) {
        track(*a, *o);
    }
    for (a, o) in analytic.d_out.iter().zip(oracle.d_out.iter()) {
        track(*a, *o);
    }
    track(analytic.d_bias, oracle.d_bias);
    (max_abs, max_rel)
}

/// Pass criterion used by the gradient suites: every component within
/// `max(abs_tol, rel_tol·|oracle|)`.
pub fn within_tolerance(
    analytic: &GradientSet,
    oracle: &GradientSet,
    abs_tol: f64,
    rel_tol: f64,
) -> bool {
    let ok = |a: f64, o: f64| (a - o).abs() <= abs_tol.max(rel_tol * o.abs());
    analytic
        .d_hidden
        .iter()
        .zip(oracle.d_hidden.iter())
        .all(|(a, o)| ok(*a, *o))
        && analytic
            .d_out
            .iter()
            .zip(oracle.d_out.iter())
            .all(|(a, o)| ok(*a, *o))
        && ok(analytic.d_bias, oracle.d_bias)
}
