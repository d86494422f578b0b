//! Discrete single-photon state algebra on `N` pixel modes.
//!
//! States are real spectral amplitude vectors; mixed hidden states are real
//! symmetric positive-semidefinite matrices. [`coincidence_general`] is the
//! bucket-detector coincidence formula used as the physics oracle against
//! which the closed-form model responses are checked.

use ndarray::{Array1, Array2};
use thiserror::Error;

/// Tolerance on normalization constraints (trace, probability sums).
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
}

/// Real spectral amplitudes on `N` pixel modes.
///
/// Carries either the input state or one hidden pattern. Entries must be
/// finite; unit norm is required only where an operation says so.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    amps: Array1<f64>,
}

impl FeatureVector {
    /// Wraps raw amplitudes. Fails if any entry is non-finite.
    pub fn new(amps: Array1<f64>) -> Result<Self, StateError> {
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(StateError::ConstraintViolation(
                "non-finite amplitude".into(),
            ));
        }
        Ok(Self { amps })
    }

    pub fn from_vec(amps: Vec<f64>) -> Result<Self, StateError> {
        Self::new(Array1::from_vec(amps))
    }

    /// Basis vector `e_j` in dimension `n`.
    pub fn basis(n: usize, j: usize) -> Self {
        let mut amps = Array1::zeros(n);
        amps[j] = 1.0;
        Self { amps }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// L2 norm of the amplitudes.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.amps
    }

    pub fn as_slice(&self) -> &[f64] {
        self.amps.as_slice().expect("contiguous")
    }
}

/// Inner product `Σⱼ aⱼ bⱼ` of two amplitude vectors.
pub fn inner(a: &FeatureVector, b: &FeatureVector) -> Result<f64, StateError> {
    if a.len() != b.len() {
        return Err(StateError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.as_array().dot(b.as_array()))
}

/// `N×N` real symmetric PSD matrix describing a mixed hidden state.
///
/// Constructors guarantee symmetry and positive semidefiniteness by
/// construction; eigenvalue checks are left to tests.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: Array2<f64>,
    trace: f64,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    fn from_entries(entries: Array2<f64>) -> Self {
        let trace = entries.diag().sum();
        Self { entries, trace }
    }
}

fn check_rows(rows: &Array2<f64>, weights: &Array1<f64>) -> Result<(), StateError> {
    if rows.nrows() != weights.len() {
        return Err(StateError::LengthMismatch {
            expected: rows.nrows(),
            got: weights.len(),
        });
    }
    if rows.nrows() == 0 {
        return Err(StateError::ConstraintViolation("no hidden patterns".into()));
    }
    Ok(())
}

/// Builds `U = Σᵢ wᵢ Wᵢ Wᵢᵀ` from unit-norm rows and probabilities `wᵢ`.
///
/// Requires `wᵢ ≥ 0`, `Σwᵢ = 1` and each row unit-norm, all within
/// [`NORM_TOL`]; the result then has unit trace.
pub fn density_from_mixture(
    rows: &Array2<f64>,
    weights: &Array1<f64>,
) -> Result<DensityMatrix, StateError> {
    check_rows(rows, weights)?;
    if weights.iter().any(|&w| w < 0.0) {
        return Err(StateError::ConstraintViolation(
            "negative mixture probability".into(),
        ));
    }
    let total: f64 = weights.sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(StateError::ConstraintViolation(format!(
            "mixture probabilities sum to {total}, expected 1"
        )));
    }
    for (i, row) in rows.outer_iter().enumerate() {
        let norm = row.dot(&row).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StateError::ConstraintViolation(format!(
                "row {i} has norm {norm}, expected 1"
            )));
        }
    }
    let n = rows.ncols();
    let mut entries = Array2::zeros((n, n));
    for (row, &w) in rows.outer_iter().zip(weights.iter()) {
        for (j, &rj) in row.iter().enumerate() {
            for (k, &rk) in row.iter().enumerate() {
                entries[[j, k]] += w * rj * rk;
            }
        }
    }
    Ok(DensityMatrix::from_entries(entries))
}

/// Builds the rank-1 matrix `U = v vᵀ` with `v = Σᵢ wᵢ Wᵢ` (coherent
/// superposition of patterns with real amplitudes `wᵢ`).
///
/// Requires the trace `Σᵢⱼ wᵢ wⱼ ⟨Wᵢ, Wⱼ⟩ = ‖v‖²` to be 1 within
/// [`NORM_TOL`].
pub fn density_from_superposition(
    rows: &Array2<f64>,
    weights: &Array1<f64>,
) -> Result<DensityMatrix, StateError> {
    check_rows(rows, weights)?;
    let v = rows.t().dot(weights);
    let trace = v.dot(&v);
    if (trace - 1.0).abs() > NORM_TOL {
        return Err(StateError::ConstraintViolation(format!(
            "superposition trace is {trace}, expected 1"
        )));
    }
    let n = v.len();
    let mut entries = Array2::zeros((n, n));
    for (j, &vj) in v.iter().enumerate() {
        for (k, &vk) in v.iter().enumerate() {
            entries[[j, k]] = vj * vk;
        }
    }
    Ok(DensityMatrix::from_entries(entries))
}

/// Bucket-detector coincidence probability for input `I` against hidden
/// state `U`:
///
/// ```text
/// p = ½ (‖I‖² Tr U − Iᵀ U I)
/// ```
///
/// For unit-norm `I` and trace-1 `U` this lies in `[0, ½]`.
pub fn coincidence_general(input: &FeatureVector, u: &DensityMatrix) -> Result<f64, StateError> {
    if input.len() != u.dim() {
        return Err(StateError::LengthMismatch {
            expected: u.dim(),
            got: input.len(),
        });
    }
    let x = input.as_array();
    let quad = x.dot(&u.entries().dot(x));
    let norm_sq = x.dot(x);
    Ok(0.5 * (norm_sq * u.trace() - quad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn inner_products() {
        let e0 = FeatureVector::basis(4, 0);
        let e1 = FeatureVector::basis(4, 1);
        assert_eq!(inner(&e0, &e0).unwrap(), 1.0);
        assert_eq!(inner(&e0, &e1).unwrap(), 0.0);
        let a = FeatureVector::from_vec(vec![0.6, 0.8]).unwrap();
        let b = FeatureVector::from_vec(vec![1.0, 0.0]).unwrap();
        assert_eq!(inner(&a, &b).unwrap(), 0.6);
    }

    #[test]
    fn inner_length_mismatch() {
        let a = FeatureVector::basis(3, 0);
        let b = FeatureVector::basis(4, 0);
        assert!(matches!(
            inner(&a, &b),
            Err(StateError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(FeatureVector::from_vec(vec![f64::NAN]).is_err());
        assert!(FeatureVector::from_vec(vec![f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn mixture_single_component() {
        let rows = array![[1.0, 0.0, 0.0]];
        let w = array![1.0];
        let u = density_from_mixture(&rows, &w).unwrap();
        assert!((u.trace() - 1.0).abs() < 1e-12);
        assert_eq!(u.entries()[[0, 0]], 1.0);
        assert_eq!(u.entries()[[1, 1]], 0.0);
    }

    #[test]
    fn mixture_two_components_diagonal() {
        let rows = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let w = array![0.5, 0.5];
        let u = density_from_mixture(&rows, &w).unwrap();
        assert_eq!(u.entries()[[0, 0]], 0.5);
        assert_eq!(u.entries()[[1, 1]], 0.5);
        assert_eq!(u.entries()[[2, 2]], 0.0);
        assert_eq!(u.entries()[[0, 1]], 0.0);
    }

    #[test]
    fn mixture_rejects_bad_weights() {
        let rows = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(density_from_mixture(&rows, &array![0.7, 0.7]).is_err());
        assert!(density_from_mixture(&rows, &array![-0.5, 1.5]).is_err());
        let unnormalized = array![[2.0, 0.0], [0.0, 1.0]];
        assert!(density_from_mixture(&unnormalized, &array![0.5, 0.5]).is_err());
    }

    #[test]
    fn superposition_trace_check() {
        // w = (1/2, 1/2) on orthonormal rows gives trace 1/2: rejected.
        let rows = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(density_from_superposition(&rows, &array![0.5, 0.5]).is_err());
        // w = (1/√2, 1/√2) gives trace 1: accepted, rank 1.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = density_from_superposition(&rows, &array![s, s]).unwrap();
        assert!((u.trace() - 1.0).abs() < 1e-12);
        assert!((u.entries()[[0, 1]] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coincidence_limits() {
        let e0 = FeatureVector::basis(2, 0);
        let same = density_from_mixture(&array![[1.0, 0.0]], &array![1.0]).unwrap();
        let orth = density_from_mixture(&array![[0.0, 1.0]], &array![1.0]).unwrap();
        // Indistinguishable photons bunch: p = 0.
        assert!(coincidence_general(&e0, &same).unwrap().abs() < 1e-15);
        // Fully distinguishable: p = 1/2.
        assert!((coincidence_general(&e0, &orth).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coincidence_balanced_superposition_input() {
        // I = (e0+e1)/√2 against U = diag(1/2, 1/2): p = 1/4.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let input = FeatureVector::from_vec(vec![s, s]).unwrap();
        let rows = array![[1.0, 0.0], [0.0, 1.0]];
        let u = density_from_mixture(&rows, &array![0.5, 0.5]).unwrap();
        assert!((coincidence_general(&input, &u).unwrap() - 0.25).abs() < 1e-15);
    }
}
