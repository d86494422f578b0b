//! Density-matrix oracle checks: positive semidefiniteness by explicit
//! eigendecomposition (test-only Jacobi sweeps), rank structure, and the
//! equivalence between closed-form responses and the general coincidence
//! formula on hand-picked instances.

use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use homnet::models::{forward_mixture, forward_superposition, MixtureModel, SuperpositionModel};
use homnet::statevec::{
    coincidence_general, density_from_mixture, density_from_superposition, FeatureVector,
};

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
/// Independent of everything in the crate under test.
fn symmetric_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[[p, q]].abs() < 1e-18 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * m[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[[i, i]]).collect()
}

fn random_valid_mixture(
    m: usize,
    n: usize,
    rng: &mut ChaCha12Rng,
) -> (Array2<f64>, Array1<f64>) {
    let mut rows = Array2::<f64>::zeros((m, n));
    for mut row in rows.outer_iter_mut() {
        row.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
        let norm = row.dot(&row).sqrt();
        row.mapv_inplace(|v| v / norm);
    }
    let mut w = Array1::from_shape_fn(m, |_| -f64::ln(rng.gen_range(1e-9..1.0f64)));
    w /= w.sum();
    (rows, w)
}

#[test]
fn jacobi_reference() {
    // Eigenvalues of [[2,1],[1,2]] are 1 and 3.
    let mut eig = symmetric_eigenvalues(&array![[2.0, 1.0], [1.0, 2.0]]);
    eig.sort_by(f64::total_cmp);
    assert!((eig[0] - 1.0).abs() < 1e-12);
    assert!((eig[1] - 3.0).abs() < 1e-12);
}

#[test]
fn mixture_density_is_psd_with_unit_trace() {
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    for _ in 0..50 {
        let (rows, w) = random_valid_mixture(4, 8, &mut rng);
        let u = density_from_mixture(&rows, &w).unwrap();
        assert!((u.trace() - 1.0).abs() < 1e-9);
        // Symmetry.
        for i in 0..8 {
            for j in 0..8 {
                assert!((u.entries()[[i, j]] - u.entries()[[j, i]]).abs() < 1e-12);
            }
        }
        // Eigenvalue floor.
        for lambda in symmetric_eigenvalues(u.entries()) {
            assert!(lambda >= -1e-10, "negative eigenvalue {lambda}");
        }
    }
}

#[test]
fn superposition_density_is_rank_one() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (rows, mut w) = random_valid_mixture(3, 6, &mut rng);
        let v = rows.t().dot(&w);
        w /= v.dot(&v).sqrt();
        let u = density_from_superposition(&rows, &w).unwrap();
        assert!((u.trace() - 1.0).abs() < 1e-9);
        let mut eig = symmetric_eigenvalues(u.entries());
        eig.sort_by(f64::total_cmp);
        // One eigenvalue at the trace, the rest at zero.
        assert!((eig[5] - 1.0).abs() < 1e-9);
        for lambda in &eig[..5] {
            assert!(lambda.abs() < 1e-9);
        }
    }
}

#[test]
fn responses_match_the_general_formula() {
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    for _ in 0..100 {
        let m = rng.gen_range(1..=8);
        let n = rng.gen_range(2..=32);
        let (rows, w) = random_valid_mixture(m, n, &mut rng);
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let x = FeatureVector::from_vec(x).unwrap();

        let mix = MixtureModel::new(rows.clone(), w.clone(), 0.0);
        let f = forward_mixture(&mix, &x).unwrap();
        let u = density_from_mixture(&rows, &w).unwrap();
        let p = coincidence_general(&x, &u).unwrap();
        assert!((p - (1.0 - f) / 2.0).abs() < 1e-12);

        let mut ws = Array1::from_shape_fn(m, |_| rng.gen_range(-1.0..1.0));
        let v = rows.t().dot(&ws);
        let t = v.dot(&v);
        if t > 1e-9 {
            ws /= t.sqrt();
            let sup = SuperpositionModel::new(rows.clone(), ws.clone(), 0.0);
            let f = forward_superposition(&sup, &x).unwrap();
            let u = density_from_superposition(&rows, &ws).unwrap();
            let p = coincidence_general(&x, &u).unwrap();
            assert!((p - (1.0 - f) / 2.0).abs() < 1e-12);
        }
    }
}

#[test]
fn unnormalized_input_scales_by_c() {
    // p = (C − f)/2 with C = ‖I‖²·Tr U: doubling the input amplitude
    // quadruples both C and the response.
    let rows = array![[1.0, 0.0], [0.0, 1.0]];
    let w = array![0.5, 0.5];
    let u = density_from_mixture(&rows, &w).unwrap();
    let x1 = FeatureVector::from_vec(vec![0.6, 0.8]).unwrap();
    let x2 = FeatureVector::from_vec(vec![1.2, 1.6]).unwrap();
    let p1 = coincidence_general(&x1, &u).unwrap();
    let p2 = coincidence_general(&x2, &u).unwrap();
    assert!((p2 - 4.0 * p1).abs() < 1e-12);
}
