//! Symmetric eigenvalue helpers: dense solves below the storage threshold,
//! power iteration above it.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ising::{InteractionMatrix, DENSE_STORAGE_MAX};

pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 100_000;

/// All eigenvalues of a symmetric matrix, sorted in decreasing order.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Largest absolute eigenvalue of a symmetric interaction matrix.
pub fn symmetric_operator_norm(j: &InteractionMatrix) -> f64 {
    if let Some(w) = j.uniform_weight() {
        // w (11^T - I) has spectrum {w (n - 1), -w}.
        return if j.n() < 2 { 0.0 } else { w.abs() * (j.n() - 1) as f64 };
    }
    if j.n() <= DENSE_STORAGE_MAX {
        return symmetric_eigenvalues(j.to_dense_matrix())
            .iter()
            .fold(0.0, |a: f64, v| a.max(v.abs()));
    }
    power_iteration(|v| j.apply(v), j.n(), None, POWER_TOL, POWER_MAX_ITER)
}

/// Largest `|lambda|` of a symmetric operator, optionally restricted to the
/// orthogonal complement of a unit vector `deflate`.
///
/// Iterates `v <- A v / |A v|` and stops once `|A^2 v - lambda^2 v|` falls
/// below `tol * lambda^2`, which is insensitive to the sign oscillation
/// between `+lambda` and `-lambda`.
pub fn power_iteration<F>(apply: F, n: usize, deflate: Option<&[f64]>, tol: f64, max_iter: usize) -> f64
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let project = |v: &mut Vec<f64>| {
        if let Some(u) = deflate {
            let c: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    project(&mut v);
    normalize(&mut v);
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let mut w = apply(&v);
        project(&mut w);
        let a = l2(&w);
        if a == 0.0 {
            return 0.0;
        }
        w.iter_mut().for_each(|x| *x /= a);
        let mut z = apply(&w);
        project(&mut z);
        // A^2 v = a z and v^T A^2 v = a^2.
        let r = z
            .iter()
            .zip(&v)
            .map(|(zi, vi)| (a * zi - a * a * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        lambda = a;
        if r <= tol * a * a {
            return lambda;
        }
        v = z;
        normalize(&mut v);
    }
    lambda
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = l2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_matches_dense_on_cycle() {
        let n = 10;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, (i + 1) % n)] = 1.0;
            m[((i + 1) % n, i)] = 1.0;
        }
        let dense = symmetric_eigenvalues(m.clone());
        assert!((dense[0] - 2.0).abs() < 1e-12);
        let apply = |v: &[f64]| (&m * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec();
        let u = vec![1.0 / (n as f64).sqrt(); n];
        let second = power_iteration(apply, n, Some(&u), 1e-10, 100_000);
        // Even cycle: -2 is an eigenvalue orthogonal to the constant vector.
        assert!((second - 2.0).abs() < 1e-6, "{second}");
    }

    #[test]
    fn uniform_norm_closed_form() {
        let j = InteractionMatrix::curie_weiss(7, 1.4);
        let dense = symmetric_eigenvalues(j.to_dense_matrix());
        let norm = dense.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!((symmetric_operator_norm(&j) - norm).abs() < 1e-12);
    }
}
