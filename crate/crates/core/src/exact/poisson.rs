use nalgebra::{DMatrix, DVector};

use super::{complement, GlauberKernel};
use crate::error::{Error, Result};

/// State spaces up to this size are solved densely; larger ones by
/// conjugate gradients in `L^2(pi)`.
pub const DENSE_SOLVE_MAX: usize = 1024;

const CG_TOL: f64 = 1e-13;

/// Principal solution of `h - P h = f - E_pi f`, normalized to `E_pi h = 0`.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    /// Values over the kernel's state space.
    pub h: Vec<f64>,
    /// `max |(I - P) h - (f - E_pi f)|`.
    pub residual_norm: f64,
    /// `E_pi h`.
    pub mean: f64,
}

impl PoissonSolution {
    /// `h` on all of `Omega`. For a restricted kernel the solution is
    /// extended symmetrically, `h(x) = h(-x)` off `Omega+`.
    pub fn lift(&self, kernel: &GlauberKernel) -> Vec<f64> {
        let n = kernel.n();
        (0..(1usize << n))
            .map(|s| match kernel.local_index(s) {
                Some(k) => self.h[k],
                None => self.h[kernel.local_index(complement(n, s)).expect("complement in Omega+")],
            })
            .collect()
    }

    /// `Delta_i(h)` over all of `Omega`.
    pub fn discrete_derivative(&self, kernel: &GlauberKernel, i: usize) -> Vec<f64> {
        discrete_derivative_field(&self.lift(kernel), kernel.n(), i)
    }
}

/// `Delta_i(h)(x) = h(x^(i,+)) - h(x^(i,-))` for `h` on all of `Omega`.
pub fn discrete_derivative_field(h: &[f64], n: usize, i: usize) -> Vec<f64> {
    (0..(1usize << n))
        .map(|s| h[s | 1 << i] - h[s & !(1 << i)])
        .collect()
}

fn mean_under(pi: &[f64], v: &[f64]) -> f64 {
    pi.iter().zip(v).map(|(p, x)| p * x).sum()
}

fn residual(kernel: &GlauberKernel, h: &[f64], g: &[f64]) -> f64 {
    let ph = kernel.apply(h);
    h.iter()
        .zip(&ph)
        .zip(g)
        .map(|((a, b), c)| (a - b - c).abs())
        .fold(0.0, f64::max)
}

/// Solve `(I - P) h = f - E_pi f` subject to `E_pi h = 0`.
///
/// `pi` must be the stationary law of `kernel` on its state space; a wrong
/// `pi` makes the constrained system inconsistent and is reported as
/// [`Error::SingularSystem`].
pub fn solve_poisson(kernel: &GlauberKernel, pi: &[f64], f: &[f64]) -> Result<PoissonSolution> {
    let m = kernel.len();
    if pi.len() != m || f.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: if pi.len() != m { pi.len() } else { f.len() },
        });
    }
    let ef = mean_under(pi, f);
    let g: Vec<f64> = f.iter().map(|v| v - ef).collect();
    let mut h = if m <= DENSE_SOLVE_MAX {
        dense_solve(kernel, pi, &g)?
    } else {
        cg_solve(kernel, pi, &g)
    };
    let mean = mean_under(pi, &h);
    h.iter_mut().for_each(|v| *v -= mean);
    let residual_norm = residual(kernel, &h, &g);
    let scale = 1.0 + g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !residual_norm.is_finite() || residual_norm > 1e-8 * scale {
        return Err(Error::SingularSystem(format!(
            "residual {residual_norm:.3e}: kernel not irreducible or pi not stationary"
        )));
    }
    Ok(PoissonSolution {
        mean: mean_under(pi, &h),
        h,
        residual_norm,
    })
}

/// Bordered system `[[I - P, 1], [pi^T, 0]] [h; c] = [g; 0]`.
fn dense_solve(kernel: &GlauberKernel, pi: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    let m = kernel.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    for k in 0..m {
        a[(k, k)] += 1.0;
        for (t, w) in kernel.row(k) {
            a[(k, t)] -= w;
        }
        a[(k, m)] = 1.0;
        a[(m, k)] = pi[k];
    }
    let mut b = DVector::zeros(m + 1);
    for k in 0..m {
        b[k] = g[k];
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("bordered Poisson system is singular".into()))?;
    Ok(sol.iter().take(m).copied().collect())
}

/// Conjugate gradients for the `pi`-self-adjoint operator `I - P` on
/// `pi`-centred functions; iterates are re-centred every step.
fn cg_solve(kernel: &GlauberKernel, pi: &[f64], g: &[f64]) -> Vec<f64> {
    let m = kernel.len();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(pi).map(|((x, y), p)| x * y * p).sum() };
    let center = |v: &mut Vec<f64>| {
        let c = mean_under(pi, v);
        v.iter_mut().for_each(|x| *x -= c);
    };
    let op = |v: &[f64]| -> Vec<f64> {
        let pv = kernel.apply(v);
        v.iter().zip(&pv).map(|(a, b)| a - b).collect()
    };
    let mut h = vec![0.0; m];
    let mut r = g.to_vec();
    center(&mut r);
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let max_iter = 50 * m + 1000;
    for it in 0..max_iter {
        if r.iter().fold(0.0f64, |a, v| a.max(v.abs())) < CG_TOL {
            break;
        }
        let ap = op(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        h.iter_mut().zip(&p).for_each(|(x, d)| *x += alpha * d);
        if it % 50 == 49 {
            // Replace the recursive residual to stop drift.
            let ah = op(&h);
            r = g.iter().zip(&ah).map(|(a, b)| a - b).collect();
        } else {
            r.iter_mut().zip(&ap).for_each(|(x, d)| *x -= alpha * d);
        }
        center(&mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        p = r.iter().zip(&p).map(|(a, b)| a + beta * b).collect();
        center(&mut p);
        rr = rr_new;
    }
    center(&mut h);
    h
}

/// `sum_{t < T} P^t (f - E_pi f)`.
pub fn truncated_series(kernel: &GlauberKernel, pi: &[f64], f: &[f64], steps: usize) -> Vec<f64> {
    let ef = mean_under(pi, f);
    let mut term: Vec<f64> = f.iter().map(|v| v - ef).collect();
    let mut sum = vec![0.0; term.len()];
    for _ in 0..steps {
        sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
        term = kernel.apply(&term);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{glauber_kernel, ExactDistribution, KernelFlavor};
    use crate::ising::InteractionMatrix;

    #[test]
    fn constant_gives_zero() {
        let j = InteractionMatrix::curie_weiss(5, 0.8);
        let k = glauber_kernel(&j, KernelFlavor::Plain).unwrap();
        let mu = ExactDistribution::new(&j).unwrap();
        let sol = solve_poisson(&k, mu.probs(), &vec![3.0; 32]).unwrap();
        assert!(sol.h.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dense_and_cg_agree() {
        let j = InteractionMatrix::from_entries(11, (0..10).map(|i| (i, i + 1, 0.4))).unwrap();
        let k = glauber_kernel(&j, KernelFlavor::Plain).unwrap();
        let mu = ExactDistribution::new(&j).unwrap();
        let f: Vec<f64> = (0..k.len()).map(|s| ((s * 37 % 11) as f64 / 5.0) - 1.0).collect();
        let cg = solve_poisson(&k, mu.probs(), &f).unwrap();
        assert!(k.len() > DENSE_SOLVE_MAX);
        assert!(cg.residual_norm < 1e-10, "{}", cg.residual_norm);
        assert!(cg.mean.abs() < 1e-10);
        let ef = mu.expect(&f);
        let g: Vec<f64> = f.iter().map(|v| v - ef).collect();
        let dense = dense_solve(&k, mu.probs(), &g).unwrap();
        let c = mean_under(mu.probs(), &dense);
        for (a, b) in cg.h.iter().zip(&dense) {
            assert!((a - (b - c)).abs() < 1e-8);
        }
    }

    #[test]
    fn wrong_stationary_law_is_rejected() {
        let j = InteractionMatrix::curie_weiss(4, 1.0);
        let k = glauber_kernel(&j, KernelFlavor::Plain).unwrap();
        let uniform = vec![1.0 / 16.0; 16];
        let mut f = vec![0.0; 16];
        f[15] = 1.0;
        assert!(matches!(
            solve_poisson(&k, &uniform, &f),
            Err(Error::SingularSystem(_))
        ));
    }

    #[test]
    fn derivative_depends_only_on_other_sites() {
        let h: Vec<f64> = (0..64).map(|s| (s as f64).sin()).collect();
        for i in 0..6 {
            let d = discrete_derivative_field(&h, 6, i);
            for s in 0..64 {
                assert_eq!(d[s], d[s ^ 1 << i]);
            }
        }
        assert!(discrete_derivative_field(&[2.0; 16], 4, 1).iter().all(|&v| v == 0.0));
    }
}
