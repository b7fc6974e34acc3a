//! Brute-force reference computations, written independently of the
//! library so acceptance checks do not grade the library with itself.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use stein_ising::InteractionMatrix;

pub fn dense(j: &InteractionMatrix) -> Vec<Vec<f64>> {
    let n = j.n();
    (0..n).map(|a| (0..n).map(|b| j.get(a, b)).collect()).collect()
}

pub fn spins(n: usize, s: usize) -> Vec<f64> {
    (0..n).map(|i| if s >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

fn field(j: &[Vec<f64>], x: &[f64], i: usize) -> f64 {
    j[i].iter().zip(x).enumerate().filter(|(k, _)| *k != i).map(|(_, (a, b))| a * b).sum()
}

/// `pi(x) ∝ exp(x^T J x / 2)`.
pub fn gibbs(j: &[Vec<f64>]) -> Vec<f64> {
    let n = j.len();
    let w: Vec<f64> = (0..1usize << n)
        .map(|s| {
            let x = spins(n, s);
            let e: f64 = (0..n).map(|i| x[i] * field(j, &x, i)).sum::<f64>() / 2.0;
            e.exp()
        })
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// `2 pi` on positive sums, `pi` on zero sums, `0` otherwise.
pub fn plus_phase(n: usize, pi: &[f64]) -> Vec<f64> {
    (0..pi.len())
        .map(|s| {
            let sum = 2 * s.count_ones() as i64 - n as i64;
            match sum.signum() {
                1 => 2.0 * pi[s],
                0 => pi[s],
                _ => 0.0,
            }
        })
        .collect()
}

/// Dense heat-bath Glauber kernel; with `restricted`, moves into negative
/// sums are replaced by the flipped state.
pub fn glauber(j: &[Vec<f64>], restricted: bool) -> Vec<Vec<f64>> {
    let n = j.len();
    let size = 1usize << n;
    let mut p = vec![vec![0.0; size]; size];
    for s in 0..size {
        let x = spins(n, s);
        for i in 0..n {
            let plus = (1.0 + field(j, &x, i).tanh()) / 2.0;
            for (t, q) in [(s | 1 << i, plus), (s & !(1 << i), 1.0 - plus)] {
                let mut t = t;
                if restricted && 2 * (t.count_ones() as i64) < n as i64 {
                    t = !t & (size - 1);
                }
                p[s][t] += q / n as f64;
            }
        }
    }
    p
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for c in 0..m {
        let piv = (c..m).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in (c + 1)..m {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..m {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = ((r + 1)..m).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Centered solution of `h - P h = f - E_pi f` via `(I - P + 1 pi^T) h = g`.
pub fn poisson(p: &[Vec<f64>], pi: &[f64], f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let ef: f64 = pi.iter().zip(f).map(|(a, b)| a * b).sum();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|r| (0..m).map(|c| if r == c { 1.0 } else { 0.0 } - p[r][c] + pi[c]).collect())
        .collect();
    solve(a, f.iter().map(|v| v - ef).collect())
}

pub fn expect(pi: &[f64], f: &[f64]) -> f64 {
    pi.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// `E_nu[(1/n) sum_i |Delta_i h| TV_i]` with `TV_i = |tanh(L_i x) - tanh(M_i x)| / 2`.
pub fn stein_rhs(l: &[Vec<f64>], m: &[Vec<f64>], h: &[f64], nu: &[f64]) -> f64 {
    let n = l.len();
    (0..nu.len())
        .map(|s| {
            let x = spins(n, s);
            let inner: f64 = (0..n)
                .map(|i| {
                    let dh = (h[s | 1 << i] - h[s & !(1 << i)]).abs();
                    dh * (field(l, &x, i).tanh() - field(m, &x, i).tanh()).abs() / 2.0
                })
                .sum();
            nu[s] * inner / n as f64
        })
        .sum()
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

pub fn eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |r, c| a[r][c]);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn spectral_norm(a: &[Vec<f64>]) -> f64 {
    eigenvalues(a).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `D_KL(p|q) + D_KL(q|p)`.
pub fn skl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a / b).ln()).sum()
}

/// Positive root of `tanh(beta s) = s` and the rate `1 - beta (1 - m*^2)`.
pub fn curie_weiss_root(beta: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (1e-9, 1.0);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if (beta * mid).tanh() > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m = (lo + hi) / 2.0;
    (m, 1.0 - beta * (1.0 - m * m))
}
