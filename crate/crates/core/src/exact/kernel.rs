use nalgebra::{DMatrix, DVector};

use super::{check_cap, complement, local_fields, spin_sum, DEFAULT_EXACT_CAP};
use crate::error::{Error, Result};
use crate::ising::InteractionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFlavor {
    /// Heat-bath Glauber dynamics on all of `Omega`.
    Plain,
    /// Glauber dynamics on `Omega+ = {sum x >= 0}`: any update that makes the
    /// sum negative is followed by a global spin flip.
    Restricted,
}

/// Sparse single-site transition operator; each row has at most `n + 1`
/// entries (one per site and direction, merged, plus the self-loop).
#[derive(Debug, Clone)]
pub struct GlauberKernel {
    n: usize,
    flavor: KernelFlavor,
    states: Vec<usize>,
    position: Vec<usize>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

pub fn glauber_kernel(j: &InteractionMatrix, flavor: KernelFlavor) -> Result<GlauberKernel> {
    GlauberKernel::new(j, flavor, DEFAULT_EXACT_CAP)
}

impl GlauberKernel {
    pub fn new(j: &InteractionMatrix, flavor: KernelFlavor, cap: usize) -> Result<Self> {
        let n = j.n();
        check_cap(n, cap)?;
        let total = 1usize << n;
        let states: Vec<usize> = match flavor {
            KernelFlavor::Plain => (0..total).collect(),
            KernelFlavor::Restricted => (0..total).filter(|&s| spin_sum(n, s) >= 0).collect(),
        };
        let mut position = vec![usize::MAX; total];
        for (k, &s) in states.iter().enumerate() {
            position[s] = k;
        }
        let fields = local_fields(j);
        let fold = |t: usize| match flavor {
            KernelFlavor::Restricted if spin_sum(n, t) < 0 => complement(n, t),
            _ => t,
        };
        let mut offsets = Vec::with_capacity(states.len() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * n);
        for &s in &states {
            row.clear();
            for i in 0..n {
                let plus = 0.5 * (1.0 + fields[s * n + i].tanh());
                row.push((position[fold(s | 1 << i)], plus / n as f64));
                row.push((position[fold(s & !(1 << i))], (1.0 - plus) / n as f64));
            }
            row.sort_by_key(|e| e.0);
            let start = targets.len();
            for &(t, w) in &row {
                if targets.len() > start && *targets.last().unwrap() == t {
                    *weights.last_mut().unwrap() += w;
                } else {
                    targets.push(t);
                    weights.push(w);
                }
            }
            offsets.push(targets.len());
        }
        Ok(GlauberKernel {
            n,
            flavor,
            states,
            position,
            offsets,
            targets,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> KernelFlavor {
        self.flavor
    }

    /// Number of states in the kernel's state space.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Full-`Omega` index of each local state, increasing.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn local_index(&self, full: usize) -> Option<usize> {
        self.position.get(full).copied().filter(|&k| k != usize::MAX)
    }

    /// `(target, probability)` pairs of row `k`, targets as local indices.
    pub fn row(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[k]..self.offsets[k + 1];
        self.targets[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// `(P h)(x) = sum_y P(x, y) h(y)`.
    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.row(k).map(|(t, w)| w * h[t]).sum())
            .collect()
    }

    /// `(pi P)(y) = sum_x pi(x) P(x, y)`.
    pub fn apply_left(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (k, &p) in pi.iter().enumerate() {
            for (t, w) in self.row(k) {
                out[t] += p * w;
            }
        }
        out
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.len())
            .map(|k| (self.row(k).map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |pi(x) P(x, y) - pi(y) P(y, x)|` over all pairs.
    pub fn detailed_balance_error(&self, pi: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            for (t, w) in self.row(k) {
                let back = self.row(t).find(|e| e.0 == k).map(|e| e.1).unwrap_or(0.0);
                worst = worst.max((pi[k] * w - pi[t] * back).abs());
            }
        }
        worst
    }

    pub fn min_self_loop(&self) -> f64 {
        (0..self.len())
            .map(|k| self.row(k).find(|e| e.0 == k).map(|e| e.1).unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Stationary law found by solving `pi (I - P) = 0`, `sum pi = 1`, with
    /// no reference to any closed form.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let m = self.len();
        if m <= super::DENSE_SOLVE_MAX {
            // (I - P)^T pi = 0 with the last equation replaced by sum pi = 1.
            let mut a = DMatrix::zeros(m, m);
            for k in 0..m {
                a[(k, k)] += 1.0;
                for (t, w) in self.row(k) {
                    a[(t, k)] -= w;
                }
            }
            for k in 0..m {
                a[(m - 1, k)] = 1.0;
            }
            let mut b = DVector::zeros(m);
            b[m - 1] = 1.0;
            let sol = a
                .lu()
                .solve(&b)
                .ok_or_else(|| Error::SingularSystem("stationary system is singular".into()))?;
            return Ok(sol.iter().copied().collect());
        }
        // Power iteration on the lazy chain (I + P) / 2.
        let mut pi = vec![1.0 / m as f64; m];
        for _ in 0..1_000_000 {
            let next: Vec<f64> = self
                .apply_left(&pi)
                .iter()
                .zip(&pi)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let diff = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            pi = next;
            if diff < 1e-16 {
                break;
            }
        }
        Ok(pi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactDistribution;

    #[test]
    fn single_site_row_is_resampling() {
        let j = InteractionMatrix::zeros(1);
        let k = glauber_kernel(&j, KernelFlavor::Plain).unwrap();
        for s in 0..2 {
            let row: Vec<_> = k.row(s).collect();
            assert_eq!(row, vec![(0, 0.5), (1, 0.5)]);
        }
    }

    #[test]
    fn plain_detailed_balance_n6() {
        let j = InteractionMatrix::from_entries(6, [(0, 1, 0.4), (1, 2, -0.3), (3, 5, 0.9), (0, 5, 0.2)]).unwrap();
        let k = glauber_kernel(&j, KernelFlavor::Plain).unwrap();
        let mu = ExactDistribution::new(&j).unwrap();
        assert!(k.max_row_sum_error() < 1e-12);
        assert!(k.detailed_balance_error(mu.probs()) < 1e-12);
        assert!(k.min_self_loop() > 0.0);
        assert!(k.row(0).count() <= 7);
    }

    #[test]
    fn restricted_stays_positive() {
        let j = InteractionMatrix::curie_weiss(7, 1.2);
        let k = glauber_kernel(&j, KernelFlavor::Restricted).unwrap();
        assert_eq!(k.len(), 64);
        assert!(k.states().iter().all(|&s| spin_sum(7, s) >= 0));
        assert!(k.max_row_sum_error() < 1e-12);
    }
}
