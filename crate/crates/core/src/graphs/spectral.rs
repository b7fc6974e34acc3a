use nalgebra::DMatrix;
use serde::Serialize;

use super::SimpleGraph;
use crate::error::{Error, Result};
use crate::ising::{InteractionMatrix, DENSE_STORAGE_MAX};
use crate::linalg;

/// Adjacency spectrum summary of a `d`-regular graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    /// Full spectrum in decreasing order on the dense path; `[d, max_{i>=2} |lambda_i|]`
    /// on the iterative path.
    pub eigenvalues: Vec<f64>,
    /// `max_{i >= 2} |lambda_i| / d`.
    pub epsilon: f64,
    pub is_connected: bool,
    pub degree: usize,
}

impl SpectralReport {
    /// Whether `epsilon < 2 (sqrt(d - 1) + delta) / d`.
    pub fn is_approx_ramanujan(&self, delta: f64) -> bool {
        let d = self.degree as f64;
        self.epsilon < 2.0 * ((d - 1.0).sqrt() + delta) / d
    }
}

pub fn spectral_report(g: &SimpleGraph) -> Result<SpectralReport> {
    let d = g.regular_degree().ok_or(Error::NotRegular)?;
    let n = g.n();
    let (eigenvalues, second) = if n <= DENSE_STORAGE_MAX {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j) in g.edges() {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        let ev = linalg::symmetric_eigenvalues(a);
        let second = ev[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (ev, second)
    } else {
        let adj = g.adjacency_lists();
        let apply = |v: &[f64]| -> Vec<f64> {
            adj.iter().map(|nb| nb.iter().map(|&u| v[u]).sum()).collect()
        };
        let u = vec![1.0 / (n as f64).sqrt(); n];
        let second = linalg::power_iteration(apply, n, Some(&u), linalg::POWER_TOL, linalg::POWER_MAX_ITER);
        (vec![d as f64, second], second)
    };
    Ok(SpectralReport {
        eigenvalues,
        epsilon: (second / d as f64).clamp(0.0, 1.0),
        is_connected: g.is_connected(),
        degree: d,
    })
}

/// Operator 2-norm of `J1 - J2`.
pub fn spectral_deviation(j1: &InteractionMatrix, j2: &InteractionMatrix) -> Result<f64> {
    Ok(j1.sub(j2)?.operator_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{circulant, complete_graph, disjoint_cliques, interaction_from_graph, random_regular, Scale};

    #[test]
    fn complete_graph_epsilon() {
        for n in [3, 5, 9] {
            let r = spectral_report(&complete_graph(n).unwrap()).unwrap();
            assert!((r.epsilon - 1.0 / (n - 1) as f64).abs() < 1e-12);
            assert!((r.eigenvalues[0] - (n - 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_closed_form() {
        let n = 4;
        let r = spectral_report(&circulant(n, &[1]).unwrap()).unwrap();
        let mut expected: Vec<f64> = (0..n)
            .map(|j| 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in r.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((r.epsilon - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cliques_are_disconnected() {
        let r = spectral_report(&disjoint_cliques(8, 4).unwrap()).unwrap();
        assert!(!r.is_connected);
        assert!((r.epsilon - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regular_top_eigenvalue_and_norm_bound() {
        let (n, d, beta) = (128, 8, 1.2);
        let g = random_regular(n, d, 5).unwrap();
        let r = spectral_report(&g).unwrap();
        assert!((r.eigenvalues[0] - d as f64).abs() < 1e-8);
        let cw = InteractionMatrix::curie_weiss(n, beta);
        let reg = interaction_from_graph(&g, beta, Scale::PerD).unwrap();
        let dev = spectral_deviation(&cw, &reg).unwrap();
        assert!(dev <= beta * (r.epsilon + 1.0 / n as f64) + 1e-8);
        assert_eq!(spectral_deviation(&cw, &cw).unwrap(), 0.0);
        let scaled = cw.scaled(1.1);
        let t = spectral_deviation(&scaled, &cw).unwrap();
        assert!((t - 0.1 * beta * (n - 1) as f64 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn non_regular_rejected() {
        let g = SimpleGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(spectral_report(&g), Err(Error::NotRegular)));
    }
}
