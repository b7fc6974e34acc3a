use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;

use super::SimpleGraph;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_RESTART_BUDGET: usize = 10_000;

pub fn complete_graph(n: usize) -> Result<SimpleGraph> {
    if n < 2 {
        return Err(Error::InvalidGraph(format!("complete graph needs n >= 2, got {n}")));
    }
    SimpleGraph::from_edges(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))))
}

/// `n / d` disjoint copies of `K_d`.
pub fn disjoint_cliques(n: usize, d: usize) -> Result<SimpleGraph> {
    if d < 2 || n % d != 0 {
        return Err(Error::InvalidGraph(format!("clique size {d} must be >= 2 and divide n = {n}")));
    }
    SimpleGraph::from_edges(
        n,
        (0..n / d).flat_map(|c| {
            let base = c * d;
            (0..d).flat_map(move |a| ((a + 1)..d).map(move |b| (base + a, base + b)))
        }),
    )
}

/// Circulant graph: `i ~ i +- s (mod n)` for each offset `s`.
pub fn circulant(n: usize, offsets: &[usize]) -> Result<SimpleGraph> {
    let mut edges = BTreeSet::new();
    for &s in offsets {
        if s == 0 || s >= n {
            return Err(Error::InvalidGraph(format!("offset {s} out of range for n = {n}")));
        }
        for i in 0..n {
            let j = (i + s) % n;
            edges.insert((i.min(j), i.max(j)));
        }
    }
    SimpleGraph::from_edges(n, edges)
}

/// Random simple `d`-regular graph, deterministic given `seed`.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<SimpleGraph> {
    random_regular_with_budget(n, d, seed, DEFAULT_RESTART_BUDGET)
}

/// Pairing-model generator. Stubs are shuffled and paired; pairs that would
/// form a loop or a repeated edge are returned to the pool and re-paired
/// until none remain, restarting from scratch only when the leftover stubs
/// admit no valid pair at all.
pub fn random_regular_with_budget(n: usize, d: usize, seed: u64, budget: usize) -> Result<SimpleGraph> {
    if (n * d) % 2 != 0 {
        return Err(Error::DegreeParity { n, d });
    }
    if d == 0 || d >= n {
        return Err(Error::InvalidGraph(format!("degree must satisfy 0 < d < n (d = {d}, n = {n})")));
    }
    let mut rng = rng::stream(seed, "random_regular", 0);
    for _ in 0..budget {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            return SimpleGraph::from_edges(n, edges);
        }
    }
    Err(Error::RestartBudgetExceeded(budget))
}

fn try_pairing(n: usize, d: usize, rng: &mut rng::StreamRng) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                continue;
            }
            *leftover.entry(a).or_default() += 1;
            *leftover.entry(b).or_default() += 1;
        }
        if !has_valid_pair(&edges, &leftover) {
            return None;
        }
        stubs = leftover
            .iter()
            .flat_map(|(&v, &c)| std::iter::repeat_n(v, c))
            .collect();
    }
    Some(edges)
}

fn has_valid_pair(edges: &BTreeSet<(usize, usize)>, leftover: &BTreeMap<usize, usize>) -> bool {
    if leftover.is_empty() {
        return true;
    }
    let nodes: Vec<usize> = leftover.keys().copied().collect();
    nodes.iter().enumerate().any(|(k, &a)| {
        nodes[k + 1..].iter().any(|&b| !edges.contains(&(a, b)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_examples() {
        assert_eq!(complete_graph(2).unwrap().edges(), &[(0, 1)]);
        let k4 = complete_graph(4).unwrap();
        assert_eq!(k4.edges().len(), 6);
        assert_eq!(k4.regular_degree(), Some(3));
        assert!(complete_graph(1).is_err());
    }

    #[test]
    fn clique_examples() {
        let g = disjoint_cliques(8, 4).unwrap();
        assert_eq!(g.edges().len(), 12);
        assert_eq!(g.regular_degree(), Some(3));
        assert!(!g.is_connected());
        assert_eq!(disjoint_cliques(5, 5).unwrap(), complete_graph(5).unwrap());
        assert!(disjoint_cliques(10, 4).is_err());
    }

    #[test]
    fn regular_examples() {
        assert_eq!(random_regular(4, 3, 11).unwrap(), complete_graph(4).unwrap());
        assert!(matches!(random_regular(5, 3, 0), Err(Error::DegreeParity { .. })));
        assert!(random_regular(4, 4, 0).is_err());
        for (n, d) in [(50, 3), (64, 8), (200, 16), (128, 33)] {
            let g = random_regular(n, d, 3).unwrap();
            assert_eq!(g.regular_degree(), Some(d), "n={n} d={d}");
            assert_eq!(g.edges().len(), n * d / 2);
        }
    }

    #[test]
    fn regular_is_deterministic() {
        assert_eq!(random_regular(100, 6, 42).unwrap(), random_regular(100, 6, 42).unwrap());
        assert_ne!(random_regular(100, 6, 42).unwrap(), random_regular(100, 6, 43).unwrap());
    }
}
