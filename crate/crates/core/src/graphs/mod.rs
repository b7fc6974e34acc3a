//! Graph constructions, spectral certification of expansion, and the
//! interaction matrices graphs induce.

mod build;
mod spectral;

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::ising::InteractionMatrix;

pub use build::{circulant, complete_graph, disjoint_cliques, random_regular, random_regular_with_budget, DEFAULT_RESTART_BUDGET};
pub use spectral::{spectral_deviation, spectral_report, SpectralReport};

/// Undirected simple graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    regular_degree: Option<usize>,
}

impl SimpleGraph {
    /// Validates and normalizes the edge list to sorted `(i, j)`, `i < j`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange { index: a.max(b), n });
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut deg = vec![0usize; n];
        for &(a, b) in &edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        let regular_degree = match deg.first() {
            Some(&d) if d > 0 && deg.iter().all(|&x| x == d) => Some(d),
            _ => None,
        };
        Ok(SimpleGraph {
            n,
            edges,
            regular_degree,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn regular_degree(&self) -> Option<usize> {
        self.regular_degree
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency_lists().iter().map(Vec::len).collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency_lists();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1) / 2
    }

    /// Component index of every vertex.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency_lists();
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &u in &adj[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Plain-text form: header `n d` (`d = 0` when not regular), then one
    /// `i j` line per edge with `i < j`.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.n, self.regular_degree.unwrap_or(0))?;
        for &(a, b) in &self.edges {
            writeln!(out, "{a} {b}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let nums: Vec<usize> = t
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: k + 1,
                    msg: format!("expected two integers, got `{t}`"),
                })?;
            if nums.len() != 2 {
                return Err(Error::Parse {
                    line: k + 1,
                    msg: format!("expected two integers, got `{t}`"),
                });
            }
            if header.is_none() {
                header = Some((nums[0], nums[1]));
            } else {
                if nums[0] >= nums[1] {
                    return Err(Error::Parse {
                        line: k + 1,
                        msg: "edges must satisfy i < j".into(),
                    });
                }
                edges.push((nums[0], nums[1]));
            }
        }
        let (n, d) = header.ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let g = SimpleGraph::from_edges(n, edges)?;
        if d != 0 && g.regular_degree != Some(d) {
            return Err(Error::NotRegular);
        }
        Ok(g)
    }
}

/// How adjacency is scaled into couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// `(beta / n) A`.
    PerN,
    /// `(beta / d) B`, for `d`-regular graphs.
    PerD,
}

pub fn interaction_from_graph(g: &SimpleGraph, beta: f64, scale: Scale) -> Result<InteractionMatrix> {
    let w = match scale {
        Scale::PerN => beta / g.n() as f64,
        Scale::PerD => {
            let d = g.regular_degree().ok_or_else(|| {
                Error::InvalidGraph("per-d scaling requires a regular graph".into())
            })?;
            beta / d as f64
        }
    };
    if g.is_complete() && g.n() >= 2 {
        return Ok(InteractionMatrix::uniform(g.n(), w));
    }
    InteractionMatrix::from_entries(g.n(), g.edges().iter().map(|&(a, b)| (a, b, w)))
}
