//! Ising-model types and the pointwise quantities shared by all engines.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Matrices with at most this many nodes are stored densely.
pub const DENSE_STORAGE_MAX: usize = 4096;

/// Exhaustive subset enumeration is used while `C(n, k)` stays below this.
pub const DEFAULT_SUBSET_CAP: u64 = 100_000;

/// Number of subsets drawn when enumeration is too large.
pub const DEFAULT_SUBSET_SAMPLES: usize = 10_000;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    /// Row-wise sorted `(column, weight)` lists of nonzeros.
    Sparse(Vec<Vec<(usize, f64)>>),
    /// Every off-diagonal entry equal; only used above the dense threshold.
    Uniform(f64),
}

/// Symmetric, zero-diagonal coupling matrix `J` of an Ising model
/// `pi(x) ~ exp(x^T J x / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    n: usize,
    storage: Storage,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> Self {
        let storage = if n <= DENSE_STORAGE_MAX {
            Storage::Dense(vec![0.0; n * n])
        } else {
            Storage::Sparse(vec![Vec::new(); n])
        };
        InteractionMatrix { n, storage }
    }

    /// Row-major dense constructor. Rejects asymmetric input and nonzero
    /// diagonals.
    pub fn from_dense(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if !a.is_finite() || (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs()) {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        let mut m = InteractionMatrix {
            n,
            storage: Storage::Dense(entries),
        };
        // Force exact symmetry so downstream sums are reproducible.
        if let Storage::Dense(e) = &mut m.storage {
            for i in 0..n {
                for j in (i + 1)..n {
                    e[j * n + i] = e[i * n + j];
                }
            }
        }
        if n > DENSE_STORAGE_MAX {
            m = m.to_sparse();
        }
        Ok(m)
    }

    /// Build from upper-triangle triples `(i, j, value)`, `i != j`.
    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), n });
            }
            if i == j {
                return Err(Error::InvalidMatrix(format!("diagonal entry at {i}")));
            }
            if v != 0.0 {
                rows[i].push((j, v));
                rows[j].push((i, v));
            }
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidMatrix("duplicate entry".into()));
            }
        }
        let sparse = InteractionMatrix {
            n,
            storage: Storage::Sparse(rows),
        };
        Ok(if n <= DENSE_STORAGE_MAX {
            sparse.to_dense_storage()
        } else {
            sparse
        })
    }

    /// Every off-diagonal entry equal to `weight`.
    pub fn uniform(n: usize, weight: f64) -> Self {
        if n <= DENSE_STORAGE_MAX {
            let mut e = vec![weight; n * n];
            for i in 0..n {
                e[i * n + i] = 0.0;
            }
            InteractionMatrix {
                n,
                storage: Storage::Dense(e),
            }
        } else {
            InteractionMatrix {
                n,
                storage: Storage::Uniform(weight),
            }
        }
    }

    /// Curie-Weiss couplings `(beta / n) A` with `A` the complete graph.
    pub fn curie_weiss(n: usize, beta: f64) -> Self {
        Self::uniform(n, beta / n as f64)
    }

    /// Symmetric, zero-diagonal, entries uniform in `[-scale, scale]`.
    pub fn random_symmetric<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Self {
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = scale * (2.0 * rng.random::<f64>() - 1.0);
                e[i * n + j] = v;
                e[j * n + i] = v;
            }
        }
        InteractionMatrix {
            n,
            storage: Storage::Dense(e),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(e) => e[i * self.n + j],
            Storage::Sparse(rows) => rows[i]
                .binary_search_by_key(&j, |&(c, _)| c)
                .map(|k| rows[i][k].1)
                .unwrap_or(0.0),
            Storage::Uniform(w) => {
                if i == j {
                    0.0
                } else {
                    *w
                }
            }
        }
    }

    /// Nonzero `(column, weight)` pairs of row `i`.
    pub fn row_nonzeros(&self, i: usize) -> Vec<(usize, f64)> {
        match &self.storage {
            Storage::Dense(e) => (0..self.n)
                .filter_map(|j| {
                    let v = e[i * self.n + j];
                    (v != 0.0).then_some((j, v))
                })
                .collect(),
            Storage::Sparse(rows) => rows[i].clone(),
            Storage::Uniform(w) => {
                if *w == 0.0 {
                    Vec::new()
                } else {
                    (0..self.n).filter(|&j| j != i).map(|j| (j, *w)).collect()
                }
            }
        }
    }

    /// `J_i^T x`, the local field at site `i`.
    pub fn local_field(&self, i: usize, spins: &[i8]) -> f64 {
        match &self.storage {
            Storage::Dense(e) => {
                let row = &e[i * self.n..(i + 1) * self.n];
                row.iter().zip(spins).map(|(w, &s)| w * s as f64).sum()
            }
            Storage::Sparse(rows) => rows[i].iter().map(|&(j, w)| w * spins[j] as f64).sum(),
            Storage::Uniform(w) => {
                let total: i64 = spins.iter().map(|&s| s as i64).sum();
                w * (total - spins[i] as i64) as f64
            }
        }
    }

    /// If every off-diagonal entry is equal, that common value.
    pub fn uniform_weight(&self) -> Option<f64> {
        match &self.storage {
            Storage::Uniform(w) => Some(*w),
            Storage::Dense(e) => {
                if self.n < 2 {
                    return Some(0.0);
                }
                let w = e[1];
                let all = (0..self.n).all(|i| {
                    (0..self.n).all(|j| i == j || e[i * self.n + j] == w)
                });
                all.then_some(w)
            }
            Storage::Sparse(rows) => {
                let w = rows.first().and_then(|r| r.first()).map(|p| p.1)?;
                rows.iter()
                    .all(|r| r.len() == self.n - 1 && r.iter().all(|p| p.1 == w))
                    .then_some(w)
            }
        }
    }

    /// Matrix-vector product `J v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(e) => (0..self.n)
                .map(|i| {
                    e[i * self.n..(i + 1) * self.n]
                        .iter()
                        .zip(v)
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
            Storage::Sparse(rows) => rows
                .iter()
                .map(|r| r.iter().map(|&(j, w)| w * v[j]).sum())
                .collect(),
            Storage::Uniform(w) => {
                let total: f64 = v.iter().sum();
                v.iter().map(|x| w * (total - x)).collect()
            }
        }
    }

    pub fn map_entries(&self, f: impl Fn(f64) -> f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(e) => {
                let mut out: Vec<f64> = e.iter().map(|&v| f(v)).collect();
                for i in 0..self.n {
                    out[i * self.n + i] = 0.0;
                }
                Storage::Dense(out)
            }
            Storage::Sparse(rows) => Storage::Sparse(
                rows.iter()
                    .map(|r| r.iter().map(|&(j, w)| (j, f(w))).filter(|p| p.1 != 0.0).collect())
                    .collect(),
            ),
            Storage::Uniform(w) => Storage::Uniform(f(*w)),
        };
        InteractionMatrix { n: self.n, storage }
    }

    pub fn scaled(&self, t: f64) -> Self {
        self.map_entries(|v| v * t)
    }

    /// Entrywise absolute value `|J|`.
    pub fn abs(&self) -> Self {
        self.map_entries(f64::abs)
    }

    pub fn is_ferromagnetic(&self) -> bool {
        match &self.storage {
            Storage::Dense(e) => e.iter().all(|&v| v >= 0.0),
            Storage::Sparse(rows) => rows.iter().flatten().all(|p| p.1 >= 0.0),
            Storage::Uniform(w) => *w >= 0.0,
        }
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        if let (Storage::Uniform(a), Storage::Uniform(b)) = (&self.storage, &other.storage) {
            return Ok(InteractionMatrix {
                n: self.n,
                storage: Storage::Uniform(a - b),
            });
        }
        if self.n <= DENSE_STORAGE_MAX {
            let mut e = vec![0.0; self.n * self.n];
            for i in 0..self.n {
                for (j, w) in self.row_nonzeros(i) {
                    e[i * self.n + j] += w;
                }
                for (j, w) in other.row_nonzeros(i) {
                    e[i * self.n + j] -= w;
                }
            }
            return Ok(InteractionMatrix {
                n: self.n,
                storage: Storage::Dense(e),
            });
        }
        let mut triples = Vec::new();
        for i in 0..self.n {
            let mut row: Vec<(usize, f64)> = self.row_nonzeros(i);
            row.extend(other.row_nonzeros(i).into_iter().map(|(j, w)| (j, -w)));
            row.sort_by_key(|p| p.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                if j > i && v != 0.0 {
                    triples.push((i, j, v));
                }
            }
        }
        Self::from_entries(self.n, triples)
    }

    pub fn to_dense_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, w) in self.row_nonzeros(i) {
                m[(i, j)] = w;
            }
        }
        m
    }

    /// Upper-triangle nonzeros `(i, j, value)` with `i < j`.
    pub fn upper_nonzeros(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n)
            .flat_map(|i| {
                self.row_nonzeros(i)
                    .into_iter()
                    .filter(move |&(j, _)| j > i)
                    .map(move |(j, w)| (i, j, w))
            })
            .collect()
    }

    /// Operator 2-norm (largest absolute eigenvalue).
    pub fn operator_norm(&self) -> f64 {
        crate::linalg::symmetric_operator_norm(self)
    }

    fn to_sparse(&self) -> Self {
        let rows = (0..self.n).map(|i| self.row_nonzeros(i)).collect();
        InteractionMatrix {
            n: self.n,
            storage: Storage::Sparse(rows),
        }
    }

    fn to_dense_storage(&self) -> Self {
        let mut e = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, w) in self.row_nonzeros(i) {
                e[i * self.n + j] = w;
            }
        }
        InteractionMatrix {
            n: self.n,
            storage: Storage::Dense(e),
        }
    }

    /// Plain-text form: a header line `n`, then `i j value` for each
    /// upper-triangle nonzero, values with 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.n)?;
        for (i, j, v) in self.upper_nonzeros() {
            writeln!(out, "{i} {j} {v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.n);
        for (i, j, v) in self.upper_nonzeros() {
            let _ = writeln!(s, "{i} {j} {v:.16e}");
        }
        s
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate().filter_map(|(k, l)| match l {
            Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
            other => Some((k + 1, other)),
        });
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let n: usize = header?.trim().parse().map_err(|_| Error::Parse {
            line,
            msg: "header must be a node count".into(),
        })?;
        let mut triples = Vec::new();
        for (line, text) in lines {
            let text = text?;
            let parts: Vec<&str> = text.split_whitespace().collect();
            let bad = || Error::Parse {
                line,
                msg: format!("expected `i j value`, got `{text}`"),
            };
            if parts.len() != 3 {
                return Err(bad());
            }
            let i: usize = parts[0].parse().map_err(|_| bad())?;
            let j: usize = parts[1].parse().map_err(|_| bad())?;
            let v: f64 = parts[2].parse().map_err(|_| bad())?;
            if i >= j {
                return Err(Error::Parse {
                    line,
                    msg: "entries must be upper triangle (i < j)".into(),
                });
            }
            triples.push((i, j, v));
        }
        Self::from_entries(n, triples)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// A point of `{-1, +1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(bad as i64));
        }
        Ok(SpinConfiguration { spins })
    }

    pub fn all_plus(n: usize) -> Self {
        SpinConfiguration { spins: vec![1; n] }
    }

    /// Decode a state index: bit `i` set means spin `i` is `+1`.
    pub fn from_bits(n: usize, bits: usize) -> Self {
        SpinConfiguration {
            spins: (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect(),
        }
    }

    pub fn to_bits(&self) -> usize {
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0, |b, (i, _)| b | 1 << i)
    }

    /// Uniformly random configuration with exactly `plus` up spins.
    pub fn random_with_plus_count<R: Rng + ?Sized>(n: usize, plus: usize, rng: &mut R) -> Self {
        let mut spins = vec![-1i8; n];
        for i in index::sample(rng, n, plus.min(n)) {
            spins[i] = 1;
        }
        SpinConfiguration { spins }
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn into_spins(self) -> Vec<i8> {
        self.spins
    }

    pub fn sum(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    pub fn magnetization(&self) -> f64 {
        self.sum() as f64 / self.n() as f64
    }

    pub fn with_spin(&self, i: usize, s: i8) -> Self {
        let mut out = self.clone();
        out.spins[i] = s;
        out
    }

    pub fn flipped(&self, i: usize) -> Self {
        self.with_spin(i, -self.spins[i])
    }

    pub fn negated(&self) -> Self {
        SpinConfiguration {
            spins: self.spins.iter().map(|&s| -s).collect(),
        }
    }

    /// Entrywise order `self >= other`.
    pub fn dominates(&self, other: &Self) -> bool {
        self.spins.iter().zip(&other.spins).all(|(a, b)| a >= b)
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.spins.iter().zip(&other.spins).filter(|(a, b)| a != b).count()
    }
}

/// `f_C(x) = 1/(2k|S|) * sum_{R in S} C_R prod_{i in R} x^i` over a family
/// `S` of `k`-subsets.
///
/// With exhaustive subsets `f` is `1/n`-Lipschitz in each coordinate; a
/// sampled family keeps `|f(x) - f(y)| <= 1` but only approximately the
/// per-coordinate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFunction {
    n: usize,
    k: usize,
    subsets: Vec<Vec<usize>>,
    signs: Vec<i8>,
    exhaustive: bool,
}

impl MomentFunction {
    /// Subsets chosen by the default policy: exhaustive while
    /// `C(n, k) <= cap`, otherwise `samples` distinct subsets drawn
    /// uniformly without replacement. All signs `+1`.
    pub fn all_plus<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        Self::with_policy(n, k, DEFAULT_SUBSET_CAP, DEFAULT_SUBSET_SAMPLES, rng)
    }

    pub fn with_policy<R: Rng + ?Sized>(
        n: usize,
        k: usize,
        cap: u64,
        samples: usize,
        rng: &mut R,
    ) -> Result<Self> {
        validate_order(n, k)?;
        let (subsets, exhaustive) = if binomial(n as u64, k as u64) <= cap as f64 {
            (all_subsets(n, k), true)
        } else {
            (sample_subsets(n, k, samples, rng), false)
        };
        let signs = vec![1; subsets.len()];
        Ok(MomentFunction {
            n,
            k,
            subsets,
            signs,
            exhaustive,
        })
    }

    pub fn from_parts(n: usize, k: usize, subsets: Vec<Vec<usize>>, signs: Vec<i8>) -> Result<Self> {
        validate_order(n, k)?;
        if subsets.is_empty() || subsets.len() != signs.len() {
            return Err(Error::InvalidMoment("need one sign per subset".into()));
        }
        for r in &subsets {
            let distinct: HashSet<usize> = r.iter().copied().collect();
            if r.len() != k || distinct.len() != k || r.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMoment(format!("bad subset {r:?}")));
            }
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidMoment("signs must be +-1".into()));
        }
        let exhaustive = subsets.len() as f64 == binomial(n as u64, k as u64);
        Ok(MomentFunction {
            n,
            k,
            subsets,
            signs,
            exhaustive,
        })
    }

    pub fn with_signs(mut self, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != self.subsets.len() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidMoment("signs must be +-1, one per subset".into()));
        }
        self.signs = signs;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn normalization(&self) -> f64 {
        1.0 / (2.0 * self.k as f64 * self.subsets.len() as f64)
    }

    pub fn eval_spins(&self, x: &[i8]) -> f64 {
        let total: i64 = self
            .subsets
            .iter()
            .zip(&self.signs)
            .map(|(r, &c)| c as i64 * r.iter().map(|&i| x[i] as i64).product::<i64>())
            .sum();
        total as f64 * self.normalization()
    }

    pub fn eval(&self, x: &SpinConfiguration) -> Result<f64> {
        check_dim(self.n, x.n())?;
        Ok(self.eval_spins(x.spins()))
    }
}

fn validate_order(n: usize, k: usize) -> Result<()> {
    if k == 0 || k % 2 != 0 || k >= n {
        return Err(Error::InvalidMoment(format!(
            "k must be even with 0 < k < n (k = {k}, n = {n})"
        )));
    }
    Ok(())
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn sample_subsets<R: Rng + ?Sized>(n: usize, k: usize, count: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut r = index::sample(rng, n, k).into_vec();
        r.sort_unstable();
        if seen.insert(r.clone()) {
            out.push(r);
        }
    }
    out
}

/// `H_J(x) = x^T J x / 2`.
pub fn hamiltonian(j: &InteractionMatrix, x: &SpinConfiguration) -> Result<f64> {
    check_dim(j.n(), x.n())?;
    Ok(hamiltonian_spins(j, x.spins()))
}

pub(crate) fn hamiltonian_spins(j: &InteractionMatrix, x: &[i8]) -> f64 {
    if let Some(w) = j.uniform_weight() {
        let s: i64 = x.iter().map(|&v| v as i64).sum();
        return 0.5 * w * ((s * s) as f64 - x.len() as f64);
    }
    0.5 * (0..j.n())
        .map(|i| x[i] as f64 * j.local_field(i, x))
        .sum::<f64>()
}

/// `P(x_i = +1 | x_{~i}) = (1 + tanh(J_i^T x)) / 2`.
pub fn conditional_prob_plus(j: &InteractionMatrix, x: &SpinConfiguration, i: usize) -> Result<f64> {
    check_dim(j.n(), x.n())?;
    if i >= j.n() {
        return Err(Error::IndexOutOfRange { index: i, n: j.n() });
    }
    Ok(0.5 * (1.0 + j.local_field(i, x.spins()).tanh()))
}

/// Total-variation distance `|tanh(L_i^T x) - tanh(M_i^T x)| / 2` between
/// the two single-site conditionals at `i`.
pub fn tv_conditionals(
    l: &InteractionMatrix,
    m: &InteractionMatrix,
    x: &SpinConfiguration,
    i: usize,
) -> Result<f64> {
    check_dim(l.n(), m.n())?;
    check_dim(l.n(), x.n())?;
    if i >= l.n() {
        return Err(Error::IndexOutOfRange { index: i, n: l.n() });
    }
    Ok(tv_from_fields(l.local_field(i, x.spins()), m.local_field(i, x.spins())))
}

#[inline]
pub(crate) fn tv_from_fields(a: f64, b: f64) -> f64 {
    0.5 * (a.tanh() - b.tanh()).abs()
}

pub fn moment_function_eval(f: &MomentFunction, x: &SpinConfiguration) -> Result<f64> {
    f.eval(x)
}

/// Largest element of `S_n = {-1, -1 + 2/n, ..., 1}` not exceeding `s`.
pub fn lattice_round(s: f64, n: usize) -> Result<f64> {
    if s < -1.0 || s.is_nan() {
        return Err(Error::BelowLattice(s));
    }
    Ok(lattice_point(lattice_index(s, n), n))
}

/// Index `j` of the lattice point `-1 + 2j/n` returned by [`lattice_round`].
pub fn lattice_index(s: f64, n: usize) -> usize {
    let j = ((s + 1.0) * n as f64 / 2.0 + 1e-9).floor();
    (j.max(0.0) as usize).min(n)
}

pub fn lattice_point(j: usize, n: usize) -> f64 {
    -1.0 + 2.0 * j as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> InteractionMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                t.push((i, j, scale * rng.random_range(-1.0..1.0)));
            }
        }
        InteractionMatrix::from_entries(n, t).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let zero = InteractionMatrix::zeros(5);
        let x = SpinConfiguration::new(vec![1, -1, 1, 1, -1]).unwrap();
        assert_eq!(hamiltonian(&zero, &x).unwrap(), 0.0);

        let two = InteractionMatrix::from_entries(2, [(0, 1, 0.5)]).unwrap();
        assert_abs_diff_eq!(hamiltonian(&two, &SpinConfiguration::all_plus(2)).unwrap(), 0.5);

        let cw = InteractionMatrix::curie_weiss(4, 1.0);
        assert_abs_diff_eq!(
            hamiltonian(&cw, &SpinConfiguration::all_plus(4)).unwrap(),
            1.5,
            epsilon = 1e-15
        );
        assert!(matches!(
            hamiltonian(&cw, &SpinConfiguration::all_plus(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(InteractionMatrix::from_dense(2, vec![0.0, 1.0, 0.5, 0.0]).is_err());
        assert!(InteractionMatrix::from_dense(2, vec![1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(InteractionMatrix::from_entries(3, [(1, 1, 0.2)]).is_err());
        assert!(SpinConfiguration::new(vec![1, 0]).is_err());
    }

    #[test]
    fn conditional_examples() {
        let x = SpinConfiguration::new(vec![1, 1, -1]).unwrap();
        assert_eq!(conditional_prob_plus(&InteractionMatrix::zeros(3), &x, 0).unwrap(), 0.5);
        let cw = InteractionMatrix::curie_weiss(3, 1.0);
        // Field at site 2 is (1/3)(1 + 1) = 2/3; tanh(2/3) = 0.5827829453479101.
        let p = conditional_prob_plus(&cw, &x, 2).unwrap();
        assert_abs_diff_eq!(p, 0.5 * (1.0 + 0.5827829453479101), epsilon = 1e-15);
        assert_abs_diff_eq!(p, 0.7913914726739551, epsilon = 1e-15);
        assert_eq!(p, conditional_prob_plus(&cw, &x.flipped(2), 2).unwrap());
        assert!(conditional_prob_plus(&cw, &x, 3).is_err());
    }

    #[test]
    fn tv_matches_two_point_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = random_matrix(5, 0.7, &mut rng);
        let m = random_matrix(5, 0.7, &mut rng);
        for bits in 0..32 {
            let x = SpinConfiguration::from_bits(5, bits);
            for i in 0..5 {
                let p = conditional_prob_plus(&l, &x, i).unwrap();
                let q = conditional_prob_plus(&m, &x, i).unwrap();
                // TV on {-1, +1}: half the L1 distance of the two laws.
                let direct = 0.5 * ((p - q).abs() + ((1.0 - p) - (1.0 - q)).abs());
                let tv = tv_conditionals(&l, &m, &x, i).unwrap();
                assert_abs_diff_eq!(tv, direct, epsilon = 1e-14);
                assert_eq!(tv, tv_conditionals(&m, &l, &x, i).unwrap());
                let diff = l.sub(&m).unwrap();
                assert!(tv <= 0.5 * diff.local_field(i, x.spins()).abs() + 1e-15);
            }
        }
        let x = SpinConfiguration::all_plus(5);
        assert_eq!(tv_conditionals(&l, &l, &x, 1).unwrap(), 0.0);
    }

    #[test]
    fn moment_function_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = MomentFunction::all_plus(6, 2, &mut rng).unwrap();
        assert!(f.is_exhaustive());
        assert_eq!(f.subsets().len(), 15);
        assert_abs_diff_eq!(f.eval(&SpinConfiguration::all_plus(6)).unwrap(), 0.25);
        assert!(MomentFunction::all_plus(6, 3, &mut rng).is_err());
        assert!(MomentFunction::all_plus(4, 4, &mut rng).is_err());
    }

    #[test]
    fn moment_function_lipschitz_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (n, k) in [(6, 2), (8, 2), (8, 4)] {
            let f = MomentFunction::all_plus(n, k, &mut rng).unwrap();
            let signs = (0..f.subsets().len())
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let f = f.with_signs(signs).unwrap();
            for bits in 0..(1usize << n) {
                let x = SpinConfiguration::from_bits(n, bits);
                let fx = f.eval(&x).unwrap();
                assert_abs_diff_eq!(fx, f.eval(&x.negated()).unwrap(), epsilon = 1e-15);
                for i in 0..n {
                    let jump = (fx - f.eval(&x.flipped(i)).unwrap()).abs();
                    assert!(jump <= 1.0 / n as f64 + 1e-15, "n={n} k={k} jump={jump}");
                }
            }
        }
    }

    #[test]
    fn sampled_subsets_are_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = MomentFunction::with_policy(1000, 2, 1000, 500, &mut rng).unwrap();
        assert!(!f.is_exhaustive());
        let set: HashSet<_> = f.subsets().iter().cloned().collect();
        assert_eq!(set.len(), 500);
        assert!(f.subsets().iter().all(|r| r.len() == 2 && r[0] < r[1]));
    }

    #[test]
    fn lattice_round_examples() {
        assert_eq!(lattice_round(1.0, 7).unwrap(), 1.0);
        assert_eq!(lattice_round(0.3, 4).unwrap(), 0.0);
        for j in 0..=10 {
            let s = lattice_point(j, 10);
            assert_abs_diff_eq!(lattice_round(s, 10).unwrap(), s, epsilon = 1e-15);
        }
        assert!(lattice_round(-1.5, 4).is_err());
        assert_eq!(lattice_round(-1.0, 4).unwrap(), -1.0);
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = random_matrix(7, 0.4, &mut rng);
        let back = InteractionMatrix::read_text(j.to_text().as_bytes()).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                assert_eq!(j.get(a, b), back.get(a, b));
            }
        }
        assert!(InteractionMatrix::read_text("3\n2 1 0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn large_uniform_matches_dense_semantics() {
        let n = DENSE_STORAGE_MAX + 4;
        let big = InteractionMatrix::curie_weiss(n, 1.2);
        assert!(!big.is_dense());
        let x: Vec<i8> = (0..n).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let direct: f64 = (0..n).filter(|&j| j != 5).map(|j| big.get(5, j) * x[j] as f64).sum();
        assert_abs_diff_eq!(big.local_field(5, &x), direct, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn hamiltonian_flip_invariant(seed in 0u64..1000, n in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let j = random_matrix(n, 1.0, &mut rng);
            let bits = rng.random_range(0..(1usize << n));
            let x = SpinConfiguration::from_bits(n, bits);
            let h = hamiltonian(&j, &x).unwrap();
            prop_assert!((h - hamiltonian(&j, &x.negated()).unwrap()).abs() < 1e-12);
            let p = conditional_prob_plus(&j, &x, 0).unwrap();
            prop_assert!(p > 0.0 && p < 1.0);
        }

        #[test]
        fn bits_round_trip(n in 1usize..16, raw in 0usize..65536) {
            let bits = raw & ((1usize << n) - 1);
            prop_assert_eq!(SpinConfiguration::from_bits(n, bits).to_bits(), bits);
        }
    }
}
