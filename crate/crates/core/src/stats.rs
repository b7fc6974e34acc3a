//! Small statistics helpers: means, standard errors, batch means, log-log fits.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(mean: f64, se: f64) -> Self {
        Estimate { mean, se }
    }

    /// `|self - target| <= k * se`, with a floor so an exactly-zero SE still
    /// admits rounding.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + 1e-12
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Mean and standard error of i.i.d. observations.
pub fn iid_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len().max(1);
    Estimate::new(mean(xs), (variance(xs) / n as f64).sqrt())
}

/// Mean and SE from equal-size batch means.
pub fn batch_estimate(batch_means: &[f64]) -> Estimate {
    iid_estimate(batch_means)
}

/// Accumulates a time series into `batches` contiguous batches of known size.
#[derive(Debug, Clone)]
pub struct BatchAccumulator {
    per_batch: usize,
    sums: Vec<f64>,
    counts: Vec<usize>,
    seen: usize,
}

impl BatchAccumulator {
    pub fn new(total: usize, batches: usize) -> Self {
        let batches = batches.max(1).min(total.max(1));
        BatchAccumulator {
            per_batch: (total / batches).max(1),
            sums: vec![0.0; batches],
            counts: vec![0; batches],
            seen: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        let b = (self.seen / self.per_batch).min(self.sums.len() - 1);
        self.sums[b] += x;
        self.counts[b] += 1;
        self.seen += 1;
    }

    pub fn batch_means(&self) -> Vec<f64> {
        self
            .sums
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| s / c as f64)
            .collect()
    }

    pub fn estimate(&self) -> Estimate {
        batch_estimate(&self.batch_means())
    }
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Exponent `p` in `y ~ c * x^p`.
pub fn power_law_exponent(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_recovers_exponent() {
        let x = [2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((power_law_exponent(&x, &y) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn batches_split_evenly() {
        let mut acc = BatchAccumulator::new(100, 10);
        for i in 0..100 {
            acc.push((i / 10) as f64);
        }
        let est = acc.estimate();
        assert!((est.mean - 4.5).abs() < 1e-12);
        assert!(est.se > 0.0);
    }
}
