//! Rate fits, compensated sums and Monte Carlo summaries.

use serde::Serialize;

/// Least-squares line `y = slope * x + intercept` with its RMS residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Ordinary least squares on `(x, y)` pairs. Needs at least two distinct `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(SlopeFit {
        slope,
        intercept,
        residual,
    })
}

/// Fits `log2(err) = slope * log2(h) + c`. Zero errors are dropped.
pub fn log2_log2_slope(h: &[f64], err: &[f64]) -> Option<SlopeFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = h
        .iter()
        .zip(err)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.log2(), b.log2()))
        .unzip();
    fit_line(&x, &y)
}

/// Fits `log2(delta_n) = slope * n + c` over the depth index `n`.
///
/// For deltas behaving like `2^{-(a-1) n}` the slope is `-(a-1)`.
pub fn depth_slope(depths: &[usize], deltas: &[f64]) -> Option<SlopeFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = depths
        .iter()
        .zip(deltas)
        .filter(|(_, d)| **d > 0.0)
        .map(|(n, d)| (*n as f64, d.log2()))
        .unzip();
    fit_line(&x, &y)
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = CompensatedSum::new();
    xs.into_iter().for_each(|x| s.add(x));
    s.value()
}

/// Sample mean, unbiased variance and 3-sigma intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McSummary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean.
    pub mean_stderr: f64,
    /// Standard error of the variance estimate (from the fourth central moment).
    pub variance_stderr: f64,
}

impl McSummary {
    /// Summarises samples in the given order (compensated, deterministic).
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let nf = n as f64;
        let mean = compensated_sum(xs.iter().copied()) / nf;
        let m2 = compensated_sum(xs.iter().map(|x| (x - mean).powi(2))) / nf;
        let m4 = compensated_sum(xs.iter().map(|x| (x - mean).powi(4))) / nf;
        let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        McSummary {
            count: n,
            mean,
            variance,
            mean_stderr: (variance / nf).sqrt(),
            variance_stderr: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        }
    }

    /// `mean ± 3 stderr`.
    pub fn mean_ci(&self) -> (f64, f64) {
        (self.mean - 3.0 * self.mean_stderr, self.mean + 3.0 * self.mean_stderr)
    }

    /// `variance ± 3 stderr`.
    pub fn variance_ci(&self) -> (f64, f64) {
        (
            self.variance - 3.0 * self.variance_stderr,
            self.variance + 3.0 * self.variance_stderr,
        )
    }
}

/// Hölder exponent witnessed by a sampled path.
///
/// Fits the log of the largest increment at dyadic lags `1, 2, 4, ...` grid
/// steps against the log of the lag. Returns `None` for fewer than 3 samples
/// or a constant path.
pub fn empirical_holder_exponent(times: &[f64], values: &[Vec<f64>]) -> Option<f64> {
    let n = times.len();
    if n < 3 {
        return None;
    }
    let mut hs = Vec::new();
    let mut incs = Vec::new();
    let mut lag = 1;
    while lag < n {
        let mut worst = 0.0_f64;
        let mut span = 0.0_f64;
        for i in 0..n - lag {
            let d = values[i + lag]
                .iter()
                .zip(&values[i])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(d);
            span = span.max(times[i + lag] - times[i]);
        }
        hs.push(span);
        incs.push(worst);
        lag *= 2;
    }
    log2_log2_slope(&hs, &incs).map(|f| f.slope)
}
