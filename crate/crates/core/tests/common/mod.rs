//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// `n x n` row-major product.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    c
}

pub fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor core.
pub fn expm(a: &[f64], n: usize) -> Vec<f64> {
    let norm = (0..n).map(|i| (0..n).map(|j| a[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled: Vec<f64> = a.iter().map(|v| v / 2f64.powi(squarings)).collect();
    let mut result: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect();
    let mut term = result.clone();
    for k in 1..=18 {
        term = matmul(&term, &scaled, n).iter().map(|v| v / k as f64).collect();
        result.iter_mut().zip(&term).for_each(|(r, t)| *r += t);
    }
    for _ in 0..squarings {
        result = matmul(&result, &result, n);
    }
    result
}

/// Commutator `BA - AB` of the linear fields `Ax`, `Bx` (their vector-field bracket).
pub fn field_bracket(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let ba = matmul(b, a, n);
    let ab = matmul(a, b, n);
    ba.iter().zip(&ab).map(|(x, y)| x - y).collect()
}

/// Polynomial `sum c_k t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn deriv(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    /// Antiderivative vanishing at `s`.
    pub fn integral_from(&self, s: f64) -> Poly {
        let mut c = vec![0.0];
        c.extend(self.0.iter().enumerate().map(|(k, v)| v / (k + 1) as f64));
        let mut p = Poly(c);
        let at_s = p.eval(s);
        p.0[0] -= at_s;
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(vec![]);
        }
        let mut c = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly(c)
    }
}

/// Iterated integral `int_{s<u_1<...<u_k<t} dx^{i_1}_{u_1} ... dx^{i_k}_{u_k}`
/// of a polynomial path, by exact nested antiderivatives.
pub fn iterated_integral(path: &[Poly], word: &[usize], s: f64, t: f64) -> f64 {
    let mut inner = Poly(vec![1.0]);
    for &i in word {
        inner = inner.mul(&path[i].deriv()).integral_from(s);
    }
    inner.eval(t)
}

/// Fractional Brownian motion with Hurst index `h` at `n + 1` equispaced
/// points of `[0, horizon]` (Davies–Harte circulant embedding).
pub fn fbm(n: usize, h: f64, horizon: f64, seed: u64) -> Vec<f64> {
    let gamma = |k: f64| 0.5 * ((k + 1.0).abs().powf(2.0 * h) - 2.0 * k.abs().powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h));
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|k| {
            let j = if k <= n { k } else { m - k };
            Complex::new(gamma(j as f64), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<Complex<f64>> = row
        .iter()
        .enumerate()
        .map(|(k, lam)| {
            let lam = lam.re.max(0.0);
            let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            let z = if k == 0 || k == n {
                Complex::new(a, 0.0)
            } else {
                Complex::new(a, b) / 2f64.sqrt()
            };
            z * (lam / m as f64).sqrt()
        })
        .collect();
    // Hermitian symmetry so the transform is real
    for k in n + 1..m {
        w[k] = w[m - k].conj();
    }
    fft.process(&mut w);
    let scale = (horizon / n as f64).powf(h);
    let mut out = vec![0.0; n + 1];
    for k in 0..n {
        out[k + 1] = out[k] + w[k].re * scale;
    }
    out
}

/// Number of times a sequence goes up.
pub fn inversions(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[1] > w[0]).count()
}
