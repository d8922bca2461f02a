//! Additive sewing over dyadic partitions, Young integrals and p-variation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::path::PiecewisePath;
use crate::stats::{self, CompensatedSum, SlopeFit};
use crate::tensor::TruncatedTensor;

/// Options for [`sew`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SewOptions {
    /// Stop once two successive dyadic levels differ by less than this (max norm).
    pub tol: f64,
    pub max_depth: usize,
    /// Richardson extrapolation assuming sums approach the limit like
    /// `2^{-(a-1) n}` for the given `a`.
    pub extrapolate: Option<f64>,
}

impl Default for SewOptions {
    fn default() -> Self {
        SewOptions {
            tol: 1e-9,
            max_depth: 22,
            extrapolate: None,
        }
    }
}

impl SewOptions {
    pub fn with_tol(tol: f64) -> Self {
        SewOptions {
            tol,
            ..Self::default()
        }
    }
}

/// Result of a sewing computation.
#[derive(Clone, Debug, PartialEq)]
pub struct Sewn {
    /// Value at the finest level computed (extrapolated when requested).
    pub value: Vec<f64>,
    /// Coarsest dyadic level that agreed with its refinement to within `tol`.
    pub depth: usize,
    /// Difference between the last two (possibly extrapolated) levels.
    pub last_delta: f64,
    /// Raw differences `|S_n - S_{n-1}|` of the plain dyadic sums, `n = 1, 2, ...`.
    pub deltas: Vec<f64>,
    pub converged: bool,
}

/// Two-parameter functional `mu(s, t)` with defect `|mu_tu + mu_us - mu_ts| <= c0 |t-s|^a`.
pub struct AlmostAdditive<F> {
    eval: F,
    exponent: f64,
    defect_constant: f64,
}

impl<F> AlmostAdditive<F>
where
    F: Fn(f64, f64) -> Vec<f64> + Sync,
{
    pub fn new(eval: F, exponent: f64, defect_constant: f64) -> Result<Self> {
        if !(exponent > 1.0) {
            return Err(Error::InvalidInput(format!("sewing needs exponent a > 1, got {exponent}")));
        }
        if !(defect_constant >= 0.0) {
            return Err(Error::InvalidInput("defect constant must be nonnegative".into()));
        }
        Ok(AlmostAdditive {
            eval,
            exponent,
            defect_constant,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn defect_constant(&self) -> f64 {
        self.defect_constant
    }

    pub fn eval(&self, s: f64, t: f64) -> Vec<f64> {
        (self.eval)(s, t)
    }

    /// `|mu_tu + mu_us - mu_ts|` in the max norm.
    pub fn defect(&self, s: f64, u: f64, t: f64) -> f64 {
        let a = self.eval(s, u);
        let b = self.eval(u, t);
        let c = self.eval(s, t);
        a.iter()
            .zip(&b)
            .zip(&c)
            .fold(0.0_f64, |m, ((x, y), z)| m.max((x + y - z).abs()))
    }

    /// Spot-checks the declared defect bound on random triples in `[s, t]`.
    /// Returns the worst observed ratio `defect / |t-s|^a`.
    pub fn validate(&self, s: f64, t: f64, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let mut v = [rng.random_range(s..t), rng.random_range(s..t), rng.random_range(s..t)];
            v.sort_by(f64::total_cmp);
            if v[2] - v[0] <= 0.0 {
                continue;
            }
            worst = worst.max(self.defect(v[0], v[1], v[2]) / (v[2] - v[0]).powf(self.exponent));
        }
        if worst > self.defect_constant * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::InvalidInput(format!(
                "observed defect ratio {worst:e} exceeds declared constant {:e}",
                self.defect_constant
            )));
        }
        Ok(worst)
    }

    /// Fits the defect exponent from midpoint defects on `[m, m + (t-s) 2^-k-1]`,
    /// `k = 0..levels`, with `m` the midpoint of `[s, t]`.
    pub fn measure_exponent(&self, s: f64, t: f64, levels: usize) -> Option<SlopeFit> {
        let m = 0.5 * (s + t);
        let (h, d): (Vec<f64>, Vec<f64>) = (0..levels)
            .map(|k| {
                let len = 0.5 * (t - s) * 0.5f64.powi(k as i32);
                (len, self.defect(m, m + 0.5 * len, m + len))
            })
            .unzip();
        stats::log2_log2_slope(&h, &d)
    }
}

/// Sum of `mu` over the dyadic partition of `[s, t]` into `2^n` pieces.
fn dyadic_sum<F>(mu: &F, s: f64, t: f64, n: usize) -> Vec<f64>
where
    F: Fn(f64, f64) -> Vec<f64> + Sync,
{
    let pieces = 1usize << n;
    let h = (t - s) / pieces as f64;
    let point = |k: usize| if k == pieces { t } else { s + k as f64 * h };
    const CHUNK: usize = 1024;
    let chunk_sum = |lo: usize, hi: usize| -> Vec<CompensatedSum> {
        let mut acc: Vec<CompensatedSum> = Vec::new();
        for k in lo..hi {
            let v = mu(point(k), point(k + 1));
            if acc.is_empty() {
                acc = vec![CompensatedSum::new(); v.len()];
            }
            for (a, x) in acc.iter_mut().zip(v) {
                a.add(x);
            }
        }
        acc
    };
    let partials: Vec<Vec<CompensatedSum>> = if pieces > CHUNK {
        (0..pieces / CHUNK)
            .into_par_iter()
            .map(|c| chunk_sum(c * CHUNK, (c + 1) * CHUNK))
            .collect()
    } else {
        vec![chunk_sum(0, pieces)]
    };
    let mut total: Vec<CompensatedSum> = Vec::new();
    for part in partials {
        if total.is_empty() {
            total = vec![CompensatedSum::new(); part.len()];
        }
        for (a, p) in total.iter_mut().zip(part) {
            a.add(p.value());
        }
    }
    total.iter().map(|c| c.value()).collect()
}

pub(crate) fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Sews `mu` on `[s, t]`: the limit of its sums over dyadic partitions.
///
/// Refines until two successive levels differ by less than `opts.tol`;
/// errors with [`Error::NotConverged`] (carrying the best value) past
/// `opts.max_depth`.
pub fn sew<F>(mu: &AlmostAdditive<F>, s: f64, t: f64, opts: SewOptions) -> Result<Sewn>
where
    F: Fn(f64, f64) -> Vec<f64> + Sync,
{
    sew_fn(&mu.eval, s, t, opts)
}

pub(crate) fn sew_fn<F>(mu: &F, s: f64, t: f64, opts: SewOptions) -> Result<Sewn>
where
    F: Fn(f64, f64) -> Vec<f64> + Sync,
{
    if !(t > s) {
        return Err(Error::InvalidInput(format!("sewing needs s < t, got [{s}, {t}]")));
    }
    let ratio = opts.extrapolate.map(|a| 2f64.powf(1.0 - a));
    let mut prev_raw = dyadic_sum(mu, s, t, 0);
    let mut prev_est = prev_raw.clone();
    let mut deltas = Vec::new();
    let mut last_delta = f64::INFINITY;
    for n in 1..=opts.max_depth {
        let raw = dyadic_sum(mu, s, t, n);
        deltas.push(max_diff(&raw, &prev_raw));
        let est: Vec<f64> = match ratio {
            Some(r) => raw
                .iter()
                .zip(&prev_raw)
                .map(|(a, b)| a + (a - b) * r / (1.0 - r))
                .collect(),
            None => raw.clone(),
        };
        last_delta = max_diff(&est, &prev_est);
        if last_delta < opts.tol {
            return Ok(Sewn {
                value: est,
                depth: n - 1,
                last_delta,
                deltas,
                converged: true,
            });
        }
        prev_raw = raw;
        prev_est = est;
    }
    Err(Error::NotConverged {
        depth: opts.max_depth,
        last_delta,
        best: prev_est,
    })
}

/// Sews a functional known only at grid indices over `[i0, i1]`.
///
/// Level `k` splits the index range into `2^k` near-equal pieces; the
/// finest level has one grid cell per piece. When no pair of successive
/// levels agrees to `tol` the finest sum is returned with `converged = false`.
pub fn sew_grid<F>(mu: &F, i0: usize, i1: usize, tol: f64) -> Sewn
where
    F: Fn(usize, usize) -> Vec<f64> + Sync,
{
    let m = i1 - i0;
    let level_sum = |k: usize| -> Vec<f64> {
        let pieces = (1usize << k).min(m);
        let split = |j: usize| i0 + (j * m + pieces / 2) / pieces;
        let parts: Vec<Vec<f64>> = (0..pieces)
            .into_par_iter()
            .map(|j| {
                let (a, b) = (split(j), split(j + 1));
                if a == b {
                    Vec::new()
                } else {
                    mu(a, b)
                }
            })
            .collect();
        let len = parts.iter().map(Vec::len).max().unwrap_or(0);
        let mut acc = vec![CompensatedSum::new(); len];
        for p in parts {
            for (a, x) in acc.iter_mut().zip(p) {
                a.add(x);
            }
        }
        acc.iter().map(CompensatedSum::value).collect()
    };
    let mut prev = level_sum(0);
    if m <= 1 {
        return Sewn {
            value: prev,
            depth: 0,
            last_delta: 0.0,
            deltas: Vec::new(),
            converged: true,
        };
    }
    let mut deltas = Vec::new();
    let mut k = 1;
    loop {
        let cur = level_sum(k);
        let d = max_diff(&cur, &prev);
        deltas.push(d);
        let finest = (1usize << k) >= m;
        if d < tol || finest {
            return Sewn {
                value: cur,
                depth: k - 1,
                last_delta: d,
                deltas,
                converged: d < tol,
            };
        }
        prev = cur;
        k += 1;
    }
}

/// Running sums `I_0 = 0, I_{i+1} = I_i + mu(i, i+1)` over grid cells.
pub fn grid_cumulative<F>(cells: usize, width: usize, mu: F) -> Vec<Vec<f64>>
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    let per_cell: Vec<Vec<f64>> = (0..cells).into_par_iter().map(&mu).collect();
    let mut acc = vec![CompensatedSum::new(); width];
    let mut out = Vec::with_capacity(cells + 1);
    out.push(vec![0.0; width]);
    for v in per_cell {
        for (a, x) in acc.iter_mut().zip(v) {
            a.add(x);
        }
        out.push(acc.iter().map(CompensatedSum::value).collect());
    }
    out
}

/// Multiplicative sewing: the limit of ordered products `mu(t0,t1) mu(t1,t2) ...`
/// over dyadic partitions of `[s, t]`, earlier factors on the left.
pub fn sew_multiplicative<F>(mu: &F, s: f64, t: f64, tol: f64, max_depth: usize) -> Result<(TruncatedTensor, usize, f64)>
where
    F: Fn(f64, f64) -> TruncatedTensor,
{
    let product = |n: usize| -> TruncatedTensor {
        let pieces = 1usize << n;
        let h = (t - s) / pieces as f64;
        let point = |k: usize| if k == pieces { t } else { s + k as f64 * h };
        let mut acc = mu(point(0), point(1));
        let mut buf = acc.clone();
        for k in 1..pieces {
            acc.mul_into(&mu(point(k), point(k + 1)), &mut buf);
            std::mem::swap(&mut acc, &mut buf);
        }
        acc
    };
    let mut prev = product(0);
    let mut last = f64::INFINITY;
    for n in 1..=max_depth {
        let cur = product(n);
        last = cur.max_abs_diff(&prev)?;
        if last < tol {
            return Ok((cur, n - 1, last));
        }
        prev = cur;
    }
    Err(Error::NotConverged {
        depth: max_depth,
        last_delta: last,
        best: prev.coeffs().to_vec(),
    })
}

/// Young integral `int_s^t x_u dy_u` for closures, with `x` taking values in
/// `L(R^v, R^e)` stored row-major as `e * v` numbers and `y` in `R^v`.
pub fn young_integral_fn<X, Y>(x: X, y: Y, e: usize, s: f64, t: f64, opts: SewOptions) -> Result<Sewn>
where
    X: Fn(f64) -> Vec<f64> + Sync,
    Y: Fn(f64) -> Vec<f64> + Sync,
{
    let mu = |a: f64, b: f64| {
        let xa = x(a);
        let ya = y(a);
        let yb = y(b);
        let v = ya.len();
        (0..e)
            .map(|r| (0..v).map(|c| xa[r * v + c] * (yb[c] - ya[c])).sum())
            .collect()
    };
    sew_fn(&mu, s, t, opts)
}

/// Young integral `int_s^t x_u (x) dy_u` of two vector-valued closures,
/// returned row-major as a `dim(x) x dim(y)` block.
pub fn young_outer_fn<X, Y>(x: X, y: Y, s: f64, t: f64, opts: SewOptions) -> Result<Sewn>
where
    X: Fn(f64) -> Vec<f64> + Sync,
    Y: Fn(f64) -> Vec<f64> + Sync,
{
    let mu = |a: f64, b: f64| {
        let xa = x(a);
        let ya = y(a);
        let yb = y(b);
        let dy: Vec<f64> = yb.iter().zip(&ya).map(|(p, q)| p - q).collect();
        xa.iter().flat_map(|xi| dy.iter().map(move |d| xi * d)).collect()
    };
    sew_fn(&mu, s, t, opts)
}

/// Young integral of sampled paths (piecewise-linear interpolation).
///
/// `x` carries `e * v` components (a row-major `e x v` matrix) where `v` is
/// the dimension of `y`. Warns when the witnessed Hölder exponents do not
/// add up to more than 1.
pub fn young_integral(x: &PiecewisePath, y: &PiecewisePath, s: f64, t: f64, opts: SewOptions) -> Result<Sewn> {
    let v = y.dim();
    if x.dim() % v != 0 {
        return Err(Error::DimensionMismatch {
            expected: v,
            found: x.dim(),
        });
    }
    let e = x.dim() / v;
    if let (Some(a), Some(b)) = (
        stats::empirical_holder_exponent(x.times(), x.values()),
        stats::empirical_holder_exponent(y.times(), y.values()),
    ) {
        if a + b <= 1.0 {
            log::warn!("Young integral: witnessed Hölder exponents {a:.3} + {b:.3} do not exceed 1");
        }
    }
    young_integral_fn(|u| x.value_at(u), |u| y.value_at(u), e, s, t, opts)
}

/// A nonnegative two-parameter map, superadditive and zero on the diagonal.
#[derive(Clone)]
pub struct Control {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl Control {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Control { eval: Arc::new(f) }
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        (self.eval)(s, t)
    }

    /// Largest `omega_us + omega_tu - omega_ts` over the given `s <= u <= t` triples
    /// (nonpositive for a superadditive map).
    pub fn superadditivity_violation(&self, triples: &[(f64, f64, f64)]) -> f64 {
        triples
            .iter()
            .map(|&(s, u, t)| self.eval(s, u) + self.eval(u, t) - self.eval(s, t))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl std::fmt::Debug for Control {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Control")
    }
}

/// The control `omega(s, t) = sup sum |x_{t_{k+1}} - x_{t_k}|^p` over
/// sub-partitions of the grid inside `[s, t]`, tabulated by dynamic programming.
pub fn p_variation(path: &PiecewisePath, p: f64) -> Result<Control> {
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("p-variation needs p >= 1, got {p}")));
    }
    let n = path.len();
    let vals = path.values().to_vec();
    let dist = |a: usize, b: usize| -> f64 {
        vals[a]
            .iter()
            .zip(&vals[b])
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
            .powf(p)
    };
    let table: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = vec![0.0; n - i];
            for j in i + 1..n {
                let mut b = 0.0_f64;
                for k in i..j {
                    b = b.max(best[k - i] + dist(k, j));
                }
                best[j - i] = b;
            }
            best
        })
        .collect();
    let times = path.times().to_vec();
    Ok(Control::new(move |s, t| {
        let a = times.partition_point(|&x| x < s - 1e-12 * (1.0 + s.abs()));
        let b = times.partition_point(|&x| x <= t + 1e-12 * (1.0 + t.abs()));
        if b == 0 || a >= b - 1 {
            return 0.0;
        }
        table[a][b - 1 - a]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn young_model(s: f64, t: f64) -> Vec<f64> {
        vec![s * (t * t - s * s)]
    }

    #[test]
    fn additive_functional_converges_at_depth_zero() {
        let mu = AlmostAdditive::new(|s: f64, t: f64| vec![t.sin() - s.sin(), t * t - s * s], 2.0, 0.0).unwrap();
        let r = sew(&mu, 0.0, 1.0, SewOptions::default()).unwrap();
        assert_eq!(r.depth, 0);
        assert!(r.converged);
        assert!((r.value[0] - 1f64.sin()).abs() < 1e-15);
        assert!((r.value[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn t_dt_squared() {
        let mu = AlmostAdditive::new(young_model, 2.0, 1.0).unwrap();
        let plain = sew(&mu, 0.0, 1.0, SewOptions { tol: 5e-7, ..Default::default() }).unwrap();
        assert!((plain.value[0] - 2.0 / 3.0).abs() < 1e-6, "{}", plain.value[0]);
        let rich = sew(
            &mu,
            0.0,
            1.0,
            SewOptions {
                extrapolate: Some(2.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert!((rich.value[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!(rich.depth < plain.depth);
    }

    #[test]
    fn deltas_decay_at_rate_a_minus_one() {
        let mu = AlmostAdditive::new(young_model, 2.0, 1.0).unwrap();
        let a = mu.measure_exponent(0.0, 1.0, 10).unwrap().slope;
        assert!((a - 2.0).abs() < 0.1, "measured exponent {a}");
        let r = sew(&mu, 0.0, 1.0, SewOptions { tol: 1e-5, ..Default::default() }).unwrap();
        let depths: Vec<usize> = (1..=r.deltas.len()).collect();
        let slope = stats::depth_slope(&depths, &r.deltas).unwrap().slope;
        assert!((slope + (a - 1.0)).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn non_convergence_reports_best_value() {
        // a Brownian-like functional that never settles at this tolerance
        let mu = AlmostAdditive::new(|s: f64, t: f64| vec![(t - s).sqrt()], 1.5, 1.0).unwrap();
        let err = sew(&mu, 0.0, 1.0, SewOptions { tol: 1e-9, max_depth: 6, extrapolate: None }).unwrap_err();
        match err {
            Error::NotConverged { depth, last_delta, best } => {
                assert_eq!(depth, 6);
                assert!(last_delta > 1e-9);
                assert_eq!(best.len(), 1);
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(AlmostAdditive::new(young_model, 1.0, 1.0).is_err());
    }

    #[test]
    fn validation_catches_understated_constant() {
        let ok = AlmostAdditive::new(young_model, 2.0, 2.0).unwrap();
        assert!(ok.validate(0.0, 1.0, 200, 7).unwrap() <= 2.0);
        let bad = AlmostAdditive::new(young_model, 2.0, 1e-3).unwrap();
        assert!(bad.validate(0.0, 1.0, 200, 7).is_err());
    }

    #[test]
    fn young_integral_examples() {
        let opts = SewOptions {
            extrapolate: Some(2.0),
            ..Default::default()
        };
        let one = young_integral_fn(|_| vec![1.0], |t: f64| vec![t.exp()], 1, 0.0, 1.0, opts).unwrap();
        assert!((one.value[0] - (1f64.exp() - 1.0)).abs() < 1e-12);

        let r = young_integral_fn(|t| vec![t], |t| vec![t * t], 1, 0.0, 1.0, opts).unwrap();
        assert!((r.value[0] - 2.0 / 3.0).abs() < 1e-6);

        let r = young_integral_fn(|t: f64| vec![t.sin()], |t: f64| vec![t.cos()], 1, 0.0, 1.0, opts).unwrap();
        let exact = -(0.5 - 2f64.sin() / 4.0);
        assert!((r.value[0] - exact).abs() < 1e-6);
    }

    #[test]
    fn young_integral_of_sampled_paths() {
        let x = PiecewisePath::uniform(0.0, 1.0, 4096, |t| vec![t]).unwrap();
        let y = PiecewisePath::uniform(0.0, 1.0, 4096, |t| vec![t * t]).unwrap();
        let r = young_integral(&x, &y, 0.0, 1.0, SewOptions { extrapolate: Some(2.0), ..Default::default() }).unwrap();
        assert!((r.value[0] - 2.0 / 3.0).abs() < 1e-6);
        // matrix-valued integrand: x in L(R^2, R^1)
        let xm = PiecewisePath::uniform(0.0, 1.0, 64, |t| vec![1.0, t]).unwrap();
        let ym = PiecewisePath::uniform(0.0, 1.0, 64, |t| vec![t, t]).unwrap();
        let r = young_integral(&xm, &ym, 0.0, 1.0, SewOptions { extrapolate: Some(2.0), ..Default::default() }).unwrap();
        assert!((r.value[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn young_bilinearity_and_integration_by_parts() {
        let opts = SewOptions {
            extrapolate: Some(2.0),
            ..Default::default()
        };
        let f = |t: f64| vec![(2.0 * t).sin()];
        let g = |t: f64| vec![t.exp() - t];
        let xy = young_integral_fn(f, g, 1, 0.0, 1.0, opts).unwrap().value[0];
        let yx = young_integral_fn(g, f, 1, 0.0, 1.0, opts).unwrap().value[0];
        let boundary = f(1.0)[0] * g(1.0)[0] - f(0.0)[0] * g(0.0)[0];
        assert!((xy + yx - boundary).abs() < 1e-8);

        let h = |t: f64| vec![t * t * t];
        let sum = |t: f64| vec![f(t)[0] + 2.0 * h(t)[0]];
        let lhs = young_integral_fn(sum, g, 1, 0.0, 1.0, opts).unwrap().value[0];
        let rhs = xy + 2.0 * young_integral_fn(h, g, 1, 0.0, 1.0, opts).unwrap().value[0];
        assert!((lhs - rhs).abs() < 1e-8);
    }

    #[test]
    fn sew_additivity_over_adjacent_intervals() {
        let opts = SewOptions::default();
        let mu = AlmostAdditive::new(|s: f64, t: f64| vec![s.cos() * (t.sin() - s.sin())], 2.0, 1.0).unwrap();
        let opts_r = SewOptions {
            extrapolate: Some(2.0),
            ..opts
        };
        let a = sew(&mu, 0.0, 0.5, opts_r).unwrap().value[0];
        let b = sew(&mu, 0.5, 1.0, opts_r).unwrap().value[0];
        let c = sew(&mu, 0.0, 1.0, opts_r).unwrap().value[0];
        assert!((a + b - c).abs() < 2.0 * opts.tol);
    }

    #[test]
    fn grid_sewing_stops_at_cells() {
        let x: Vec<f64> = (0..=16).map(|i| (i as f64 * 0.3).sin()).collect();
        let exact = |a: usize, b: usize| vec![x[b] - x[a]];
        let r = sew_grid(&exact, 0, 16, 1e-12);
        assert!(r.converged && r.depth == 0);
        // left-point Riemann functional: finest level is the cell sum
        let riemann = |a: usize, b: usize| vec![x[a] * (x[b] - x[a])];
        let r = sew_grid(&riemann, 0, 16, 1e-14);
        let cell_sum: f64 = (0..16).map(|i| x[i] * (x[i + 1] - x[i])).sum();
        assert!((r.value[0] - cell_sum).abs() < 1e-14);
        assert_eq!(r.deltas.len(), 4);
        let cum = grid_cumulative(16, 1, |i| riemann(i, i + 1));
        assert!((cum[16][0] - cell_sum).abs() < 1e-14);
    }

    #[test]
    fn p_variation_examples() {
        let mono = PiecewisePath::uniform(0.0, 1.0, 20, |t| vec![t * t]).unwrap();
        let w = p_variation(&mono, 1.0).unwrap();
        assert!((w.eval(0.0, 1.0) - 1.0).abs() < 1e-12);
        assert!((w.eval(0.25, 0.5) - (0.25 - 0.0625)).abs() < 1e-12);
        assert_eq!(w.eval(0.5, 0.5), 0.0);

        let zig = PiecewisePath::new(vec![0.0, 1.0, 2.0], vec![vec![0.0], vec![1.5], vec![0.0]]).unwrap();
        assert!((p_variation(&zig, 1.0).unwrap().eval(0.0, 2.0) - 3.0).abs() < 1e-12);
        // p = 2 prefers the single largest increment over splitting
        let line = PiecewisePath::uniform(0.0, 1.0, 4, |t| vec![t]).unwrap();
        assert!((p_variation(&line, 2.0).unwrap().eval(0.0, 1.0) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn p_variation_is_superadditive(
            vals in prop::collection::vec(-1.0f64..1.0, 12),
            p in 1.0f64..3.0,
            cuts in prop::collection::vec((0usize..12, 0usize..12, 0usize..12), 10)
        ) {
            let times: Vec<f64> = (0..12).map(|i| i as f64).collect();
            let path = PiecewisePath::new(times, vals.iter().map(|v| vec![*v]).collect()).unwrap();
            let w = p_variation(&path, p).unwrap();
            let triples: Vec<(f64, f64, f64)> = cuts
                .iter()
                .map(|&(a, b, c)| {
                    let mut v = [a, b, c];
                    v.sort();
                    (v[0] as f64, v[1] as f64, v[2] as f64)
                })
                .collect();
            prop_assert!(w.superadditivity_violation(&triples) <= 1e-12);
        }
    }
}
