//! Turning C¹-approximate flows into flows by dyadic composition.
//!
//! A generator supplies maps `mu_ts` near the identity whose composition
//! defect `|mu_tu(mu_us(x)) - mu_ts(x)|` is `O(|t-s|^a)` with `a > 1`. The
//! flow `phi_ts` is the limit of compositions over dyadic partitions of
//! `[s, t]`. Flows are evaluated pointwise; nothing is tabulated over `(s, t)`.
//!
//! Large intervals may need more depth than `max_depth` allows. Splitting
//! `[s, t]` at grid points and chaining the pieces is exact by the flow
//! property.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::PiecewisePath;
use crate::sewing::max_diff;
use crate::stats::{self, SlopeFit};

/// Supplier of the local maps `mu_ts` of a C¹-approximate flow on `R^d`.
///
/// Implementations must be pure: equal inputs give equal outputs.
pub trait ApproxFlow: Sync {
    fn dim(&self) -> usize;

    /// `mu_ts(x)`.
    fn apply(&self, s: f64, t: f64, x: &[f64]) -> Vec<f64>;

    /// The defect exponent `a > 1`.
    fn exponent(&self) -> f64;

    /// Declared bound `c1` on the defect; `None` when unknown.
    fn defect_constant(&self) -> Option<f64> {
        None
    }

    /// Jacobian of `mu_ts` at `x`, `d x d` row-major, when available.
    fn jacobian(&self, _s: f64, _t: f64, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

impl<G: ApproxFlow + ?Sized> ApproxFlow for &G {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, s: f64, t: f64, x: &[f64]) -> Vec<f64> {
        (**self).apply(s, t, x)
    }
    fn exponent(&self) -> f64 {
        (**self).exponent()
    }
    fn defect_constant(&self) -> Option<f64> {
        (**self).defect_constant()
    }
    fn jacobian(&self, s: f64, t: f64, x: &[f64]) -> Option<Vec<f64>> {
        (**self).jacobian(s, t, x)
    }
}

/// A generator given by a closure.
pub struct FnFlow<F> {
    dim: usize,
    exponent: f64,
    defect_constant: Option<f64>,
    map: F,
}

impl<F> FnFlow<F>
where
    F: Fn(f64, f64, &[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, exponent: f64, map: F) -> Result<Self> {
        if !(exponent > 1.0) {
            return Err(Error::InvalidInput(format!("flow exponent must exceed 1, got {exponent}")));
        }
        if dim == 0 {
            return Err(Error::InvalidInput("flow dimension must be positive".into()));
        }
        Ok(FnFlow {
            dim,
            exponent,
            defect_constant: None,
            map,
        })
    }

    pub fn with_defect_constant(mut self, c1: f64) -> Self {
        self.defect_constant = Some(c1);
        self
    }
}

impl<F> ApproxFlow for FnFlow<F>
where
    F: Fn(f64, f64, &[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, s: f64, t: f64, x: &[f64]) -> Vec<f64> {
        (self.map)(s, t, x)
    }
    fn exponent(&self) -> f64 {
        self.exponent
    }
    fn defect_constant(&self) -> Option<f64> {
        self.defect_constant
    }
}

/// The generator `u -> s + t - u` applied to `inner`: `mu'_ab = mu_{s+t-a, s+t-b}`.
///
/// Valid for generators that accept reversed time arguments, such as those
/// built from rough path increments `X_ab` with `a > b`.
pub struct TimeReversed<G> {
    inner: G,
    s: f64,
    t: f64,
}

impl<G: ApproxFlow> TimeReversed<G> {
    pub fn new(inner: G, s: f64, t: f64) -> Self {
        TimeReversed { inner, s, t }
    }
}

impl<G: ApproxFlow> ApproxFlow for TimeReversed<G> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, a: f64, b: f64, x: &[f64]) -> Vec<f64> {
        let m = self.s + self.t;
        self.inner.apply(m - a, m - b, x)
    }
    fn exponent(&self) -> f64 {
        self.inner.exponent()
    }
    fn defect_constant(&self) -> Option<f64> {
        self.inner.defect_constant()
    }
}

/// Largest observed `|mu_tu(mu_us(x)) - mu_ts(x)| / |t-s|^a` over random
/// triples in `[s, t]` and the given points. Errors if `mu_uu` moves a point
/// by more than `1e-12`, or if the ratio exceeds the declared constant.
pub fn validate_generator<G: ApproxFlow>(mu: &G, s: f64, t: f64, points: &[Vec<f64>], samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = mu.exponent();
    let mut worst = 0.0_f64;
    for x in points {
        let u = rng.random_range(s..=t);
        let still = max_diff(&mu.apply(u, u, x), x);
        if still > 1e-12 {
            return Err(Error::InvalidInput(format!("mu_uu is not the identity at u = {u} (moved {still:e})")));
        }
        for _ in 0..samples {
            let mut v = [rng.random_range(s..=t), rng.random_range(s..=t), rng.random_range(s..=t)];
            v.sort_by(f64::total_cmp);
            if v[2] - v[0] <= 0.0 {
                continue;
            }
            let two = mu.apply(v[1], v[2], &mu.apply(v[0], v[1], x));
            let one = mu.apply(v[0], v[2], x);
            worst = worst.max(max_diff(&two, &one) / (v[2] - v[0]).powf(a));
        }
    }
    if let Some(c1) = mu.defect_constant() {
        if worst > c1 {
            return Err(Error::InvalidInput(format!(
                "observed defect ratio {worst:e} exceeds declared constant {c1:e}"
            )));
        }
    }
    Ok(worst)
}

/// `mu_{t_n t_{n-1}} o ... o mu_{t_1 t_0}` applied to `x`.
pub fn compose_along_partition<G: ApproxFlow>(mu: &G, partition: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if partition.len() < 2 {
        return Err(Error::InvalidInput("a partition needs at least two points".into()));
    }
    if partition.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("partition must be strictly increasing".into()));
    }
    if x.len() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: x.len(),
        });
    }
    Ok(partition.windows(2).fold(x.to_vec(), |y, w| mu.apply(w[0], w[1], &y)))
}

fn dyadic_compose<G: ApproxFlow>(mu: &G, s: f64, t: f64, x: &[f64], n: usize) -> Vec<f64> {
    let pieces = 1usize << n;
    let h = (t - s) / pieces as f64;
    let point = |k: usize| if k == pieces { t } else { s + k as f64 * h };
    (0..pieces).fold(x.to_vec(), |y, k| mu.apply(point(k), point(k + 1), &y))
}

/// Options for [`flow_eval`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    /// Stop once two successive dyadic depths differ by less than this (max norm).
    pub tol: f64,
    pub max_depth: usize,
    /// Depth at which comparisons start; depths below it are skipped.
    pub min_depth: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: 1e-9,
            max_depth: 20,
            min_depth: 0,
        }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        FlowOptions {
            tol,
            ..Self::default()
        }
    }
}

/// A pointwise flow value with its convergence record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowEvaluation {
    /// Composition at the finest depth computed.
    pub value: Vec<f64>,
    /// Coarsest depth that agreed with its refinement to within `tol`.
    pub depth: usize,
    /// Sup change at the final refinement.
    pub last_delta: f64,
    pub converged: bool,
    /// Sup changes between successive depths, starting at `min_depth + 1`.
    pub deltas: Vec<f64>,
}

/// Evaluates `phi_ts(x)` by refining dyadic partitions of `[s, t]` until the
/// composed value changes by less than `opts.tol`.
///
/// Past `opts.max_depth` the finest value is returned with `converged = false`.
pub fn flow_eval<G: ApproxFlow>(mu: &G, s: f64, t: f64, x: &[f64], opts: FlowOptions) -> Result<FlowEvaluation> {
    if x.len() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: x.len(),
        });
    }
    if !(t >= s) {
        return Err(Error::InvalidInput(format!("flow interval reversed: [{s}, {t}]")));
    }
    if t == s {
        return Ok(FlowEvaluation {
            value: x.to_vec(),
            depth: 0,
            last_delta: 0.0,
            converged: true,
            deltas: Vec::new(),
        });
    }
    let min = opts.min_depth.min(opts.max_depth);
    let mut prev = dyadic_compose(mu, s, t, x, min);
    let mut deltas = Vec::new();
    let mut last_delta = f64::INFINITY;
    for n in min + 1..=opts.max_depth {
        let cur = dyadic_compose(mu, s, t, x, n);
        last_delta = max_diff(&cur, &prev);
        deltas.push(last_delta);
        if !cur.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp {
                time: t,
                norm: f64::INFINITY,
            });
        }
        if last_delta < opts.tol {
            return Ok(FlowEvaluation {
                value: cur,
                depth: n - 1,
                last_delta,
                converged: true,
                deltas,
            });
        }
        prev = cur;
    }
    log::debug!("flow on [{s}, {t}] not converged at depth {}: delta {last_delta:e}", opts.max_depth);
    Ok(FlowEvaluation {
        value: prev,
        depth: opts.max_depth,
        last_delta,
        converged: false,
        deltas,
    })
}

/// [`flow_eval`] at many starting points in parallel.
pub fn flow_eval_many<G: ApproxFlow>(
    mu: &G,
    s: f64,
    t: f64,
    xs: &[Vec<f64>],
    opts: FlowOptions,
) -> Result<Vec<FlowEvaluation>> {
    xs.par_iter().map(|x| flow_eval(mu, s, t, x, opts)).collect()
}

/// Evaluates the inverse flow `phi_ts^{-1}(x)` from the generator of the
/// time-reversed dynamics (see [`TimeReversed`]).
pub fn inverse_flow_eval<G: ApproxFlow>(
    mu_reversed: &G,
    s: f64,
    t: f64,
    x: &[f64],
    opts: FlowOptions,
) -> Result<FlowEvaluation> {
    flow_eval(mu_reversed, s, t, x, opts)
}

/// One row of a [`convergence_table`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub depth: usize,
    pub value: Vec<f64>,
    /// Sup change from the previous row; `None` on the first row.
    pub delta: Option<f64>,
}

/// Dyadic compositions at each requested depth with successive sup changes.
pub fn convergence_table<G: ApproxFlow>(mu: &G, s: f64, t: f64, x: &[f64], depths: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if x.len() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: x.len(),
        });
    }
    if !(t > s) {
        return Err(Error::InvalidInput(format!("flow interval must have t > s, got [{s}, {t}]")));
    }
    let values: Vec<Vec<f64>> = depths.par_iter().map(|&n| dyadic_compose(mu, s, t, x, n)).collect();
    Ok(values
        .iter()
        .enumerate()
        .map(|(k, v)| ConvergenceRow {
            depth: depths[k],
            value: v.clone(),
            delta: (k > 0).then(|| max_diff(v, &values[k - 1])),
        })
        .collect())
}

/// Fits `log2(delta)` against depth; the slope estimates `-(a-1)`.
pub fn table_slope(rows: &[ConvergenceRow]) -> Option<SlopeFit> {
    let (depths, deltas): (Vec<usize>, Vec<f64>) = rows.iter().filter_map(|r| r.delta.map(|d| (r.depth, d))).unzip();
    stats::depth_slope(&depths, &deltas)
}

/// Generator `Phi -> (Id + A^1_ts)(Id + A^2_ts)...Phi` on `m x m` matrices.
struct ProductGenerator<'a> {
    factors: &'a [&'a PiecewisePath],
    m: usize,
    exponent: f64,
}

impl ApproxFlow for ProductGenerator<'_> {
    fn dim(&self) -> usize {
        self.m * self.m
    }

    fn apply(&self, s: f64, t: f64, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut state = x.to_vec();
        for a in self.factors.iter().rev() {
            let inc: Vec<f64> = a.value_at(t).iter().zip(a.value_at(s)).map(|(p, q)| p - q).collect();
            let mut next = state.clone();
            for r in 0..m {
                for c in 0..m {
                    next[r * m + c] += (0..m).map(|k| inc[r * m + k] * state[k * m + c]).sum::<f64>();
                }
            }
            state = next;
        }
        state
    }

    fn exponent(&self) -> f64 {
        self.exponent
    }
}

/// Integral product `prod_{s<=r<=t} (Id + dA_r)` for an `L(R^m)`-valued path
/// stored row-major, later times on the left.
pub fn integral_product(a: &PiecewisePath, s: f64, t: f64, opts: FlowOptions) -> Result<FlowEvaluation> {
    integral_product_with(&[a], s, t, opts)
}

/// Integral product of the generator `(Id + A^1_ts)(Id + A^2_ts)...`.
///
/// With two factors this is the Lie-Trotter product `e^{A + B}` for linear
/// `A_t = tM_1, B_t = tM_2`.
pub fn integral_product_with(factors: &[&PiecewisePath], s: f64, t: f64, opts: FlowOptions) -> Result<FlowEvaluation> {
    let first = factors
        .first()
        .ok_or_else(|| Error::InvalidInput("integral product needs at least one path".into()))?;
    let m = (first.dim() as f64).sqrt().round() as usize;
    if m * m != first.dim() {
        return Err(Error::InvalidInput(format!("path dimension {} is not a square", first.dim())));
    }
    let mut exponent = f64::INFINITY;
    for a in factors {
        if a.dim() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                found: a.dim(),
            });
        }
        let h = stats::empirical_holder_exponent(a.times(), a.values()).unwrap_or(1.0).min(1.0);
        if !(h > 0.5) {
            return Err(Error::InvalidInput(format!("integral product needs Hölder exponent > 1/2, observed {h}")));
        }
        exponent = exponent.min(2.0 * h);
    }
    let generator = ProductGenerator { factors, m, exponent };
    let id: Vec<f64> = (0..m * m).map(|k| if k / m == k % m { 1.0 } else { 0.0 }).collect();
    flow_eval(&generator, s, t, &id, opts)
}
