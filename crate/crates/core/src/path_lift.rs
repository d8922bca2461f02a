//! Rough paths on time grids and the constructors that produce them.
//!
//! A [`RoughPathGrid`] stores the signature `X_{t_0 t_i}` at every grid node
//! (absolute, from the first node). Increments are recovered by group
//! division `X_ts = X_s^{-1} X_t`, so Chen's relation `X_ts = X_us X_tu`
//! holds by construction. Between nodes the path is read along the
//! geodesic `X_{t_i} exp(theta log X_{t_i t_{i+1}})`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{self, PiecewisePath};
use crate::sewing::{self, SewOptions};
use crate::stats;
use crate::tensor::{euclid, TruncatedTensor};

/// Group-likeness tolerance behind the weak-geometric flag.
pub const WEAK_GEOMETRIC_TOL: f64 = 1e-8;

/// A rough path sampled on a time grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RoughPathJson", into = "RoughPathJson")]
pub struct RoughPathGrid {
    p: f64,
    times: Vec<f64>,
    start: Vec<f64>,
    sigs: Vec<TruncatedTensor>,
    weak_geometric: bool,
    cell_logs: OnceLock<Vec<TruncatedTensor>>,
}

/// JSON form of a [`RoughPathGrid`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoughPathJson {
    pub p: f64,
    pub times: Vec<f64>,
    pub start: Vec<f64>,
    pub sigs: Vec<TruncatedTensor>,
}

impl From<RoughPathGrid> for RoughPathJson {
    fn from(x: RoughPathGrid) -> Self {
        RoughPathJson {
            p: x.p,
            times: x.times,
            start: x.start,
            sigs: x.sigs,
        }
    }
}

impl TryFrom<RoughPathJson> for RoughPathGrid {
    type Error = Error;

    fn try_from(j: RoughPathJson) -> Result<Self> {
        RoughPathGrid::new(j.p, j.times, j.start, j.sigs)
    }
}

fn check_p(p: f64, level_cap: usize) -> Result<()> {
    if !(1.0..4.0).contains(&p) {
        return Err(Error::InvalidInput(format!("p must lie in [1, 4), got {p}")));
    }
    if (p.floor() as usize) > level_cap {
        return Err(Error::InvalidInput(format!(
            "a {p}-rough path needs level cap at least {}, found {level_cap}",
            p.floor()
        )));
    }
    Ok(())
}

impl RoughPathGrid {
    /// Builds a grid from absolute signatures; `sigs[0]` must be the unit.
    pub fn new(p: f64, times: Vec<f64>, start: Vec<f64>, sigs: Vec<TruncatedTensor>) -> Result<Self> {
        if times.is_empty() || times.len() != sigs.len() {
            return Err(Error::InvalidInput(format!(
                "{} times but {} signatures",
                times.len(),
                sigs.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        let (dim, cap) = (sigs[0].dim(), sigs[0].level_cap());
        check_p(p, cap)?;
        if start.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: start.len(),
            });
        }
        for s in &sigs {
            if s.dim() != dim || s.level_cap() != cap {
                return Err(Error::ShapeMismatch(dim, cap, s.dim(), s.level_cap()));
            }
            if (s.scalar() - 1.0).abs() > 1e-12 {
                return Err(Error::ScalarNotOne(s.scalar()));
            }
        }
        let one = TruncatedTensor::one_unchecked(dim, cap);
        if sigs[0].max_abs_diff(&one)? > 1e-12 {
            return Err(Error::InvalidInput("first signature must be the unit".into()));
        }
        let weak_geometric = sigs.par_iter().all(|s| s.is_group_like(WEAK_GEOMETRIC_TOL));
        Ok(RoughPathGrid {
            p,
            times,
            start,
            sigs,
            weak_geometric,
            cell_logs: OnceLock::new(),
        })
    }

    /// Builds a grid from per-cell increments, multiplied left to right.
    pub fn from_increments(p: f64, times: Vec<f64>, start: Vec<f64>, cells: &[TruncatedTensor]) -> Result<Self> {
        if cells.len() + 1 != times.len() {
            return Err(Error::InvalidInput(format!(
                "{} cells for {} grid points",
                cells.len(),
                times.len()
            )));
        }
        let (dim, cap) = match cells.first() {
            Some(c) => (c.dim(), c.level_cap()),
            None => (start.len(), p.floor().max(1.0) as usize),
        };
        let mut sigs = Vec::with_capacity(times.len());
        sigs.push(TruncatedTensor::one(dim, cap)?);
        for c in cells {
            let next = sigs[sigs.len() - 1].mul(c)?;
            sigs.push(next);
        }
        Self::new(p, times, start, sigs)
    }

    /// Same path with another roughness exponent.
    pub fn with_p(mut self, p: f64) -> Result<Self> {
        check_p(p, self.level_cap())?;
        self.p = p;
        Ok(self)
    }

    /// Same path started from another point.
    pub fn with_start(mut self, start: Vec<f64>) -> Result<Self> {
        if start.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: start.len(),
            });
        }
        self.start = start;
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.sigs[0].dim()
    }

    pub fn level_cap(&self) -> usize {
        self.sigs[0].level_cap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn sigs(&self) -> &[TruncatedTensor] {
        &self.sigs
    }

    /// Signature from the first node to node `i`.
    pub fn sig(&self, i: usize) -> &TruncatedTensor {
        &self.sigs[i]
    }

    /// Whether every stored signature is group-like (tolerance 1e-8).
    pub fn is_weak_geometric(&self) -> bool {
        self.weak_geometric
    }

    /// Path value `x_{t_i}` (start plus level 1).
    pub fn value(&self, i: usize) -> Vec<f64> {
        self.start
            .iter()
            .zip(self.sigs[i].level(1))
            .map(|(a, b)| a + b)
            .collect()
    }

    /// The level-1 path as a sampled path.
    pub fn level1_path(&self) -> PiecewisePath {
        let values = (0..self.len()).map(|i| self.value(i)).collect();
        PiecewisePath::new(self.times.clone(), values).expect("grid already validated")
    }

    /// `X_{t_i t_j} = X_{t_i}^{-1} X_{t_j}`.
    pub fn increment(&self, i: usize, j: usize) -> TruncatedTensor {
        self.sigs[i].inverse_unchecked().mul_unchecked(&self.sigs[j])
    }

    /// `log X_{t_i t_{i+1}}`, cached.
    pub fn cell_log(&self, i: usize) -> &TruncatedTensor {
        &self.cell_logs()[i]
    }

    fn cell_logs(&self) -> &[TruncatedTensor] {
        self.cell_logs.get_or_init(|| {
            (0..self.len().saturating_sub(1))
                .into_par_iter()
                .map(|i| self.increment(i, i + 1).log_unchecked())
                .collect()
        })
    }

    /// Signature from the first node to time `t`, along the cell geodesic.
    pub fn node_at(&self, t: f64) -> TruncatedTensor {
        let (i, theta) = path::locate(&self.times, t);
        if theta == 0.0 {
            return self.sigs[i].clone();
        }
        self.sigs[i].mul_unchecked(&self.cell_log(i).scale(theta).exp_unchecked())
    }

    /// Increment `X_st` between arbitrary times (clamped to the grid range).
    pub fn increment_at(&self, s: f64, t: f64) -> TruncatedTensor {
        if s > t {
            return self.increment_at(t, s).inverse_unchecked();
        }
        let (i, a) = path::locate(&self.times, s);
        let (j, b) = path::locate(&self.times, t);
        if i == j {
            if a == b {
                return TruncatedTensor::one_unchecked(self.dim(), self.level_cap());
            }
            return self.cell_log(i).scale(b - a).exp_unchecked();
        }
        let mut out = self.increment(i, j);
        if a != 0.0 {
            out = self.cell_log(i).scale(-a).exp_unchecked().mul_unchecked(&out);
        }
        if b != 0.0 {
            out = out.mul_unchecked(&self.cell_log(j).scale(b).exp_unchecked());
        }
        out
    }

    /// `max |X_us X_tu - X_ts|` for the node triple `i <= k <= j`.
    pub fn chen_residual_at(&self, i: usize, k: usize, j: usize) -> f64 {
        let lhs = self.increment(i, k).mul_unchecked(&self.increment(k, j));
        lhs.max_abs_diff(&self.increment(i, j)).unwrap_or(f64::INFINITY)
    }

    /// Worst Chen residual over every interior node `u` of `[t_0, t_end]`.
    pub fn chen_residual(&self) -> f64 {
        let n = self.len();
        if n < 3 {
            return 0.0;
        }
        (1..n - 1)
            .into_par_iter()
            .map(|k| self.chen_residual_at(0, k, n - 1))
            .reduce(|| 0.0, f64::max)
    }

    /// Restriction to a subset of nodes (strictly increasing indices); the
    /// result starts at the first selected node.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() || indices.windows(2).any(|w| w[1] <= w[0]) || indices[indices.len() - 1] >= self.len() {
            return Err(Error::InvalidInput("restriction indices must be increasing and in range".into()));
        }
        let i0 = indices[0];
        let inv0 = self.sigs[i0].inverse_unchecked();
        let sigs = indices.iter().map(|&i| inv0.mul_unchecked(&self.sigs[i])).collect();
        let times = indices.iter().map(|&i| self.times[i]).collect();
        Self::new(self.p, times, self.value(i0), sigs)
    }

    /// Restriction to the nodes at the given times (each must be a grid node).
    pub fn restrict_to_times(&self, times: &[f64]) -> Result<Self> {
        let idx = times
            .iter()
            .map(|&t| {
                path::node_index(&self.times, t)
                    .ok_or_else(|| Error::GridMismatch(format!("time {t} is not a grid node")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.restrict(&idx)
    }

    /// Grid Hölder norm `max_{s<t} |X^i_ts| / (t-s)^{i/p}` over all node pairs.
    pub fn holder_norm(&self, level: usize) -> Result<f64> {
        if level == 0 || level > self.level_cap() {
            return Err(Error::LevelOutOfRange {
                level,
                cap: self.level_cap(),
            });
        }
        let expo = level as f64 / self.p;
        let inv: Vec<TruncatedTensor> = self.sigs.par_iter().map(|s| s.inverse_unchecked()).collect();
        let width = self.sigs[0].level(level).len();
        Ok((0..self.len())
            .into_par_iter()
            .map(|i| {
                let mut buf = vec![0.0; width];
                let mut worst = 0.0_f64;
                for j in i + 1..self.len() {
                    inv[i].mul_level_into(&self.sigs[j], level, &mut buf);
                    worst = worst.max(euclid(&buf) / (self.times[j] - self.times[i]).powf(expo));
                }
                worst
            })
            .reduce(|| 0.0, f64::max))
    }

    /// Inhomogeneous distance: starting-point gap plus the largest level-wise
    /// grid Hölder distance, levels `1..=floor(p)`. Needs a common grid.
    pub fn distance(&self, other: &RoughPathGrid) -> Result<f64> {
        path::same_grid(&self.times, &other.times)?;
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if (self.p - other.p).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("p differs: {} vs {}", self.p, other.p)));
        }
        let top = (self.p.floor() as usize).min(self.level_cap()).min(other.level_cap());
        let inv_x: Vec<TruncatedTensor> = self.sigs.par_iter().map(|s| s.inverse_unchecked()).collect();
        let inv_y: Vec<TruncatedTensor> = other.sigs.par_iter().map(|s| s.inverse_unchecked()).collect();
        let mut worst = 0.0_f64;
        for level in 1..=top {
            let expo = level as f64 / self.p;
            let width = self.sigs[0].level(level).len();
            let d = (0..self.len())
                .into_par_iter()
                .map(|i| {
                    let mut bx = vec![0.0; width];
                    let mut by = vec![0.0; width];
                    let mut w = 0.0_f64;
                    for j in i + 1..self.len() {
                        inv_x[i].mul_level_into(&self.sigs[j], level, &mut bx);
                        inv_y[i].mul_level_into(&other.sigs[j], level, &mut by);
                        let diff = bx.iter().zip(&by).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                        w = w.max(diff / (self.times[j] - self.times[i]).powf(expo));
                    }
                    w
                })
                .reduce(|| 0.0, f64::max);
            worst = worst.max(d);
        }
        Ok(euclid(&path::sub(&self.start, &other.start)) + worst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Signature of a straight segment with increment `v`: `exp(v)`.
pub fn segment_signature(v: &[f64], level_cap: usize) -> Result<TruncatedTensor> {
    TruncatedTensor::from_vector(v, level_cap)?.exp()
}

/// Exact signature of the piecewise-linear interpolant, `level_cap` levels,
/// with nominal roughness `p = level_cap + 1/2` (see [`RoughPathGrid::with_p`]).
pub fn signature(path: &PiecewisePath, level_cap: usize) -> Result<RoughPathGrid> {
    let cells = (0..path.len() - 1)
        .into_par_iter()
        .map(|i| segment_signature(&path.increment(i), level_cap))
        .collect::<Result<Vec<_>>>()?;
    RoughPathGrid::from_increments(
        level_cap as f64 + 0.5,
        path.times().to_vec(),
        path.start().to_vec(),
        &cells,
    )
}

/// Sewing options for Young integrals over one grid cell: piecewise-linear
/// data make the extrapolated dyadic sums exact after one refinement.
fn cell_opts(scale: f64) -> SewOptions {
    SewOptions {
        tol: 1e-13 * scale.max(1.0),
        max_depth: 12,
        extrapolate: Some(2.0),
    }
}

/// `int x_{u, t_i} (x) dy_u` over one cell where `x`, `y` move linearly by `a`, `b`.
fn cell_cross_integral(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let scale = euclid(a) * euclid(b);
    let x = |th: f64| a.iter().map(|v| th * v).collect::<Vec<_>>();
    let y = |th: f64| b.iter().map(|v| th * v).collect::<Vec<_>>();
    Ok(sewing::young_outer_fn(x, y, 0.0, 1.0, cell_opts(scale))?.value)
}

/// Level-2 lift of a path of Hölder regularity above 1/2 through Young
/// integrals `int x_{us} (x) dx_u`, sewn cell by cell and chained by Chen.
pub fn young_lift(path: &PiecewisePath, p: f64) -> Result<RoughPathGrid> {
    if let Some(alpha) = stats::empirical_holder_exponent(path.times(), path.values()) {
        if alpha <= 0.5 {
            log::warn!("young_lift: witnessed Hölder exponent {alpha:.3} does not exceed 1/2");
        }
    }
    let d = path.dim();
    let cells = (0..path.len() - 1)
        .into_par_iter()
        .map(|i| {
            let v = path.increment(i);
            let area = cell_cross_integral(&v, &v)?;
            TruncatedTensor::from_levels(d, 2, 1.0, &[v, area])
        })
        .collect::<Result<Vec<_>>>()?;
    RoughPathGrid::from_increments(p, path.times().to_vec(), path.start().to_vec(), &cells)
}

/// The 2-dimensional pure-area rough path on `[0, horizon]`:
/// `X = 0` and `XX_ts = pi (t-s) [[0, 1], [-1, 0]]`, nominal `p = 5/2`.
pub fn pure_area(horizon: f64, steps: usize) -> Result<RoughPathGrid> {
    let times = path::uniform_grid(0.0, horizon, steps)?;
    let sigs = times
        .iter()
        .map(|&t| TruncatedTensor::from_levels(2, 2, 1.0, &[vec![0.0; 2], vec![0.0, PI * t, -PI * t, 0.0]]))
        .collect::<Result<Vec<_>>>()?;
    RoughPathGrid::new(2.5, times, vec![0.0, 0.0], sigs)
}

/// Samples `x^n_t = (cos 2 pi n^2 t, sin 2 pi n^2 t) / n` on `[0, 1]`.
pub fn oscillator_path(n: usize, steps: usize) -> Result<PiecewisePath> {
    if n == 0 {
        return Err(Error::InvalidInput("winding parameter must be at least 1".into()));
    }
    let nf = n as f64;
    let w = 2.0 * PI * nf * nf;
    PiecewisePath::uniform(0.0, 1.0, steps, |t| vec![(w * t).cos() / nf, (w * t).sin() / nf])
}

fn require_level2(x: &RoughPathGrid) -> Result<()> {
    if x.level_cap() != 2 {
        return Err(Error::UnsupportedLevelCap(x.level_cap()));
    }
    Ok(())
}

/// Translation `tau_h X` by a path `h` sampled on the same grid.
///
/// Level 1 becomes `X + h`; level 2 gains `int X (x) dh + int h (x) dX + int h (x) dh`,
/// the middle term defined by parts as `h_ts (x) X_ts - (int X (x) dh)^T`.
pub fn translate(x: &RoughPathGrid, h: &PiecewisePath) -> Result<RoughPathGrid> {
    require_level2(x)?;
    path::same_grid(x.times(), h.times())?;
    let d = x.dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.dim(),
        });
    }
    let cells = (0..x.len() - 1)
        .into_par_iter()
        .map(|i| {
            let xc = x.increment(i, i + 1);
            let a = xc.level(1).to_vec();
            let b = h.increment(i);
            let c = cell_cross_integral(&a, &b)?;
            let hh = cell_cross_integral(&b, &b)?;
            let mut l2 = xc.level(2).to_vec();
            for j in 0..d {
                for k in 0..d {
                    let by_parts = b[j] * a[k] - c[k * d + j];
                    l2[j * d + k] += c[j * d + k] + by_parts + hh[j * d + k];
                }
            }
            let l1: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u + v).collect();
            TruncatedTensor::from_levels(d, 2, 1.0, &[l1, l2])
        })
        .collect::<Result<Vec<_>>>()?;
    let start: Vec<f64> = x.start().iter().zip(h.start()).map(|(a, b)| a + b).collect();
    RoughPathGrid::from_increments(x.p(), x.times().to_vec(), start, &cells)
}

/// Pairing of `X` over `R^l` with a regular path `h` in `R^d` sampled on the
/// same grid: a rough path over `R^{l+d}` with level-2 blocks
/// `[[XX, int X (x) dh], [h (x) X - (int X (x) dh)^T, int h (x) dh]]`.
pub fn pair_with_smooth(x: &RoughPathGrid, h: &PiecewisePath) -> Result<RoughPathGrid> {
    require_level2(x)?;
    path::same_grid(x.times(), h.times())?;
    if let Some(beta) = stats::empirical_holder_exponent(h.times(), h.values()) {
        if beta <= 1.0 - 1.0 / x.p() {
            log::warn!("pair_with_smooth: witnessed Hölder exponent {beta:.3} of h is not above 1 - 1/p");
        }
    }
    let l = x.dim();
    let d = h.dim();
    let n = l + d;
    let cells = (0..x.len() - 1)
        .into_par_iter()
        .map(|i| {
            let xc = x.increment(i, i + 1);
            let a = xc.level(1);
            let b = h.increment(i);
            let c = cell_cross_integral(a, &b)?;
            let hh = cell_cross_integral(&b, &b)?;
            let mut l1 = a.to_vec();
            l1.extend_from_slice(&b);
            let mut l2 = vec![0.0; n * n];
            for j in 0..l {
                for k in 0..l {
                    l2[j * n + k] = xc.level(2)[j * l + k];
                }
                for k in 0..d {
                    l2[j * n + l + k] = c[j * d + k];
                    l2[(l + k) * n + j] = b[k] * a[j] - c[j * d + k];
                }
            }
            for j in 0..d {
                for k in 0..d {
                    l2[(l + j) * n + l + k] = hh[j * d + k];
                }
            }
            TruncatedTensor::from_levels(n, 2, 1.0, &[l1, l2])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut start = x.start().to_vec();
    start.extend_from_slice(h.start());
    RoughPathGrid::from_increments(x.p(), x.times().to_vec(), start, &cells)
}

/// Options for the level-3 extension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyonsOptions {
    pub tol: f64,
    pub max_depth: usize,
}

impl Default for LyonsOptions {
    fn default() -> Self {
        LyonsOptions {
            tol: 1e-9,
            max_depth: 20,
        }
    }
}

/// Truncated increment `(1, X^1, X^2, 0)` in level cap 3.
fn seed_level3(x2: &TruncatedTensor) -> TruncatedTensor {
    let mut y = x2.extend_to(3).expect("level cap 3 is supported");
    y.level_mut(3).iter_mut().for_each(|c| *c = 0.0);
    y
}

/// Level-3 increment over `[s, t]` by multiplicative sewing of the
/// almost-multiplicative map `(1, X^1, X^2, 0)` over dyadic partitions.
pub fn extend_increment(x: &RoughPathGrid, s: f64, t: f64, opts: LyonsOptions) -> Result<TruncatedTensor> {
    require_level2(x)?;
    let mu = |a: f64, b: f64| seed_level3(&x.increment_at(a, b));
    Ok(sewing::sew_multiplicative(&mu, s, t, opts.tol, opts.max_depth)?.0)
}

/// Lyons extension of a level-2 rough path (`2 <= p < 3`) to level 3.
///
/// Each grid cell is sewn multiplicatively along its geodesic sub-cells
/// until successive dyadic levels differ by less than its share of
/// `opts.tol` (proportional to the cell length); cells are then chained by Chen.
pub fn lyons_extend_level3(x: &RoughPathGrid, opts: LyonsOptions) -> Result<RoughPathGrid> {
    require_level2(x)?;
    if !(2.0..3.0).contains(&x.p()) {
        return Err(Error::InvalidInput(format!("level-3 extension needs 2 <= p < 3, got {}", x.p())));
    }
    let times = x.times();
    let span = times[times.len() - 1] - times[0];
    let cells = (0..x.len() - 1)
        .into_par_iter()
        .map(|i| {
            let lam = x.cell_log(i);
            let mu = |a: f64, b: f64| seed_level3(&lam.scale(b - a).exp_unchecked());
            let tol = opts.tol * (times[i + 1] - times[i]) / span;
            sewing::sew_multiplicative(&mu, 0.0, 1.0, tol, opts.max_depth).map(|r| r.0)
        })
        .collect::<Result<Vec<_>>>()?;
    RoughPathGrid::from_increments(x.p(), x.times().to_vec(), x.start().to_vec(), &cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trig_path(steps: usize) -> PiecewisePath {
        PiecewisePath::uniform(0.0, 1.0, steps, |t| vec![(3.0 * t).sin(), (2.0 * t).cos() + t * t, t]).unwrap()
    }

    fn area(x: &TruncatedTensor) -> f64 {
        0.5 * (x.level(2)[1] - x.level(2)[2])
    }

    #[test]
    fn segment_signature_examples() {
        assert_eq!(segment_signature(&[0.0, 0.0], 2).unwrap(), TruncatedTensor::one(2, 2).unwrap());
        let s = segment_signature(&[1.0, 0.0], 2).unwrap();
        assert_eq!(s.level(2), &[0.5, 0.0, 0.0, 0.0]);
        let back = s.mul(&segment_signature(&[-1.0, 0.0], 2).unwrap()).unwrap();
        assert!(back.max_abs_diff(&TruncatedTensor::one(2, 2).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn signature_examples() {
        let v = [0.7, -1.3];
        let line = PiecewisePath::uniform(0.0, 1.0, 10, |t| vec![v[0] * t, v[1] * t]).unwrap();
        let x = signature(&line, 3).unwrap();
        let e = segment_signature(&v, 3).unwrap();
        assert!(x.sig(10).max_abs_diff(&e).unwrap() < 1e-14);

        // counter-clockwise unit square: area +1
        let sq = PiecewisePath::new(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let x = signature(&sq, 2).unwrap();
        let end = x.sig(4);
        assert!(end.level(1).iter().all(|c| c.abs() < 1e-15));
        assert!((area(end) - 1.0).abs() < 1e-15);
        assert!(x.is_weak_geometric());
    }

    #[test]
    fn young_lift_examples() {
        let p = PiecewisePath::uniform(0.0, 1.0, 4096, |t| vec![t, t * t]).unwrap();
        let x = young_lift(&p, 1.5).unwrap();
        assert!((x.sig(4096).level(2)[1] - 2.0 / 3.0).abs() < 1e-6);

        let line = PiecewisePath::uniform(0.0, 2.0, 3, |t| vec![t, -2.0 * t]).unwrap();
        let y = young_lift(&line, 1.5).unwrap();
        let e = segment_signature(&[2.0, -4.0], 2).unwrap();
        assert!(y.sig(3).max_abs_diff(&e).unwrap() < 1e-13);
    }

    #[test]
    fn young_lift_matches_refined_signature() {
        let f = |t: f64| vec![(5.0 * t).sin(), (3.0 * t).cos() * t];
        let coarse = PiecewisePath::uniform(0.0, 1.0, 400, f).unwrap();
        let fine = PiecewisePath::uniform(0.0, 1.0, 4000, f).unwrap();
        let y = young_lift(&coarse, 1.5).unwrap();
        let s = signature(&fine, 2).unwrap();
        for k in (0..=400).step_by(40) {
            let d = y.sig(k).max_abs_diff(s.sig(10 * k)).unwrap();
            assert!(d < 1e-4, "node {k}: {d}");
        }
        // piecewise-linear data: identical to the signature on the same grid
        let s_coarse = signature(&coarse, 2).unwrap();
        assert!(y.sig(400).max_abs_diff(s_coarse.sig(400)).unwrap() < 1e-12);
    }

    #[test]
    fn pure_area_examples() {
        let x = pure_area(1.0, 16).unwrap();
        for (i, j) in [(0, 16), (3, 9), (5, 6)] {
            let inc = x.increment(i, j);
            assert!(inc.level(1).iter().all(|c| c.abs() < 1e-15));
        }
        assert!((x.increment(0, 16).level(2)[1] - PI).abs() < 1e-14);
        assert!(x.chen_residual() < 1e-12);
        assert!(x.is_weak_geometric());
    }

    #[test]
    fn oscillator_examples() {
        let p = oscillator_path(1, 100).unwrap();
        assert_eq!(p.value(0), &[1.0, 0.0]);
        let x = signature(&oscillator_path(8, 64 * 64 * 8).unwrap(), 2).unwrap();
        let a = area(x.sig(x.len() - 1));
        assert!((a - PI).abs() < 0.05, "area {a}");
    }

    #[test]
    fn oscillator_holder_norms_stay_bounded() {
        let norms: Vec<f64> = [1usize, 2, 4, 8, 16, 32]
            .iter()
            .map(|&n| {
                let fine = signature(&oscillator_path(n, 256 * n * n).unwrap(), 2).unwrap();
                let idx: Vec<usize> = (0..=256).map(|k| k * n * n).collect();
                fine.restrict(&idx).unwrap().with_p(2.0).unwrap().holder_norm(1).unwrap()
            })
            .collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        assert!(max < 2.0 * PI + 1e-9, "{norms:?}");
    }

    #[test]
    fn holder_norm_examples() {
        let constant = PiecewisePath::uniform(0.0, 1.0, 8, |_| vec![2.0, 3.0]).unwrap();
        assert_eq!(signature(&constant, 2).unwrap().holder_norm(1).unwrap(), 0.0);

        let v = [3.0, 4.0];
        let line = PiecewisePath::uniform(0.0, 4.0, 16, |t| vec![v[0] * t, v[1] * t]).unwrap();
        let x = signature(&line, 2).unwrap().with_p(2.0).unwrap();
        assert!((x.holder_norm(1).unwrap() - 5.0 * 2.0).abs() < 1e-12);

        let pa = pure_area(2.0, 32).unwrap();
        let expected = PI * 2f64.sqrt() * 2f64.powf(1.0 - 2.0 / 2.5);
        assert!((pa.holder_norm(2).unwrap() - expected).abs() < 1e-12);
        assert!(pa.holder_norm(3).is_err());
    }

    #[test]
    fn distance_examples() {
        let x = signature(&trig_path(32), 2).unwrap();
        assert_eq!(x.distance(&x).unwrap(), 0.0);
        let y = pure_area(1.0, 16).unwrap();
        assert!(matches!(x.distance(&y), Err(Error::GridMismatch(_)) | Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn oscillator_distance_to_pure_area_decreases() {
        let pa = pure_area(1.0, 128).unwrap();
        let mut last = f64::INFINITY;
        for n in [2usize, 4, 8, 16] {
            let fine = signature(&oscillator_path(n, 128 * 64 * n * n / 4).unwrap(), 2).unwrap();
            let step = fine.len() / 128;
            let idx: Vec<usize> = (0..=128).map(|k| k * step).collect();
            let x = fine.restrict(&idx).unwrap().with_p(2.5).unwrap().with_start(vec![0.0, 0.0]).unwrap();
            let d = x.distance(&pa).unwrap();
            assert!(d < last, "n = {n}: {d} >= {last}");
            last = d;
        }
    }

    #[test]
    fn translate_examples() {
        let xp = trig_path(200);
        let x = signature(&xp, 2).unwrap();
        let zero = PiecewisePath::uniform(0.0, 1.0, 200, |_| vec![0.0; 3]).unwrap();
        let t0 = translate(&x, &zero).unwrap();
        assert!(t0.sig(200).max_abs_diff(x.sig(200)).unwrap() < 1e-15);

        let h = PiecewisePath::uniform(0.0, 1.0, 200, |t| vec![t * t, (4.0 * t).sin(), -t]).unwrap();
        let tx = translate(&x, &h).unwrap();
        let direct = signature(&xp.add(&h).unwrap(), 2).unwrap();
        for i in (0..=200).step_by(25) {
            assert!(tx.sig(i).max_abs_diff(direct.sig(i)).unwrap() < 1e-8);
        }
        assert!(tx.chen_residual() < 1e-10);
        assert!(tx.is_weak_geometric());
    }

    #[test]
    fn pairing_examples() {
        let pa = pure_area(1.0, 16).unwrap();
        let h0 = PiecewisePath::uniform(0.0, 1.0, 16, |_| vec![0.0]).unwrap();
        let z = pair_with_smooth(&pa, &h0).unwrap();
        let end = z.sig(16);
        assert_eq!(end.dim(), 3);
        let l2 = end.level(2);
        assert!((l2[1] - PI).abs() < 1e-14 && (l2[3] + PI).abs() < 1e-14);
        for (j, k) in [(0, 2), (1, 2), (2, 0), (2, 1), (2, 2)] {
            assert_eq!(l2[j * 3 + k], 0.0);
        }

        let xp = PiecewisePath::uniform(0.0, 1.0, 300, |t| vec![t.sin(), t * t]).unwrap();
        let h = PiecewisePath::uniform(0.0, 1.0, 300, |t| vec![(2.0 * t).cos()]).unwrap();
        let paired = pair_with_smooth(&signature(&xp, 2).unwrap(), &h).unwrap();
        let joint = signature(&xp.concat_components(&h).unwrap(), 2).unwrap();
        for i in (0..=300).step_by(30) {
            assert!(paired.sig(i).max_abs_diff(joint.sig(i)).unwrap() < 1e-6);
        }
        assert!(paired.chen_residual() < 1e-10);
    }

    #[test]
    fn lyons_extension_examples() {
        let v = [0.4, -0.8];
        let seg = PiecewisePath::new(vec![0.0, 1.0], vec![vec![0.0, 0.0], v.to_vec()]).unwrap();
        let x = signature(&seg, 2).unwrap();
        let y = lyons_extend_level3(&x, LyonsOptions::default()).unwrap();
        let e3 = segment_signature(&v, 3).unwrap();
        assert!(y.sig(1).max_abs_diff(&e3).unwrap() < 1e-9);
        let direct = extend_increment(&x, 0.0, 1.0, LyonsOptions::default()).unwrap();
        assert!(direct.max_abs_diff(&e3).unwrap() < 1e-9);

        let pa = pure_area(1.0, 8).unwrap();
        let y = lyons_extend_level3(&pa, LyonsOptions::default()).unwrap();
        assert!(y.sig(8).level(3).iter().all(|c| c.is_finite()));
        assert!(y.chen_residual() < 1e-10);
        assert!(y.is_weak_geometric());
    }

    #[test]
    fn lyons_extension_matches_signature_of_fine_path() {
        let f = |t: f64| vec![t.sin(), (2.0 * t).cos()];
        let fine = PiecewisePath::uniform(0.0, 1.0, 1024, f).unwrap();
        let x2 = signature(&fine, 2).unwrap();
        let x3 = signature(&fine, 3).unwrap();
        let y = lyons_extend_level3(&x2, LyonsOptions::default()).unwrap();
        assert!(y.sig(1024).max_abs_diff(x3.sig(1024)).unwrap() < 1e-9);
        let direct = extend_increment(&x2, 0.25, 0.75, LyonsOptions { tol: 1e-10, max_depth: 16 }).unwrap();
        assert!(direct.max_abs_diff(&x3.increment(256, 768)).unwrap() < 1e-8);
    }

    #[test]
    fn geodesic_interpolation() {
        let x = signature(&trig_path(10), 2).unwrap();
        let whole = x.increment_at(0.0, 1.0);
        assert!(whole.max_abs_diff(&x.increment(0, 10)).unwrap() < 1e-14);
        let a = x.increment_at(0.13, 0.47);
        let b = x.increment_at(0.47, 0.91);
        let c = x.increment_at(0.13, 0.91);
        assert!(a.mul(&b).unwrap().max_abs_diff(&c).unwrap() < 1e-13);
        assert!(x.increment_at(0.31, 0.34).is_group_like(1e-12));
        let back = x.increment_at(0.5, 0.2).mul(&x.increment_at(0.2, 0.5)).unwrap();
        assert!(back.max_abs_diff(&TruncatedTensor::one(3, 2).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn json_roundtrip() {
        let x = signature(&trig_path(4), 2).unwrap();
        let text = x.to_json().unwrap();
        let back = RoughPathGrid::from_json(&text).unwrap();
        assert_eq!(back.times(), x.times());
        assert!(back.sig(4).max_abs_diff(x.sig(4)).unwrap() == 0.0);
        assert!(RoughPathGrid::from_json(r#"{"p":2.5,"times":[0],"start":[0],"sigs":[],"extra":1}"#).is_err());
    }

    #[test]
    fn restriction_keeps_increments() {
        let x = signature(&trig_path(40), 3).unwrap();
        let r = x.restrict(&[4, 10, 25, 40]).unwrap();
        assert!(r.increment(1, 3).max_abs_diff(&x.increment(10, 40)).unwrap() < 1e-13);
        assert_eq!(r.value(0), x.value(4));
        let r2 = x.restrict_to_times(&[0.1, 0.25, 1.0]).unwrap();
        assert_eq!(r2.len(), 3);
        assert!(x.restrict_to_times(&[0.11]).is_err());
    }

    fn arb_path() -> impl Strategy<Value = PiecewisePath> {
        (1usize..=4, 3usize..20).prop_flat_map(|(d, n)| {
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), n).prop_map(move |vals| {
                let times = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
                PiecewisePath::new(times, vals).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn chen_holds_for_signatures(path in arb_path(), cap in 1usize..=3, picks in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)) {
            let x = signature(&path, cap).unwrap();
            let n = x.len();
            let mut idx = [
                (picks.0 * (n - 1) as f64) as usize,
                (picks.1 * (n - 1) as f64) as usize,
                (picks.2 * (n - 1) as f64) as usize,
            ];
            idx.sort();
            prop_assert!(x.chen_residual_at(idx[0], idx[1], idx[2]) < 1e-12);
            prop_assert!(x.chen_residual() < 1e-12);
            prop_assert!(x.is_weak_geometric());
        }

        #[test]
        fn signature_of_concatenation(path in arb_path(), cut in 0.0f64..1.0) {
            let n = path.len();
            let k = 1 + (cut * (n - 2) as f64) as usize;
            let first = PiecewisePath::new(path.times()[..=k].to_vec(), path.values()[..=k].to_vec()).unwrap();
            let second = PiecewisePath::new(path.times()[k..].to_vec(), path.values()[k..].to_vec()).unwrap();
            let whole = signature(&path, 3).unwrap();
            let a = signature(&first, 3).unwrap();
            let b = signature(&second, 3).unwrap();
            let prod = a.sig(a.len() - 1).mul(b.sig(b.len() - 1)).unwrap();
            prop_assert!(prod.max_abs_diff(whole.sig(n - 1)).unwrap() < 1e-12);
        }

        #[test]
        fn distance_is_a_metric(
            (a, b, c) in (1usize..=3).prop_flat_map(|d| {
                let one = move || prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 9);
                (one(), one(), one())
            })
        ) {
            let times: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
            let lift = |v: Vec<Vec<f64>>| signature(&PiecewisePath::new(times.clone(), v).unwrap(), 2).unwrap();
            let (x, y, z) = (lift(a), lift(b), lift(c));
            let xy = x.distance(&y).unwrap();
            prop_assert!((xy - y.distance(&x).unwrap()).abs() < 1e-12);
            prop_assert!(xy <= x.distance(&z).unwrap() + z.distance(&y).unwrap() + 1e-12);
        }
    }
}
