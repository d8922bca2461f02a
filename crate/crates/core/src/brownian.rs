//! Brownian motion on dyadic grids and its rough-path lifts.
//!
//! Samples are built by Brownian-bridge refinement: level 0 draws `B_T`,
//! level `k` draws the midpoints of the level-`(k-1)` cells. Each level
//! reads its own ChaCha stream, so refining a sample reproduces the coarse
//! path exactly and every result is a pure function of the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::controlled::{rough_integral, ControlledPath};
use crate::error::{Error, Result};
use crate::path::PiecewisePath;
use crate::path_lift::{signature, RoughPathGrid};
use crate::rde::solve::{solve_path, SolveOptions, BLOW_UP_NORM};
use crate::rde::step::increment_field;
use crate::rde::VectorFieldSet;
use crate::sewing::max_diff;
use crate::stats::McSummary;
use crate::tensor::{euclid, TruncatedTensor};

pub const MAX_DEPTH: usize = 24;

/// Default extra refinement for [`stratonovich_lift`].
pub const DEFAULT_EXTRA_DEPTH: usize = 6;

/// Nominal roughness used for Brownian lifts.
pub const DEFAULT_P: f64 = 2.5;

/// Brownian motion in `R^l` at the `2^n + 1` dyadic points of `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianSample {
    dim: usize,
    depth: usize,
    horizon: f64,
    seed: u64,
    /// Row-major `(2^n + 1) x l`.
    values: Vec<f64>,
}

fn level_rng(seed: u64, level: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    rng
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::InvalidInput(format!("dyadic depth {depth} exceeds {MAX_DEPTH}")));
    }
    Ok(())
}

impl BrownianSample {
    pub fn new(dim: usize, depth: usize, horizon: f64, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("Brownian dimension must be positive".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        check_depth(depth)?;
        let mut rng = level_rng(seed, 0);
        let sd = horizon.sqrt();
        let mut values = vec![0.0; dim];
        values.extend((0..dim).map(|_| sd * rng.sample::<f64, _>(StandardNormal)));
        let base = BrownianSample {
            dim,
            depth: 0,
            horizon,
            seed,
            values,
        };
        base.refine(depth)
    }

    /// The same Brownian path sampled at a finer depth.
    pub fn refine(&self, depth: usize) -> Result<Self> {
        check_depth(depth)?;
        if depth < self.depth {
            return self.coarsen(depth);
        }
        let l = self.dim;
        let mut values = self.values.clone();
        for level in self.depth + 1..=depth {
            let mut rng = level_rng(self.seed, level);
            let cells = 1usize << (level - 1);
            // bridge midpoint variance: (cell length) / 4
            let sd = (self.horizon / cells as f64 / 4.0).sqrt();
            let mut next = Vec::with_capacity((2 * cells + 1) * l);
            for i in 0..cells {
                let a = &values[i * l..(i + 1) * l];
                let b = &values[(i + 1) * l..(i + 2) * l];
                next.extend_from_slice(a);
                for c in 0..l {
                    next.push(0.5 * (a[c] + b[c]) + sd * rng.sample::<f64, _>(StandardNormal));
                }
            }
            next.extend_from_slice(&values[cells * l..]);
            values = next;
        }
        Ok(BrownianSample {
            depth,
            values,
            ..self.clone()
        })
    }

    /// The same path at a coarser depth (every `2^(n - depth)`-th point).
    pub fn coarsen(&self, depth: usize) -> Result<Self> {
        if depth > self.depth {
            return self.refine(depth);
        }
        let stride = 1usize << (self.depth - depth);
        let l = self.dim;
        let values = (0..=(1usize << depth))
            .flat_map(|i| self.values[i * stride * l..(i * stride + 1) * l].iter().copied())
            .collect();
        Ok(BrownianSample {
            depth,
            values,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        (1usize << self.depth) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        self.horizon * i as f64 / (1u64 << self.depth) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn end(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    /// The `l * 2^n` increments, cell by cell.
    pub fn increments(&self) -> Vec<f64> {
        let l = self.dim;
        (0..self.len() - 1)
            .flat_map(|i| (0..l).map(move |c| (i, c)))
            .map(|(i, c)| self.values[(i + 1) * l + c] - self.values[i * l + c])
            .collect()
    }

    /// Piecewise-linear interpolant `B^(n)`.
    pub fn path(&self) -> PiecewisePath {
        let values = (0..self.len()).map(|i| self.value(i).to_vec()).collect();
        PiecewisePath::new(self.times(), values).expect("dyadic grid is valid")
    }
}

fn check_brownian_p(p: f64) -> Result<()> {
    if !(p > 2.0 && p < 3.0) {
        return Err(Error::InvalidInput(format!("Brownian lifts need 2 < p < 3, got {p}")));
    }
    Ok(())
}

/// Signature (levels 1, 2) of the piecewise-linear interpolant.
pub fn piecewise_linear_lift(sample: &BrownianSample, p: f64) -> Result<RoughPathGrid> {
    check_brownian_p(p)?;
    signature(&sample.path(), 2)?.with_p(p)
}

/// Stratonovich lift on the sample grid: the piecewise-linear lift at depth
/// `n + extra_depth` of the bridge-refined path, restricted to the depth-`n`
/// nodes.
pub fn stratonovich_lift(sample: &BrownianSample, extra_depth: usize, p: f64) -> Result<RoughPathGrid> {
    let fine = sample.refine(sample.depth() + extra_depth)?;
    let lift = piecewise_linear_lift(&fine, p)?;
    let stride = 1usize << extra_depth;
    let idx: Vec<usize> = (0..sample.len()).map(|i| i * stride).collect();
    lift.restrict(&idx)
}

/// Itô lift: every increment of `strat` with `(t-s)/2 Id` removed from
/// level 2. Not weak geometric.
pub fn ito_lift(strat: &RoughPathGrid) -> Result<RoughPathGrid> {
    if strat.level_cap() < 2 {
        return Err(Error::UnsupportedLevelCap(strat.level_cap()));
    }
    let l = strat.dim();
    let times = strat.times();
    let cells: Vec<TruncatedTensor> = (0..strat.len() - 1)
        .into_par_iter()
        .map(|i| {
            let mut c = strat.increment(i, i + 1);
            let half = 0.5 * (times[i + 1] - times[i]);
            let l2 = c.level_mut(2);
            for j in 0..l {
                l2[j * l + j] -= half;
            }
            c
        })
        .collect();
    RoughPathGrid::from_increments(strat.p(), times.to_vec(), strat.start().to_vec(), &cells)
}

/// Lévy area `(XX^{12} - XX^{21}) / 2` of coordinates 0 and 1 over `[s, t]`.
pub fn levy_area(x: &TruncatedTensor) -> Result<f64> {
    if x.dim() < 2 || x.level_cap() < 2 {
        return Err(Error::InvalidInput("Lévy area needs dimension and level cap at least 2".into()));
    }
    let d = x.dim();
    let l2 = x.level(2);
    Ok(0.5 * (l2[1] - l2[d]))
}

/// Lévy area over `[0, T]` of the piecewise-linear interpolant at depth `n`,
/// for `num_samples` seeds `seed, seed + 1, ...`.
///
/// Oracle: with `M_i = int B^i dB^j` (`i != j`), `Var M_i = T^2 / 2` and the
/// cross moment vanishes, so `A = (M_1 - M_2) / 2` has variance `T^2 / 4`.
/// The depth-`n` interpolant has variance `T^2 (1 - 2^-n) / 4`.
pub fn levy_area_samples(num_samples: usize, depth: usize, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    (0..num_samples as u64)
        .into_par_iter()
        .map(|k| {
            let b = BrownianSample::new(2, depth, horizon, seed.wrapping_add(k))?;
            // area of a polygon from the origin: sum x_i dy_i - y_i dx_i
            let mut area = 0.0;
            for i in 0..b.len() - 1 {
                let (p, q) = (b.value(i), b.value(i + 1));
                area += p[0] * (q[1] - p[1]) - p[1] * (q[0] - p[0]);
            }
            Ok(0.5 * area)
        })
        .collect()
}

/// Monte-Carlo summary of [`levy_area_samples`].
pub fn levy_area_stats(num_samples: usize, depth: usize, horizon: f64, seed: u64) -> Result<McSummary> {
    if num_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    Ok(McSummary::from_samples(&levy_area_samples(num_samples, depth, horizon, seed)?))
}

/// One depth of a Wong–Zakai experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WongZakaiRow {
    pub depth: usize,
    /// Sup over the depth-`n` nodes of `|ODE(B^(n)) - RDE(B^Str)|`.
    pub gap: f64,
    /// Endpoint of the ODE driven by `B^(n)`.
    pub ode_end: Vec<f64>,
    /// Endpoint of the reference RDE solution.
    pub rde_end: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WongZakaiOptions {
    pub extra_depth: usize,
    pub p: f64,
    pub solve: SolveOptions,
}

impl Default for WongZakaiOptions {
    fn default() -> Self {
        WongZakaiOptions {
            extra_depth: DEFAULT_EXTRA_DEPTH,
            p: DEFAULT_P,
            solve: SolveOptions::with_tol(1e-10),
        }
    }
}

/// ODE `dx = V(x) dt + F(x) dB^(n)` along the piecewise-linear path at
/// each depth, against the RDE driven by the Stratonovich lift at the
/// finest depth (same seed).
pub fn wong_zakai_experiment(
    fields: &VectorFieldSet,
    x0: &[f64],
    depths: &[usize],
    seed: u64,
    horizon: f64,
    opts: WongZakaiOptions,
) -> Result<Vec<WongZakaiRow>> {
    let finest = *depths
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidInput("no depths given".into()))?;
    let l = fields.driver_dim();
    let sample = BrownianSample::new(l, finest, horizon, seed)?;
    let driver = stratonovich_lift(&sample, opts.extra_depth, opts.p)?;
    let reference = solve_path(fields, &driver, x0, driver.times(), opts.solve)?;
    let reference = reference.path.values();
    depths
        .iter()
        .map(|&n| {
            let coarse = sample.coarsen(n)?;
            let stride = 1usize << (finest - n);
            let dt = horizon / (1u64 << n) as f64;
            let mut x = x0.to_vec();
            let mut gap = max_diff(&x, &reference[0]);
            for i in 0..coarse.len() - 1 {
                let inc: Vec<f64> = coarse.value(i + 1).iter().zip(coarse.value(i)).map(|(a, b)| a - b).collect();
                let seg = TruncatedTensor::from_vector(&inc, 2)?.exp()?;
                x = increment_field(fields, &seg, dt)?.time_one(&x, opts.solve.ode_substeps);
                let norm = euclid(&x);
                if !(norm <= BLOW_UP_NORM) {
                    return Err(Error::BlowUp {
                        time: coarse.time(i + 1),
                        norm,
                    });
                }
                gap = gap.max(max_diff(&x, &reference[(i + 1) * stride]));
            }
            Ok(WongZakaiRow {
                depth: n,
                gap,
                ode_end: x,
                rde_end: reference[reference.len() - 1].clone(),
            })
        })
        .collect()
}

/// Rough integrals of `G(B)` against both Brownian lifts, next to the
/// left-point Riemann sum on the same grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoughVsIto {
    pub ito: Vec<f64>,
    pub stratonovich: Vec<f64>,
    pub riemann: Vec<f64>,
    /// `|ito - riemann|_inf`.
    pub gap: f64,
}

/// `int_0^T G(B) dB` with `G(b) in L(R^l, R^m)` stored row-major
/// (`g(b)[r * l + k]`) and `dg(b)[(r * l + k) * l + j] = d_j G^{rk}(b)`.
///
/// The integrand is controlled by either lift with `Z' = DG`.
pub fn rough_vs_ito_integral(
    sample: &BrownianSample,
    g: impl Fn(&[f64]) -> Vec<f64> + Sync,
    dg: impl Fn(&[f64]) -> Vec<f64> + Sync,
    extra_depth: usize,
    tol: f64,
) -> Result<RoughVsIto> {
    let strat = stratonovich_lift(sample, extra_depth, DEFAULT_P)?;
    let ito = ito_lift(&strat)?;
    let t = sample.horizon();
    let f_ito = ControlledPath::from_fn(&ito, &g, &dg)?;
    let f_str = ControlledPath::from_fn(&strat, &g, &dg)?;
    let ito_value = rough_integral(&f_ito, &ito, 0.0, t, tol)?.value;
    let str_value = rough_integral(&f_str, &strat, 0.0, t, tol)?.value;
    let l = sample.dim();
    let m = ito_value.len() / l;
    let mut riemann = vec![0.0; m];
    for i in 0..sample.len() - 1 {
        let (a, b) = (sample.value(i), sample.value(i + 1));
        let gi = g(a);
        for r in 0..m {
            riemann[r] += (0..l).map(|k| gi[r * l + k] * (b[k] - a[k])).sum::<f64>();
        }
    }
    Ok(RoughVsIto {
        gap: max_diff(&ito_value, &riemann),
        ito: ito_value,
        stratonovich: str_value,
        riemann,
    })
}

/// Lift of the delayed pair `(B_{t-eps}, B_t)` (with `B = 0` before time 0)
/// of the first sample coordinate: the signature of its piecewise-linear
/// interpolant on the sample grid, so areas at scales above `eps` are glued
/// from grid cells by Chen.
pub fn delayed_pair(sample: &BrownianSample, eps: f64, p: f64) -> Result<RoughPathGrid> {
    check_brownian_p(p)?;
    let h = sample.horizon() / (1u64 << sample.depth()) as f64;
    if !(eps >= h) {
        return Err(Error::InvalidInput(format!("delay {eps} is below the grid step {h}")));
    }
    let b = sample.path();
    let values = b.times().iter().map(|&t| vec![b.value_at(t - eps)[0], b.value_at(t)[0]]).collect();
    signature(&PiecewisePath::new(b.times().to_vec(), values)?, 2)?.with_p(p)
}

/// Almost-sure limit of [`delayed_pair`] as `eps -> 0`: level 1 `(B, B)`,
/// level 2 `B^2/2` in every entry with `-(t-s)/2` added at `(1,2)` and
/// `+(t-s)/2` at `(2,1)`, the first component being the adapted integrand.
pub fn delayed_pair_limit(sample: &BrownianSample, p: f64) -> Result<RoughPathGrid> {
    check_brownian_p(p)?;
    let sigs = (0..sample.len())
        .map(|i| {
            let b = sample.value(i)[0] - sample.value(0)[0];
            let t = sample.time(i);
            let q = 0.5 * b * b;
            TruncatedTensor::from_levels(2, 2, 1.0, &[vec![b, b], vec![q, q - 0.5 * t, q + 0.5 * t, q]])
        })
        .collect::<Result<Vec<_>>>()?;
    let x0 = sample.value(0)[0];
    RoughPathGrid::new(p, sample.times(), vec![x0, x0], sigs)
}

/// Joint lift of a deterministic rough path `X` over `R^d` and the Itô lift
/// of `B` over `R^l`, on a common grid, as a rough path over `R^(d+l)`.
///
/// Cross entries `(k, d+j)` are `int_s^t X^k_su dB^j_u` from left-point
/// sums at grid resolution; entries `(d+j, k)` follow from integration by
/// parts, `X^k_st B^j_st - int_s^t X^k_su dB^j_u`.
pub fn joint_lift(x: &RoughPathGrid, sample: &BrownianSample, extra_depth: usize) -> Result<RoughPathGrid> {
    crate::path::same_grid(x.times(), &sample.times())?;
    if x.level_cap() != 2 {
        return Err(Error::UnsupportedLevelCap(x.level_cap()));
    }
    let p = x.p();
    let bb = ito_lift(&stratonovich_lift(sample, extra_depth, p)?)?;
    let (d, l) = (x.dim(), sample.dim());
    let n = d + l;
    let mut cross = vec![0.0; d * l];
    let mut sigs = Vec::with_capacity(x.len());
    for m in 0..x.len() {
        let xs = x.sig(m);
        let bs = bb.sig(m);
        let x1 = xs.level(1);
        let b1 = bs.level(1);
        let mut l1 = x1.to_vec();
        l1.extend_from_slice(b1);
        let mut l2 = vec![0.0; n * n];
        for a in 0..d {
            for c in 0..d {
                l2[a * n + c] = xs.level(2)[a * d + c];
            }
        }
        for a in 0..l {
            for c in 0..l {
                l2[(d + a) * n + d + c] = bs.level(2)[a * l + c];
            }
        }
        for k in 0..d {
            for j in 0..l {
                l2[k * n + d + j] = cross[k * l + j];
                l2[(d + j) * n + k] = x1[k] * b1[j] - cross[k * l + j];
            }
        }
        sigs.push(TruncatedTensor::from_levels(n, 2, 1.0, &[l1, l2])?);
        if m + 1 < x.len() {
            let (b0, b_next) = (sample.value(m), sample.value(m + 1));
            for k in 0..d {
                for j in 0..l {
                    cross[k * l + j] += x1[k] * (b_next[j] - b0[j]);
                }
            }
        }
    }
    let mut start = x.start().to_vec();
    start.extend_from_slice(sample.value(0));
    RoughPathGrid::new(p, x.times().to_vec(), start, sigs)
}
