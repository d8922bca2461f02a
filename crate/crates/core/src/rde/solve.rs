//! Solution flows and paths of rough differential equations.

use super::fields::{eval_field, VectorFieldSet};
use super::lie::lie_coordinates;
use super::step::{RdeGenerator, DEFAULT_ODE_SUBSTEPS, LIE_TOL};
use crate::error::{Error, Result};
use crate::flows::{flow_eval, FlowEvaluation, FlowOptions};
use crate::path::{self, PiecewisePath};
use crate::path_lift::RoughPathGrid;
use crate::sewing;
use crate::tensor::{euclid, TruncatedTensor};

/// Trajectories whose norm exceeds this are reported as blown up.
pub const BLOW_UP_NORM: f64 = 1e12;

/// Options shared by [`solve_flow`] and [`solve_path`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Flow tolerance per step (sup change between dyadic depths).
    pub tol: f64,
    pub max_depth: usize,
    /// Base RK4 substeps for each time-1 map.
    pub ode_substeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            max_depth: 14,
            ode_substeps: DEFAULT_ODE_SUBSTEPS,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Self::default()
        }
    }

    fn flow(&self) -> FlowOptions {
        FlowOptions {
            tol: self.tol,
            max_depth: self.max_depth,
            min_depth: 0,
        }
    }
}

fn check_range(driver: &RoughPathGrid, s: f64, t: f64) -> Result<()> {
    let times = driver.times();
    let (a, b) = (times[0], times[times.len() - 1]);
    let slack = 1e-12 * (b - a).abs().max(1.0);
    if s < a - slack || t > b + slack || s > t {
        return Err(Error::InvalidInput(format!(
            "interval [{s}, {t}] is not inside the driver range [{a}, {b}]"
        )));
    }
    Ok(())
}

/// `phi_ts(x)` for the RDE driven by `driver`, by dyadic composition of
/// log-ODE steps.
///
/// Very long intervals may need splitting (see [`solve_path`]), which the
/// flow property makes exact.
pub fn solve_flow(
    fields: &VectorFieldSet,
    driver: &RoughPathGrid,
    s: f64,
    t: f64,
    x: &[f64],
    opts: SolveOptions,
) -> Result<FlowEvaluation> {
    check_range(driver, s, t)?;
    let gen = RdeGenerator::new(fields, driver, opts.ode_substeps)?;
    flow_eval(&gen, s, t, x, opts.flow())
}

/// A solution path with its convergence record.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub path: PiecewisePath,
    /// Largest flow depth used by any step.
    pub max_depth: usize,
    /// Largest final sup change over the steps.
    pub max_delta: f64,
    /// Whether every step met the tolerance.
    pub converged: bool,
}

/// Solution `z_t = phi_{t t_0}(x_0)` at the output times.
///
/// Steps run over the union of driver nodes and output times, each a
/// [`flow_eval`] of log-ODE steps. Output times must lie in the driver range.
pub fn solve_path(
    fields: &VectorFieldSet,
    driver: &RoughPathGrid,
    x0: &[f64],
    output_times: &[f64],
    opts: SolveOptions,
) -> Result<Solution> {
    if x0.len() != fields.dim() {
        return Err(Error::DimensionMismatch {
            expected: fields.dim(),
            found: x0.len(),
        });
    }
    if output_times.is_empty() || output_times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("output times must be strictly increasing".into()));
    }
    let (t0, t1) = (output_times[0], output_times[output_times.len() - 1]);
    check_range(driver, t0, t1)?;
    let gen = RdeGenerator::new(fields, driver, opts.ode_substeps)?;

    let mut knots: Vec<f64> = driver
        .times()
        .iter()
        .copied()
        .filter(|&u| u > t0 && u < t1)
        .chain(output_times.iter().copied())
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (t1 - t0).abs().max(1.0));

    let mut x = x0.to_vec();
    let mut values = vec![x.clone()];
    let mut next_out = 1;
    let mut max_depth = 0;
    let mut max_delta = 0.0_f64;
    let mut converged = true;
    for w in knots.windows(2) {
        let r = flow_eval(&gen, w[0], w[1], &x, opts.flow())?;
        max_depth = max_depth.max(r.depth);
        max_delta = max_delta.max(r.last_delta);
        converged &= r.converged;
        x = r.value;
        let norm = euclid(&x);
        if !(norm <= BLOW_UP_NORM) {
            return Err(Error::BlowUp { time: w[1], norm });
        }
        while next_out < output_times.len() && (output_times[next_out] - w[1]).abs() <= 1e-13 * (t1 - t0).abs().max(1.0) {
            values.push(x.clone());
            next_out += 1;
        }
    }
    if !converged {
        log::warn!("solve_path: some steps did not reach tol {:e} (max delta {max_delta:e})", opts.tol);
    }
    Ok(Solution {
        path: PiecewisePath::new(output_times.to_vec(), values)?,
        max_depth,
        max_delta,
        converged,
    })
}

/// Sup over the grid of `|z_t - z_0 - int_0^t F(z) dX - int_0^t V(z) dt|`.
///
/// `z` must live on the driver grid. The integrand `F(z)` is controlled
/// with derivative `DF(z) Z'`; when `zp` is `None` the solution derivative
/// `Z' = F(z)` is used. The rough integral is the sum over grid cells of
/// `F(z_s) X_ts + F'(z_s) XX_ts + V(z_s)(t-s)`, so the residual of an exact
/// solution is the local error summed over the grid.
pub fn integral_residual(
    fields: &VectorFieldSet,
    driver: &RoughPathGrid,
    z: &PiecewisePath,
    zp: Option<&[Vec<f64>]>,
) -> Result<f64> {
    path::same_grid(z.times(), driver.times())?;
    let p = driver.p();
    if !(p > 2.0 && p < 3.0) {
        return Err(Error::InvalidInput(format!("integral residual needs 2 < p < 3, got {p}")));
    }
    if driver.level_cap() < 2 {
        return Err(Error::UnsupportedLevelCap(driver.level_cap()));
    }
    let d = fields.dim();
    let l = fields.driver_dim();
    if z.dim() != d || driver.dim() != l {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: z.dim(),
        });
    }
    if let Some(zp) = zp {
        if zp.len() != z.len() || zp.iter().any(|m| m.len() != d * l) {
            return Err(Error::InvalidInput(format!("Z' must hold {} matrices of size {d} x {l}", z.len())));
        }
    }
    let cell = |i: usize| -> Vec<f64> {
        let x = z.value(i);
        let inc = driver.increment(i, i + 1);
        let x1 = inc.level(1);
        let x2 = inc.level(2);
        let mut out = vec![0.0; d];
        let mut buf = vec![0.0; d];
        for k in 0..l {
            eval_field(fields.field(k), x, &mut buf);
            for r in 0..d {
                out[r] += buf[r] * x1[k];
            }
        }
        match zp {
            None => {
                for j in 0..l {
                    for k in 0..l {
                        let c = x2[j * l + k];
                        if c == 0.0 {
                            continue;
                        }
                        eval_field(fields.directional(j, k), x, &mut buf);
                        for r in 0..d {
                            out[r] += c * buf[r];
                        }
                    }
                }
            }
            Some(zp) => {
                // F'(e_j)(e_k) = DV_k(z) Z'(e_j)
                let m = &zp[i];
                for k in 0..l {
                    let jac: Vec<f64> = fields.field(k).iter().flat_map(|e| (0..d).map(move |c| e.diff(c).eval(x))).collect();
                    for j in 0..l {
                        let c = x2[j * l + k];
                        if c == 0.0 {
                            continue;
                        }
                        for r in 0..d {
                            out[r] += c * (0..d).map(|q| jac[r * d + q] * m[q * l + j]).sum::<f64>();
                        }
                    }
                }
            }
        }
        if let Some(v) = fields.drift() {
            eval_field(v, x, &mut buf);
            let dt = driver.times()[i + 1] - driver.times()[i];
            for r in 0..d {
                out[r] += buf[r] * dt;
            }
        }
        out
    };
    let integral = sewing::grid_cumulative(z.len() - 1, d, cell);
    let z0 = z.value(0);
    Ok(integral
        .iter()
        .enumerate()
        .map(|(k, int)| {
            let zk = z.value(k);
            (0..d).map(|r| (zk[r] - z0[r] - int[r]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max))
}

/// Driver with increments `exp(log X_ts + (t-s) a)` for a Lie element `a`
/// of pure level `floor(p)`.
pub fn perturbed_driver(x: &RoughPathGrid, a: &TruncatedTensor) -> Result<RoughPathGrid> {
    if a.dim() != x.dim() || a.level_cap() != x.level_cap() {
        return Err(Error::ShapeMismatch(x.dim(), x.level_cap(), a.dim(), a.level_cap()));
    }
    let top = x.p().floor() as usize;
    if a.scalar() != 0.0 || (1..=a.level_cap()).any(|k| k != top && a.level(k).iter().any(|c| *c != 0.0)) {
        return Err(Error::InvalidInput(format!("perturbation must live on level {top} only")));
    }
    lie_coordinates(a, LIE_TOL)?;
    let times = x.times();
    let cells = (0..x.len() - 1)
        .map(|i| {
            let mut lam = x.cell_log(i).clone();
            lam.add_assign_unchecked(&a.scale(times[i + 1] - times[i]));
            lam.exp()
        })
        .collect::<Result<Vec<_>>>()?;
    RoughPathGrid::from_increments(x.p(), times.to_vec(), x.start().to_vec(), &cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path_lift::{pure_area, signature};
    use crate::rde::step::lie_field;

    fn smooth_driver(steps: usize) -> RoughPathGrid {
        let p = PiecewisePath::uniform(0.0, 1.0, steps, |t| vec![t]).unwrap();
        signature(&p, 2).unwrap()
    }

    #[test]
    fn exponential_growth_on_smooth_driver() {
        let f = VectorFieldSet::parse(1, &[vec!["x1"]], None).unwrap();
        let x = smooth_driver(8);
        let r = solve_flow(&f, &x, 0.0, 1.0, &[2.0], SolveOptions::with_tol(1e-10)).unwrap();
        assert!((r.value[0] - 2.0 * std::f64::consts::E).abs() < 1e-6, "{r:?}");
        let path = solve_path(&f, &x, &[2.0], x.times(), SolveOptions::with_tol(1e-10)).unwrap();
        for (t, v) in path.path.times().iter().zip(path.path.values()) {
            assert!((v[0] - 2.0 * t.exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_fields_keep_the_start() {
        let f = VectorFieldSet::parse(2, &[vec!["0", "0"]], None).unwrap();
        let x = smooth_driver(16);
        let path = solve_path(&f, &x, &[1.5, -2.0], &[0.0, 0.3, 1.0], SolveOptions::default()).unwrap();
        assert!(path.path.values().iter().all(|v| v == &vec![1.5, -2.0]));
        let z = PiecewisePath::new(x.times().to_vec(), vec![vec![1.5, -2.0]; 17]).unwrap();
        let xp = x.clone().with_p(2.5).unwrap();
        assert_eq!(integral_residual(&f, &xp, &z, None).unwrap(), 0.0);
    }

    #[test]
    fn pure_area_flow_and_flow_property() {
        let a = vec![0.0, 1.0, -1.0, 0.0];
        let b = vec![0.5, 0.0, 0.0, -0.5];
        let f = VectorFieldSet::linear(2, &[a, b]).unwrap();
        let x = pure_area(1.0, 16).unwrap();
        let opts = SolveOptions::with_tol(1e-10);
        let full = solve_flow(&f, &x, 0.0, 1.0, &[1.0, 0.5], opts).unwrap();
        let half = solve_flow(&f, &x, 0.0, 0.375, &[1.0, 0.5], opts).unwrap();
        let rest = solve_flow(&f, &x, 0.375, 1.0, &half.value, opts).unwrap();
        let gap = sewing::max_diff(&full.value, &rest.value);
        assert!(gap < 3.0 * opts.tol + 1e-10, "{gap}");
    }

    #[test]
    fn integral_residual_examples() {
        let f = VectorFieldSet::parse(2, &[vec!["sin(x2)", "1"], vec!["x1", "cos(x1)"]], None).unwrap();
        let path = PiecewisePath::uniform(0.0, 1.0, 1024, |t| vec![(2.0 * t).sin(), t * t]).unwrap();
        let x = signature(&path, 2).unwrap().with_p(2.5).unwrap();
        let tol = 1e-6;
        let sol = solve_path(&f, &x, &[0.1, 0.2], x.times(), SolveOptions::with_tol(tol)).unwrap();
        let r = integral_residual(&f, &x, &sol.path, None).unwrap();
        assert!(r < 10.0 * tol, "{r}");
        // same residual with the explicit derivative Z' = F(z)
        let zp: Vec<Vec<f64>> = sol
            .path
            .values()
            .iter()
            .map(|z| {
                let mut m = vec![0.0; 4];
                for k in 0..2 {
                    for r in 0..2 {
                        m[r * 2 + k] = f.field(k)[r].eval(z);
                    }
                }
                m
            })
            .collect();
        let r2 = integral_residual(&f, &x, &sol.path, Some(&zp)).unwrap();
        assert!((r - r2).abs() < 1e-12);
        let bumped = sol.path.add(&PiecewisePath::from_fn(x.times().to_vec(), |t| vec![0.1 * t, 0.1 * t]).unwrap()).unwrap();
        assert!(integral_residual(&f, &x, &bumped, None).unwrap() > 1e-3);
    }

    #[test]
    fn perturbed_driver_examples() {
        let base = PiecewisePath::uniform(0.0, 1.0, 64, |t| vec![(3.0 * t).sin(), t * t]).unwrap();
        let x = signature(&base, 2).unwrap().with_p(2.5).unwrap();
        let zero = TruncatedTensor::zero(2, 2).unwrap();
        let same = perturbed_driver(&x, &zero).unwrap();
        assert!(same.sig(64).max_abs_diff(x.sig(64)).unwrap() < 1e-14);

        let mut a = TruncatedTensor::zero(2, 2).unwrap();
        a.level_mut(2).copy_from_slice(&[0.0, 0.7, -0.7, 0.0]);
        let y = perturbed_driver(&x, &a).unwrap();
        assert!(y.chen_residual() < 1e-10);
        assert!(y.is_weak_geometric());

        // same as adding the drift F(a)
        let f = VectorFieldSet::linear(2, &[vec![0.0, 1.0, -0.5, 0.2], vec![0.3, 0.0, 1.0, -0.4]]).unwrap();
        let drifted = f.with_drift(Some(lie_field(&f, &a).unwrap())).unwrap();
        let opts = SolveOptions::with_tol(1e-10);
        let lhs = solve_path(&f, &y, &[1.0, -1.0], &[0.0, 1.0], opts).unwrap();
        let rhs = solve_path(&drifted, &x, &[1.0, -1.0], &[0.0, 1.0], opts).unwrap();
        let gap = sewing::max_diff(lhs.path.end(), rhs.path.end());
        assert!(gap < 1e-5, "{gap}");

        let mut bad = TruncatedTensor::zero(2, 2).unwrap();
        bad.level_mut(1)[0] = 1.0;
        assert!(perturbed_driver(&x, &bad).is_err());
        bad = TruncatedTensor::zero(2, 2).unwrap();
        bad.level_mut(2)[0] = 1.0;
        assert!(perturbed_driver(&x, &bad).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let f = VectorFieldSet::parse(1, &[vec!["x1^2"]], None).unwrap();
        let x = smooth_driver(64).with_p(2.5).unwrap();
        let r = solve_path(&f, &x, &[2.0], x.times(), SolveOptions::with_tol(1e-6));
        assert!(matches!(r, Err(Error::BlowUp { .. })), "{r:?}");
    }
}
