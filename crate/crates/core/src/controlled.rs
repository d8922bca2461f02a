//! Paths controlled by a reference rough path, rough integrals and self-lifts.
//!
//! A controlled path is a pair `(z, Z')` on the reference grid with
//! `z_t - z_s = Z'_s X_ts + R_ts` and `R` of order `(t-s)^{2/p}`.
//! Derivatives are `d x l` matrices stored row-major. For an integrand with
//! values in `L(R^l, R^n)` (stored row-major, `n * l` numbers) the second
//! order term of the rough integral is `sum_jk XX^{jk} F'_s(e_j)(e_k)`:
//! the derivative direction is contracted with the first index of `XX`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::path;
use crate::path_lift::RoughPathGrid;
use crate::sewing::{self, Sewn};
use crate::tensor::{euclid, TruncatedTensor};

/// A path controlled by `reference`, with a user-supplied Gubinelli derivative.
#[derive(Clone, Debug)]
pub struct ControlledPath<'a> {
    reference: &'a RoughPathGrid,
    values: Vec<Vec<f64>>,
    derivative: Vec<Vec<f64>>,
}

impl<'a> ControlledPath<'a> {
    /// Requires `2 < p < 3` and at least two levels on the reference.
    pub fn new(reference: &'a RoughPathGrid, values: Vec<Vec<f64>>, derivative: Vec<Vec<f64>>) -> Result<Self> {
        let p = reference.p();
        if !(p > 2.0 && p < 3.0) {
            return Err(Error::InvalidInput(format!("controlled paths need 2 < p < 3, got {p}")));
        }
        if reference.level_cap() < 2 {
            return Err(Error::UnsupportedLevelCap(reference.level_cap()));
        }
        let n = reference.len();
        if values.len() != n || derivative.len() != n {
            return Err(Error::GridMismatch(format!(
                "{} values and {} derivatives for {n} grid points",
                values.len(),
                derivative.len()
            )));
        }
        let d = values.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::InvalidInput("controlled path dimension must be positive".into()));
        }
        let l = reference.dim();
        for (v, dv) in values.iter().zip(&derivative) {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            if dv.len() != d * l {
                return Err(Error::DimensionMismatch {
                    expected: d * l,
                    found: dv.len(),
                });
            }
        }
        Ok(ControlledPath {
            reference,
            values,
            derivative,
        })
    }

    /// The reference path itself with `Z' = Id`.
    pub fn from_reference(reference: &'a RoughPathGrid) -> Result<Self> {
        let l = reference.dim();
        let id: Vec<f64> = (0..l * l).map(|k| if k / l == k % l { 1.0 } else { 0.0 }).collect();
        let values = (0..reference.len()).map(|i| reference.value(i)).collect();
        Self::new(reference, values, vec![id; reference.len()])
    }

    /// `phi(x)` for the reference path `x`, with derivative `D phi(x)` (`d x l`).
    pub fn from_fn(
        reference: &'a RoughPathGrid,
        phi: impl Fn(&[f64]) -> Vec<f64> + Sync,
        dphi: impl Fn(&[f64]) -> Vec<f64> + Sync,
    ) -> Result<Self> {
        let xs: Vec<Vec<f64>> = (0..reference.len()).map(|i| reference.value(i)).collect();
        let values = xs.par_iter().map(|x| phi(x)).collect();
        let derivative = xs.par_iter().map(|x| dphi(x)).collect();
        Self::new(reference, values, derivative)
    }

    pub fn reference(&self) -> &'a RoughPathGrid {
        self.reference
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn derivative(&self) -> &[Vec<f64>] {
        &self.derivative
    }

    /// `R_{t_i t_j} = z_{t_j} - z_{t_i} - Z'_{t_i} X_{t_i t_j}`.
    pub fn remainder(&self, i: usize, j: usize) -> Vec<f64> {
        let l = self.reference.dim();
        let x1: Vec<f64> = path::sub(self.reference.sig(j).level(1), self.reference.sig(i).level(1));
        let zp = &self.derivative[i];
        (0..self.dim())
            .map(|r| {
                self.values[j][r] - self.values[i][r] - (0..l).map(|c| zp[r * l + c] * x1[c]).sum::<f64>()
            })
            .collect()
    }

    /// Grid supremum of `|R_ts| / (t-s)^{2/p}`.
    pub fn remainder_norm(&self) -> f64 {
        let times = self.reference.times();
        let expo = 2.0 / self.reference.p();
        (0..times.len())
            .into_par_iter()
            .map(|i| {
                (i + 1..times.len())
                    .map(|j| euclid(&self.remainder(i, j)) / (times[j] - times[i]).powf(expo))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Grid supremum of `|Z'_t - Z'_s| / (t-s)^{1/p}`.
    pub fn derivative_holder_norm(&self) -> f64 {
        let times = self.reference.times();
        let expo = 1.0 / self.reference.p();
        (0..times.len())
            .into_par_iter()
            .map(|i| {
                (i + 1..times.len())
                    .map(|j| {
                        euclid(&path::sub(&self.derivative[j], &self.derivative[i]))
                            / (times[j] - times[i]).powf(expo)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `|z_0| + ||Z'||_{1/p} + ||R||_{2/p}`.
    pub fn controlled_norm(&self) -> f64 {
        euclid(&self.values[0]) + self.derivative_holder_norm() + self.remainder_norm()
    }

    /// Image under a map `phi: R^d -> R^n` with derivative `dphi` (`n x d`):
    /// values `phi(z)`, derivative `D phi(z) Z'`.
    pub fn compose_map(
        &self,
        phi: impl Fn(&[f64]) -> Vec<f64> + Sync,
        dphi: impl Fn(&[f64]) -> Vec<f64> + Sync,
    ) -> Result<ControlledPath<'a>> {
        let d = self.dim();
        let l = self.reference.dim();
        let (values, derivative): (Vec<Vec<f64>>, Vec<Vec<f64>>) = self
            .values
            .par_iter()
            .zip(&self.derivative)
            .map(|(z, zp)| {
                let v = phi(z);
                let jac = dphi(z);
                let n = v.len();
                let mut out = vec![0.0; n * l];
                for r in 0..n {
                    for c in 0..l {
                        out[r * l + c] = (0..d).map(|k| jac[r * d + k] * zp[k * l + c]).sum();
                    }
                }
                (v, out)
            })
            .unzip();
        ControlledPath::new(self.reference, values, derivative)
    }
}

/// Local expansion `F_s X_ts + F'_s XX_ts` for `F` with values in `L(R^l, R^n)`.
pub(crate) fn integrand_expansion(f: &[f64], fp: &[f64], inc: &TruncatedTensor, n: usize) -> Vec<f64> {
    let l = inc.dim();
    let x1 = inc.level(1);
    let x2 = inc.level(2);
    (0..n)
        .map(|r| {
            let mut acc = 0.0;
            for k in 0..l {
                acc += f[r * l + k] * x1[k];
            }
            for j in 0..l {
                for k in 0..l {
                    acc += x2[j * l + k] * fp[(r * l + k) * l + j];
                }
            }
            acc
        })
        .collect()
}

fn check_integrand(f: &ControlledPath<'_>, x: &RoughPathGrid) -> Result<usize> {
    path::same_grid(f.reference.times(), x.times())?;
    let l = x.dim();
    if f.reference.dim() != l || f.dim() % l != 0 {
        return Err(Error::DimensionMismatch {
            expected: l,
            found: f.dim(),
        });
    }
    Ok(f.dim() / l)
}

/// Rough integral `int_s^t F dX` for a controlled integrand `F` with values
/// in `L(R^l, R^n)`; `s` and `t` must be grid nodes.
///
/// Sews `F_s X_ts + F'_s XX_ts` over dyadic index partitions of the grid;
/// the finest level has one grid cell per piece.
pub fn rough_integral(f: &ControlledPath<'_>, x: &RoughPathGrid, s: f64, t: f64, tol: f64) -> Result<Sewn> {
    let n = check_integrand(f, x)?;
    let i0 = path::node_index(x.times(), s).ok_or_else(|| Error::GridMismatch(format!("{s} is not a grid node")))?;
    let i1 = path::node_index(x.times(), t).ok_or_else(|| Error::GridMismatch(format!("{t} is not a grid node")))?;
    if i1 < i0 {
        return Err(Error::InvalidInput(format!("integration bounds reversed: [{s}, {t}]")));
    }
    if i0 == i1 {
        return Ok(Sewn {
            value: vec![0.0; n],
            depth: 0,
            last_delta: 0.0,
            deltas: Vec::new(),
            converged: true,
        });
    }
    let mu = |a: usize, b: usize| integrand_expansion(&f.values[a], &f.derivative[a], &x.increment(a, b), n);
    let out = sewing::sew_grid(&mu, i0, i1, tol);
    if !out.converged {
        log::debug!(
            "rough integral settled at grid resolution (last delta {:e} > tol {:e})",
            out.last_delta,
            tol
        );
    }
    Ok(out)
}

/// Rough integrals `int_{t_0}^{t_i} F dX` at every grid node, from running
/// sums of the cell expansions.
pub fn rough_integral_path(f: &ControlledPath<'_>, x: &RoughPathGrid) -> Result<Vec<Vec<f64>>> {
    let n = check_integrand(f, x)?;
    Ok(sewing::grid_cumulative(x.len() - 1, n, |i| {
        integrand_expansion(&f.values[i], &f.derivative[i], &x.increment(i, i + 1), n)
    }))
}

/// Lifts a controlled path to a rough path over `R^d`.
///
/// `int z (x) dz` is sewn from `z_s (x) Z_ts + (Z'_s (x) Z'_s) XX_ts`, and the
/// level-2 part from the first node is `int z (x) dz - z_0 (x) (z_t - z_0)`.
pub fn self_lift(zc: &ControlledPath<'_>) -> Result<RoughPathGrid> {
    let x = zc.reference;
    let d = zc.dim();
    let l = x.dim();
    let cumulative = sewing::grid_cumulative(x.len() - 1, d * d, |i| {
        let z = &zc.values[i];
        let dz = path::sub(&zc.values[i + 1], z);
        let zp = &zc.derivative[i];
        let x2 = x.increment(i, i + 1).level(2).to_vec();
        let mut out = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                let mut acc = z[a] * dz[b];
                for j in 0..l {
                    for k in 0..l {
                        acc += zp[a * l + j] * zp[b * l + k] * x2[j * l + k];
                    }
                }
                out[a * d + b] = acc;
            }
        }
        out
    });
    let z0 = &zc.values[0];
    let sigs = cumulative
        .iter()
        .zip(&zc.values)
        .map(|(int, z)| {
            let l1 = path::sub(z, z0);
            let mut l2 = int.clone();
            for a in 0..d {
                for b in 0..d {
                    l2[a * d + b] -= z0[a] * l1[b];
                }
            }
            TruncatedTensor::from_levels(d, 2, 1.0, &[l1, l2])
        })
        .collect::<Result<Vec<_>>>()?;
    RoughPathGrid::new(x.p(), x.times().to_vec(), z0.clone(), sigs)
}
