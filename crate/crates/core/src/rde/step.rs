//! Milstein and log-ODE step maps, and the approximate flow they generate.
//!
//! A step freezes the driving increment into one autonomous vector field
//! and returns the time-1 map of that field, computed with classical RK4.

use super::expr::{self, Expr};
use super::fields::{Field, LieWord, VectorFieldSet};
use super::lie::{lie_coordinates, Basis};
use crate::error::{Error, Result};
use crate::flows::ApproxFlow;
use crate::ode;
use crate::path_lift::RoughPathGrid;
use crate::tensor::TruncatedTensor;

pub const DEFAULT_ODE_SUBSTEPS: usize = 8;

/// Relative agreement required between RK4 runs in [`FrozenField::time_one`].
pub const ODE_REL_TOL: f64 = 1e-13;

const MAX_ODE_STEPS: usize = 1 << 16;

/// Tolerance (relative to the largest coefficient) for accepting a log as a Lie element.
pub const LIE_TOL: f64 = 1e-9;

/// Linear combination of fields, frozen for one step.
#[derive(Clone, Debug, Default)]
pub struct FrozenField<'a> {
    terms: Vec<(f64, &'a Field)>,
}

impl<'a> FrozenField<'a> {
    pub fn push(&mut self, c: f64, f: &'a Field) {
        if c != 0.0 {
            self.terms.push((c, f));
        }
    }

    /// Sum of absolute coefficients.
    pub fn weight(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    pub fn eval(&self, y: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.terms.iter().map(|(c, f)| c * f[r].eval(y)).sum();
        }
    }

    /// Time-1 map from `x`.
    ///
    /// Starts from `substeps * ceil(max(1, weight))` RK4 steps and doubles
    /// until successive results agree to [`ODE_REL_TOL`], so the ODE error
    /// stays below the flow tolerances in use.
    pub fn time_one(&self, x: &[f64], substeps: usize) -> Vec<f64> {
        if self.terms.is_empty() {
            return x.to_vec();
        }
        let n = substeps.max(1) * self.weight().max(1.0).ceil() as usize;
        let (y, used) = ode::rk4_unit_adaptive(|y, out| self.eval(y, out), x, n, ODE_REL_TOL, MAX_ODE_STEPS);
        if used >= MAX_ODE_STEPS {
            log::debug!("time-1 map stopped at {used} RK4 steps (weight {:e})", self.weight());
        }
        y
    }
}

/// Field of a Lie element (scalar 0, levels up to 3): letters map to `V_i`
/// and brackets to the bracket table.
pub fn frozen_lie_field<'a>(f: &'a VectorFieldSet, lambda: &TruncatedTensor) -> Result<FrozenField<'a>> {
    check_driver_dim(f, lambda.dim())?;
    let mut out = FrozenField::default();
    for (b, c) in lie_coordinates(lambda, LIE_TOL)? {
        match b {
            Basis::Letter(i) => out.push(c, f.field(i)),
            Basis::Word(w) => out.push(c, f.bracket(w).expect("bracket table covers the basis")),
        }
    }
    Ok(out)
}

/// Symbolic field `F(lambda)` of a Lie element.
pub fn lie_field(f: &VectorFieldSet, lambda: &TruncatedTensor) -> Result<Field> {
    let frozen = frozen_lie_field(f, lambda)?;
    Ok((0..f.dim())
        .map(|r| {
            frozen.terms.iter().fold(Expr::zero(), |acc, (c, fld)| {
                expr::add(acc, expr::mul(Expr::Const(*c), fld[r].clone()))
            })
        })
        .collect())
}

fn check_driver_dim(f: &VectorFieldSet, dim: usize) -> Result<()> {
    if dim != f.driver_dim() {
        return Err(Error::DimensionMismatch {
            expected: f.driver_dim(),
            found: dim,
        });
    }
    Ok(())
}

/// Milstein step: time-1 map of
/// `(t-s) V + X^i V_i + (1/2) XX^{jk} [V_j, V_k]`.
///
/// Only the antisymmetric part of `XX` enters; for increments that are not
/// weak geometric use [`RdeGenerator`], which also accounts for the
/// symmetric defect.
pub fn milstein_step(f: &VectorFieldSet, xts: &TruncatedTensor, s: f64, t: f64, x: &[f64], ode_substeps: usize) -> Result<Vec<f64>> {
    check_driver_dim(f, xts.dim())?;
    if xts.level_cap() < 2 {
        return Err(Error::UnsupportedLevelCap(xts.level_cap()));
    }
    let l = f.driver_dim();
    let mut frozen = FrozenField::default();
    if let Some(v) = f.drift() {
        frozen.push(t - s, v);
    }
    for (i, c) in xts.level(1).iter().enumerate() {
        frozen.push(*c, f.field(i));
    }
    let x2 = xts.level(2);
    for j in 0..l {
        for k in j + 1..l {
            frozen.push(0.5 * (x2[j * l + k] - x2[k * l + j]), f.bracket(LieWord::Pair(j, k)).unwrap());
        }
    }
    Ok(frozen.time_one(x, ode_substeps))
}

/// Log-ODE step: time-1 map of `F(lambda)` for a Lie element `lambda`.
///
/// No drift is added; errors if `lambda` is not a Lie element.
pub fn log_ode_step(f: &VectorFieldSet, lambda: &TruncatedTensor, x: &[f64], ode_substeps: usize) -> Result<Vec<f64>> {
    Ok(frozen_lie_field(f, lambda)?.time_one(x, ode_substeps))
}

/// Frozen field for a driver increment over `[s, t]`.
///
/// The log of the increment is split into its Lie part and the symmetric
/// part `g` of its level-2 block; `g^{jk} (V_j . grad) V_k` is added to
/// the field. For weak geometric increments `g = 0`; for the Itô lift
/// `g = -(t-s)/2 Id`, which gives the Itô correction.
pub fn increment_field<'a>(f: &'a VectorFieldSet, inc: &TruncatedTensor, dt: f64) -> Result<FrozenField<'a>> {
    check_driver_dim(f, inc.dim())?;
    let l = f.driver_dim();
    let mut lambda = inc.log()?;
    let mut sym = vec![0.0; l * l];
    if lambda.level_cap() >= 2 {
        let l2 = lambda.level_mut(2);
        for j in 0..l {
            for k in j..l {
                let g = 0.5 * (l2[j * l + k] + l2[k * l + j]);
                sym[j * l + k] = g;
                sym[k * l + j] = g;
                l2[j * l + k] -= g;
                if k != j {
                    l2[k * l + j] -= g;
                }
            }
        }
    }
    let mut frozen = frozen_lie_field(f, &lambda)?;
    if let Some(v) = f.drift() {
        frozen.push(dt, v);
    }
    for j in 0..l {
        for k in 0..l {
            frozen.push(sym[j * l + k], f.directional(j, k));
        }
    }
    Ok(frozen)
}

/// The approximate flow `mu_ts` of an RDE: log-ODE steps on the driver
/// increments `X_ts`, with drift `(t-s) V`.
///
/// The defect exponent is `(floor(p) + 1) / p`.
pub struct RdeGenerator<'a> {
    fields: &'a VectorFieldSet,
    driver: &'a RoughPathGrid,
    ode_substeps: usize,
    exponent: f64,
}

impl<'a> RdeGenerator<'a> {
    pub fn new(fields: &'a VectorFieldSet, driver: &'a RoughPathGrid, ode_substeps: usize) -> Result<Self> {
        check_driver_dim(fields, driver.dim())?;
        let p = driver.p();
        if p >= 4.0 {
            return Err(Error::InvalidInput(format!("drivers need p < 4, got {p}")));
        }
        if driver.level_cap() == 3 && !driver.is_weak_geometric() {
            return Err(Error::InvalidInput(
                "level-3 drivers must be weak geometric; the symmetric split is only available at level 2".into(),
            ));
        }
        Ok(RdeGenerator {
            fields,
            driver,
            ode_substeps,
            exponent: (p.floor() + 1.0) / p,
        })
    }

    pub fn driver(&self) -> &RoughPathGrid {
        self.driver
    }

    pub fn fields(&self) -> &VectorFieldSet {
        self.fields
    }

    pub fn step(&self, s: f64, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let inc = self.driver.increment_at(s, t);
        Ok(increment_field(self.fields, &inc, t - s)?.time_one(x, self.ode_substeps))
    }
}

impl ApproxFlow for RdeGenerator<'_> {
    fn dim(&self) -> usize {
        self.fields.dim()
    }

    fn apply(&self, s: f64, t: f64, x: &[f64]) -> Vec<f64> {
        self.step(s, t, x).unwrap_or_else(|e| {
            log::warn!("log-ODE step on [{s}, {t}] failed: {e}");
            vec![f64::NAN; x.len()]
        })
    }

    fn exponent(&self) -> f64 {
        self.exponent
    }
}
