//! Truncated tensor algebra `T^(N)` over `R^l` for `N <= 3`.
//!
//! A [`TruncatedTensor`] stores a scalar and dense row-major coefficient
//! blocks for levels `1..=N`. The product is the truncated convolution
//! `c^r = sum_k a^k (x) b^(r-k)`; `exp` and `log` are the terminating power
//! series. Elements with scalar part 1 form a group, and the group-like ones
//! (exponentials of Lie elements) are where signatures of paths live.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported truncation level.
pub const MAX_LEVEL: usize = 3;

/// Tolerance used when checking that the scalar part is exactly 0 or 1.
const SCALAR_TOL: f64 = 1e-12;

/// Element of the truncated tensor algebra.
///
/// Coefficients are held in one flat buffer: the scalar first, then the
/// level-1 block (`dim` entries), the level-2 block (`dim^2` entries, index
/// `i * dim + j`), and so on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorJson", into = "TensorJson")]
pub struct TruncatedTensor {
    dim: usize,
    level_cap: usize,
    coeffs: Vec<f64>,
}

/// JSON form: `{ "dim", "level_cap", "levels": [[scalar], [level 1], ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub dim: usize,
    pub level_cap: usize,
    pub levels: Vec<Vec<f64>>,
}

impl From<TruncatedTensor> for TensorJson {
    fn from(t: TruncatedTensor) -> Self {
        let levels = (0..=t.level_cap).map(|k| t.level(k).to_vec()).collect();
        TensorJson {
            dim: t.dim,
            level_cap: t.level_cap,
            levels,
        }
    }
}

impl TryFrom<TensorJson> for TruncatedTensor {
    type Error = Error;

    fn try_from(j: TensorJson) -> Result<Self> {
        if j.levels.len() != j.level_cap + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} level blocks (including level 0), found {}",
                j.level_cap + 1,
                j.levels.len()
            )));
        }
        let scalar = j.levels[0].first().copied().unwrap_or(0.0);
        if j.levels[0].len() != 1 {
            return Err(Error::BlockSize {
                level: 0,
                expected: 1,
                found: j.levels[0].len(),
            });
        }
        TruncatedTensor::from_levels(j.dim, j.level_cap, scalar, &j.levels[1..])
    }
}

#[inline]
fn level_offset(dim: usize, k: usize) -> usize {
    let mut off = 0;
    let mut size = 1;
    for _ in 0..k {
        off += size;
        size *= dim;
    }
    off
}

#[inline]
fn level_size(dim: usize, k: usize) -> usize {
    dim.pow(k as u32)
}

fn check_shape(dim: usize, level_cap: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("tensor dimension must be positive".into()));
    }
    if level_cap == 0 || level_cap > MAX_LEVEL {
        return Err(Error::UnsupportedLevelCap(level_cap));
    }
    Ok(())
}

impl TruncatedTensor {
    /// The zero tensor.
    pub fn zero(dim: usize, level_cap: usize) -> Result<Self> {
        check_shape(dim, level_cap)?;
        Ok(Self::zero_unchecked(dim, level_cap))
    }

    /// The unit `1 + 0 + ... + 0`.
    pub fn one(dim: usize, level_cap: usize) -> Result<Self> {
        let mut t = Self::zero(dim, level_cap)?;
        t.coeffs[0] = 1.0;
        Ok(t)
    }

    pub(crate) fn zero_unchecked(dim: usize, level_cap: usize) -> Self {
        TruncatedTensor {
            dim,
            level_cap,
            coeffs: vec![0.0; level_offset(dim, level_cap + 1)],
        }
    }

    pub(crate) fn one_unchecked(dim: usize, level_cap: usize) -> Self {
        let mut t = Self::zero_unchecked(dim, level_cap);
        t.coeffs[0] = 1.0;
        t
    }

    /// Builds a tensor from a scalar and the blocks of levels `1..=level_cap`.
    pub fn from_levels(dim: usize, level_cap: usize, scalar: f64, levels: &[Vec<f64>]) -> Result<Self> {
        check_shape(dim, level_cap)?;
        if levels.len() != level_cap {
            return Err(Error::InvalidInput(format!(
                "expected {level_cap} level blocks, found {}",
                levels.len()
            )));
        }
        let mut t = Self::zero_unchecked(dim, level_cap);
        t.coeffs[0] = scalar;
        for (k, block) in levels.iter().enumerate() {
            let level = k + 1;
            let expected = level_size(dim, level);
            if block.len() != expected {
                return Err(Error::BlockSize {
                    level,
                    expected,
                    found: block.len(),
                });
            }
            t.level_mut(level).copy_from_slice(block);
        }
        Ok(t)
    }

    /// The Lie element `0 + v` of level 1.
    pub fn from_vector(v: &[f64], level_cap: usize) -> Result<Self> {
        let mut t = Self::zero(v.len(), level_cap)?;
        t.level_mut(1).copy_from_slice(v);
        Ok(t)
    }

    /// The canonical basis vector `e_i` (0-based) embedded at level 1.
    pub fn basis(dim: usize, level_cap: usize, i: usize) -> Result<Self> {
        let mut t = Self::zero(dim, level_cap)?;
        if i >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: i + 1,
            });
        }
        t.level_mut(1)[i] = 1.0;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level_cap(&self) -> usize {
        self.level_cap
    }

    pub fn scalar(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn set_scalar(&mut self, s: f64) {
        self.coeffs[0] = s;
    }

    /// Coefficient block of level `k` (panics when `k > level_cap`).
    pub fn level(&self, k: usize) -> &[f64] {
        let off = level_offset(self.dim, k);
        &self.coeffs[off..off + level_size(self.dim, k)]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        let off = level_offset(self.dim, k);
        let n = level_size(self.dim, k);
        &mut self.coeffs[off..off + n]
    }

    /// All coefficients, scalar first.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Natural projection onto level `k`.
    pub fn project(&self, k: usize) -> Result<&[f64]> {
        if k > self.level_cap {
            return Err(Error::LevelOutOfRange {
                level: k,
                cap: self.level_cap,
            });
        }
        Ok(self.level(k))
    }

    /// Same tensor with levels above `level_cap` dropped.
    pub fn truncate(&self, level_cap: usize) -> Result<Self> {
        check_shape(self.dim, level_cap)?;
        if level_cap > self.level_cap {
            return Err(Error::LevelOutOfRange {
                level: level_cap,
                cap: self.level_cap,
            });
        }
        Ok(TruncatedTensor {
            dim: self.dim,
            level_cap,
            coeffs: self.coeffs[..level_offset(self.dim, level_cap + 1)].to_vec(),
        })
    }

    /// Same tensor viewed in a higher truncation, new levels zero.
    pub fn extend_to(&self, level_cap: usize) -> Result<Self> {
        check_shape(self.dim, level_cap)?;
        let mut t = Self::zero_unchecked(self.dim, level_cap);
        let n = self.coeffs.len().min(t.coeffs.len());
        t.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        Ok(t)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.level_cap != other.level_cap {
            return Err(Error::ShapeMismatch(self.dim, self.level_cap, other.dim, other.level_cap));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Truncated tensor product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero_unchecked(self.dim, self.level_cap);
        self.mul_into(other, &mut out);
        out
    }

    /// Writes `self * other` into `out` (all three must share a shape).
    pub(crate) fn mul_into(&self, other: &Self, out: &mut Self) {
        let d = self.dim;
        out.coeffs.iter_mut().for_each(|x| *x = 0.0);
        for r in 0..=self.level_cap {
            let out_off = level_offset(d, r);
            for k in 0..=r {
                let a = self.level(k);
                let b = other.level(r - k);
                let nb = b.len();
                for (i, &ai) in a.iter().enumerate() {
                    if ai == 0.0 {
                        continue;
                    }
                    let dst = &mut out.coeffs[out_off + i * nb..out_off + (i + 1) * nb];
                    for (o, &bj) in dst.iter_mut().zip(b) {
                        *o += ai * bj;
                    }
                }
            }
        }
    }

    /// Writes level `r` of `self * other` into `out` without forming the product.
    pub(crate) fn mul_level_into(&self, other: &Self, r: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for k in 0..=r {
            let a = self.level(k);
            let b = other.level(r - k);
            let nb = b.len();
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                for (o, &bj) in out[i * nb..(i + 1) * nb].iter_mut().zip(b) {
                    *o += ai * bj;
                }
            }
        }
    }

    /// `exp(a) = sum_n a^n / n!`; requires a zero scalar part.
    pub fn exp(&self) -> Result<Self> {
        if self.scalar().abs() > SCALAR_TOL {
            return Err(Error::ScalarNotZero(self.scalar()));
        }
        Ok(self.exp_unchecked())
    }

    pub(crate) fn exp_unchecked(&self) -> Self {
        let mut sum = Self::one_unchecked(self.dim, self.level_cap);
        let mut term = sum.clone();
        let mut buf = Self::zero_unchecked(self.dim, self.level_cap);
        for n in 1..=self.level_cap {
            term.mul_into(self, &mut buf);
            std::mem::swap(&mut term, &mut buf);
            let inv = 1.0 / n as f64;
            term.coeffs.iter_mut().for_each(|x| *x *= inv);
            sum.add_assign_unchecked(&term);
        }
        sum.coeffs[0] = 1.0;
        sum
    }

    /// `log(a) = sum_{n>=1} (-1)^(n+1) (a - 1)^n / n`; requires scalar part 1.
    pub fn log(&self) -> Result<Self> {
        if (self.scalar() - 1.0).abs() > SCALAR_TOL {
            return Err(Error::ScalarNotOne(self.scalar()));
        }
        Ok(self.log_unchecked())
    }

    pub(crate) fn log_unchecked(&self) -> Self {
        let mut x = self.clone();
        x.coeffs[0] = 0.0;
        let mut sum = x.clone();
        let mut power = x.clone();
        let mut buf = Self::zero_unchecked(self.dim, self.level_cap);
        for n in 2..=self.level_cap {
            power.mul_into(&x, &mut buf);
            std::mem::swap(&mut power, &mut buf);
            let c = if n % 2 == 0 { -1.0 } else { 1.0 } / n as f64;
            for (s, p) in sum.coeffs.iter_mut().zip(&power.coeffs) {
                *s += c * p;
            }
        }
        sum.coeffs[0] = 0.0;
        sum
    }

    /// Group inverse `exp(-log a)`; requires scalar part 1.
    pub fn inverse(&self) -> Result<Self> {
        if (self.scalar() - 1.0).abs() > SCALAR_TOL {
            return Err(Error::ScalarNotOne(self.scalar()));
        }
        Ok(self.inverse_unchecked())
    }

    pub(crate) fn inverse_unchecked(&self) -> Self {
        self.log_unchecked().scale(-1.0).exp_unchecked()
    }

    /// Dilation: level `k` scaled by `lambda^k`, scalar untouched.
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        let mut factor = 1.0;
        for k in 1..=self.level_cap {
            factor *= lambda;
            out.level_mut(k).iter_mut().for_each(|x| *x *= factor);
        }
        out
    }

    /// Homogeneous norm `sum_i |a^i|^(1/i)` with Euclidean block norms.
    pub fn homogeneous_norm(&self) -> Result<f64> {
        if (self.scalar() - 1.0).abs() > SCALAR_TOL {
            return Err(Error::ScalarNotOne(self.scalar()));
        }
        Ok((1..=self.level_cap)
            .map(|i| euclid(self.level(i)).powf(1.0 / i as f64))
            .sum())
    }

    /// Commutator `ab - ba`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let ab = self.mul_unchecked(other);
        let ba = other.mul_unchecked(self);
        let mut out = ab;
        for (o, b) in out.coeffs.iter_mut().zip(&ba.coeffs) {
            *o -= b;
        }
        Ok(out)
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Largest absolute coefficient difference with a same-shape tensor.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Residual `max |Sym(a^2) - a^1 (x) a^1 / 2|` (0 for level cap 1).
    pub fn level2_symmetric_defect(&self) -> f64 {
        if self.level_cap < 2 {
            return 0.0;
        }
        let d = self.dim;
        let a1 = self.level(1);
        let a2 = self.level(2);
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                let sym = 0.5 * (a2[i * d + j] + a2[j * d + i]);
                worst = worst.max((sym - 0.5 * a1[i] * a1[j]).abs());
            }
        }
        worst
    }

    /// Checks membership of the free nilpotent group up to `tol`.
    ///
    /// Level 2 is tested through `Sym(a^2) = a^1 (x) a^1 / 2`. At level 3 the
    /// logarithm must be a Lie element: its level-2 part antisymmetric and its
    /// level-3 part fixed (up to the factor 3) by right-normed bracketing.
    pub fn is_group_like(&self, tol: f64) -> bool {
        if (self.scalar() - 1.0).abs() > tol {
            return false;
        }
        if self.level_cap >= 2 && self.level2_symmetric_defect() > tol {
            return false;
        }
        if self.level_cap == 3 {
            let lam = self.log_unchecked();
            if antisymmetry_residual(self.dim, lam.level(2)) > tol {
                return false;
            }
            let l3 = lam.level(3);
            let r = right_bracketing3(self.dim, l3);
            let worst = r
                .iter()
                .zip(l3)
                .fold(0.0_f64, |m, (ri, li)| m.max((ri - 3.0 * li).abs()));
            if worst > tol {
                return false;
            }
        }
        true
    }
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `max |m_ij + m_ji| / 2` for a row-major square block.
pub(crate) fn antisymmetry_residual(dim: usize, m: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in i..dim {
            worst = worst.max((0.5 * (m[i * dim + j] + m[j * dim + i])).abs());
        }
    }
    worst
}

/// Right-normed bracketing `e_i e_j e_k -> [e_i, [e_j, e_k]]` on a level-3 block.
pub fn right_bracketing3(dim: usize, t: &[f64]) -> Vec<f64> {
    let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
    let mut out = vec![0.0; t.len()];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let c = t[idx(i, j, k)];
                if c == 0.0 {
                    continue;
                }
                out[idx(i, j, k)] += c;
                out[idx(i, k, j)] -= c;
                out[idx(j, k, i)] -= c;
                out[idx(k, j, i)] += c;
            }
        }
    }
    out
}
