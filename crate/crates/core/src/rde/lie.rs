//! Coordinates of Lie elements of `T^(3)` in a Lyndon bracket basis.
//!
//! Basis: letters `e_i`; `[e_j, e_k]` for `j < k`; and for each Lyndon word
//! of length 3 its standard bracketing, rewritten in the right-normed form
//! kept in the bracket table:
//!
//! ```text
//! aab -> [a,[a,b]]    abb -> -[b,[a,b]]    abc -> [a,[b,c]]    acb -> -[b,[a,c]]
//! ```
//!
//! The bracketing of a Lyndon word `w` is `w` plus lexicographically larger
//! words, so coordinates follow by elimination in increasing order of `w`.

use super::fields::LieWord;
use crate::error::{Error, Result};
use crate::tensor::{antisymmetry_residual, TruncatedTensor};

/// Element of the bracket basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Basis {
    Letter(usize),
    Word(LieWord),
}

/// Lyndon words of length 3 over `0..dim` in lexicographic order, each with
/// the table word and sign of its standard bracketing.
pub fn lyndon_words3(dim: usize) -> Vec<([usize; 3], LieWord, f64)> {
    let mut out = Vec::new();
    for a in 0..dim {
        for b in a..dim {
            for c in a..dim {
                let w = [a, b, c];
                let rot1 = [b, c, a];
                let rot2 = [c, a, b];
                if !(w < rot1 && w < rot2) {
                    continue;
                }
                // standard factorisation w = u v with v the longest proper Lyndon suffix
                let (word, sign) = if b < c {
                    // suffix bc is Lyndon: [a, [b, c]]
                    (LieWord::Triple(a, b, c), 1.0)
                } else {
                    // w = (ab) c: [[a, b], c] = -[c, [a, b]]
                    (LieWord::Triple(c, a, b), -1.0)
                };
                out.push((w, word, sign));
            }
        }
    }
    out
}

/// Level-3 block of the right-normed bracket `[e_j, [e_k, e_m]]`.
pub fn triple_tensor(dim: usize, j: usize, k: usize, m: usize) -> Vec<f64> {
    let idx = |a: usize, b: usize, c: usize| (a * dim + b) * dim + c;
    let mut t = vec![0.0; dim * dim * dim];
    t[idx(j, k, m)] += 1.0;
    t[idx(j, m, k)] -= 1.0;
    t[idx(k, m, j)] -= 1.0;
    t[idx(m, k, j)] += 1.0;
    t
}

/// Expands a Lie element (scalar 0) in the bracket basis.
///
/// Errors with [`Error::NotLieElement`] when the level-2 block has a
/// symmetric part or the level-3 block leaves a residual above
/// `tol * max(1, |lambda|_inf)`.
pub fn lie_coordinates(lambda: &TruncatedTensor, tol: f64) -> Result<Vec<(Basis, f64)>> {
    if lambda.scalar().abs() > tol {
        return Err(Error::ScalarNotZero(lambda.scalar()));
    }
    let d = lambda.dim();
    let scale = tol * lambda.max_abs().max(1.0);
    let mut out: Vec<(Basis, f64)> = lambda
        .level(1)
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (Basis::Letter(i), *c))
        .collect();
    if lambda.level_cap() >= 2 {
        let l2 = lambda.level(2);
        let residual = antisymmetry_residual(d, l2);
        if residual > scale {
            return Err(Error::NotLieElement { residual });
        }
        for j in 0..d {
            for k in j + 1..d {
                let c = 0.5 * (l2[j * d + k] - l2[k * d + j]);
                if c != 0.0 {
                    out.push((Basis::Word(LieWord::Pair(j, k)), c));
                }
            }
        }
    }
    if lambda.level_cap() >= 3 {
        let mut rest = lambda.level(3).to_vec();
        for (w, word, sign) in lyndon_words3(d) {
            let c = rest[(w[0] * d + w[1]) * d + w[2]];
            if c == 0.0 {
                continue;
            }
            let LieWord::Triple(j, k, m) = word else { unreachable!() };
            for (r, t) in rest.iter_mut().zip(triple_tensor(d, j, k, m)) {
                *r -= c * sign * t;
            }
            out.push((Basis::Word(word), c * sign));
        }
        let residual = rest.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if residual > scale {
            return Err(Error::NotLieElement { residual });
        }
    }
    Ok(out)
}

/// The tensor `sum c_b b` for coordinates in the bracket basis.
pub fn lie_element(dim: usize, level_cap: usize, coords: &[(Basis, f64)]) -> Result<TruncatedTensor> {
    let mut t = TruncatedTensor::zero(dim, level_cap)?;
    for (b, c) in coords {
        match *b {
            Basis::Letter(i) => t.level_mut(1)[i] += c,
            Basis::Word(LieWord::Pair(j, k)) => {
                if level_cap < 2 {
                    return Err(Error::LevelOutOfRange { level: 2, cap: level_cap });
                }
                let l2 = t.level_mut(2);
                l2[j * dim + k] += c;
                l2[k * dim + j] -= c;
            }
            Basis::Word(LieWord::Triple(j, k, m)) => {
                if level_cap < 3 {
                    return Err(Error::LevelOutOfRange { level: 3, cap: level_cap });
                }
                for (o, v) in t.level_mut(3).iter_mut().zip(triple_tensor(dim, j, k, m)) {
                    *o += c * v;
                }
            }
        }
    }
    Ok(t)
}
