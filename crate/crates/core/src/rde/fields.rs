//! Symbolic vector fields and their bracket table.

use std::collections::BTreeMap;

use super::expr::{self, Expr};
use super::parser::parse_expr;
use crate::error::{Error, Result};

/// A vector field on `R^d`: one expression per component.
pub type Field = Vec<Expr>;

/// `(V . grad) W`: the derivative of `W` in the direction `V`.
pub fn directional(v: &[Expr], w: &[Expr]) -> Field {
    w.iter()
        .map(|wr| {
            v.iter()
                .enumerate()
                .fold(Expr::zero(), |acc, (c, vc)| expr::add(acc, expr::mul(vc.clone(), wr.diff(c))))
        })
        .collect()
}

/// Lie bracket `[V, W] = (V . grad) W - (W . grad) V`.
///
/// This is the commutator `VW - WV` of the fields seen as first-order
/// differential operators, so `V_i -> e_i` extends to a Lie algebra map.
/// For linear fields `V = Ax`, `W = Bx` it is `(BA - AB)x`.
pub fn lie_bracket(v: &[Expr], w: &[Expr]) -> Field {
    directional(v, w)
        .into_iter()
        .zip(directional(w, v))
        .map(|(a, b)| expr::sub(a, b))
        .collect()
}

pub fn eval_field(field: &[Expr], x: &[f64], out: &mut [f64]) {
    for (o, e) in out.iter_mut().zip(field) {
        *o = e.eval(x);
    }
}

/// Bracket words of depth at most 3 kept in the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LieWord {
    /// `[V_j, V_k]`, `j != k`.
    Pair(usize, usize),
    /// `[V_j, [V_k, V_m]]`, `k < m`.
    Triple(usize, usize, usize),
}

/// `ℓ` driving fields on `R^d`, an optional drift, and their brackets.
#[derive(Clone, Debug)]
pub struct VectorFieldSet {
    dim: usize,
    fields: Vec<Field>,
    drift: Option<Field>,
    /// `directional[j][k] = (V_j . grad) V_k`.
    directional: Vec<Vec<Field>>,
    brackets: BTreeMap<LieWord, Field>,
}

impl VectorFieldSet {
    pub fn new(dim: usize, fields: Vec<Field>, drift: Option<Field>) -> Result<Self> {
        if dim == 0 || fields.is_empty() {
            return Err(Error::InvalidInput("need a positive state dimension and at least one field".into()));
        }
        for f in fields.iter().chain(drift.iter()) {
            if f.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.len(),
                });
            }
            if let Some(i) = f.iter().filter_map(Expr::max_var).max() {
                if i >= dim {
                    return Err(Error::VariableOutOfRange { index: i + 1, dim });
                }
            }
        }
        let fields: Vec<Field> = fields.into_iter().map(|f| f.iter().map(Expr::simplify).collect()).collect();
        let drift = drift.map(|f| f.iter().map(Expr::simplify).collect());
        let l = fields.len();
        let directional: Vec<Vec<Field>> = (0..l)
            .map(|j| (0..l).map(|k| directional(&fields[j], &fields[k])).collect())
            .collect();
        let mut brackets = BTreeMap::new();
        for j in 0..l {
            for k in 0..l {
                if j != k {
                    let b: Field = directional[j][k]
                        .iter()
                        .zip(&directional[k][j])
                        .map(|(a, b)| expr::sub(a.clone(), b.clone()))
                        .collect();
                    brackets.insert(LieWord::Pair(j, k), b);
                }
            }
        }
        for k in 0..l {
            for m in k + 1..l {
                let inner = brackets[&LieWord::Pair(k, m)].clone();
                for (j, fj) in fields.iter().enumerate() {
                    brackets.insert(LieWord::Triple(j, k, m), lie_bracket(fj, &inner));
                }
            }
        }
        Ok(VectorFieldSet {
            dim,
            fields,
            drift,
            directional,
            brackets,
        })
    }

    /// Parses `fields[i][r]`, the `r`-th component of `V_{i+1}`.
    pub fn parse<S: AsRef<str>>(dim: usize, fields: &[Vec<S>], drift: Option<&[S]>) -> Result<Self> {
        let parse_field = |f: &[S]| f.iter().map(|s| parse_expr(s.as_ref())).collect::<Result<Field>>();
        let parsed = fields.iter().map(|f| parse_field(f)).collect::<Result<Vec<_>>>()?;
        let drift = drift.map(parse_field).transpose()?;
        Self::new(dim, parsed, drift)
    }

    /// Linear fields `V_i(x) = A_i x` (row-major `d x d`).
    pub fn linear(dim: usize, matrices: &[Vec<f64>]) -> Result<Self> {
        let fields = matrices
            .iter()
            .map(|a| {
                if a.len() != dim * dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim * dim,
                        found: a.len(),
                    });
                }
                Ok((0..dim)
                    .map(|r| {
                        (0..dim).fold(Expr::zero(), |acc, c| {
                            expr::add(acc, expr::mul(Expr::Const(a[r * dim + c]), Expr::Var(c)))
                        })
                    })
                    .collect())
            })
            .collect::<Result<Vec<Field>>>()?;
        Self::new(dim, fields, None)
    }

    /// Same driving fields with `drift` replacing the current drift.
    pub fn with_drift(&self, drift: Option<Field>) -> Result<Self> {
        Self::new(self.dim, self.fields.clone(), drift)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn driver_dim(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> &Field {
        &self.fields[i]
    }

    pub fn drift(&self) -> Option<&Field> {
        self.drift.as_ref()
    }

    /// `(V_j . grad) V_k`.
    pub fn directional(&self, j: usize, k: usize) -> &Field {
        &self.directional[j][k]
    }

    pub fn bracket(&self, word: LieWord) -> Option<&Field> {
        self.brackets.get(&word)
    }

    pub fn bracket_table(&self) -> &BTreeMap<LieWord, Field> {
        &self.brackets
    }

    /// Largest deviation from `[j,k] = -[k,j]` at the given points.
    pub fn antisymmetry_residual(&self, points: &[Vec<f64>]) -> f64 {
        let d = self.dim;
        let mut a = vec![0.0; d];
        let mut b = vec![0.0; d];
        let mut worst = 0.0_f64;
        for (word, f) in &self.brackets {
            if let LieWord::Pair(j, k) = *word {
                for x in points {
                    eval_field(f, x, &mut a);
                    eval_field(&self.brackets[&LieWord::Pair(k, j)], x, &mut b);
                    worst = a.iter().zip(&b).fold(worst, |m, (p, q)| m.max((p + q).abs()));
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_bracket(v: &[Expr], w: &[Expr], x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let h = 1e-5;
        let ev = |f: &[Expr], p: &[f64]| f.iter().map(|e| e.eval(p)).collect::<Vec<f64>>();
        // (V . grad) W by central differences along V(x)
        let dir = |a: &[Expr], b: &[Expr]| {
            let va = ev(a, x);
            let up: Vec<f64> = (0..d).map(|i| x[i] + h * va[i]).collect();
            let dn: Vec<f64> = (0..d).map(|i| x[i] - h * va[i]).collect();
            ev(b, &up).iter().zip(ev(b, &dn)).map(|(p, q)| (p - q) / (2.0 * h)).collect::<Vec<f64>>()
        };
        dir(v, w).iter().zip(dir(w, v)).map(|(p, q)| p - q).collect()
    }

    fn sample_set() -> VectorFieldSet {
        VectorFieldSet::parse(
            3,
            &[
                vec!["sin(x2)", "x1*x3", "1"],
                vec!["x3^2", "cos(x1) - x2", "exp(0.1*x1)"],
                vec!["x2", "-x1", "0.5*x3"],
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn bracket_examples() {
        let f = sample_set();
        let v = f.field(0);
        assert!(lie_bracket(v, v).iter().all(Expr::is_zero));

        let a = vec![1.0, 2.0, -1.0, 0.5];
        let b = vec![0.0, -1.0, 3.0, 2.0];
        let lin = VectorFieldSet::linear(2, &[a.clone(), b.clone()]).unwrap();
        let br = lin.bracket(LieWord::Pair(0, 1)).unwrap();
        let x = [0.3, -1.2];
        // (BA - AB) x
        let ab = [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]];
        let ba = [b[0] * a[0] + b[1] * a[2], b[0] * a[1] + b[1] * a[3], b[2] * a[0] + b[3] * a[2], b[2] * a[1] + b[3] * a[3]];
        for r in 0..2 {
            let want = (ba[2 * r] - ab[2 * r]) * x[0] + (ba[2 * r + 1] - ab[2 * r + 1]) * x[1];
            assert!((br[r].eval(&x) - want).abs() < 1e-14);
        }

        let c = VectorFieldSet::parse(2, &[vec!["1", "0"], vec!["0", "x1"]], None).unwrap();
        assert_eq!(c.bracket(LieWord::Pair(0, 1)).unwrap(), &vec![Expr::Const(0.0), Expr::Const(1.0)]);
    }

    #[test]
    fn symbolic_brackets_match_finite_differences() {
        let f = sample_set();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let points: Vec<Vec<f64>> = (0..100).map(|_| (0..3).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        for (j, k) in [(0, 1), (1, 2), (2, 0)] {
            let sym = f.bracket(LieWord::Pair(j, k)).unwrap();
            for x in &points {
                let fd = fd_bracket(f.field(j), f.field(k), x);
                for r in 0..3 {
                    assert!((sym[r].eval(x) - fd[r]).abs() < 1e-6, "[{j},{k}] at {x:?}");
                }
            }
        }
        assert!(f.antisymmetry_residual(&points) < 1e-10);
        let inner = f.bracket(LieWord::Pair(1, 2)).unwrap().clone();
        let triple = f.bracket(LieWord::Triple(0, 1, 2)).unwrap();
        for x in points.iter().take(20) {
            let fd = fd_bracket(f.field(0), &inner, x);
            for r in 0..3 {
                assert!((triple[r].eval(x) - fd[r]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            VectorFieldSet::parse(2, &[vec!["x3", "0"]], None),
            Err(Error::VariableOutOfRange { index: 3, dim: 2 })
        ));
        assert!(VectorFieldSet::parse(2, &[vec!["x1"]], None).is_err());
        assert!(VectorFieldSet::parse(1, &[vec!["x1 +"]], None).is_err());
    }
}
