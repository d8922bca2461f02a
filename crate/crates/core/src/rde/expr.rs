//! Expression trees for vector-field components.

use std::fmt;

/// Unary functions available in the field language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        }
    }
}

/// Expression over the state variables. `Var(i)` is the 0-based index of `x{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

use Expr::*;

impl Expr {
    pub fn zero() -> Expr {
        Const(0.0)
    }

    pub fn var(i: usize) -> Expr {
        Var(i)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Const(c) if *c == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Const(c) => *c,
            Var(i) => x[*i],
            Add(a, b) => a.eval(x) + b.eval(x),
            Sub(a, b) => a.eval(x) - b.eval(x),
            Mul(a, b) => a.eval(x) * b.eval(x),
            Neg(a) => -a.eval(x),
            Pow(a, n) => a.eval(x).powi(*n as i32),
            Call(f, a) => f.apply(a.eval(x)),
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Const(_) => None,
            Var(i) => Some(*i),
            Add(a, b) | Sub(a, b) | Mul(a, b) => a.max_var().max(b.max_var()),
            Neg(a) | Pow(a, _) | Call(_, a) => a.max_var(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Const(_) | Var(_) => 1,
            Add(a, b) | Sub(a, b) | Mul(a, b) => 1 + a.node_count() + b.node_count(),
            Neg(a) | Pow(a, _) | Call(_, a) => 1 + a.node_count(),
        }
    }

    /// Symbolic partial derivative with respect to `Var(i)`, simplified.
    pub fn diff(&self, i: usize) -> Expr {
        let d = match self {
            Const(_) => Const(0.0),
            Var(j) => Const(if *j == i { 1.0 } else { 0.0 }),
            Add(a, b) => add(a.diff(i), b.diff(i)),
            Sub(a, b) => sub(a.diff(i), b.diff(i)),
            Mul(a, b) => add(mul(a.diff(i), (**b).clone()), mul((**a).clone(), b.diff(i))),
            Neg(a) => neg(a.diff(i)),
            Pow(a, n) => match n {
                0 => Const(0.0),
                1 => a.diff(i),
                _ => mul(mul(Const(*n as f64), pow((**a).clone(), n - 1)), a.diff(i)),
            },
            Call(f, a) => {
                let inner = a.diff(i);
                let outer = match f {
                    Func::Sin => call(Func::Cos, (**a).clone()),
                    Func::Cos => neg(call(Func::Sin, (**a).clone())),
                    Func::Exp => call(Func::Exp, (**a).clone()),
                };
                mul(outer, inner)
            }
        };
        d.simplify()
    }

    /// Constant folding and the usual identities for 0 and 1; `a - a` becomes 0.
    pub fn simplify(&self) -> Expr {
        match self {
            Const(_) | Var(_) => self.clone(),
            Add(a, b) => add(a.simplify(), b.simplify()),
            Sub(a, b) => sub(a.simplify(), b.simplify()),
            Mul(a, b) => mul(a.simplify(), b.simplify()),
            Neg(a) => neg(a.simplify()),
            Pow(a, n) => pow(a.simplify(), *n),
            Call(f, a) => call(*f, a.simplify()),
        }
    }
}

// Smart constructors; each assumes simplified arguments.

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Const(x), Const(y)) => Const(x + y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => b,
        (a, Neg(b)) => sub(a, *b),
        (a, Const(y)) if y < 0.0 => sub(a, Const(-y)),
        (a, b) => Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Const(x), Const(y)) => Const(x - y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => neg(b),
        (a, b) if a == b => Const(0.0),
        (a, Neg(b)) => add(a, *b),
        (a, b) => Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Const(x), Const(y)) => Const(x * y),
        (a, b) if a.is_zero() || b.is_zero() => Const(0.0),
        (Const(x), b) if x == 1.0 => b,
        (a, Const(y)) if y == 1.0 => a,
        (Const(x), b) if x == -1.0 => neg(b),
        (a, Const(y)) if y == -1.0 => neg(a),
        (a, Const(y)) => mul(Const(y), a),
        (Const(x), Mul(b, c)) if matches!(*b, Const(_)) => {
            let Const(y) = *b else { unreachable!() };
            mul(Const(x * y), *c)
        }
        (Neg(a), Neg(b)) => mul(*a, *b),
        (Neg(a), b) => neg(mul(*a, b)),
        (a, Neg(b)) => neg(mul(a, *b)),
        (a, b) => Mul(Box::new(a), Box::new(b)),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Const(x) => Const(-x),
        Neg(b) => *b,
        Sub(b, c) => Sub(c, b),
        a => Neg(Box::new(a)),
    }
}

pub fn pow(a: Expr, n: u32) -> Expr {
    match (a, n) {
        (_, 0) => Const(1.0),
        (a, 1) => a,
        (Const(x), n) => Const(x.powi(n as i32)),
        (a, n) => Pow(Box::new(a), n),
    }
}

pub fn call(f: Func, a: Expr) -> Expr {
    match a {
        Const(x) => Const(f.apply(x)),
        a => Call(f, Box::new(a)),
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Add(..) | Sub(..) => 1,
        Neg(_) => 2,
        Mul(..) => 3,
        Pow(..) => 4,
        Const(c) if *c < 0.0 || c.is_sign_negative() => 2,
        _ => 5,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        write!(f, "{}", c as i64)
    } else {
        write!(f, "{c:?}")
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical text form; parses back to an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const(c) if c.is_sign_negative() => {
                write!(f, "-")?;
                write_const(f, -c)
            }
            Const(c) => write_const(f, *c),
            Var(i) => write!(f, "x{}", i + 1),
            Add(a, b) | Sub(a, b) => {
                write!(f, "{a}")?;
                write!(f, "{}", if matches!(self, Add(..)) { " + " } else { " - " })?;
                write_wrapped(f, b, prec(b) <= 2)
            }
            Mul(a, b) => {
                write_wrapped(f, a, prec(a) < 3)?;
                write!(f, "*")?;
                write_wrapped(f, b, prec(b) <= 3)
            }
            Neg(a) => {
                write!(f, "-")?;
                write_wrapped(f, a, prec(a) <= 3)
            }
            Pow(a, n) => {
                write_wrapped(f, a, prec(a) <= 4)?;
                write!(f, "^{n}")
            }
            Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Var(i)
    }

    #[test]
    fn eval_and_diff() {
        // x1*x2 - sin(x1)
        let e = sub(mul(x(0), x(1)), call(Func::Sin, x(0)));
        let p = [0.7, -1.3];
        assert!((e.eval(&p) - (0.7 * -1.3 - 0.7f64.sin())).abs() < 1e-15);
        let d0 = e.diff(0);
        assert!((d0.eval(&p) - (-1.3 - 0.7f64.cos())).abs() < 1e-15);
        assert_eq!(e.diff(1), x(0));
        let q = pow(add(x(0), Const(2.0)), 3);
        assert!((q.diff(0).eval(&p) - 3.0 * 2.7f64.powi(2)).abs() < 1e-12);
        assert_eq!(q.diff(1), Const(0.0));
        let c = call(Func::Exp, mul(Const(2.0), x(1)));
        assert!((c.diff(1).eval(&p) - 2.0 * (-2.6f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn simplify_identities() {
        let e = Sub(Box::new(mul(x(0), x(1))), Box::new(mul(x(0), x(1))));
        assert_eq!(e.simplify(), Const(0.0));
        assert_eq!(mul(Const(1.0), x(2)), x(2));
        assert_eq!(add(Const(0.0), x(2)), x(2));
        assert_eq!(neg(neg(x(0))), x(0));
        assert_eq!(mul(Const(2.0), mul(Const(3.0), x(0))), mul(Const(6.0), x(0)));
        assert_eq!(pow(x(0), 0), Const(1.0));
    }

    #[test]
    fn display_is_minimal() {
        let e = sub(mul(x(0), x(1)), call(Func::Sin, x(0)));
        assert_eq!(e.to_string(), "x1*x2 - sin(x1)");
        let e = Mul(Box::new(add(x(0), Const(1.0))), Box::new(Pow(Box::new(x(1)), 2)));
        assert_eq!(e.to_string(), "(x1 + 1)*x2^2");
        assert_eq!(Const(0.25).to_string(), "0.25");
        assert_eq!(Sub(Box::new(x(0)), Box::new(Sub(Box::new(x(1)), Box::new(x(2))))).to_string(), "x1 - (x2 - x3)");
    }
}
