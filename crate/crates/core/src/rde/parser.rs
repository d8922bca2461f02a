//! Recursive-descent parser for vector-field components.
//!
//! ```text
//! expr   := '-'? term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := base ('^' uint)?
//! base   := number | 'x' uint | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp
//! ```
//!
//! The optional leading minus is accepted so that printed negative
//! constants parse back.

use super::expr::{Expr, Func};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

/// Parses one component expression. Positions in errors are byte offsets.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.error(format!("unexpected '{}'", p.peek_char())));
    }
    Ok(e)
}

impl Parser<'_> {
    fn error(&self, msg: String) -> Error {
        Error::Syntax { pos: self.pos, msg }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or(' ')
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(b) if b == c => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.error(format!("expected '{}', found '{}'", c as char, self.peek_char()))),
            None => Err(self.error(format!("expected '{}', found end of input", c as char))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let negate = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let literal = matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.');
        let mut lhs = self.term()?;
        if negate {
            lhs = match lhs {
                Expr::Const(c) if literal => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            };
        }
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let n = self.digits();
            if n.is_empty() {
                return Err(self.error("expected an unsigned integer exponent".into()));
            }
            let k: u32 = n.parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: format!("exponent {n} out of range"),
            })?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input".into())),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                if let Some(f) = Func::from_name(word) {
                    self.expect(b'(')?;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                let index = word
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&i| i >= 1);
                match index {
                    Some(i) => Ok(Expr::Var(i - 1)),
                    None => Err(Error::UnknownIdentifier {
                        pos: start,
                        name: word.to_string(),
                    }),
                }
            }
            Some(_) => Err(self.error(format!("unexpected '{}'", self.peek_char()))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        self.digits();
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            self.digits();
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits().is_empty() {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>().map(Expr::Const).map_err(|_| Error::Syntax {
            pos: start,
            msg: format!("malformed number '{text}'"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grammar_examples() {
        assert_eq!(parse_expr("x1").unwrap(), Expr::Var(0));
        let e = parse_expr("x1*x2 - sin(x1)").unwrap();
        match &e {
            Expr::Sub(a, b) => {
                assert!(matches!(**a, Expr::Mul(..)));
                assert!(matches!(**b, Expr::Call(Func::Sin, _)));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_expr(" 2.5e-1 * x3 ^ 2").unwrap().eval(&[0.0, 0.0, 2.0]), 1.0);
        assert_eq!(parse_expr("-x1 + 3").unwrap().eval(&[1.0]), 2.0);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_expr("x1 + * x2") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("tan(x1)"), Err(Error::UnknownIdentifier { pos: 0, .. })));
        assert!(matches!(parse_expr("x0"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse_expr("(x1"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expr("x1 x2"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expr("x1^-2"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr(""), Err(Error::Syntax { .. })));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0usize..3).prop_map(Expr::Var),
            (-50i32..50).prop_map(|k| Expr::Const(k as f64 / 4.0)),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), 0u32..4).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
                (inner, 0usize..3).prop_map(|(a, k)| Expr::Call([Func::Sin, Func::Cos, Func::Exp][k], Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn printer_round_trips(e in arb_expr()) {
            let text = e.to_string();
            let parsed = parse_expr(&text).unwrap();
            prop_assert_eq!(parsed.to_string(), text.clone());
            let p = [0.3, -0.7, 1.1];
            let (a, b) = (e.eval(&p), parsed.eval(&p));
            prop_assert!(a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
        }

        #[test]
        fn parsed_trees_round_trip_exactly(e in arb_expr()) {
            let once = parse_expr(&e.to_string()).unwrap();
            prop_assert_eq!(parse_expr(&once.to_string()).unwrap(), once);
        }

        #[test]
        fn derivative_matches_finite_difference(e in arb_expr(), i in 0usize..3) {
            let p = [0.3, -0.7, 1.1];
            let h = 1e-6;
            let mut up = p;
            let mut down = p;
            up[i] += h;
            down[i] -= h;
            let fd = (e.eval(&up) - e.eval(&down)) / (2.0 * h);
            let sym = e.diff(i).eval(&p);
            prop_assume!(fd.is_finite() && sym.is_finite() && fd.abs() < 1e6 && e.eval(&p).abs() < 1e3);
            prop_assert!((fd - sym).abs() < 1e-4 * sym.abs().max(1.0), "{} vs {}", fd, sym);
        }
    }
}
