//! A small arithmetic-expression grammar with symbolic differentiation.
//!
//! Grammar (two variables, by default `x` and `z`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := number | var | fn '(' expr ')' | 'pow' '(' expr ',' expr ')' | '(' expr ')'
//! fn     := 'sin' | 'cos' | 'exp'
//! ```
//!
//! Potentials and surface parameters in config files are written in this
//! grammar; symbolic partials keep finite-difference noise out of analytic
//! slopes.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Arc<Expr> {
        Arc::new(Expr::Num(v))
    }

    pub fn var(i: usize) -> Arc<Expr> {
        Arc::new(Expr::Var(i))
    }

    pub fn add(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Add(a, b))
    }

    pub fn sub(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Sub(a, b))
    }

    pub fn mul(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Mul(a, b))
    }

    pub fn sin(a: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Sin(a))
    }

    pub fn cos(a: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Cos(a))
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => vars[*i],
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, b) => a.eval(vars).powf(b.eval(vars)),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Sin(a) => a.eval(vars).sin(),
            Expr::Cos(a) => a.eval(vars).cos(),
            Expr::Exp(a) => a.eval(vars).exp(),
        }
    }

    /// Symbolic partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> Arc<Expr> {
        use Expr::*;
        match self {
            Num(_) => Expr::num(0.0),
            Var(j) => Expr::num(if *j == i { 1.0 } else { 0.0 }),
            Add(a, b) => Expr::add(a.diff(i), b.diff(i)),
            Sub(a, b) => Expr::sub(a.diff(i), b.diff(i)),
            Mul(a, b) => Expr::add(
                Expr::mul(a.diff(i), b.clone()),
                Expr::mul(a.clone(), b.diff(i)),
            ),
            Div(a, b) => Arc::new(Div(
                Expr::sub(
                    Expr::mul(a.diff(i), b.clone()),
                    Expr::mul(a.clone(), b.diff(i)),
                ),
                Expr::mul(b.clone(), b.clone()),
            )),
            Pow(a, b) => match &**b {
                // b·a^(b−1)·a'; the grammar has no ln, so variable exponents
                // are rejected rather than mis-differentiated
                Num(n) => Expr::mul(
                    Expr::mul(Expr::num(*n), Arc::new(Pow(a.clone(), Expr::num(n - 1.0)))),
                    a.diff(i),
                ),
                _ => panic!("pow with a non-constant exponent cannot be differentiated"),
            },
            Neg(a) => Arc::new(Neg(a.diff(i))),
            Sin(a) => Expr::mul(Expr::cos(a.clone()), a.diff(i)),
            Cos(a) => Arc::new(Neg(Expr::mul(Expr::sin(a.clone()), a.diff(i)))),
            Exp(a) => Expr::mul(Arc::new(Exp(a.clone())), a.diff(i)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "v{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "pow({a}, {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expr(format!(
                "expected {:?} at byte {}",
                c as char, self.pos
            )))
        }
    }

    fn expr(&mut self) -> Result<Arc<Expr>> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    node = Expr::add(node, self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    node = Expr::sub(node, self.term()?);
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Arc<Expr>> {
        let mut node = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    node = Expr::mul(node, self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    node = Arc::new(Expr::Div(node, self.unary()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn unary(&mut self) -> Result<Arc<Expr>> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Arc::new(Expr::Neg(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Arc<Expr>> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            other => Err(Error::Expr(format!("unexpected token {other:?}"))),
        }
    }

    fn number(&mut self) -> Result<Arc<Expr>> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                self.pos += 1;
                if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::num)
            .map_err(|_| Error::Expr(format!("bad number {text:?}")))
    }

    fn ident(&mut self) -> Result<Arc<Expr>> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            return Ok(Expr::var(i));
        }
        match name {
            "sin" | "cos" | "exp" => {
                self.eat(b'(')?;
                let arg = self.expr()?;
                self.eat(b')')?;
                Ok(match name {
                    "sin" => Expr::sin(arg),
                    "cos" => Expr::cos(arg),
                    _ => Arc::new(Expr::Exp(arg)),
                })
            }
            "pow" => {
                self.eat(b'(')?;
                let a = self.expr()?;
                self.eat(b',')?;
                let b = self.expr()?;
                self.eat(b')')?;
                Ok(Arc::new(Expr::Pow(a, b)))
            }
            _ => Err(Error::Expr(format!("unknown identifier {name:?}"))),
        }
    }
}

/// Parse an expression over the given variable names.
pub fn parse(src: &str, vars: &[&str]) -> Result<Arc<Expr>> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, vars };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Expr(format!("trailing input at byte {}", p.pos)));
    }
    Ok(e)
}

/// Parse over the default surface variables `x`, `z`.
pub fn parse_xz(src: &str) -> Result<Arc<Expr>> {
    parse(src, &["x", "z"])
}
