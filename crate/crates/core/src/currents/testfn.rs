//! Bounded test functions on X given as small expressions.
//!
//! Grammar:
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | atom
//! atom   := number | '(' expr ')' | name '(' arg ')'
//! ```
//! Coordinate functions take one of `x`, `y`, `z`: `fs` (`|w₁|²/‖w‖²`),
//! `reratio` and `imratio` (`Re`, `Im` of `w̄₀w₁/‖w‖²`) are bounded, `re` and
//! `im` of the affine coordinate are not. `clip(e)` clamps to `[-1, 1]` and is
//! always bounded. Expressions that are not bounded are rejected.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CurrentsError;
use crate::surface::SurfacePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CoordFn {
    Fs,
    ReRatio,
    ImRatio,
    Re,
    Im,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Const(f64),
    Coord(CoordFn, usize),
    Clip(Box<Node>),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, p: &SurfacePoint) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Coord(f, j) => {
                let w = p.pair(*j);
                let n = w[0].norm_sqr() + w[1].norm_sqr();
                let v = match f {
                    CoordFn::Fs => w[1].norm_sqr() / n,
                    CoordFn::ReRatio => (w[0].conj() * w[1]).re / n,
                    CoordFn::ImRatio => (w[0].conj() * w[1]).im / n,
                    CoordFn::Re => (w[0].conj() * w[1]).re / w[0].norm_sqr(),
                    CoordFn::Im => (w[0].conj() * w[1]).im / w[0].norm_sqr(),
                };
                if v.is_nan() {
                    0.0
                } else {
                    v
                }
            }
            Node::Clip(e) => {
                let v = e.eval(p);
                if v.is_nan() {
                    0.0
                } else {
                    v.clamp(-1.0, 1.0)
                }
            }
            Node::Neg(e) => -e.eval(p),
            Node::Add(a, b) => a.eval(p) + b.eval(p),
            Node::Sub(a, b) => a.eval(p) - b.eval(p),
            Node::Mul(a, b) => a.eval(p) * b.eval(p),
        }
    }

    /// A bound on `|value|`, or `None` when unbounded.
    fn bound(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(c.abs()),
            Node::Coord(CoordFn::Fs, _) => Some(1.0),
            Node::Coord(CoordFn::ReRatio | CoordFn::ImRatio, _) => Some(0.5),
            Node::Coord(CoordFn::Re | CoordFn::Im, _) => None,
            Node::Clip(_) => Some(1.0),
            Node::Neg(e) => e.bound(),
            Node::Add(a, b) | Node::Sub(a, b) => Some(a.bound()? + b.bound()?),
            Node::Mul(a, b) => Some(a.bound()? * b.bound()?),
        }
    }
}

/// A parsed, bounded test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TestFunction {
    source: String,
    #[serde(skip)]
    node: Option<Node>,
}

impl TestFunction {
    pub fn parse(src: &str) -> Result<Self, CurrentsError> {
        let mut p = Parser { s: src.as_bytes(), i: 0 };
        let node = p.expr()?;
        p.ws();
        if p.i != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        if node.bound().is_none() {
            return Err(CurrentsError::Unbounded(src.to_string()));
        }
        Ok(Self { source: src.trim().to_string(), node: Some(node) })
    }

    pub fn eval(&self, p: &SurfacePoint) -> f64 {
        self.node.as_ref().expect("parsed").eval(p)
    }

    pub fn bound(&self) -> f64 {
        self.node.as_ref().and_then(Node::bound).expect("parsed functions are bounded")
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl FromStr for TestFunction {
    type Err = CurrentsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for TestFunction {
    type Error = CurrentsError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s)
    }
}

impl From<TestFunction> for String {
    fn from(t: TestFunction) -> String {
        t.source
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// The fixed five-function panel used by the invariance checks. Functions of `z`
/// alone are left out: the dVol sampler keeps both `z`-sheets, which `T` swaps
/// in that coordinate, so their invariance would hold by construction.
pub const PANEL: [&str; 5] = ["fs(x)", "reratio(y)", "fs(y) * imratio(z)", "fs(x) - fs(z)", "clip(re(x))"];

pub fn panel() -> Vec<TestFunction> {
    PANEL.iter().map(|s| TestFunction::parse(s).expect("panel entries parse")).collect()
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> CurrentsError {
        CurrentsError::Parse { position: self.i, message: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), CurrentsError> {
        if self.peek() == Some(c) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Node, CurrentsError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.i += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, CurrentsError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(b'*') {
            self.i += 1;
            lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, CurrentsError> {
        if self.peek() == Some(b'-') {
            self.i += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn ident(&mut self) -> &str {
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_alphabetic() {
            self.i += 1;
        }
        std::str::from_utf8(&self.s[start..self.i]).expect("ascii")
    }

    fn atom(&mut self) -> Result<Node, CurrentsError> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.i;
                while self.i < self.s.len()
                    && (self.s[self.i].is_ascii_digit()
                        || matches!(self.s[self.i], b'.' | b'e' | b'E')
                        || (matches!(self.s[self.i], b'+' | b'-') && matches!(self.s[self.i - 1], b'e' | b'E')))
                {
                    self.i += 1;
                }
                let text = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
                text.parse::<f64>().map(Node::Const).map_err(|_| self.err("malformed number"))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let at = self.i;
                let name = self.ident().to_string();
                self.expect(b'(')?;
                let node = if name == "clip" {
                    Node::Clip(Box::new(self.expr()?))
                } else {
                    let f = match name.as_str() {
                        "fs" => CoordFn::Fs,
                        "reratio" => CoordFn::ReRatio,
                        "imratio" => CoordFn::ImRatio,
                        "re" => CoordFn::Re,
                        "im" => CoordFn::Im,
                        _ => {
                            self.i = at;
                            return Err(self.err(&format!("unknown function '{name}'")));
                        }
                    };
                    self.ws();
                    let j = match self.ident() {
                        "x" => 0,
                        "y" => 1,
                        "z" => 2,
                        _ => return Err(self.err("expected one of x, y, z")),
                    };
                    Node::Coord(f, j)
                };
                self.expect(b')')?;
                Ok(node)
            }
            _ => Err(self.err("expected a number, '(' or a function")),
        }
    }
}
