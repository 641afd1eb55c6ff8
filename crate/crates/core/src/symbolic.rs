//! Small complex-valued formula language used to describe symbols and magnitude laws.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary | primary)*     juxtaposition multiplies
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' unary)?
//! primary := number ['i'] | 'i' | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables: `x` (space, in `[0,1]`), `t` or `theta` (frequency, in `[-pi,pi]`) and `n`
//! (matrix size). Constants: `pi`, `e`, `i`. Functions: `sin cos tan sinh cosh tanh exp
//! log ln sqrt abs arg re im conj pow min max`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Theta,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Arg,
    Re,
    Im,
    Conj,
    Pow,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "sinh" => (Func::Sinh, 1),
            "cosh" => (Func::Cosh, 1),
            "tanh" => (Func::Tanh, 1),
            "exp" => (Func::Exp, 1),
            "log" | "ln" => (Func::Log, 1),
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "arg" => (Func::Arg, 1),
            "re" => (Func::Re, 1),
            "im" => (Func::Im, 1),
            "conj" => (Func::Conj, 1),
            "pow" => (Func::Pow, 2),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(C64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// Parsed formula. Cheap to clone; evaluation is pure.
#[derive(Clone)]
pub struct Formula {
    source: Arc<str>,
    root: Arc<Node>,
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({:?})", &*self.source)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Variable assignment for [`Formula::eval`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Vars {
    pub x: f64,
    pub theta: f64,
    pub n: f64,
}

impl Formula {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self {
            source: source.into(),
            root: Arc::new(root),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, vars: Vars) -> C64 {
        eval(&self.root, &vars)
    }

    pub fn eval_real(&self, vars: Vars) -> f64 {
        self.eval(vars).re
    }

    pub fn uses(&self, var: Var) -> bool {
        uses(&self.root, var)
    }

    /// Value of a formula without free variables.
    pub fn constant(&self) -> Option<C64> {
        if self.uses(Var::X) || self.uses(Var::Theta) || self.uses(Var::N) {
            return None;
        }
        Some(self.eval(Vars::default()))
    }
}

/// Parses a complex literal such as `2`, `-1.5`, `0-1i`, `i` or `3+4i`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let f = Formula::parse(text)?;
    let value = f.constant().ok_or_else(|| Error::Parse {
        offset: 0,
        message: format!("`{text}` is not a constant"),
    })?;
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("constant `{text}` evaluates to {value}")));
    }
    Ok(value)
}

fn uses(node: &Node, var: Var) -> bool {
    match node {
        Node::Const(_) => false,
        Node::Var(v) => *v == var,
        Node::Neg(a) => uses(a, var),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            uses(a, var) || uses(b, var)
        }
        Node::Call(_, args) => args.iter().any(|a| uses(a, var)),
    }
}

fn pow(base: C64, exp: C64) -> C64 {
    if exp.im == 0.0 {
        if exp.re.fract() == 0.0 && exp.re.abs() < 1024.0 {
            return base.powi(exp.re as i32);
        }
        if base.im == 0.0 && base.re >= 0.0 {
            return C64::new(base.re.powf(exp.re), 0.0);
        }
    }
    if base == C64::new(0.0, 0.0) {
        return base;
    }
    base.powc(exp)
}

fn eval(node: &Node, v: &Vars) -> C64 {
    match node {
        Node::Const(c) => *c,
        Node::Var(Var::X) => C64::new(v.x, 0.0),
        Node::Var(Var::Theta) => C64::new(v.theta, 0.0),
        Node::Var(Var::N) => C64::new(v.n, 0.0),
        Node::Neg(a) => -eval(a, v),
        Node::Add(a, b) => eval(a, v) + eval(b, v),
        Node::Sub(a, b) => eval(a, v) - eval(b, v),
        Node::Mul(a, b) => eval(a, v) * eval(b, v),
        Node::Div(a, b) => eval(a, v) / eval(b, v),
        Node::Pow(a, b) => pow(eval(a, v), eval(b, v)),
        Node::Call(f, args) => {
            let a = eval(&args[0], v);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Tanh => a.tanh(),
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => C64::new(a.norm(), 0.0),
                Func::Arg => C64::new(a.arg(), 0.0),
                Func::Re => C64::new(a.re, 0.0),
                Func::Im => C64::new(a.im, 0.0),
                Func::Conj => a.conj(),
                Func::Pow => pow(a, eval(&args[1], v)),
                Func::Min => {
                    let b = eval(&args[1], v);
                    C64::new(a.re.min(b.re), 0.0)
                }
                Func::Max => {
                    let b = eval(&args[1], v);
                    C64::new(a.re.max(b.re), 0.0)
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(c) if c == b'(' || c.is_ascii_alphabetic()) {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.error(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| Error::Parse {
            offset: start,
            message: format!("invalid number `{text}`"),
        })?;
        // imaginary literal: `2i`, but not the start of an identifier such as `2in`
        if self.pos < self.src.len()
            && self.src[self.pos] == b'i'
            && !self
                .src
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
            return Ok(Node::Const(C64::new(0.0, value)));
        }
        Ok(Node::Const(C64::new(value, 0.0)))
    }

    fn ident(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if self.peek() == Some(b'(') {
            let (func, arity) = Func::lookup(name).ok_or_else(|| Error::Parse {
                offset: start,
                message: format!("unknown function `{name}`"),
            })?;
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.error("expected `)` after function arguments"));
            }
            if args.len() != arity {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("`{name}` takes {arity} argument(s), got {}", args.len()),
                });
            }
            return Ok(Node::Call(func, args));
        }
        Ok(match name {
            "x" => Node::Var(Var::X),
            "t" | "theta" => Node::Var(Var::Theta),
            "n" => Node::Var(Var::N),
            "pi" => Node::Const(C64::new(std::f64::consts::PI, 0.0)),
            "e" => Node::Const(C64::new(std::f64::consts::E, 0.0)),
            "i" => Node::Const(C64::new(0.0, 1.0)),
            _ => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unknown identifier `{name}`"),
                })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(src: &str, x: f64, theta: f64, n: f64) -> C64 {
        Formula::parse(src).unwrap().eval(Vars { x, theta, n })
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(at("1+2*3", 0.0, 0.0, 0.0), C64::new(7.0, 0.0));
        assert_eq!(at("2^3^2", 0.0, 0.0, 0.0), C64::new(512.0, 0.0));
        assert_eq!(at("-2^2", 0.0, 0.0, 0.0), C64::new(-4.0, 0.0));
        assert_eq!(at("(1+2)(3)", 0.0, 0.0, 0.0), C64::new(9.0, 0.0));
        assert!((at("2*cos(t)", 0.0, 1.0, 0.0).re - 2.0 * 1f64.cos()).abs() < 1e-15);
        assert!((at("n^0.4", 0.0, 0.0, 32.0).re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0-1i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("3+4i").unwrap(), C64::new(3.0, 4.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("2.5e-1").unwrap(), C64::new(0.25, 0.0));
        let z = at("2*exp(2*pi*i*x)", 0.25, 0.0, 0.0);
        assert!((z - C64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn variable_tracking() {
        let f = Formula::parse("x*cos(theta)").unwrap();
        assert!(f.uses(Var::X) && f.uses(Var::Theta) && !f.uses(Var::N));
        assert_eq!(Formula::parse("2*pi").unwrap().constant().unwrap().re, 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match Formula::parse("1 + foo(2)") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(Formula::parse("(1+2").is_err());
        assert!(Formula::parse("1 2 )").is_err());
        assert!(Formula::parse("pow(1)").is_err());
    }
}
