//! Small arithmetic expression language for densities, potentials and
//! metric profiles.
//!
//! Radial expressions may only mention Weyl-invariant generators:
//! `r2` (squared Killing norm), `p<k>` (power sums) and `e<k>` (elementary
//! symmetric functions) of the spectral weights of a chamber point.
//! Profile expressions use the single variable `z`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    R2,
    Elem(u32),
    Power(u32),
    Z,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::R2 => write!(f, "r2"),
            Var::Elem(k) => write!(f, "e{k}"),
            Var::Power(k) => write!(f, "p{k}"),
            Var::Z => write!(f, "z"),
        }
    }
}

/// Which identifiers an expression may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSet {
    Radial,
    Profile,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("expression error at column {column}: {message}")]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Arithmetic needed to evaluate an expression.
pub trait Scalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    /// A constant of the same shape as `self`.
    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, e: f64) -> Self;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Self {
        Jet::constant(self.n, c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn exp(self) -> Self {
        Jet::exp(self)
    }
    fn ln(self) -> Self {
        Jet::ln(self)
    }
    fn sqrt(self) -> Self {
        Jet::sqrt(self)
    }
    fn sin(self) -> Self {
        Jet::sin(self)
    }
    fn cos(self) -> Self {
        Jet::cos(self)
    }
    fn sinh(self) -> Self {
        Jet::sinh(self)
    }
    fn cosh(self) -> Self {
        Jet::cosh(self)
    }
    fn tanh(self) -> Self {
        Jet::tanh(self)
    }
    fn powi(self, k: i32) -> Self {
        if k < 0 {
            self.lift(1.0) / Jet::powi(self, -k)
        } else {
            Jet::powi(self, k)
        }
    }
    fn powf(self, e: f64) -> Self {
        Jet::powf(self, e)
    }
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Node,
    source: String,
    vars: BTreeSet<Var>,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(source: &str, set: VarSet) -> Result<Expr, ExprError> {
        let tokens = lex(source)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            set,
            vars: BTreeSet::new(),
        };
        let root = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(ExprError {
                column: t.column,
                message: format!("unexpected '{}'", t.text),
            });
        }
        Ok(Expr {
            root: fold(root),
            source: source.trim().to_string(),
            vars: p.vars,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &BTreeSet<Var> {
        &self.vars
    }

    /// Evaluates with `lookup` supplying variable values; `shape` fixes the
    /// representation of constants.
    pub fn eval<T: Scalar>(&self, shape: T, lookup: &impl Fn(Var) -> T) -> T {
        eval_node(&self.root, shape, lookup)
    }

    pub fn eval_f64(&self, lookup: &impl Fn(Var) -> f64) -> f64 {
        self.eval(0.0, lookup)
    }
}

/// Collapses subtrees without variables to numbers.
fn fold(n: Node) -> Node {
    let bin = |a: Box<Node>, b: Box<Node>, mk: fn(Box<Node>, Box<Node>) -> Node| {
        let (a, b) = (fold(*a), fold(*b));
        let node = mk(Box::new(a), Box::new(b));
        match &node {
            Node::Add(x, y) | Node::Sub(x, y) | Node::Mul(x, y) | Node::Div(x, y) | Node::Pow(x, y)
                if matches!((&**x, &**y), (Node::Num(_), Node::Num(_))) =>
            {
                Node::Num(eval_node(&node, 0.0, &|_| 0.0))
            }
            _ => node,
        }
    };
    match n {
        Node::Add(a, b) => bin(a, b, Node::Add),
        Node::Sub(a, b) => bin(a, b, Node::Sub),
        Node::Mul(a, b) => bin(a, b, Node::Mul),
        Node::Div(a, b) => bin(a, b, Node::Div),
        Node::Pow(a, b) => bin(a, b, Node::Pow),
        Node::Neg(a) => match fold(*a) {
            Node::Num(v) => Node::Num(-v),
            other => Node::Neg(Box::new(other)),
        },
        Node::Call(f, a) => match fold(*a) {
            Node::Num(v) => Node::Num(eval_node(&Node::Call(f, Box::new(Node::Num(v))), 0.0, &|_| 0.0)),
            other => Node::Call(f, Box::new(other)),
        },
        leaf => leaf,
    }
}

fn eval_node<T: Scalar>(n: &Node, shape: T, lookup: &impl Fn(Var) -> T) -> T {
    match n {
        Node::Num(c) => shape.lift(*c),
        Node::Var(v) => lookup(*v),
        Node::Neg(a) => -eval_node(a, shape, lookup),
        Node::Add(a, b) => eval_node(a, shape, lookup) + eval_node(b, shape, lookup),
        Node::Sub(a, b) => eval_node(a, shape, lookup) - eval_node(b, shape, lookup),
        Node::Mul(a, b) => eval_node(a, shape, lookup) * eval_node(b, shape, lookup),
        Node::Div(a, b) => eval_node(a, shape, lookup) / eval_node(b, shape, lookup),
        Node::Pow(a, b) => {
            let base = eval_node(a, shape, lookup);
            if let Node::Num(e) = **b {
                if e.fract() == 0.0 && e.abs() < 64.0 {
                    return base.powi(e as i32);
                }
                return base.powf(e);
            }
            let e = eval_node(b, shape, lookup);
            (e * base.ln()).exp()
        }
        Node::Call(f, a) => {
            let x = eval_node(a, shape, lookup);
            match f {
                Func::Exp => x.exp(),
                Func::Log => x.ln(),
                Func::Sqrt => x.sqrt(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    column: usize,
    kind: TokKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TokKind {
    Num(f64),
    Ident,
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| ExprError {
                column,
                message: format!("malformed number '{text}'"),
            })?;
            out.push(Token {
                text,
                column,
                kind: TokKind::Num(v),
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                text: chars[start..i].iter().collect(),
                column,
                kind: TokKind::Ident,
            });
        } else if "+-*/^()".contains(c) {
            out.push(Token {
                text: c.to_string(),
                column,
                kind: TokKind::Op(c),
            });
            i += 1;
        } else {
            return Err(ExprError {
                column,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    set: VarSet,
    vars: BTreeSet<Var>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn end_column(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.column + t.text.len())
            .unwrap_or(1)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some(t) if t.kind == TokKind::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat_op('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_op('^') {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ExprError {
                column: self.end_column(),
                message: "unexpected end of expression".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokKind::Num(v) => Ok(Node::Num(v)),
            TokKind::Op('(') => {
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err(ExprError {
                        column: self.peek().map(|t| t.column).unwrap_or(self.end_column()),
                        message: "expected ')'".into(),
                    });
                }
                Ok(inner)
            }
            TokKind::Op(c) => Err(ExprError {
                column: tok.column,
                message: format!("unexpected '{c}'"),
            }),
            TokKind::Ident => {
                if let Some(f) = function(&tok.text) {
                    if !self.eat_op('(') {
                        return Err(ExprError {
                            column: tok.column,
                            message: format!("function '{}' needs an argument", tok.text),
                        });
                    }
                    let arg = self.expr()?;
                    if !self.eat_op(')') {
                        return Err(ExprError {
                            column: self.peek().map(|t| t.column).unwrap_or(self.end_column()),
                            message: "expected ')'".into(),
                        });
                    }
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                if tok.text == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                let var = variable(&tok.text, self.set).ok_or_else(|| ExprError {
                    column: tok.column,
                    message: match self.set {
                        VarSet::Radial => format!(
                            "unknown identifier '{}' (allowed: r2, p<k>, e<k> with 1 <= k <= 12)",
                            tok.text
                        ),
                        VarSet::Profile => {
                            format!("unknown identifier '{}' (allowed: z)", tok.text)
                        }
                    },
                })?;
                self.vars.insert(var);
                Ok(Node::Var(var))
            }
        }
    }
}

fn function(name: &str) -> Option<Func> {
    Some(match name {
        "exp" => Func::Exp,
        "log" | "ln" => Func::Log,
        "sqrt" => Func::Sqrt,
        "sin" => Func::Sin,
        "cos" => Func::Cos,
        "sinh" => Func::Sinh,
        "cosh" => Func::Cosh,
        "tanh" => Func::Tanh,
        _ => return None,
    })
}

fn variable(name: &str, set: VarSet) -> Option<Var> {
    match set {
        VarSet::Profile => (name == "z").then_some(Var::Z),
        VarSet::Radial => {
            if name == "r2" {
                return Some(Var::R2);
            }
            let (head, tail) = name.split_at(1);
            let k: u32 = tail.parse().ok()?;
            if !(1..=12).contains(&k) || tail.starts_with('0') {
                return None;
            }
            match head {
                "e" => Some(Var::Elem(k)),
                "p" => Some(Var::Power(k)),
                _ => None,
            }
        }
    }
}
