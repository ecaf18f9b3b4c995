//! Symbolic expressions over chart coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted tree. All downstream
//! quantities (metric components, vector fields, frames, spinor components)
//! are built from it. Construction through the arithmetic helpers
//! ([`Expr::add`], [`Expr::mul`], ...) applies local folding so that
//! derivative chains stay small and exact zeros stay exact.

mod diff;
mod eval;
mod num;
mod parse;
pub mod random;
mod simplify;

use std::fmt;
use std::sync::Arc;

pub use eval::{EvalError, PointBinding};
pub use num::Num;
pub use parse::{parse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unary {
    Neg,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sqrt,
}

impl Unary {
    pub const FUNCTIONS: [Unary; 8] = [
        Unary::Sin,
        Unary::Cos,
        Unary::Tan,
        Unary::Sinh,
        Unary::Cosh,
        Unary::Exp,
        Unary::Ln,
        Unary::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Unary::Neg => "-",
            Unary::Sin => "sin",
            Unary::Cos => "cos",
            Unary::Tan => "tan",
            Unary::Sinh => "sinh",
            Unary::Cosh => "cosh",
            Unary::Exp => "exp",
            Unary::Ln => "ln",
            Unary::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Unary> {
        Self::FUNCTIONS.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Num),
    Sym(Arc<str>),
    Unary(Unary, Expr),
    Binary(BinOp, Expr, Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn constant(n: impl Into<Num>) -> Self {
        Self::from_node(Node::Const(n.into()))
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Num::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(Num::ratio(n, d))
    }

    pub fn float(x: f64) -> Self {
        Self::constant(Num::float(x))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn sym(name: &str) -> Self {
        Self::from_node(Node::Sym(Arc::from(name)))
    }

    /// Raw node constructors; no folding.
    pub fn raw_unary(op: Unary, arg: Expr) -> Self {
        Self::from_node(Node::Unary(op, arg))
    }

    pub fn raw_binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Self::from_node(Node::Binary(op, lhs, rhs))
    }

    pub fn as_const(&self) -> Option<Num> {
        match self.node() {
            Node::Const(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Num::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(Num::is_one)
    }

    pub fn depends_on(&self, symbol: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Sym(s) => &**s == symbol,
            Node::Unary(_, a) => a.depends_on(symbol),
            Node::Binary(_, a, b) => a.depends_on(symbol) || b.depends_on(symbol),
        }
    }

    pub fn free_symbols(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e.node() {
                Node::Const(_) => {}
                Node::Sym(s) => {
                    if !out.iter().any(|o| o == &**s) {
                        out.push(s.to_string());
                    }
                }
                Node::Unary(_, a) => walk(a, out),
                Node::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => 1,
            Node::Unary(_, a) => 1 + a.size(),
            Node::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), |acc, t| acc.add(&t))
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

// Printing follows the parser's precedence levels so that the output reparses
// to the same tree: 1 = additive, 2 = multiplicative, 3 = power, 4 = base.
fn level(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(n) if n.is_negative() => 4,
        Node::Const(Num::Rational(r)) if !r.is_integer() => 2,
        Node::Const(_) | Node::Sym(_) | Node::Unary(..) => 4,
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Binary(BinOp::Pow, ..) => 3,
    }
}

fn write_at(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(n) => {
                if n.is_negative() {
                    f.write_str("(-")?;
                    num::fmt_magnitude(*n, f)?;
                    f.write_str(")")
                } else {
                    num::fmt_magnitude(*n, f)
                }
            }
            Node::Sym(s) => f.write_str(s),
            Node::Unary(Unary::Neg, a) => {
                f.write_str("-")?;
                write_at(a, 4, f)
            }
            Node::Unary(func, a) => write!(f, "{}({a})", func.name()),
            Node::Binary(op, a, b) => {
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (4, 3),
                };
                write_at(a, lmin, f)?;
                match op {
                    BinOp::Pow => write!(f, "^")?,
                    _ => write!(f, " {} ", op.symbol())?,
                }
                write_at(b, rmin, f)
            }
        }
    }
}
