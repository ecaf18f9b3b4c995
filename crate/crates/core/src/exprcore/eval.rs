use std::fmt;

use thiserror::Error;

use super::{BinOp, Expr, Node, Unary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain violation in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },
}

/// Ordered coordinate assignment. Lookup is linear; charts have at most a
/// handful of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBinding {
    entries: Vec<(String, f64)>,
}

impl PointBinding {
    pub fn new<S: AsRef<str>>(names: &[S], values: &[f64]) -> Self {
        assert_eq!(names.len(), values.len(), "names and values differ in length");
        PointBinding {
            entries: names
                .iter()
                .map(|n| n.as_ref().to_string())
                .zip(values.iter().copied())
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, v)| *v).collect()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    /// Same names, new values.
    pub fn with_values(&self, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.entries.len());
        PointBinding {
            entries: self
                .entries
                .iter()
                .zip(values)
                .map(|((n, _), v)| (n.clone(), *v))
                .collect(),
        }
    }
}

impl fmt::Display for PointBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(n, v)| format!("{n}={v}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn domain(e: &Expr, reason: &str) -> EvalError {
    EvalError::Domain {
        subexpr: e.to_string(),
        reason: reason.to_string(),
    }
}

impl Expr {
    pub fn evaluate(&self, p: &PointBinding) -> Result<f64, EvalError> {
        let v = match self.node() {
            Node::Const(n) => return Ok(n.to_f64()),
            Node::Sym(s) => return p.get(s).ok_or_else(|| EvalError::Unbound(s.to_string())),
            Node::Unary(op, a) => {
                let x = a.evaluate(p)?;
                match op {
                    Unary::Neg => -x,
                    Unary::Sin => x.sin(),
                    Unary::Cos => x.cos(),
                    Unary::Tan => x.tan(),
                    Unary::Sinh => x.sinh(),
                    Unary::Cosh => x.cosh(),
                    Unary::Exp => x.exp(),
                    Unary::Ln if x > 0.0 => x.ln(),
                    Unary::Ln => return Err(domain(self, "logarithm of a non-positive value")),
                    Unary::Sqrt if x >= 0.0 => x.sqrt(),
                    Unary::Sqrt => return Err(domain(self, "square root of a negative value")),
                }
            }
            Node::Binary(op, a, b) => {
                let x = a.evaluate(p)?;
                let y = b.evaluate(p)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div if y == 0.0 => return Err(domain(self, "division by zero")),
                    BinOp::Div => x / y,
                    BinOp::Pow => pow(self, x, y, b)?,
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain(self, "non-finite result"))
        }
    }
}

fn pow(e: &Expr, x: f64, y: f64, exp: &Expr) -> Result<f64, EvalError> {
    if let Some(k) = exp.as_const().and_then(|n| n.as_integer()) {
        if x == 0.0 && k < 0 {
            return Err(domain(e, "zero to a negative power"));
        }
        if let Ok(k) = i32::try_from(k) {
            return Ok(x.powi(k));
        }
    }
    if x < 0.0 && y.fract() != 0.0 {
        return Err(domain(e, "negative base with fractional exponent"));
    }
    if x == 0.0 && y < 0.0 {
        return Err(domain(e, "zero to a negative power"));
    }
    Ok(x.powf(y))
}
