//! Random expression trees and the finite-difference derivative check used by
//! the round-trip and derivative batteries.

use rand::Rng;

use super::{BinOp, Expr, Node, PointBinding, Unary};

/// Draws an unsimplified tree of depth at most `depth` over `symbols`.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, depth: usize, symbols: &[&str]) -> Expr {
    if depth <= 1 || rng.gen_bool(0.25) {
        return random_leaf(rng, symbols);
    }
    match rng.gen_range(0..10) {
        0..=2 => {
            let op = *[
                Unary::Neg,
                Unary::Sin,
                Unary::Cos,
                Unary::Tan,
                Unary::Sinh,
                Unary::Cosh,
                Unary::Exp,
                Unary::Ln,
                Unary::Sqrt,
            ]
            .get(rng.gen_range(0..9))
            .unwrap();
            Expr::raw_unary(op, random_expr(rng, depth - 1, symbols))
        }
        3..=8 => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][rng.gen_range(0..4)];
            Expr::raw_binary(
                op,
                random_expr(rng, depth - 1, symbols),
                random_expr(rng, depth - 1, symbols),
            )
        }
        _ => {
            let base = random_expr(rng, depth - 1, symbols);
            let exp = if rng.gen_bool(0.8) {
                Expr::ratio(rng.gen_range(-6..=6), 2)
            } else {
                random_expr(rng, (depth - 1).min(2), symbols)
            };
            Expr::raw_binary(BinOp::Pow, base, exp)
        }
    }
}

fn random_leaf<R: Rng + ?Sized>(rng: &mut R, symbols: &[&str]) -> Expr {
    if !symbols.is_empty() && rng.gen_bool(0.6) {
        Expr::sym(symbols[rng.gen_range(0..symbols.len())])
    } else if rng.gen_bool(0.7) {
        Expr::int(rng.gen_range(0..=9))
    } else {
        Expr::ratio(rng.gen_range(1..=9), rng.gen_range(2..=7))
    }
}

/// Largest relative gap between the `1e-3` and `1e-4` central differences at
/// a safe point.
pub const SAFE_LEVEL_GAP: f64 = 1e-5;

/// Central difference at steps `1e-3` and `1e-4`, Richardson-combined.
/// Returns `None` if any evaluation fails.
pub fn richardson_derivative(e: &Expr, p: &PointBinding, symbol: &str) -> Option<f64> {
    let x = p.get(symbol)?;
    let names: Vec<&str> = p.names().collect();
    let idx = names.iter().position(|n| *n == symbol)?;
    let at = |h: f64| -> Option<f64> {
        let mut v = p.values();
        v[idx] = x + h;
        e.evaluate(&p.with_values(&v)).ok()
    };
    let central = |h: f64| -> Option<f64> { Some((at(h)? - at(-h)?) / (2.0 * h)) };
    let coarse = central(1e-3)?;
    let fine = central(1e-4)?;
    Some((100.0 * fine - coarse) / 99.0)
}

/// A point is safe for finite differencing when the expression and its
/// neighbourhood evaluate, stay moderate in size, and the two difference
/// levels agree to a loose tolerance (no singularity within reach).
/// A point is safe for finite differencing when the expression and its
/// neighbourhood evaluate, every subexpression stays moderate in size, and
/// the two difference levels agree closely (no singularity or fast
/// oscillation within reach of the stencil).
pub fn is_safe_point(e: &Expr, p: &PointBinding) -> bool {
    if !intermediates_bounded(e, p, 1e4) {
        return false;
    }
    let names: Vec<String> = p.names().map(str::to_string).collect();
    names.iter().all(|s| {
        let x = p.get(s).unwrap();
        let idx = names.iter().position(|n| n == s).unwrap();
        let at = |h: f64| {
            let mut v = p.values();
            v[idx] = x + h;
            e.evaluate(&p.with_values(&v)).ok()
        };
        let (Some(a), Some(b), Some(c), Some(d)) = (at(1e-3), at(-1e-3), at(1e-4), at(-1e-4))
        else {
            return false;
        };
        let coarse = (a - b) / 2e-3;
        let fine = (c - d) / 2e-4;
        coarse.abs() < 1e4 && (coarse - fine).abs() <= SAFE_LEVEL_GAP * (1.0 + fine.abs())
    })
}

fn intermediates_bounded(e: &Expr, p: &PointBinding, bound: f64) -> bool {
    let Ok(v) = e.evaluate(p) else { return false };
    if v.abs() > bound {
        return false;
    }
    // an underflowing exponential flattens to zero in floating point
    if matches!(e.node(), Node::Unary(Unary::Exp, _)) && v < 1.0 / bound {
        return false;
    }
    match e.node() {
        Node::Const(_) | Node::Sym(_) => true,
        Node::Unary(_, a) => intermediates_bounded(a, p, bound),
        Node::Binary(_, a, b) => {
            intermediates_bounded(a, p, bound) && intermediates_bounded(b, p, bound)
        }
    }
}

/// Largest relative gap between symbolic and Richardson finite-difference
/// partials, over every coordinate, at `p`.
pub fn derivative_gap(e: &Expr, p: &PointBinding) -> Option<f64> {
    let mut worst = 0.0f64;
    for s in p.names() {
        let exact = e.differentiate(s).evaluate(p).ok()?;
        let approx = richardson_derivative(e, p, s)?;
        worst = worst.max((exact - approx).abs() / exact.abs().max(1.0));
    }
    Some(worst)
}
