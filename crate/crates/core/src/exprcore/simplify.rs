//! Folding constructors and the `simplify` fixpoint.
//!
//! Rules: constant folding, additive/multiplicative identities, double
//! negation, `x^1`, `x^0`, constants pulled to the left of products. No
//! normal form is attempted.

use super::num::Num;
use super::{BinOp, Expr, Node, Unary};

fn fold_unary(op: Unary, n: Num) -> Option<Num> {
    let exact = match op {
        Unary::Neg => return Some(n.neg()),
        Unary::Sqrt => n.exact_sqrt(),
        Unary::Sin | Unary::Tan | Unary::Sinh if n.is_zero() => Some(Num::int(0)),
        Unary::Cos | Unary::Cosh | Unary::Exp if n.is_zero() => Some(Num::int(1)),
        Unary::Ln if n.is_one() => Some(Num::int(0)),
        _ => None,
    };
    if exact.is_some() {
        return exact;
    }
    let Num::Float(x) = n else { return None };
    let v = match op {
        Unary::Sin => x.sin(),
        Unary::Cos => x.cos(),
        Unary::Tan => x.tan(),
        Unary::Sinh => x.sinh(),
        Unary::Cosh => x.cosh(),
        Unary::Exp => x.exp(),
        Unary::Ln if x > 0.0 => x.ln(),
        Unary::Sqrt if x >= 0.0 => x.sqrt(),
        _ => return None,
    };
    v.is_finite().then(|| Num::float(v))
}

impl Expr {
    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(n) => Expr::constant(n.neg()),
            Node::Unary(Unary::Neg, a) => a.clone(),
            Node::Binary(BinOp::Sub, a, b) => Expr::raw_binary(BinOp::Sub, b.clone(), a.clone()),
            _ => Expr::raw_unary(Unary::Neg, self.clone()),
        }
    }

    pub fn apply(&self, op: Unary) -> Expr {
        if op == Unary::Neg {
            return self.neg();
        }
        if let Some(v) = self.as_const().and_then(|n| fold_unary(op, n)) {
            return Expr::constant(v);
        }
        Expr::raw_unary(op, self.clone())
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => return Expr::constant(a.add(b)),
            (Some(a), _) if a.is_zero() => return rhs.clone(),
            (_, Some(b)) if b.is_zero() => return self.clone(),
            (_, Some(b)) if b.is_negative() => {
                return Expr::raw_binary(BinOp::Sub, self.clone(), Expr::constant(b.neg()))
            }
            _ => {}
        }
        if let Node::Unary(Unary::Neg, b) = rhs.node() {
            return self.sub(b);
        }
        if let Node::Unary(Unary::Neg, a) = self.node() {
            return rhs.sub(a);
        }
        Expr::raw_binary(BinOp::Add, self.clone(), rhs.clone())
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => return Expr::constant(a.sub(b)),
            (Some(a), _) if a.is_zero() => return rhs.neg(),
            (_, Some(b)) if b.is_zero() => return self.clone(),
            (_, Some(b)) if b.is_negative() => {
                return Expr::raw_binary(BinOp::Add, self.clone(), Expr::constant(b.neg()))
            }
            _ => {}
        }
        if self == rhs {
            return Expr::zero();
        }
        if let Node::Unary(Unary::Neg, b) = rhs.node() {
            return self.add(b);
        }
        Expr::raw_binary(BinOp::Sub, self.clone(), rhs.clone())
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => return Expr::constant(a.mul(b)),
            (Some(a), _) | (_, Some(a)) if a.is_zero() => return Expr::zero(),
            (Some(a), _) if a.is_one() => return rhs.clone(),
            (_, Some(b)) if b.is_one() => return self.clone(),
            (Some(a), _) if a.neg().is_one() => return rhs.neg(),
            (_, Some(b)) if b.neg().is_one() => return self.neg(),
            (None, Some(_)) => return rhs.mul(self),
            _ => {}
        }
        if let Node::Unary(Unary::Neg, a) = self.node() {
            return a.mul(rhs).neg();
        }
        if let Node::Unary(Unary::Neg, b) = rhs.node() {
            return self.mul(b).neg();
        }
        if let (Some(a), Node::Binary(BinOp::Mul, b, rest)) = (self.as_const(), rhs.node()) {
            if let Some(b) = b.as_const() {
                return Expr::constant(a.mul(b)).mul(rest);
            }
        }
        if let (Node::Binary(BinOp::Mul, a, rest), None) = (self.node(), rhs.as_const()) {
            if a.as_const().is_some() {
                return a.mul(&rest.mul(rhs));
            }
        }
        Expr::raw_binary(BinOp::Mul, self.clone(), rhs.clone())
    }

    pub fn div(&self, rhs: &Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            if let Some(q) = a.div(b) {
                return Expr::constant(q);
            }
        }
        if self.is_zero() && !rhs.is_zero() {
            return Expr::zero();
        }
        if rhs.is_one() {
            return self.clone();
        }
        if let Some(b) = rhs.as_const() {
            if b.neg().is_one() {
                return self.neg();
            }
        }
        if let Node::Unary(Unary::Neg, a) = self.node() {
            return a.div(rhs).neg();
        }
        Expr::raw_binary(BinOp::Div, self.clone(), rhs.clone())
    }

    pub fn pow(&self, exp: &Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_const(), exp.as_const()) {
            if let Some(v) = a.pow(b) {
                return Expr::constant(v);
            }
        }
        if exp.is_one() {
            return self.clone();
        }
        if exp.is_zero() {
            return Expr::one();
        }
        if self.is_one() {
            return Expr::one();
        }
        Expr::raw_binary(BinOp::Pow, self.clone(), exp.clone())
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.pow(&Expr::int(k))
    }

    pub fn sin(&self) -> Expr {
        self.apply(Unary::Sin)
    }

    pub fn cos(&self) -> Expr {
        self.apply(Unary::Cos)
    }

    pub fn exp(&self) -> Expr {
        self.apply(Unary::Exp)
    }

    pub fn ln(&self) -> Expr {
        self.apply(Unary::Ln)
    }

    pub fn sqrt(&self) -> Expr {
        self.apply(Unary::Sqrt)
    }

    fn binary(op: BinOp, a: &Expr, b: &Expr) -> Expr {
        match op {
            BinOp::Add => a.add(b),
            BinOp::Sub => a.sub(b),
            BinOp::Mul => a.mul(b),
            BinOp::Div => a.div(b),
            BinOp::Pow => a.pow(b),
        }
    }

    fn rebuild(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => self.clone(),
            Node::Unary(op, a) => a.rebuild().apply(*op),
            Node::Binary(op, a, b) => Expr::binary(*op, &a.rebuild(), &b.rebuild()),
        }
    }

    /// Value-preserving simplification, iterated to a structural fixpoint.
    pub fn simplify(&self) -> Expr {
        let mut cur = self.rebuild();
        for _ in 0..64 {
            let next = cur.rebuild();
            if next == cur {
                return cur;
            }
            cur = next;
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn s(src: &str) -> Expr {
        parse(src).unwrap().simplify()
    }

    #[test]
    fn identities() {
        assert_eq!(s("0*sin(x0)+x1"), Expr::sym("x1"));
        assert_eq!(s("x0^1"), Expr::sym("x0"));
        assert_eq!(s("(2+3)*x0"), Expr::int(5).mul(&Expr::sym("x0")));
        assert_eq!(s("--x0"), Expr::sym("x0"));
        assert_eq!(s("x0 - x0"), Expr::zero());
        assert_eq!(s("x0^0"), Expr::one());
    }

    #[test]
    fn constants_fold_exactly() {
        assert_eq!(s("1/3 + 1/6"), Expr::ratio(1, 2));
        assert_eq!(s("sqrt(9/4)"), Expr::ratio(3, 2));
        assert_eq!(s("2*(3*x)"), s("6*x"));
        assert_eq!(s("x*2*3"), s("6*x"));
    }

    #[test]
    fn domain_errors_are_not_folded_away() {
        assert_eq!(s("ln(-1)").to_string(), "ln((-1))");
        assert!(matches!(s("1/0").node(), Node::Binary(BinOp::Div, ..)));
    }

    #[test]
    fn idempotent_on_samples() {
        for src in ["(x+0)*(1*y) - -z", "2*x*3*y/1", "-(-(x))^1 + 0", "exp(0)*x^2*4"] {
            let once = s(src);
            assert_eq!(once.simplify(), once, "{src}");
        }
    }
}
