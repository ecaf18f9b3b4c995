use super::{BinOp, Expr, Node, Unary};

impl Expr {
    /// Exact partial derivative with respect to `symbol`.
    ///
    /// Constant exponents use the power rule; a symbol-dependent exponent is
    /// handled through `f^g = exp(g ln f)`, valid where `f > 0`. A base that
    /// does not depend on `symbol` skips the `f'/f` term.
    pub fn differentiate(&self, symbol: &str) -> Expr {
        if !self.depends_on(symbol) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Sym(s) => {
                if &**s == symbol {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Unary(op, a) => {
                let da = a.differentiate(symbol);
                let outer = match op {
                    Unary::Neg => return da.neg(),
                    Unary::Sin => a.cos(),
                    Unary::Cos => a.sin().neg(),
                    Unary::Tan => Expr::one().div(&a.cos().powi(2)),
                    Unary::Sinh => a.apply(Unary::Cosh),
                    Unary::Cosh => a.apply(Unary::Sinh),
                    Unary::Exp => self.clone(),
                    Unary::Ln => Expr::one().div(a),
                    Unary::Sqrt => Expr::one().div(&Expr::int(2).mul(self)),
                };
                outer.mul(&da)
            }
            Node::Binary(op, a, b) => {
                let da = a.differentiate(symbol);
                let db = b.differentiate(symbol);
                match op {
                    BinOp::Add => da.add(&db),
                    BinOp::Sub => da.sub(&db),
                    BinOp::Mul => da.mul(b).add(&a.mul(&db)),
                    BinOp::Div => da.mul(b).sub(&a.mul(&db)).div(&b.powi(2)),
                    BinOp::Pow => {
                        if let Some(c) = b.as_const() {
                            let lowered = Expr::constant(c.sub(1.into()));
                            b.mul(&a.pow(&lowered)).mul(&da)
                        } else if a.is_zero() {
                            // 0^g is constant wherever it is defined
                            Expr::zero()
                        } else if !a.depends_on(symbol) {
                            self.mul(&a.ln()).mul(&db)
                        } else {
                            let dlog = db.mul(&a.ln()).add(&b.mul(&da).div(a));
                            self.mul(&dlog)
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, PointBinding};
    use super::*;

    fn d(src: &str, s: &str) -> Expr {
        parse(src).unwrap().differentiate(s).simplify()
    }

    #[test]
    fn table_rules() {
        assert_eq!(d("sin(x0)", "x0"), Expr::sym("x0").cos());
        assert_eq!(d("x0*x1", "x0"), Expr::sym("x1"));
        assert_eq!(d("sin(x0)", "x1"), Expr::zero());
        assert_eq!(d("7", "x0"), Expr::zero());
    }

    #[test]
    fn constant_base_power() {
        assert_eq!(d("0^(x0*x1)", "x0"), Expr::zero());
        let de = d("2^(x0*x1)", "x0");
        let p = PointBinding::new(&["x0", "x1"], &[1.0, 3.0]);
        assert!((de.evaluate(&p).unwrap() - 24.0 * 2f64.ln()).abs() < 1e-13);
        let de = d("x1^x0", "x0");
        let p = PointBinding::new(&["x0", "x1"], &[2.0, 3.0]);
        assert!((de.evaluate(&p).unwrap() - 9.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn chain_rule_value() {
        // d/dx exp(x^2) = 2x exp(x^2); at x=1 this is 2e.
        let de = d("exp(x0^2)", "x0");
        let p = PointBinding::new(&["x0"], &[1.0]);
        let v = de.evaluate(&p).unwrap();
        assert!((v - 2.0 * std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn general_power_uses_log_form() {
        // d/dx x^x = x^x (ln x + 1)
        let de = d("x^x", "x");
        let p = PointBinding::new(&["x"], &[2.0]);
        let want = 4.0 * (2f64.ln() + 1.0);
        assert!((de.evaluate(&p).unwrap() - want).abs() < 1e-13);
    }
}
