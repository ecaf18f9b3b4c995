use crate::exprcore::{EvalError, Expr, PointBinding};

use super::{Chart, ExprMatrix, GeometryError, MetricField, VectorFieldExpr};

/// Levi-Civita connection coefficients `Γ^ρ_{μν}`, symmetric in `(μ, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    chart: Chart,
    gamma: Vec<ExprMatrix>,
}

impl Connection {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// `Γ^ρ_{μν}`.
    pub fn get(&self, rho: usize, mu: usize, nu: usize) -> &Expr {
        self.gamma[rho].get(mu, nu)
    }

    /// Max over points of `|∇_ρ g_{μν}|`.
    pub fn metricity_residual(
        &self,
        g: &MetricField,
        points: &[PointBinding],
    ) -> Result<f64, EvalError> {
        let m = g.dim();
        let mut worst = 0.0f64;
        for p in points {
            let gv = g.components().evaluate(p)?;
            let dg: Vec<_> = (0..m)
                .map(|rho| {
                    g.components()
                        .map(|e| e.differentiate(self.chart.name(rho)))
                        .evaluate(p)
                })
                .collect::<Result<_, _>>()?;
            let gam: Vec<_> = self
                .gamma
                .iter()
                .map(|c| c.evaluate(p))
                .collect::<Result<_, _>>()?;
            for rho in 0..m {
                for mu in 0..m {
                    for nu in 0..m {
                        let mut r = dg[rho][(mu, nu)];
                        for s in 0..m {
                            r -= gam[s][(rho, mu)] * gv[(s, nu)] + gam[s][(rho, nu)] * gv[(mu, s)];
                        }
                        worst = worst.max(r.abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// `Γ^ρ_{μν} = ½ g^{ρσ}(∂_μ g_{σν} + ∂_ν g_{σμ} − ∂_σ g_{μν})`.
pub fn christoffel(g: &MetricField) -> Result<Connection, GeometryError> {
    let chart = g.chart().clone();
    let m = chart.dim();
    let ginv = g.inverse()?;
    // dg[σ] = ∂_σ g
    let dg: Vec<ExprMatrix> = (0..m)
        .map(|s| g.components().map(|e| e.differentiate(chart.name(s))))
        .collect();
    let half = Expr::ratio(1, 2);
    let gamma = (0..m)
        .map(|rho| {
            ExprMatrix::from_fn(m, |mu, nu| {
                let terms = (0..m).map(|s| {
                    let inv = ginv.get(rho, s);
                    if inv.is_zero() {
                        return Expr::zero();
                    }
                    let bracket = dg[mu]
                        .get(s, nu)
                        .add(dg[nu].get(s, mu))
                        .sub(dg[s].get(mu, nu));
                    inv.mul(&bracket)
                });
                half.mul(&Expr::sum(terms)).simplify()
            })
        })
        .collect();
    Ok(Connection { chart, gamma })
}

/// `∇_μ ξ^μ = ∂_μ ξ^μ + Γ^μ_{μρ} ξ^ρ`.
pub fn divergence(xi: &VectorFieldExpr, gamma: &Connection) -> Expr {
    let chart = gamma.chart();
    let m = chart.dim();
    let flat = Expr::sum((0..m).map(|mu| xi.get(mu).differentiate(chart.name(mu))));
    let curved = Expr::sum((0..m).flat_map(|mu| {
        (0..m).map(move |rho| gamma.get(mu, mu, rho).mul(xi.get(rho)))
    }));
    flat.add(&curved).simplify()
}

/// `∇_μ ξ_ν = ∂_μ ξ_ν − Γ^ρ_{μν} ξ_ρ` with `ξ_ν = g_{νρ} ξ^ρ`; entry `(μ, ν)`.
pub fn covariant_derivative_lowered(
    xi: &VectorFieldExpr,
    g: &MetricField,
    gamma: &Connection,
) -> ExprMatrix {
    let chart = g.chart();
    let m = chart.dim();
    let lowered: Vec<Expr> = (0..m)
        .map(|nu| Expr::sum((0..m).map(|rho| g.get(nu, rho).mul(xi.get(rho)))))
        .collect();
    ExprMatrix::from_fn(m, |mu, nu| {
        let d = lowered[nu].differentiate(chart.name(mu));
        let corr = Expr::sum((0..m).map(|rho| gamma.get(rho, mu, nu).mul(&lowered[rho])));
        d.sub(&corr)
    })
}
