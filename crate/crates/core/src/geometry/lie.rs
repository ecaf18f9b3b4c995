use crate::exprcore::{EvalError, Expr, Num, PointBinding};

use super::connection::{christoffel, covariant_derivative_lowered, divergence};
use super::lift::{LiftCoefficients, LiftFlavor};
use super::{Chart, ExprMatrix, FrameField, GeometryError, MetricField, VectorFieldExpr};

/// A symbolic residual and its max-abs value over the evaluation points.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub matrix: ExprMatrix,
    pub max_norm: f64,
}

impl Residual {
    fn new(matrix: ExprMatrix, points: &[PointBinding]) -> Result<Self, EvalError> {
        let max_norm = matrix.max_norm(points)?;
        Ok(Residual { matrix, max_norm })
    }
}

/// `£_ξ g_{μν} = ξ^ρ ∂_ρ g_{μν} + g_{ρμ} ∂_ν ξ^ρ + g_{ρν} ∂_μ ξ^ρ`.
pub fn lie_derivative_metric(xi: &VectorFieldExpr, g: &MetricField) -> ExprMatrix {
    let chart = g.chart();
    let m = chart.dim();
    let dxi: Vec<Vec<Expr>> = (0..m)
        .map(|rho| (0..m).map(|nu| xi.get(rho).differentiate(chart.name(nu))).collect())
        .collect();
    ExprMatrix::from_fn(m, |mu, nu| {
        let transport = xi.apply(chart, g.get(mu, nu));
        let left = Expr::sum((0..m).map(|rho| g.get(rho, mu).mul(&dxi[rho][nu])));
        let right = Expr::sum((0..m).map(|rho| g.get(rho, nu).mul(&dxi[rho][mu])));
        transport.add(&left).add(&right).simplify()
    })
}

/// `∇_μ ξ_ν + ∇_ν ξ_μ`, the covariant route to `£_ξ g`.
pub fn symmetrized_gradient(xi: &VectorFieldExpr, g: &MetricField) -> Result<ExprMatrix, GeometryError> {
    let gamma = christoffel(g)?;
    let grad = covariant_derivative_lowered(xi, g, &gamma);
    Ok(ExprMatrix::from_fn(g.dim(), |mu, nu| {
        grad.get(mu, nu).add(grad.get(nu, mu)).simplify()
    }))
}

pub fn killing_residual(
    xi: &VectorFieldExpr,
    g: &MetricField,
    points: &[PointBinding],
) -> Result<Residual, GeometryError> {
    Ok(Residual::new(lie_derivative_metric(xi, g), points)?)
}

/// `£_ξ g − (2/m) (∇_c ξ^c) g`.
pub fn conformal_killing_residual(
    xi: &VectorFieldExpr,
    g: &MetricField,
    points: &[PointBinding],
) -> Result<Residual, GeometryError> {
    let m = g.dim();
    let div = divergence(xi, &christoffel(g)?);
    let factor = Expr::ratio(2, m as i64).mul(&div);
    let lie = lie_derivative_metric(xi, g);
    let res = ExprMatrix::from_fn(m, |mu, nu| {
        lie.get(mu, nu).sub(&factor.mul(g.get(mu, nu))).simplify()
    });
    Ok(Residual::new(res, points)?)
}

/// Components of a tensor density of valence `(upper, lower)` and weight `w`,
/// flattened row-major with the upper indices first.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorDensity {
    pub upper: usize,
    pub lower: usize,
    pub weight: Num,
    pub components: Vec<Expr>,
}

impl TensorDensity {
    pub fn new(
        chart: &Chart,
        upper: usize,
        lower: usize,
        weight: Num,
        components: Vec<Expr>,
    ) -> Result<Self, GeometryError> {
        let expected = chart.dim().pow((upper + lower) as u32);
        if components.len() != expected {
            return Err(GeometryError::DimensionMismatch {
                expected,
                got: components.len(),
            });
        }
        Ok(TensorDensity {
            upper,
            lower,
            weight,
            components,
        })
    }

    pub fn scalar(f: Expr, weight: Num) -> Self {
        TensorDensity {
            upper: 0,
            lower: 0,
            weight,
            components: vec![f],
        }
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    pub fn evaluate(&self, p: &PointBinding) -> Result<Vec<f64>, EvalError> {
        self.components.iter().map(|c| c.evaluate(p)).collect()
    }
}

fn multi_index(mut flat: usize, m: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = flat % m;
        flat /= m;
    }
    idx
}

fn flat_index(idx: &[usize], m: usize) -> usize {
    idx.iter().fold(0, |acc, i| acc * m + i)
}

/// `£_ξ T = ξ^ρ ∂_ρ T − Σ_upper T^{..ρ..} ∂_ρ ξ^i + Σ_lower T_{..ρ..} ∂_j ξ^ρ + w (∂_ρ ξ^ρ) T`.
pub fn lie_derivative_tensor_density(
    xi: &VectorFieldExpr,
    t: &TensorDensity,
    chart: &Chart,
) -> Result<TensorDensity, GeometryError> {
    if t.rank() > 2 {
        return Err(GeometryError::UnsupportedValence(t.upper, t.lower));
    }
    let m = chart.dim();
    let rank = t.rank();
    let dxi: Vec<Vec<Expr>> = (0..m)
        .map(|rho| (0..m).map(|nu| xi.get(rho).differentiate(chart.name(nu))).collect())
        .collect();
    let flat_div = Expr::sum((0..m).map(|rho| dxi[rho][rho].clone()));
    let weight_term = Expr::constant(t.weight).mul(&flat_div);
    let components = (0..t.components.len())
        .map(|flat| {
            let idx = multi_index(flat, m, rank);
            let mut acc = xi.apply(chart, &t.components[flat]);
            for slot in 0..rank {
                let mut moved = idx.clone();
                let terms = (0..m).map(|rho| {
                    moved[slot] = rho;
                    let comp = &t.components[flat_index(&moved, m)];
                    if slot < t.upper {
                        comp.mul(&dxi[idx[slot]][rho])
                    } else {
                        comp.mul(&dxi[rho][idx[slot]])
                    }
                });
                let sum = Expr::sum(terms.collect::<Vec<_>>());
                acc = if slot < t.upper { acc.sub(&sum) } else { acc.add(&sum) };
            }
            acc.add(&weight_term.mul(&t.components[flat])).simplify()
        })
        .collect();
    Ok(TensorDensity {
        upper: t.upper,
        lower: t.lower,
        weight: t.weight,
        components,
    })
}

/// `ξ^ρ ∂_ρ g_{μν} + 2 g_{ρ(μ} K^ρ_{ν)}` for an `so(p,q)`-valued lift, where
///
/// ```text
/// K^ρ_ν = e_a^ρ Ξ^a_b θ^b_ν + ξ^σ (∂_σ e_b^ρ) θ^b_ν
/// ```
///
/// is the lift's vertical part written in the coordinate frame. Vanishes
/// identically whenever `Ξ_ab` is antisymmetric; evaluating it is a check,
/// not a data product.
pub fn reductive_metric_lie(
    lift: &LiftCoefficients,
    g: &MetricField,
    frame: &FrameField,
) -> Result<ExprMatrix, GeometryError> {
    if !matches!(lift.flavor, LiftFlavor::Kosmann | LiftFlavor::Custom) {
        return Err(GeometryError::WrongFlavor {
            expected: LiftFlavor::Kosmann,
            found: lift.flavor,
        });
    }
    let chart = g.chart();
    let m = chart.dim();
    let xi_coord: Vec<Expr> = (0..m)
        .map(|s| Expr::sum((0..m).map(|a| frame.e(a, s).mul(&lift.components[a]))))
        .collect();
    let xi = VectorFieldExpr(xi_coord);
    let mixed = lift.mixed(frame);
    let k = ExprMatrix::from_fn(m, |rho, nu| {
        let vertical = Expr::sum((0..m).flat_map(|a| {
            let mixed = &mixed;
            (0..m).map(move |b| frame.e(a, rho).mul(mixed.get(a, b)).mul(frame.theta(b, nu)))
        }));
        let transport = Expr::sum(
            (0..m).map(|b| xi.apply(chart, frame.e(b, rho)).mul(frame.theta(b, nu))),
        );
        vertical.add(&transport)
    });
    Ok(ExprMatrix::from_fn(m, |mu, nu| {
        let drift = xi.apply(chart, g.get(mu, nu));
        let left = Expr::sum((0..m).map(|rho| g.get(rho, mu).mul(k.get(rho, nu))));
        let right = Expr::sum((0..m).map(|rho| g.get(rho, nu).mul(k.get(rho, mu))));
        drift.add(&left).add(&right).simplify()
    }))
}

#[cfg(test)]
mod tests {
    use super::super::{kosmann_coeffs, natural_lift_coeffs, orthonormal_frame};
    use super::*;
    use crate::exprcore::parse;
    use std::f64::consts::FRAC_PI_4;

    fn minkowski() -> MetricField {
        let chart = Chart::new(&["x0", "x1", "x2", "x3"], 1, 3).unwrap();
        MetricField::diagonal(
            chart,
            vec![Expr::one(), Expr::int(-1), Expr::int(-1), Expr::int(-1)],
        )
        .unwrap()
    }

    fn sphere() -> MetricField {
        let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
        MetricField::diagonal(chart, vec![Expr::one(), parse("sin(x0)^2").unwrap()]).unwrap()
    }

    fn field(chart: &Chart, comps: &[&str]) -> VectorFieldExpr {
        VectorFieldExpr::new(chart, comps.iter().map(|c| parse(c).unwrap()).collect()).unwrap()
    }

    #[test]
    fn boost_is_killing_exactly() {
        let g = minkowski();
        let boost = field(g.chart(), &["x1", "x0", "0", "0"]);
        assert_eq!(lie_derivative_metric(&boost, &g), ExprMatrix::zeros(4));
    }

    #[test]
    fn dilation_is_homothety() {
        let g = minkowski();
        let dil = field(g.chart(), &["x0", "x1", "x2", "x3"]);
        let lie = lie_derivative_metric(&dil, &g);
        assert_eq!(lie, g.components().map(|e| Expr::int(2).mul(e)));
        let res = conformal_killing_residual(&dil, &g, &[g.chart().point(&[0.1, 0.2, 0.3, 0.4])])
            .unwrap();
        assert_eq!(res.max_norm, 0.0);
    }

    #[test]
    fn sphere_theta_translation_is_not_killing() {
        let g = sphere();
        let xi = field(g.chart(), &["1", "0"]);
        let p = g.chart().point(&[FRAC_PI_4, 0.0]);
        let res = killing_residual(&xi, &g, std::slice::from_ref(&p)).unwrap();
        let phiphi = res.matrix.get(1, 1).evaluate(&p).unwrap();
        assert!((phiphi - 2.0 * FRAC_PI_4.sin() * FRAC_PI_4.cos()).abs() < 1e-15);
        assert!(res.max_norm > 0.5);
        let axial = field(g.chart(), &["0", "1"]);
        assert_eq!(lie_derivative_metric(&axial, &g), ExprMatrix::zeros(2));
    }

    #[test]
    fn metric_lie_derivative_matches_covariant_route() {
        let g = sphere();
        let xi = field(g.chart(), &["x0*x1 + 1", "x1^2 - x0"]);
        let a = lie_derivative_metric(&xi, &g);
        let b = symmetrized_gradient(&xi, &g).unwrap();
        let p = g.chart().point(&[1.1, 0.6]);
        let diff = (a.evaluate(&p).unwrap() - b.evaluate(&p).unwrap()).amax();
        assert!(diff < 1e-12, "{diff:e}");
    }

    #[test]
    fn scalar_densities() {
        let g = minkowski();
        let chart = g.chart();
        let dil = field(chart, &["x0", "x1", "x2", "x3"]);
        let f = parse("x0*x1 + x2^2").unwrap();
        let plain = lie_derivative_tensor_density(&dil, &TensorDensity::scalar(f.clone(), Num::int(0)), chart)
            .unwrap();
        let want = dil.apply(chart, &f);
        let p = chart.point(&[0.5, -1.0, 2.0, 0.3]);
        assert_eq!(
            plain.components[0].evaluate(&p).unwrap(),
            want.evaluate(&p).unwrap()
        );
        let dens = lie_derivative_tensor_density(&dil, &TensorDensity::scalar(f.clone(), Num::int(1)), chart)
            .unwrap();
        let want = want.evaluate(&p).unwrap() + 4.0 * f.evaluate(&p).unwrap();
        assert!((dens.components[0].evaluate(&p).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn vector_lie_derivative_is_bracket() {
        let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
        let xi = field(&chart, &["0", "x0"]);
        let t = TensorDensity::new(&chart, 1, 0, Num::int(0), vec![Expr::one(), Expr::zero()]).unwrap();
        let lie = lie_derivative_tensor_density(&xi, &t, &chart).unwrap();
        assert_eq!(lie.components, vec![Expr::zero(), Expr::int(-1)]);
    }

    #[test]
    fn covariant_two_tensor_reduces_to_metric_formula() {
        let g = sphere();
        let chart = g.chart();
        let xi = field(chart, &["sin(x1)", "x0*x1"]);
        let comps: Vec<Expr> = (0..4).map(|k| g.get(k / 2, k % 2).clone()).collect();
        let t = TensorDensity::new(chart, 0, 2, Num::int(0), comps).unwrap();
        let lie = lie_derivative_tensor_density(&xi, &t, chart).unwrap();
        let metric = lie_derivative_metric(&xi, &g);
        let p = chart.point(&[0.9, 0.4]);
        for k in 0..4 {
            let a = lie.components[k].evaluate(&p).unwrap();
            let b = metric.get(k / 2, k % 2).evaluate(&p).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn high_valence_rejected() {
        let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
        let t = TensorDensity::new(&chart, 1, 2, Num::int(0), vec![Expr::zero(); 8]).unwrap();
        assert_eq!(
            lie_derivative_tensor_density(&VectorFieldExpr::zero(2), &t, &chart),
            Err(GeometryError::UnsupportedValence(1, 2))
        );
    }

    #[test]
    fn reductive_metric_lie_vanishes() {
        let g = sphere();
        let chart = g.chart().clone();
        let p = chart.point(&[0.8, 0.3]);
        let frame = orthonormal_frame(&g, &[p.clone()]).unwrap();
        let xi = field(&chart, &["x0^2 - x1", "1 + x0*x1"]);
        let lift = kosmann_coeffs(&xi, &frame);
        let res = reductive_metric_lie(&lift, &g, &frame).unwrap();
        assert!(res.max_norm(&[p]).unwrap() < 1e-12);

        let natural = natural_lift_coeffs(&xi, &frame);
        assert!(matches!(
            reductive_metric_lie(&natural, &g, &frame),
            Err(GeometryError::WrongFlavor { .. })
        ));
    }
}
