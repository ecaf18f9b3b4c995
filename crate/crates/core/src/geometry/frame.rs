use nalgebra::{DMatrix, DVector};

use crate::exprcore::{EvalError, Expr, PointBinding};

use super::{Chart, ExprMatrix, GeometryError, MetricField};

/// Orthonormal frame `e_a = e_a^μ ∂_μ` and its coframe `θ^a = θ^a_μ dx^μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    chart: Chart,
    frame: ExprMatrix,
    coframe: ExprMatrix,
}

impl FrameField {
    /// Builds a frame from `e_a^μ` (row `a`); the coframe is the symbolic inverse.
    pub fn new(chart: Chart, frame: ExprMatrix) -> Result<Self, GeometryError> {
        if frame.dim() != chart.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: chart.dim(),
                got: frame.dim(),
            });
        }
        let coframe = frame
            .transpose()
            .inverse()
            .ok_or(GeometryError::SingularFrame)?
            .simplify();
        Ok(FrameField {
            chart,
            frame,
            coframe,
        })
    }

    pub fn from_parts(chart: Chart, frame: ExprMatrix, coframe: ExprMatrix) -> Self {
        FrameField {
            chart,
            frame,
            coframe,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `e_a^μ`.
    pub fn e(&self, a: usize, mu: usize) -> &Expr {
        self.frame.get(a, mu)
    }

    /// `θ^a_μ`.
    pub fn theta(&self, a: usize, mu: usize) -> &Expr {
        self.coframe.get(a, mu)
    }

    pub fn frame(&self) -> &ExprMatrix {
        &self.frame
    }

    pub fn coframe(&self) -> &ExprMatrix {
        &self.coframe
    }

    /// Pfaff derivative `e_a f = e_a^μ ∂_μ f`.
    pub fn pfaff(&self, a: usize, f: &Expr) -> Expr {
        Expr::sum(
            (0..self.dim()).map(|mu| self.e(a, mu).mul(&f.differentiate(self.chart.name(mu)))),
        )
    }

    pub fn at(&self, p: &PointBinding) -> Result<PointFrame, EvalError> {
        Ok(PointFrame {
            frame: self.frame.evaluate(p)?,
            coframe: self.coframe.evaluate(p)?,
        })
    }

    /// Max duality and orthonormality residuals over `points`.
    pub fn check(&self, g: &MetricField, points: &[PointBinding]) -> Result<(f64, f64), EvalError> {
        let mut duality = 0.0f64;
        let mut ortho = 0.0f64;
        for p in points {
            let pf = self.at(p)?;
            let (d, o) = pf.residuals(&g.components().evaluate(p)?, &self.chart);
            duality = duality.max(d);
            ortho = ortho.max(o);
        }
        Ok((duality, ortho))
    }
}

/// A frame evaluated at a single point. `frame[(a, μ)] = e_a^μ`,
/// `coframe[(a, μ)] = θ^a_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFrame {
    pub frame: DMatrix<f64>,
    pub coframe: DMatrix<f64>,
}

impl PointFrame {
    /// `(max |θ^a_μ e_b^μ − δ^a_b|, max |g(e_a, e_b) − η_ab|)`.
    pub fn residuals(&self, g: &DMatrix<f64>, chart: &Chart) -> (f64, f64) {
        let m = chart.dim();
        let duality = (&self.coframe * self.frame.transpose() - DMatrix::identity(m, m)).amax();
        let gram = &self.frame * g * self.frame.transpose();
        let ortho = (gram - chart.signature().matrix()).amax();
        (duality, ortho)
    }
}

/// Symbolic orthonormal frame of a diagonal metric, `e_a = |g_aa|^{-1/2} ∂_a`.
///
/// The sign of `g_aa` must match `η_aa` at each supplied point.
pub fn orthonormal_frame(
    g: &MetricField,
    points: &[PointBinding],
) -> Result<FrameField, GeometryError> {
    if let Some((i, j)) = g.components().is_diagonal() {
        return Err(GeometryError::NonDiagonal(i, j));
    }
    let chart = g.chart().clone();
    let m = chart.dim();
    for p in points {
        for a in 0..m {
            let v = g.get(a, a).evaluate(p)?;
            if v == 0.0 {
                return Err(GeometryError::DegenerateComponent {
                    index: a,
                    point: p.to_string(),
                });
            }
            if v.signum() != chart.eta(a) {
                return Err(GeometryError::SignatureMismatch(p.to_string()));
            }
        }
    }
    let scale: Vec<Expr> = (0..m)
        .map(|a| {
            let gaa = g.get(a, a).simplify();
            let abs = if chart.eta(a) > 0.0 { gaa } else { gaa.neg() };
            abs.sqrt()
        })
        .collect();
    let frame = ExprMatrix::from_fn(m, |a, mu| {
        if a == mu {
            Expr::one().div(&scale[a])
        } else {
            Expr::zero()
        }
    });
    let coframe = ExprMatrix::from_fn(m, |a, mu| {
        if a == mu {
            scale[a].clone()
        } else {
            Expr::zero()
        }
    });
    Ok(FrameField::from_parts(chart, frame, coframe))
}

/// Signature-aware Gram–Schmidt at one point; works for any metric.
/// Frame vectors are ordered with the positive-norm ones first.
pub fn orthonormal_frame_at(g: &MetricField, p: &PointBinding) -> Result<PointFrame, GeometryError> {
    let chart = g.chart();
    let m = chart.dim();
    let gm = g.components().evaluate(p)?;
    let inner = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * &gm * v)[(0, 0)];
    let scale = gm.amax().max(1.0);

    let mut candidates: Vec<DVector<f64>> = (0..m)
        .map(|i| DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 }))
        .collect();
    for i in 0..m {
        for j in (i + 1)..m {
            candidates.push(DVector::from_fn(m, |k, _| if k == i || k == j { 1.0 } else { 0.0 }));
        }
    }
    let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
    for v in candidates {
        if basis.len() == m {
            break;
        }
        let mut u = v.clone();
        for (e, s) in &basis {
            u -= e * (s * inner(&v, e));
        }
        if u.amax() < 1e-10 {
            continue;
        }
        let n = inner(&u, &u);
        if n.abs() < 1e-10 * scale * u.norm_squared() {
            continue;
        }
        let s = n.signum();
        basis.push((u / n.abs().sqrt(), s));
    }
    if basis.len() < m {
        return Err(GeometryError::SingularMetric(p.to_string()));
    }
    basis.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let positives = basis.iter().filter(|(_, s)| *s > 0.0).count();
    if positives != chart.signature().p {
        return Err(GeometryError::SignatureMismatch(p.to_string()));
    }
    let frame = DMatrix::from_fn(m, m, |a, mu| basis[a].0[mu]);
    let coframe = frame
        .transpose()
        .try_inverse()
        .ok_or(GeometryError::SingularFrame)?;
    Ok(PointFrame { frame, coframe })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::parse;

    #[test]
    fn minkowski_identity_frame() {
        let chart = Chart::new(&["t", "x", "y", "z"], 1, 3).unwrap();
        let g = MetricField::diagonal(
            chart.clone(),
            vec![Expr::one(), Expr::int(-1), Expr::int(-1), Expr::int(-1)],
        )
        .unwrap();
        let f = orthonormal_frame(&g, &[chart.point(&[0.0; 4])]).unwrap();
        for a in 0..4 {
            for mu in 0..4 {
                assert_eq!(f.e(a, mu), &Expr::int((a == mu) as i64));
            }
        }
    }

    #[test]
    fn sphere_frame() {
        let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
        let g = MetricField::diagonal(chart.clone(), vec![Expr::one(), parse("sin(x0)^2").unwrap()])
            .unwrap();
        let pts = [chart.point(&[0.7, 0.1]), chart.point(&[2.0, 3.0])];
        let f = orthonormal_frame(&g, &pts).unwrap();
        let p = &pts[0];
        assert_eq!(f.e(0, 0).evaluate(p).unwrap(), 1.0);
        assert!((f.e(1, 1).evaluate(p).unwrap() - 1.0 / 0.7f64.sin()).abs() < 1e-14);
        let (d, o) = f.check(&g, &pts).unwrap();
        assert!(d < 1e-12 && o < 1e-12);
    }

    #[test]
    fn symbolic_frame_errors() {
        let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
        let offdiag = MetricField::new(
            chart.clone(),
            ExprMatrix::from_rows(vec![
                vec![Expr::one(), parse("x0/10").unwrap()],
                vec![parse("x0/10").unwrap(), Expr::one()],
            ])
            .unwrap(),
        )
        .unwrap();
        assert_eq!(orthonormal_frame(&offdiag, &[]), Err(GeometryError::NonDiagonal(0, 1)));
        let polar =
            MetricField::diagonal(chart.clone(), vec![Expr::one(), parse("x0^2").unwrap()]).unwrap();
        assert!(matches!(
            orthonormal_frame(&polar, &[chart.point(&[0.0, 1.0])]),
            Err(GeometryError::DegenerateComponent { index: 1, .. })
        ));
    }

    #[test]
    fn numeric_gram_schmidt_off_diagonal() {
        let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
        let comps = ExprMatrix::from_rows(vec![
            vec![Expr::one(), parse("x0*0.3").unwrap()],
            vec![parse("x0*0.3").unwrap(), Expr::one()],
        ])
        .unwrap();
        let g = MetricField::new(chart.clone(), comps).unwrap();
        let p = chart.point(&[1.5, 0.0]);
        let pf = orthonormal_frame_at(&g, &p).unwrap();
        let (d, o) = pf.residuals(&g.components().evaluate(&p).unwrap(), &chart);
        assert!(d < 1e-10 && o < 1e-10);
    }

    #[test]
    fn numeric_gram_schmidt_lorentzian_orders_signs() {
        // timelike direction is the second coordinate here
        let chart = Chart::new(&["x0", "x1", "x2"], 1, 2).unwrap();
        let comps = ExprMatrix::from_rows(vec![
            vec![Expr::int(-1), parse("1/2").unwrap(), Expr::zero()],
            vec![parse("1/2").unwrap(), Expr::int(2), Expr::zero()],
            vec![Expr::zero(), Expr::zero(), Expr::int(-3)],
        ])
        .unwrap();
        let g = MetricField::new(chart.clone(), comps).unwrap();
        let p = chart.point(&[0.0, 0.0, 0.0]);
        let pf = orthonormal_frame_at(&g, &p).unwrap();
        let (d, o) = pf.residuals(&g.components().evaluate(&p).unwrap(), &chart);
        assert!(d < 1e-10 && o < 1e-10);
    }

    #[test]
    fn frame_from_expressions_inverts() {
        let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
        let frame = ExprMatrix::from_rows(vec![
            vec![parse("cos(x0)").unwrap(), parse("sin(x0)").unwrap()],
            vec![parse("-sin(x0)").unwrap(), parse("cos(x0)").unwrap()],
        ])
        .unwrap();
        let f = FrameField::new(chart.clone(), frame).unwrap();
        let g = MetricField::diagonal(chart.clone(), vec![Expr::one(), Expr::one()]).unwrap();
        let (d, o) = f.check(&g, &[chart.point(&[0.4, 0.0])]).unwrap();
        assert!(d < 1e-14 && o < 1e-14);
    }
}
