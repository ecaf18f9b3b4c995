//! Charts, metrics, the Levi-Civita connection, orthonormal frames and the
//! frame-bundle lifts of vector fields.
//!
//! Index conventions: Greek indices are chart indices, Latin indices are
//! frame indices. A [`FrameField`] stores `e_a^μ` (row `a`, column `μ`) and
//! the dual coframe `θ^a_μ` (row `a`, column `μ`). Frame indices are lowered
//! with the signature metric `η`, plus signs first.

mod battery;
mod connection;
mod frame;
mod lie;
mod lift;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::exprcore::{EvalError, Expr, PointBinding};
use crate::liealg::SignatureMetric;

pub use battery::{halton_points, random_polynomial_field};
pub use connection::{christoffel, covariant_derivative_lowered, divergence, Connection};
pub use frame::{orthonormal_frame, orthonormal_frame_at, FrameField, PointFrame};
pub use lie::{
    conformal_killing_residual, killing_residual, lie_derivative_metric,
    lie_derivative_tensor_density, reductive_metric_lie, symmetrized_gradient, Residual,
    TensorDensity,
};
pub use lift::{
    g_killing_residual, kosmann_coeffs, natural_lift_coeffs, penrose_coeffs, GroupTag,
    LiftCoefficients, LiftFlavor,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("metric is singular at {0}")]
    SingularMetric(String),
    #[error("metric has the wrong signature at {0}")]
    SignatureMismatch(String),
    #[error("symbolic frames need a diagonal metric; entry ({0}, {1}) is not identically zero")]
    NonDiagonal(usize, usize),
    #[error("g_{index}{index} vanishes at {point}")]
    DegenerateComponent { index: usize, point: String },
    #[error("frame is singular")]
    SingularFrame,
    #[error("lift has flavor {found}, expected {expected}")]
    WrongFlavor { expected: LiftFlavor, found: LiftFlavor },
    #[error("unknown group `{0}` (expected so, cso or gl)")]
    UnknownGroup(String),
    #[error("valence ({0},{1}) is not supported symbolically")]
    UnsupportedValence(usize, usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A coordinate chart: coordinate names plus the signature of the metric
/// that lives on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: Arc<[String]>,
    signature: SignatureMetric,
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S], p: usize, q: usize) -> Result<Self, GeometryError> {
        let names: Vec<String> = names.iter().map(|n| n.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(GeometryError::InvalidChart("dimension must be at least 1".into()));
        }
        if p + q != names.len() {
            return Err(GeometryError::InvalidChart(format!(
                "signature ({p},{q}) does not match dimension {}",
                names.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(GeometryError::InvalidChart(format!("duplicate coordinate `{n}`")));
            }
        }
        Ok(Chart {
            names: names.into(),
            signature: SignatureMetric::new(p, q),
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, mu: usize) -> &str {
        &self.names[mu]
    }

    pub fn signature(&self) -> SignatureMetric {
        self.signature
    }

    pub fn eta(&self, a: usize) -> f64 {
        self.signature.sign(a)
    }

    pub fn coordinate(&self, mu: usize) -> Expr {
        Expr::sym(&self.names[mu])
    }

    pub fn point(&self, values: &[f64]) -> PointBinding {
        PointBinding::new(&self.names, values)
    }
}

/// Square matrix of expressions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    n: usize,
    data: Vec<Expr>,
}

impl ExprMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        ExprMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| Expr::zero())
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self, GeometryError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Ok(ExprMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.n + j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, rhs: &ExprMatrix) -> Self {
        Self::from_fn(self.n, |i, j| {
            Expr::sum((0..self.n).map(|k| self.get(i, k).mul(rhs.get(k, j))))
        })
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        ExprMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn sub(&self, rhs: &ExprMatrix) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).sub(rhs.get(i, j)))
    }

    pub fn is_diagonal(&self) -> Option<(usize, usize)> {
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && !self.get(i, j).simplify().is_zero() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn evaluate(&self, p: &PointBinding) -> Result<DMatrix<f64>, EvalError> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self.get(i, j).evaluate(p)?;
            }
        }
        Ok(out)
    }

    /// Largest absolute entry over every point.
    pub fn max_norm(&self, points: &[PointBinding]) -> Result<f64, EvalError> {
        let mut worst = 0.0f64;
        for p in points {
            worst = worst.max(self.evaluate(p)?.amax());
        }
        Ok(worst)
    }

    pub fn simplify(&self) -> Self {
        self.map(Expr::simplify)
    }

    /// Determinant by cofactor expansion, skipping structural zeros.
    pub fn determinant(&self) -> Expr {
        let idx: Vec<usize> = (0..self.n).collect();
        det_minor(self, &idx, &idx)
    }

    /// Symbolic inverse through the adjugate.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant().simplify();
        if det.is_zero() {
            return None;
        }
        let n = self.n;
        let all: Vec<usize> = (0..n).collect();
        Some(Self::from_fn(n, |i, j| {
            // (A⁻¹)_{ij} = (-1)^{i+j} M_{ji} / det
            let rows: Vec<usize> = all.iter().copied().filter(|&r| r != j).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&c| c != i).collect();
            let minor = det_minor(self, &rows, &cols);
            let signed = if (i + j) % 2 == 0 { minor } else { minor.neg() };
            signed.div(&det)
        }))
    }
}

fn det_minor(m: &ExprMatrix, rows: &[usize], cols: &[usize]) -> Expr {
    match rows.len() {
        0 => Expr::one(),
        1 => m.get(rows[0], cols[0]).clone(),
        _ => {
            let r0 = rows[0];
            let rest: Vec<usize> = rows[1..].to_vec();
            let mut acc = Expr::zero();
            for (k, &c) in cols.iter().enumerate() {
                let entry = m.get(r0, c);
                if entry.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = entry.mul(&det_minor(m, &rest, &sub_cols));
                acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

impl fmt::Display for ExprMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `g_{μν}(x)`, symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    chart: Chart,
    components: ExprMatrix,
}

impl MetricField {
    /// Rejects matrices whose transpose differs structurally.
    pub fn new(chart: Chart, components: ExprMatrix) -> Result<Self, GeometryError> {
        if components.dim() != chart.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: chart.dim(),
                got: components.dim(),
            });
        }
        for i in 0..chart.dim() {
            for j in (i + 1)..chart.dim() {
                if components.get(i, j).simplify() != components.get(j, i).simplify() {
                    return Err(GeometryError::NotSymmetric(i, j));
                }
            }
        }
        Ok(MetricField { chart, components })
    }

    /// Diagonal metric from its diagonal entries.
    pub fn diagonal(chart: Chart, diag: Vec<Expr>) -> Result<Self, GeometryError> {
        if diag.len() != chart.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: chart.dim(),
                got: diag.len(),
            });
        }
        let comps = ExprMatrix::from_fn(chart.dim(), |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                Expr::zero()
            }
        });
        Ok(MetricField {
            chart,
            components: comps,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn components(&self) -> &ExprMatrix {
        &self.components
    }

    pub fn get(&self, mu: usize, nu: usize) -> &Expr {
        self.components.get(mu, nu)
    }

    pub fn inverse(&self) -> Result<ExprMatrix, GeometryError> {
        self.components
            .inverse()
            .ok_or_else(|| GeometryError::SingularMetric("every point".into()))
    }

    /// Checks invertibility and signature at each point.
    pub fn check_at(&self, points: &[PointBinding]) -> Result<(), GeometryError> {
        let sig = self.chart.signature();
        for p in points {
            let g = self.components.evaluate(p)?;
            let eig = g.symmetric_eigen();
            let scale = eig.eigenvalues.amax().max(1.0);
            if eig.eigenvalues.iter().any(|l| l.abs() <= 1e-12 * scale) {
                return Err(GeometryError::SingularMetric(p.to_string()));
            }
            let positive = eig.eigenvalues.iter().filter(|l| **l > 0.0).count();
            if positive != sig.p {
                return Err(GeometryError::SignatureMismatch(p.to_string()));
            }
        }
        Ok(())
    }
}

/// Vector field components `ξ^μ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldExpr(pub Vec<Expr>);

impl VectorFieldExpr {
    pub fn new(chart: &Chart, components: Vec<Expr>) -> Result<Self, GeometryError> {
        if components.len() != chart.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: chart.dim(),
                got: components.len(),
            });
        }
        Ok(VectorFieldExpr(components))
    }

    pub fn zero(m: usize) -> Self {
        VectorFieldExpr(vec![Expr::zero(); m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, mu: usize) -> &Expr {
        &self.0[mu]
    }

    pub fn evaluate(&self, p: &PointBinding) -> Result<Vec<f64>, EvalError> {
        self.0.iter().map(|c| c.evaluate(p)).collect()
    }

    /// `ξ^ρ ∂_ρ f`.
    pub fn apply(&self, chart: &Chart, f: &Expr) -> Expr {
        Expr::sum(
            self.0
                .iter()
                .enumerate()
                .map(|(rho, c)| c.mul(&f.differentiate(chart.name(rho)))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::parse;

    fn m(rows: &[&[&str]]) -> ExprMatrix {
        ExprMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| parse(s).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new(&["t", "x"], 1, 1).is_ok());
        assert!(Chart::new(&["t", "t"], 1, 1).is_err());
        assert!(Chart::new::<&str>(&[], 0, 0).is_err());
        assert!(Chart::new(&["t", "x"], 2, 1).is_err());
    }

    #[test]
    fn symbolic_inverse_of_general_matrix() {
        let a = m(&[&["x", "1", "0"], &["2", "y", "1"], &["0", "x*y", "3"]]);
        let inv = a.inverse().unwrap();
        let p = PointBinding::new(&["x", "y"], &[1.3, -0.7]);
        let prod = a.evaluate(&p).unwrap() * inv.evaluate(&p).unwrap();
        assert!((prod - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn singular_symbolic_matrix() {
        assert!(m(&[&["x", "x"], &["1", "1"]]).inverse().is_none());
    }

    #[test]
    fn metric_must_be_symmetric() {
        let chart = Chart::new(&["x", "y"], 2, 0).unwrap();
        let err = MetricField::new(chart.clone(), m(&[&["1", "x"], &["y", "1"]])).unwrap_err();
        assert_eq!(err, GeometryError::NotSymmetric(0, 1));
        assert!(MetricField::new(chart, m(&[&["1", "x+0"], &["x", "1"]])).is_ok());
    }

    #[test]
    fn signature_check_at_points() {
        let chart = Chart::new(&["t", "x"], 1, 1).unwrap();
        let g = MetricField::diagonal(chart.clone(), vec![Expr::one(), parse("-1").unwrap()]).unwrap();
        assert!(g.check_at(&[chart.point(&[0.0, 0.0])]).is_ok());
        let wrong = MetricField::diagonal(chart.clone(), vec![Expr::one(), Expr::one()]).unwrap();
        assert!(matches!(
            wrong.check_at(&[chart.point(&[0.0, 0.0])]),
            Err(GeometryError::SignatureMismatch(_))
        ));
        let degenerate = MetricField::diagonal(chart.clone(), vec![Expr::one(), parse("-t^2").unwrap()]).unwrap();
        assert!(matches!(
            degenerate.check_at(&[chart.point(&[0.0, 1.0])]),
            Err(GeometryError::SingularMetric(_))
        ));
    }
}
