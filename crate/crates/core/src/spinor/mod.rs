//! Gamma matrices, the spin connection and Lie derivatives of spinor fields.
//!
//! Complex quantities are carried as `(re, im)` pairs of real expressions.
//! Lowered spin-connection coefficients are
//!
//! ```text
//! ω_μ^a_b = θ^a_ν (∂_μ e_b^ν + Γ^ν_{μσ} e_b^σ),   ω_μab = η_ac ω_μ^c_b
//! ```
//!
//! and with them the covariant derivative reads
//! `∇_a ψ = e_a^μ (∂_μ ψ − ¼ ω_μbc γ^b γ^c ψ)`. The minus sign is the one for
//! which the Kosmann derivative `ξ^a e_a ψ + ¼ (Lξ)_[ab] γ^a γ^b ψ` agrees with
//! `ξ^a ∇_a ψ − ¼ ∇_[a ξ_b] γ^a γ^b ψ`.

mod gamma;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::exprcore::{EvalError, Expr, PointBinding};
use crate::geometry::{
    christoffel, covariant_derivative_lowered, divergence, kosmann_coeffs, Chart, Connection,
    ExprMatrix, FrameField, GeometryError, LiftCoefficients, LiftFlavor, MetricField,
    VectorFieldExpr,
};

pub use gamma::{build_gamma, GammaRep};

/// Agreement required between the two Kosmann formulas.
pub const KOSMANN_TOLERANCE: f64 = 1e-9;

const ANTISYMMETRY_TOLERANCE: f64 = 1e-12;

/// Sign of the `¼ ω γγ` term in `∇_μ ψ`.
const CONNECTION_SIGN: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinorError {
    #[error("spinors need an even dimension, got {0}")]
    OddDimension(usize),
    #[error("unsupported spinor dimension {0} (need 2 <= m <= 6)")]
    UnsupportedDimension(usize),
    #[error("expected {expected} spinor components, got {got}")]
    ComponentMismatch { expected: usize, got: usize },
    #[error("gamma signature ({0}) does not match the chart")]
    SignatureMismatch(String),
    #[error("lift coefficients are not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),
    #[error("Kosmann formulas disagree by {residual:e} at {point}")]
    KosmannMismatch { residual: f64, point: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `N` complex components, each an `(re, im)` expression pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorFieldExpr {
    pub re: Vec<Expr>,
    pub im: Vec<Expr>,
}

impl SpinorFieldExpr {
    pub fn new(rep: &GammaRep, re: Vec<Expr>, im: Vec<Expr>) -> Result<Self, SpinorError> {
        let n = rep.spinor_dim();
        for got in [re.len(), im.len()] {
            if got != n {
                return Err(SpinorError::ComponentMismatch { expected: n, got });
            }
        }
        Ok(SpinorFieldExpr { re, im })
    }

    pub fn zero(n: usize) -> Self {
        SpinorFieldExpr {
            re: vec![Expr::zero(); n],
            im: vec![Expr::zero(); n],
        }
    }

    pub fn constant(values: &[Complex64]) -> Self {
        SpinorFieldExpr {
            re: values.iter().map(|z| Expr::float(z.re)).collect(),
            im: values.iter().map(|z| Expr::float(z.im)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn evaluate(&self, p: &PointBinding) -> Result<DVector<Complex64>, EvalError> {
        let mut out = DVector::zeros(self.len());
        for i in 0..self.len() {
            out[i] = Complex64::new(self.re[i].evaluate(p)?, self.im[i].evaluate(p)?);
        }
        Ok(out)
    }

    fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        SpinorFieldExpr {
            re: self.re.iter().map(&f).collect(),
            im: self.im.iter().map(&f).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&Expr, &Expr) -> Expr) -> Self {
        SpinorFieldExpr {
            re: self.re.iter().zip(&other.re).map(|(a, b)| f(a, b)).collect(),
            im: self.im.iter().zip(&other.im).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, Expr::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, Expr::sub)
    }

    /// Multiplies every component by a real expression.
    pub fn scale(&self, f: &Expr) -> Self {
        self.map(|e| f.mul(e))
    }

    pub fn simplify(&self) -> Self {
        self.map(Expr::simplify)
    }

    pub fn partial(&self, chart: &Chart, mu: usize) -> Self {
        self.map(|e| e.differentiate(chart.name(mu)))
    }

    /// Pfaff derivative `e_a^μ ∂_μ ψ`.
    pub fn pfaff(&self, frame: &FrameField, a: usize) -> Self {
        self.map(|e| frame.pfaff(a, e))
    }

    /// `M ψ` for a constant complex matrix `M`.
    pub fn apply_constant(&self, m: &DMatrix<Complex64>) -> Self {
        let n = self.len();
        let entry = |x: f64, e: &Expr| if x == 0.0 { Expr::zero() } else { Expr::float(x).mul(e) };
        let mut re = Vec::with_capacity(n);
        let mut im = Vec::with_capacity(n);
        for i in 0..n {
            re.push(Expr::sum((0..n).flat_map(|j| {
                let z = m[(i, j)];
                [entry(z.re, &self.re[j]), entry(-z.im, &self.im[j])]
            })));
            im.push(Expr::sum((0..n).flat_map(|j| {
                let z = m[(i, j)];
                [entry(z.re, &self.im[j]), entry(z.im, &self.re[j])]
            })));
        }
        SpinorFieldExpr { re, im }
    }
}

/// `¼ A_ab γ^a γ^b ψ` for a matrix of real coefficients `A_ab`.
fn algebra_action(coeffs: &ExprMatrix, rep: &GammaRep, psi: &SpinorFieldExpr) -> SpinorFieldExpr {
    let m = rep.dim();
    let mut acc = SpinorFieldExpr::zero(psi.len());
    for a in 0..m {
        for b in 0..m {
            let c = coeffs.get(a, b);
            if c.is_zero() {
                continue;
            }
            let moved = psi.apply_constant(&rep.product(a, b));
            acc = acc.add(&moved.scale(c));
        }
    }
    acc.scale(&Expr::ratio(1, 4))
}

/// Lowered coefficients `ω_μab`, one `m × m` matrix per chart index `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConnection {
    pub omega: Vec<ExprMatrix>,
}

impl SpinConnection {
    /// `ω_μab`.
    pub fn get(&self, mu: usize, a: usize, b: usize) -> &Expr {
        self.omega[mu].get(a, b)
    }

    /// Max `|ω_μab + ω_μba|` over the points.
    pub fn antisymmetry_defect(&self, points: &[PointBinding]) -> Result<f64, EvalError> {
        let mut worst = 0.0f64;
        for p in points {
            for w in &self.omega {
                let v = w.evaluate(p)?;
                worst = worst.max((&v + v.transpose()).camax());
            }
        }
        Ok(worst)
    }

    /// The matrix `A_μ` with `∇_μ ψ = ∂_μ ψ + A_μ ψ`, evaluated at `p`.
    pub fn generator_at(
        &self,
        rep: &GammaRep,
        mu: usize,
        p: &PointBinding,
    ) -> Result<DMatrix<Complex64>, EvalError> {
        let w = self.omega[mu].evaluate(p)?;
        let n = rep.spinor_dim();
        let mut out = DMatrix::zeros(n, n);
        for a in 0..rep.dim() {
            for b in 0..rep.dim() {
                if w[(a, b)] != 0.0 {
                    out += rep.product(a, b) * Complex64::from(0.25 * CONNECTION_SIGN * w[(a, b)]);
                }
            }
        }
        Ok(out)
    }
}

/// `ω_μab = η_a θ^a_ν (∂_μ e_b^ν + Γ^ν_{μσ} e_b^σ)`.
pub fn spin_connection(frame: &FrameField, gamma: &Connection) -> SpinConnection {
    let chart = frame.chart();
    let m = chart.dim();
    let omega = (0..m)
        .map(|mu| {
            // de[b][ν] = ∇_μ e_b^ν
            let de: Vec<Vec<Expr>> = (0..m)
                .map(|b| {
                    (0..m)
                        .map(|nu| {
                            let flat = frame.e(b, nu).differentiate(chart.name(mu));
                            let curved =
                                Expr::sum((0..m).map(|s| gamma.get(nu, mu, s).mul(frame.e(b, s))));
                            flat.add(&curved)
                        })
                        .collect()
                })
                .collect();
            ExprMatrix::from_fn(m, |a, b| {
                let mixed = Expr::sum((0..m).map(|nu| frame.theta(a, nu).mul(&de[b][nu])));
                Expr::float(chart.eta(a)).mul(&mixed).simplify()
            })
        })
        .collect();
    SpinConnection { omega }
}

/// `∇_a ψ` for every frame index `a`.
pub fn spinor_cov_derivative(
    psi: &SpinorFieldExpr,
    omega: &SpinConnection,
    rep: &GammaRep,
    frame: &FrameField,
) -> Vec<SpinorFieldExpr> {
    let chart = frame.chart();
    let m = chart.dim();
    let coord: Vec<SpinorFieldExpr> = (0..m)
        .map(|mu| {
            let twist = algebra_action(&omega.omega[mu], rep, psi).scale(&Expr::float(CONNECTION_SIGN));
            psi.partial(chart, mu).add(&twist)
        })
        .collect();
    (0..m)
        .map(|a| {
            let mut acc = SpinorFieldExpr::zero(psi.len());
            for (mu, d) in coord.iter().enumerate() {
                let e = frame.e(a, mu);
                if !e.is_zero() {
                    acc = acc.add(&d.scale(e));
                }
            }
            acc.simplify()
        })
        .collect()
}

fn check_consistency(rep: &GammaRep, psi: &SpinorFieldExpr, chart: &Chart) -> Result<(), SpinorError> {
    if rep.signature() != chart.signature() {
        let s = rep.signature();
        return Err(SpinorError::SignatureMismatch(format!("{},{}", s.p, s.q)));
    }
    if psi.len() != rep.spinor_dim() || psi.im.len() != psi.re.len() {
        return Err(SpinorError::ComponentMismatch {
            expected: rep.spinor_dim(),
            got: psi.len(),
        });
    }
    Ok(())
}

/// `ξ^a e_a ψ + ¼ Ξ_ab γ^a γ^b ψ` for an `so(p,q)`-valued lift.
///
/// Antisymmetry of `Ξ_ab` is required: structurally, or numerically at
/// `points` when the expressions do not cancel on their own. A Penrose lift
/// also carries its trace part, which acts with the spinor weight of the
/// Penrose derivative, `−(m/4) t ψ` for `t = trace_scalar`.
pub fn lie_spinor_general(
    lift: &LiftCoefficients,
    psi: &SpinorFieldExpr,
    rep: &GammaRep,
    frame: &FrameField,
    points: &[PointBinding],
) -> Result<SpinorFieldExpr, SpinorError> {
    check_consistency(rep, psi, frame.chart())?;
    let m = frame.dim();
    let structural = (0..m)
        .all(|a| (a..m).all(|b| lift.algebra.get(a, b).add(lift.algebra.get(b, a)).simplify().is_zero()));
    if !structural {
        let defect = if points.is_empty() {
            f64::INFINITY
        } else {
            lift.antisymmetry_defect(points)?
        };
        if defect > ANTISYMMETRY_TOLERANCE {
            return Err(SpinorError::NotAntisymmetric(defect));
        }
    }
    let mut acc = SpinorFieldExpr::zero(psi.len());
    for a in 0..m {
        let c = &lift.components[a];
        if !c.is_zero() {
            acc = acc.add(&psi.pfaff(frame, a).scale(c));
        }
    }
    acc = acc.add(&algebra_action(&lift.algebra, rep, psi));
    if let (LiftFlavor::Penrose, Some(t)) = (lift.flavor, &lift.trace_scalar) {
        acc = acc.sub(&psi.scale(&Expr::ratio(m as i64, 4).mul(t)));
    }
    Ok(acc.simplify())
}

/// Both forms of the Kosmann Lie derivative and their largest disagreement.
#[derive(Debug, Clone, PartialEq)]
pub struct KosmannDerivative {
    /// `ξ^a e_a ψ + ¼ (Lξ)_[ab] γ^a γ^b ψ`.
    pub value: SpinorFieldExpr,
    /// `ξ^a ∇_a ψ − ¼ ∇_[a ξ_b] γ^a γ^b ψ`.
    pub covariant_form: SpinorFieldExpr,
    pub max_disagreement: f64,
}

struct CovariantParts {
    frame_xi: Vec<Expr>,
    grad_antisym: ExprMatrix,
    divergence: Expr,
    nabla_psi: Vec<SpinorFieldExpr>,
}

fn covariant_parts(
    xi: &VectorFieldExpr,
    psi: &SpinorFieldExpr,
    g: &MetricField,
    frame: &FrameField,
    rep: &GammaRep,
) -> Result<CovariantParts, SpinorError> {
    let m = g.dim();
    let gamma = christoffel(g)?;
    let omega = spin_connection(frame, &gamma);
    let nabla_psi = spinor_cov_derivative(psi, &omega, rep, frame);
    let grad = covariant_derivative_lowered(xi, g, &gamma);
    let frame_grad = ExprMatrix::from_fn(m, |a, b| {
        Expr::sum((0..m).flat_map(|mu| {
            let grad = &grad;
            (0..m).map(move |nu| frame.e(a, mu).mul(frame.e(b, nu)).mul(grad.get(mu, nu)))
        }))
    });
    let half = Expr::ratio(1, 2);
    let grad_antisym = ExprMatrix::from_fn(m, |a, b| {
        half.mul(&frame_grad.get(a, b).sub(frame_grad.get(b, a))).simplify()
    });
    let frame_xi = (0..m)
        .map(|a| Expr::sum((0..m).map(|mu| frame.theta(a, mu).mul(xi.get(mu)))).simplify())
        .collect();
    Ok(CovariantParts {
        frame_xi,
        grad_antisym,
        divergence: divergence(xi, &gamma),
        nabla_psi,
    })
}

fn covariant_kosmann(parts: &CovariantParts, psi: &SpinorFieldExpr, rep: &GammaRep) -> SpinorFieldExpr {
    let mut acc = SpinorFieldExpr::zero(psi.len());
    for (c, d) in parts.frame_xi.iter().zip(&parts.nabla_psi) {
        if !c.is_zero() {
            acc = acc.add(&d.scale(c));
        }
    }
    acc.sub(&algebra_action(&parts.grad_antisym, rep, psi)).simplify()
}

fn max_gap(a: &SpinorFieldExpr, b: &SpinorFieldExpr, points: &[PointBinding]) -> Result<(f64, String), EvalError> {
    let mut worst = (0.0f64, String::new());
    for p in points {
        let gap = (a.evaluate(p)? - b.evaluate(p)?).camax();
        if gap > worst.0 || worst.1.is_empty() {
            worst = (gap.max(worst.0), p.to_string());
        }
    }
    Ok(worst)
}

/// Kosmann Lie derivative of `ψ`, computed from the Kosmann lift and again
/// from the Levi-Civita covariant derivative; the two must agree at every
/// point to [`KOSMANN_TOLERANCE`].
pub fn lie_spinor_kosmann(
    xi: &VectorFieldExpr,
    psi: &SpinorFieldExpr,
    g: &MetricField,
    frame: &FrameField,
    rep: &GammaRep,
    points: &[PointBinding],
) -> Result<KosmannDerivative, SpinorError> {
    check_consistency(rep, psi, g.chart())?;
    let lift = kosmann_coeffs(xi, frame);
    let value = lie_spinor_general(&lift, psi, rep, frame, points)?;
    let parts = covariant_parts(xi, psi, g, frame, rep)?;
    let covariant_form = covariant_kosmann(&parts, psi, rep);
    let (gap, at) = max_gap(&value, &covariant_form, points)?;
    if !(gap <= KOSMANN_TOLERANCE) {
        return Err(SpinorError::KosmannMismatch { residual: gap, point: at });
    }
    Ok(KosmannDerivative {
        value,
        covariant_form,
        max_disagreement: gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenroseDerivative {
    pub value: SpinorFieldExpr,
    /// Set when `m ≠ 4`: the `¼` trace coefficient is then an extrapolation.
    pub experimental: bool,
}

/// `ξ^a ∇_a ψ − (¼ ∇_[a ξ_b] γ^a γ^b + ¼ ∇_c ξ^c) ψ`.
pub fn lie_spinor_penrose(
    xi: &VectorFieldExpr,
    psi: &SpinorFieldExpr,
    g: &MetricField,
    frame: &FrameField,
    rep: &GammaRep,
) -> Result<PenroseDerivative, SpinorError> {
    check_consistency(rep, psi, g.chart())?;
    let parts = covariant_parts(xi, psi, g, frame, rep)?;
    let kosmann = covariant_kosmann(&parts, psi, rep);
    let trace = psi.scale(&Expr::ratio(1, 4).mul(&parts.divergence));
    Ok(PenroseDerivative {
        value: kosmann.sub(&trace).simplify(),
        experimental: g.dim() != 4,
    })
}
