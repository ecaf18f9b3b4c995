//! Numerical ground truth from flows.
//!
//! Lie derivatives are realized in the classical way: pull the object back
//! along the flow `φ_t` of `ξ` and differentiate in `t` at zero. The flow is
//! integrated with fixed-step RK4, the flow Jacobian comes from central
//! differences of the flow map, and the `t`-derivative is a central
//! difference quotient improved by one Richardson step.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::exprcore::{EvalError, PointBinding};
use crate::geometry::{Chart, FrameField, MetricField, TensorDensity, VectorFieldExpr};
use crate::spinor::{GammaRep, SpinConnection};

/// Jacobians with a condition number above this are refused.
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("flow parameter t must be nonzero and finite")]
    BadParameter,
    #[error("at least 8 RK4 steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("flow left the evaluable domain: {0}")]
    DomainExit(#[from] EvalError),
    #[error("flow Jacobian is ill-conditioned (condition {0:e})")]
    IllConditioned(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Parameters of a limit-quotient evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    /// Largest flow parameter used in the difference quotient.
    pub t: f64,
    /// RK4 steps per flow evaluation.
    pub steps: usize,
    /// Combine the quotients at `t` and `t/2` as `(4 C(t/2) − C(t)) / 3`.
    pub richardson: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            t: 1e-3,
            steps: 8,
            richardson: true,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.t == 0.0 || !self.t.is_finite() {
            return Err(OracleError::BadParameter);
        }
        if self.steps < 8 {
            return Err(OracleError::TooFewSteps(self.steps));
        }
        Ok(())
    }

    pub fn without_richardson(self) -> Self {
        FlowConfig {
            richardson: false,
            ..self
        }
    }
}

fn field_at(xi: &VectorFieldExpr, chart: &Chart, x: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
    let p = chart.point(x.as_slice());
    Ok(DVector::from_vec(xi.evaluate(&p)?))
}

fn rk4_step<S, F>(state: &S, h: f64, f: &F) -> Result<S, EvalError>
where
    S: Clone + std::ops::Add<Output = S> + std::ops::Mul<f64, Output = S>,
    F: Fn(&S) -> Result<S, EvalError>,
{
    let k1 = f(state)?;
    let k2 = f(&(state.clone() + k1.clone() * (h / 2.0)))?;
    let k3 = f(&(state.clone() + k2.clone() * (h / 2.0)))?;
    let k4 = f(&(state.clone() + k3.clone() * h))?;
    Ok(state.clone() + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

fn flow_vec(
    xi: &VectorFieldExpr,
    chart: &Chart,
    x: &DVector<f64>,
    t: f64,
    steps: usize,
) -> Result<DVector<f64>, EvalError> {
    let h = t / steps as f64;
    let rhs = |y: &DVector<f64>| field_at(xi, chart, y);
    let mut y = x.clone();
    for _ in 0..steps {
        y = rk4_step(&y, h, &rhs)?;
    }
    Ok(y)
}

fn check_dim(chart: &Chart, x: &PointBinding) -> Result<(), OracleError> {
    if x.dimension() != chart.dim() {
        return Err(OracleError::DimensionMismatch {
            expected: chart.dim(),
            got: x.dimension(),
        });
    }
    Ok(())
}

/// `φ_t(x)` by fixed-step RK4.
pub fn flow_map(
    xi: &VectorFieldExpr,
    chart: &Chart,
    x: &PointBinding,
    t: f64,
    steps: usize,
) -> Result<PointBinding, OracleError> {
    check_dim(chart, x)?;
    if steps == 0 {
        return Err(OracleError::TooFewSteps(0));
    }
    let y = flow_vec(xi, chart, &DVector::from_vec(x.values()), t, steps)?;
    Ok(chart.point(y.as_slice()))
}

/// `J^i_j = ∂φ_t^i / ∂x^j` by central differences with `h = 1e−5 · max(1, |x_j|)`.
pub fn flow_jacobian(
    xi: &VectorFieldExpr,
    chart: &Chart,
    x: &PointBinding,
    t: f64,
    steps: usize,
) -> Result<DMatrix<f64>, OracleError> {
    check_dim(chart, x)?;
    let m = chart.dim();
    let base = DVector::from_vec(x.values());
    let mut jac = DMatrix::zeros(m, m);
    for j in 0..m {
        let h = 1e-5 * base[j].abs().max(1.0);
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[j] += h;
        minus[j] -= h;
        let col = (flow_vec(xi, chart, &plus, t, steps)? - flow_vec(xi, chart, &minus, t, steps)?) / (2.0 * h);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

fn condition(j: &DMatrix<f64>) -> f64 {
    let sv = j.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Central quotient `(P(s) − P(−s)) / 2s`, optionally Richardson-combined
/// with the same quotient at `s/2`.
fn limit_quotient<F>(cfg: &FlowConfig, pullback: F) -> Result<Vec<f64>, OracleError>
where
    F: Fn(f64) -> Result<Vec<f64>, OracleError>,
{
    cfg.validate()?;
    let quotient = |s: f64| -> Result<Vec<f64>, OracleError> {
        let fwd = pullback(s)?;
        let back = pullback(-s)?;
        Ok(fwd.iter().zip(&back).map(|(a, b)| (a - b) / (2.0 * s)).collect())
    };
    let coarse = quotient(cfg.t)?;
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = quotient(cfg.t / 2.0)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

fn multi_index(mut flat: usize, m: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = flat % m;
        flat /= m;
    }
    idx
}

/// `(φ_s^* T)(x)`: components at `φ_s(x)` carried back by the flow Jacobian,
/// times `|det J|^w`.
fn pullback_tensor(
    xi: &VectorFieldExpr,
    t: &TensorDensity,
    chart: &Chart,
    x: &PointBinding,
    s: f64,
    steps: usize,
) -> Result<Vec<f64>, OracleError> {
    let m = chart.dim();
    let rank = t.rank();
    let y = flow_map(xi, chart, x, s, steps)?;
    let jac = flow_jacobian(xi, chart, x, s, steps)?;
    let cond = condition(&jac);
    if cond > MAX_CONDITION {
        return Err(OracleError::IllConditioned(cond));
    }
    let inv = jac.clone().try_inverse().ok_or(OracleError::IllConditioned(f64::INFINITY))?;
    let at_y = t.evaluate(&y)?;
    let scale = jac.determinant().abs().powf(t.weight.to_f64());
    let total = at_y.len();
    let mut out = vec![0.0; total];
    for (flat, slot) in out.iter_mut().enumerate() {
        let target = multi_index(flat, m, rank);
        let mut acc = 0.0;
        for (src_flat, value) in at_y.iter().enumerate() {
            if *value == 0.0 {
                continue;
            }
            let src = multi_index(src_flat, m, rank);
            let mut factor = 1.0;
            for k in 0..rank {
                factor *= if k < t.upper {
                    inv[(target[k], src[k])]
                } else {
                    jac[(src[k], target[k])]
                };
            }
            acc += factor * value;
        }
        *slot = scale * acc;
    }
    Ok(out)
}

/// Flow-based `£_ξ T` at `x`, flattened like the components of `T`.
pub fn numeric_lie_tensor(
    xi: &VectorFieldExpr,
    t: &TensorDensity,
    chart: &Chart,
    x: &PointBinding,
    cfg: &FlowConfig,
) -> Result<Vec<f64>, OracleError> {
    check_dim(chart, x)?;
    limit_quotient(cfg, |s| pullback_tensor(xi, t, chart, x, s, cfg.steps))
}

/// Flow-based `£_ξ g` at `x`.
pub fn numeric_lie_metric(
    xi: &VectorFieldExpr,
    g: &MetricField,
    x: &PointBinding,
    cfg: &FlowConfig,
) -> Result<DMatrix<f64>, OracleError> {
    let m = g.dim();
    let comps = (0..m * m).map(|k| g.get(k / m, k % m).clone()).collect();
    let t = TensorDensity {
        upper: 0,
        lower: 2,
        weight: crate::exprcore::Num::int(0),
        components: comps,
    };
    let flat = numeric_lie_tensor(xi, &t, g.chart(), x, cfg)?;
    Ok(DMatrix::from_row_slice(m, m, &flat))
}

/// Flow-based `(Lξ)^a_b` at `x`: each frame vector is pushed forward by the
/// flow and read off in the frame at the image point.
pub fn numeric_natural_lift(
    xi: &VectorFieldExpr,
    frame: &FrameField,
    x: &PointBinding,
    cfg: &FlowConfig,
) -> Result<DMatrix<f64>, OracleError> {
    let chart = frame.chart();
    check_dim(chart, x)?;
    let m = chart.dim();
    let e_x = frame.frame().evaluate(x)?;
    let flat = limit_quotient(cfg, |s| {
        let y = flow_map(xi, chart, x, s, cfg.steps)?;
        let jac = flow_jacobian(xi, chart, x, s, cfg.steps)?;
        let theta_y = frame.coframe().evaluate(&y)?;
        // rows of e_x are frame vectors, so J e_b is column b of J e_xᵀ
        let moved = theta_y * jac * e_x.transpose();
        Ok(moved.transpose().as_slice().to_vec())
    })?;
    // `as_slice` is column-major; transposing first gives row-major order
    Ok(DMatrix::from_row_slice(m, m, &flat))
}

#[derive(Debug, Clone, PartialEq)]
struct Augmented {
    x: DVector<f64>,
    psi: DVector<Complex64>,
}

impl std::ops::Add for Augmented {
    type Output = Augmented;
    fn add(self, rhs: Augmented) -> Augmented {
        Augmented {
            x: self.x + rhs.x,
            psi: self.psi + rhs.psi,
        }
    }
}

impl std::ops::Mul<f64> for Augmented {
    type Output = Augmented;
    fn mul(self, k: f64) -> Augmented {
        Augmented {
            x: self.x * k,
            psi: self.psi * Complex64::from(k),
        }
    }
}

/// Transports `ψ0` along the integral curve of `ξ` from `x` by integrating
/// `dψ/dt = −ẋ^μ A_μ ψ` jointly with the curve, where `∇_μ = ∂_μ + A_μ`.
/// Returns the end point and the transported spinor.
#[allow(clippy::too_many_arguments)]
pub fn parallel_transport_spinor(
    psi0: &DVector<Complex64>,
    xi: &VectorFieldExpr,
    chart: &Chart,
    x: &PointBinding,
    omega: &SpinConnection,
    rep: &GammaRep,
    t: f64,
    steps: usize,
) -> Result<(PointBinding, DVector<Complex64>), OracleError> {
    check_dim(chart, x)?;
    if psi0.len() != rep.spinor_dim() {
        return Err(OracleError::DimensionMismatch {
            expected: rep.spinor_dim(),
            got: psi0.len(),
        });
    }
    if steps == 0 {
        return Err(OracleError::TooFewSteps(0));
    }
    let m = chart.dim();
    let rhs = |s: &Augmented| -> Result<Augmented, EvalError> {
        let p = chart.point(s.x.as_slice());
        let v = DVector::from_vec(xi.evaluate(&p)?);
        let mut dpsi = DVector::zeros(s.psi.len());
        for mu in 0..m {
            if v[mu] != 0.0 {
                dpsi -= omega.generator_at(rep, mu, &p)? * &s.psi * Complex64::from(v[mu]);
            }
        }
        Ok(Augmented { x: v, psi: dpsi })
    };
    let h = t / steps as f64;
    let mut state = Augmented {
        x: DVector::from_vec(x.values()),
        psi: psi0.clone(),
    };
    for _ in 0..steps {
        state = rk4_step(&state, h, &rhs)?;
    }
    Ok((chart.point(state.x.as_slice()), state.psi))
}

/// Observed RK4 order `log2(|y_n − y_2n| / |y_2n − y_4n|)` for the flow from
/// `x` over `t`. `None` when the differences are already at round-off level.
pub fn rk4_order(
    xi: &VectorFieldExpr,
    chart: &Chart,
    x: &PointBinding,
    t: f64,
    steps: usize,
) -> Result<Option<f64>, OracleError> {
    check_dim(chart, x)?;
    let base = DVector::from_vec(x.values());
    let y1 = flow_vec(xi, chart, &base, t, steps)?;
    let y2 = flow_vec(xi, chart, &base, t, 2 * steps)?;
    let y4 = flow_vec(xi, chart, &base, t, 4 * steps)?;
    let e1 = (&y1 - &y2).amax();
    let e2 = (&y2 - &y4).amax();
    let floor = 1e-13 * y4.amax().max(1.0);
    if e2 <= floor {
        return Ok(None);
    }
    Ok(Some((e1 / e2).log2()))
}
