//! Frame-bundle lifts of a vector field.
//!
//! The natural lift of `ξ` to the linear frame bundle has, in a local frame,
//! the vertical coefficients
//!
//! ```text
//! (Lξ)^a_b = θ^a_ρ (∂_ν ξ^ρ e_b^ν − ξ^ν ∂_ν e_b^ρ)
//! ```
//!
//! The Kosmann lift keeps the `so(p,q)` part of `(Lξ)_ab = η_ac (Lξ)^c_b`,
//! the Penrose lift the `cso(p,q)` part (antisymmetric plus trace).

use std::fmt;
use std::str::FromStr;

use crate::exprcore::Expr;

use super::{ExprMatrix, FrameField, GeometryError, VectorFieldExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiftFlavor {
    Natural,
    Kosmann,
    Penrose,
    Custom,
}

impl fmt::Display for LiftFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LiftFlavor::Natural => "natural",
            LiftFlavor::Kosmann => "kosmann",
            LiftFlavor::Penrose => "penrose",
            LiftFlavor::Custom => "custom",
        })
    }
}

/// Data of an invariant vector field `Ξ = ξ^a e_a + Ξ_ab A^ab` in a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftCoefficients {
    /// `ξ^a`.
    pub components: Vec<Expr>,
    /// `Ξ_ab`, frame indices lowered with `η`.
    pub algebra: ExprMatrix,
    pub flavor: LiftFlavor,
    /// Coefficient of `η_ab` in the Penrose lift; `None` for other flavors.
    pub trace_scalar: Option<Expr>,
}

impl LiftCoefficients {
    /// A user-supplied lift.
    pub fn custom(components: Vec<Expr>, algebra: ExprMatrix) -> Self {
        LiftCoefficients {
            components,
            algebra,
            flavor: LiftFlavor::Custom,
            trace_scalar: None,
        }
    }

    /// `Ξ^a_b = η^{aa} Ξ_ab`.
    pub fn mixed(&self, frame: &FrameField) -> ExprMatrix {
        let chart = frame.chart();
        ExprMatrix::from_fn(self.algebra.dim(), |a, b| {
            self.algebra.get(a, b).mul(&Expr::float(chart.eta(a)))
        })
    }

    /// `Ξ_ab` plus `trace_scalar · η_ab` when present.
    pub fn full_algebra(&self, frame: &FrameField) -> ExprMatrix {
        let chart = frame.chart();
        match &self.trace_scalar {
            None => self.algebra.clone(),
            Some(t) => ExprMatrix::from_fn(self.algebra.dim(), |a, b| {
                if a == b {
                    self.algebra.get(a, b).add(&t.mul(&Expr::float(chart.eta(a))))
                } else {
                    self.algebra.get(a, b).clone()
                }
            }),
        }
    }

    /// Largest `|Ξ_ab + Ξ_ba|` at the given points.
    pub fn antisymmetry_defect(
        &self,
        points: &[crate::exprcore::PointBinding],
    ) -> Result<f64, crate::exprcore::EvalError> {
        let mut worst = 0.0f64;
        for p in points {
            let v = self.algebra.evaluate(p)?;
            worst = worst.max((&v + v.transpose()).amax());
        }
        Ok(worst)
    }
}

fn frame_components(xi: &VectorFieldExpr, frame: &FrameField) -> Vec<Expr> {
    let m = frame.dim();
    (0..m)
        .map(|a| Expr::sum((0..m).map(|mu| frame.theta(a, mu).mul(xi.get(mu)))).simplify())
        .collect()
}

/// `(Lξ)^a_b`, upper index first.
pub fn natural_mixed(xi: &VectorFieldExpr, frame: &FrameField) -> ExprMatrix {
    let chart = frame.chart();
    let m = chart.dim();
    // transported[b][ρ] = ∂_ν ξ^ρ e_b^ν − ξ^ν ∂_ν e_b^ρ = [e_b, ξ]^ρ
    let transported: Vec<Vec<Expr>> = (0..m)
        .map(|b| {
            (0..m)
                .map(|rho| {
                    let push = frame.pfaff(b, xi.get(rho));
                    let drift = xi.apply(chart, frame.e(b, rho));
                    push.sub(&drift)
                })
                .collect()
        })
        .collect();
    ExprMatrix::from_fn(m, |a, b| {
        Expr::sum((0..m).map(|rho| frame.theta(a, rho).mul(&transported[b][rho]))).simplify()
    })
}

fn lowered(mixed: &ExprMatrix, frame: &FrameField) -> ExprMatrix {
    let chart = frame.chart();
    ExprMatrix::from_fn(mixed.dim(), |a, b| mixed.get(a, b).mul(&Expr::float(chart.eta(a))))
}

fn antisymmetrize(m: &ExprMatrix) -> ExprMatrix {
    let half = Expr::ratio(1, 2);
    ExprMatrix::from_fn(m.dim(), |a, b| half.mul(&m.get(a, b).sub(m.get(b, a))).simplify())
}

pub fn natural_lift_coeffs(xi: &VectorFieldExpr, frame: &FrameField) -> LiftCoefficients {
    LiftCoefficients {
        components: frame_components(xi, frame),
        algebra: lowered(&natural_mixed(xi, frame), frame),
        flavor: LiftFlavor::Natural,
        trace_scalar: None,
    }
}

/// `Ξ_ab = (Lξ)_[ab] = ½((Lξ)_ab − (Lξ)_ba)`.
pub fn kosmann_coeffs(xi: &VectorFieldExpr, frame: &FrameField) -> LiftCoefficients {
    let natural = natural_lift_coeffs(xi, frame);
    LiftCoefficients {
        components: natural.components,
        algebra: antisymmetrize(&natural.algebra),
        flavor: LiftFlavor::Kosmann,
        trace_scalar: None,
    }
}

/// Kosmann part plus `trace_scalar = (Lξ)^c_c / m`.
pub fn penrose_coeffs(xi: &VectorFieldExpr, frame: &FrameField) -> LiftCoefficients {
    let m = frame.dim();
    let mixed = natural_mixed(xi, frame);
    let trace = Expr::sum((0..m).map(|c| mixed.get(c, c).clone()))
        .mul(&Expr::ratio(1, m as i64))
        .simplify();
    LiftCoefficients {
        components: frame_components(xi, frame),
        algebra: antisymmetrize(&lowered(&mixed, frame)),
        flavor: LiftFlavor::Penrose,
        trace_scalar: Some(trace),
    }
}

/// Structure group used in the G-Killing condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupTag {
    So,
    Cso,
    Gl,
}

impl FromStr for GroupTag {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "so" => Ok(GroupTag::So),
            "cso" => Ok(GroupTag::Cso),
            "gl" => Ok(GroupTag::Gl),
            _ => Err(GeometryError::UnknownGroup(s.to_string())),
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupTag::So => "so",
            GroupTag::Cso => "cso",
            GroupTag::Gl => "gl",
        })
    }
}

/// Natural-lift coefficients minus their projection onto the group's algebra,
/// in lowered frame indices.
///
/// `so`: the symmetric part of `(Lξ)_ab`; `cso`: its traceless symmetric
/// part; `gl`: zero.
pub fn g_killing_residual(xi: &VectorFieldExpr, frame: &FrameField, group: GroupTag) -> ExprMatrix {
    let m = frame.dim();
    let chart = frame.chart();
    let mixed = natural_mixed(xi, frame);
    let low = lowered(&mixed, frame);
    if group == GroupTag::Gl {
        // gl projection is the identity
        return low.sub(&low);
    }
    let half = Expr::ratio(1, 2);
    let sym = ExprMatrix::from_fn(m, |a, b| half.mul(&low.get(a, b).add(low.get(b, a))));
    match group {
        GroupTag::So => sym.simplify(),
        GroupTag::Cso => {
            let trace = Expr::sum((0..m).map(|c| mixed.get(c, c).clone()))
                .mul(&Expr::ratio(1, m as i64));
            ExprMatrix::from_fn(m, |a, b| {
                if a == b {
                    sym.get(a, b).sub(&trace.mul(&Expr::float(chart.eta(a)))).simplify()
                } else {
                    sym.get(a, b).simplify()
                }
            })
        }
        GroupTag::Gl => unreachable!(),
    }
}
