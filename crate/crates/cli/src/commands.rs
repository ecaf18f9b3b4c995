use std::fmt::Display;
use std::path::Path;

use kosmann_core::exprcore::{parse, EvalError, PointBinding};
use kosmann_core::geometry::{
    christoffel, conformal_killing_residual, divergence, g_killing_residual, killing_residual,
    kosmann_coeffs, lie_derivative_metric, lie_derivative_tensor_density, symmetrized_gradient,
    ExprMatrix, GroupTag, LiftCoefficients, TensorDensity, VectorFieldExpr,
};
use kosmann_core::liealg::{
    decompose_reductive, eta_transpose, reductive_projectors, verify_projector_family, LieMatrix,
    SignatureMetric,
};
use kosmann_core::oracle::{numeric_lie_metric, numeric_lie_tensor, FlowConfig};
use kosmann_core::spinor::{
    build_gamma, lie_spinor_general, lie_spinor_kosmann, lie_spinor_penrose, SpinorError,
    SpinorFieldExpr,
};
use num_complex::Complex64;
use serde::Deserialize;

use crate::report::{Check, Data, Report, Sig17};
use crate::scene::Scene;
use crate::{selftest, Cli, CliError, Command, GroupArg, LiftArg};

/// Residual tolerance for the Penrose trace identity.
pub const PENROSE_TOLERANCE: f64 = 1e-10;

pub(crate) fn input(e: impl Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn dispatch(cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    match &cli.command {
        Command::CheckKilling { scene, field } => {
            let s = load(scene, report)?;
            check_killing(&s, field, cli, report)
        }
        Command::CheckConformal { scene, field } => {
            let s = load(scene, report)?;
            check_conformal(&s, field, cli, report)
        }
        Command::CheckGkilling { scene, field, group } => {
            let s = load(scene, report)?;
            check_gkilling(&s, field, *group, cli, report)
        }
        Command::LieTensor { scene, field, target } => {
            let s = load(scene, report)?;
            lie_tensor(&s, field, target, cli, report)
        }
        Command::LieSpinor {
            scene,
            field,
            lift,
            coeffs,
        } => {
            let s = load(scene, report)?;
            lie_spinor(&s, field, *lift, coeffs.as_deref(), cli, report)
        }
        Command::DecomposeMatrix { matrix, signature } => decompose_matrix(matrix, *signature, cli, report),
        Command::VerifyClifford { signature } => verify_clifford(*signature, cli, report),
        Command::VerifyProjectors { signature } => verify_projectors(*signature, cli, report),
        Command::Selftest => selftest::run(cli.seed, report),
    }
}

fn load(path: &Path, report: &mut Report) -> Result<Scene, CliError> {
    let scene = Scene::load(path)?;
    report.scene_hash = Some(scene.hash.clone());
    Ok(scene)
}

fn max_abs_over<F>(points: &[PointBinding], mut f: F) -> Result<f64, EvalError>
where
    F: FnMut(&PointBinding) -> Result<f64, EvalError>,
{
    let mut worst = 0.0f64;
    for p in points {
        let v = f(p)?;
        worst = if v.is_nan() { f64::NAN } else { worst.max(v) };
    }
    Ok(worst)
}

fn metric_oracle_check(s: &Scene, xi: &VectorFieldExpr, symbolic: &ExprMatrix, tol: f64) -> Result<Check, CliError> {
    let cfg = FlowConfig::default();
    let mut worst = 0.0f64;
    for p in &s.points {
        let num = numeric_lie_metric(xi, &s.metric, p, &cfg).map_err(input)?;
        let sym = symbolic.evaluate(p).map_err(input)?;
        worst = worst.max((num - sym).amax());
    }
    Ok(Check::at_most("oracle_agreement", worst, tol))
}

fn check_killing(s: &Scene, field: &str, cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let xi = s.field(field)?;
    let res = killing_residual(xi, &s.metric, &s.points).map_err(input)?;
    let metric_norm = s.metric.components().max_norm(&s.points).map_err(input)?;
    let first = res.matrix.evaluate(&s.points[0]).map_err(input)?;
    report.push(
        Check::at_most("killing_residual", res.max_norm, cli.tol.unwrap_or(s.tolerances.symbolic))
            .with("metric_norm", Data::Scalar(Sig17(metric_norm)))
            .with("residual_at_first_point", Data::matrix(&first)),
    );
    if cli.oracle {
        report.push(metric_oracle_check(s, xi, &res.matrix, s.tolerances.oracle)?);
    }
    Ok(())
}

fn check_conformal(s: &Scene, field: &str, cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let xi = s.field(field)?;
    let res = conformal_killing_residual(xi, &s.metric, &s.points).map_err(input)?;
    let div = divergence(xi, &christoffel(&s.metric).map_err(input)?);
    let divs: Vec<f64> = s
        .points
        .iter()
        .map(|p| div.evaluate(p))
        .collect::<Result<_, _>>()
        .map_err(input)?;
    report.push(
        Check::at_most("conformal_killing_residual", res.max_norm, cli.tol.unwrap_or(s.tolerances.mixed))
            .with("divergence", Data::vector(&divs)),
    );
    Ok(())
}

fn check_gkilling(s: &Scene, field: &str, group: GroupArg, cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let xi = s.field(field)?;
    let frame = s.frame()?;
    let tag = match group {
        GroupArg::So => GroupTag::So,
        GroupArg::Cso => GroupTag::Cso,
        GroupArg::Gl => GroupTag::Gl,
    };
    let res = g_killing_residual(xi, &frame, tag);
    let norm = res.max_norm(&s.points).map_err(input)?;
    let first = res.evaluate(&s.points[0]).map_err(input)?;
    report.push(
        Check::at_most(format!("{tag}_killing_residual"), norm, cli.tol.unwrap_or(s.tolerances.mixed))
            .with("residual_at_first_point", Data::matrix(&first)),
    );
    Ok(())
}

/// Parses `upper,lower,weight;c0;c1;...`.
pub fn parse_tensor_spec(spec: &str, s: &Scene) -> Result<TensorDensity, CliError> {
    let mut parts = spec.split(';');
    let head = parts.next().unwrap_or_default();
    let nums: Vec<&str> = head.split(',').map(str::trim).collect();
    if nums.len() != 3 {
        return Err(input(format!("tensor spec {spec:?} must start with upper,lower,weight")));
    }
    let upper: usize = nums[0].parse().map_err(|_| input(format!("bad upper valence {:?}", nums[0])))?;
    let lower: usize = nums[1].parse().map_err(|_| input(format!("bad lower valence {:?}", nums[1])))?;
    let weight = parse(nums[2])
        .ok()
        .and_then(|e| e.simplify().as_const())
        .ok_or_else(|| input(format!("weight {:?} is not a number", nums[2])))?;
    let comps = parts
        .map(|t| parse(t.trim()).map_err(|e| input(format!("tensor component {t:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    TensorDensity::new(&s.chart, upper, lower, weight, comps).map_err(input)
}

fn lie_tensor(s: &Scene, field: &str, target: &str, cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let xi = s.field(field)?;
    if target == "metric" {
        let lie = lie_derivative_metric(xi, &s.metric);
        let cov = symmetrized_gradient(xi, &s.metric).map_err(input)?;
        let gap = lie.sub(&cov).max_norm(&s.points).map_err(input)?;
        let values = s
            .points
            .iter()
            .map(|p| lie.evaluate(p).map(|m| Data::matrix(&m)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(input)?;
        report.push(
            Check::at_most("covariant_route_agreement", gap, cli.tol.unwrap_or(s.tolerances.mixed))
                .with("values", Data::List(values)),
        );
        if cli.oracle {
            report.push(metric_oracle_check(s, xi, &lie, s.tolerances.oracle)?);
        }
        return Ok(());
    }
    let t = parse_tensor_spec(target, s)?;
    let lie = lie_derivative_tensor_density(xi, &t, &s.chart).map_err(input)?;
    let values = s
        .points
        .iter()
        .map(|p| lie.evaluate(p).map(|v| Data::vector(&v)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input)?;
    let mut check = Check::at_most("evaluated", 0.0, 0.0).with("values", Data::List(values));
    if cli.oracle {
        let cfg = FlowConfig::default();
        let mut worst = 0.0f64;
        for p in &s.points {
            let sym = lie.evaluate(p).map_err(input)?;
            let num = numeric_lie_tensor(xi, &t, &s.chart, p, &cfg).map_err(input)?;
            worst = sym.iter().zip(&num).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        }
        check = Check {
            data: check.data,
            ..Check::at_most("oracle_agreement", worst, cli.tol.unwrap_or(s.tolerances.oracle))
        };
    }
    report.push(check);
    Ok(())
}

fn spinor_values(psi: &SpinorFieldExpr, points: &[PointBinding]) -> Result<Data, CliError> {
    Ok(Data::List(
        points
            .iter()
            .map(|p| psi.evaluate(p).map(|v| Data::spinor(&v)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(input)?,
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffsFile {
    components: Vec<String>,
    algebra: Vec<Vec<String>>,
}

fn load_coeffs(path: &Path, m: usize) -> Result<LiftCoefficients, CliError> {
    let bytes = std::fs::read(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let file: CoeffsFile = serde_json::from_slice(&bytes).map_err(|e| input(format!("malformed coefficients: {e}")))?;
    if file.components.len() != m || file.algebra.len() != m || file.algebra.iter().any(|r| r.len() != m) {
        return Err(input(format!("coefficients must have {m} components and an {m}x{m} algebra part")));
    }
    let p = |t: &String| parse(t).map_err(|e| input(format!("coefficient {t:?}: {e}")));
    let components = file.components.iter().map(p).collect::<Result<Vec<_>, _>>()?;
    let rows = file
        .algebra
        .iter()
        .map(|r| r.iter().map(p).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let algebra = ExprMatrix::from_rows(rows).map_err(input)?;
    Ok(LiftCoefficients::custom(components, algebra))
}

fn lie_spinor(
    s: &Scene,
    field: &str,
    lift: LiftArg,
    coeffs: Option<&Path>,
    cli: &Cli,
    report: &mut Report,
) -> Result<(), CliError> {
    let xi = s.field(field)?;
    let psi = s.spinor()?;
    let frame = s.frame()?;
    let rep = s.gamma()?;
    match lift {
        LiftArg::Kosmann => {
            let tol = cli.tol.unwrap_or(s.tolerances.mixed);
            match lie_spinor_kosmann(xi, psi, &s.metric, &frame, &rep, &s.points) {
                Ok(out) => report.push(
                    Check::at_most("kosmann_forms_agree", out.max_disagreement, tol)
                        .with("values", spinor_values(&out.value, &s.points)?),
                ),
                Err(SpinorError::KosmannMismatch { residual, point }) => report.push(
                    Check::at_most("kosmann_forms_agree", residual, tol)
                        .with("worst_point", Data::Text(point)),
                ),
                Err(e) => return Err(input(e)),
            }
        }
        LiftArg::Penrose => {
            let out = lie_spinor_penrose(xi, psi, &s.metric, &frame, &rep).map_err(input)?;
            if out.experimental {
                report.warnings.push(format!(
                    "Penrose derivative in dimension {} uses the m = 4 trace coefficient 1/4 (experimental)",
                    s.dim()
                ));
            }
            // penrose − kosmann + ¼ (∇·ξ) ψ must vanish
            let kosmann = kosmann_coeffs(xi, &frame);
            let k = lie_spinor_general(&kosmann, psi, &rep, &frame, &s.points).map_err(input)?;
            let div = divergence(xi, &christoffel(&s.metric).map_err(input)?);
            let gap = max_abs_over(&s.points, |p| {
                let d = div.evaluate(p)?;
                let diff = out.value.evaluate(p)? - k.evaluate(p)? + psi.evaluate(p)? * Complex64::from(0.25 * d);
                Ok(diff.camax())
            })
            .map_err(input)?;
            report.push(
                Check::at_most("penrose_trace_identity", gap, cli.tol.unwrap_or(PENROSE_TOLERANCE))
                    .with("values", spinor_values(&out.value, &s.points)?),
            );
        }
        LiftArg::General => {
            let lift = match coeffs {
                Some(path) => load_coeffs(path, s.dim())?,
                None => kosmann_coeffs(xi, &frame),
            };
            let defect = lift.antisymmetry_defect(&s.points).map_err(input)?;
            let tol = cli.tol.unwrap_or(s.tolerances.symbolic);
            match lie_spinor_general(&lift, psi, &rep, &frame, &s.points) {
                Ok(v) => report.push(
                    Check::at_most("algebra_antisymmetry", defect, tol)
                        .with("values", spinor_values(&v, &s.points)?),
                ),
                Err(SpinorError::NotAntisymmetric(d)) => {
                    report.push(Check::at_most("algebra_antisymmetry", d, tol));
                }
                Err(e) => return Err(input(e)),
            }
        }
    }
    Ok(())
}

fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| input(format!("matrix file must be a JSON array of rows: {e}")))
}

fn decompose_matrix(path: &Path, (p, q): (usize, usize), cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let rows = read_matrix(path)?;
    let eta = SignatureMetric::new(p, q);
    let m = LieMatrix::from_rows(&rows).map_err(input)?;
    let split = decompose_reductive(&m, &eta).map_err(input)?;
    let tol = cli.tol.unwrap_or(1e-12);
    let recompose = (&split.recompose().0 - &m.0).amax();
    let a_t = eta_transpose(&split.antisym, &eta).map_err(input)?;
    let s_t = eta_transpose(&split.sym_traceless, &eta).map_err(input)?;
    let so_defect = (&a_t.0 + &split.antisym.0).amax();
    let v_defect = (&s_t.0 - &split.sym_traceless.0).amax().max(split.sym_traceless.trace().abs());
    report.push(
        Check::at_most("recomposition", recompose, tol)
            .with("antisym", Data::matrix(&split.antisym.0))
            .with("sym_traceless", Data::matrix(&split.sym_traceless.0))
            .with("trace_scalar", Data::Scalar(Sig17(split.trace_scalar))),
    );
    report.push(Check::at_most("antisym_in_so", so_defect, tol));
    report.push(Check::at_most("sym_traceless_in_v", v_defect, tol));
    Ok(())
}

fn verify_clifford((p, q): (usize, usize), cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let rep = build_gamma(p, q).map_err(input)?;
    let pairs = rep
        .to_pairs()
        .into_iter()
        .map(|g| {
            Data::List(
                g.into_iter()
                    .map(|row| Data::Spinor(row.into_iter().map(|[re, im]| [Sig17(re), Sig17(im)]).collect()))
                    .collect(),
            )
        })
        .collect();
    report.push(
        Check::at_most("clifford_relation", rep.clifford_residual(), cli.tol.unwrap_or(1e-12))
            .with("gammas", Data::List(pairs)),
    );
    Ok(())
}

fn verify_projectors((p, q): (usize, usize), cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    if p + q == 0 {
        return Err(input("signature must have positive dimension"));
    }
    let eta = SignatureMetric::new(p, q);
    let r = verify_projector_family(&reductive_projectors(&eta)).map_err(input)?;
    let tol = cli.tol.unwrap_or(1e-12);
    report.push(Check::at_most("projector_orthogonality", r.orthogonality, tol));
    report.push(Check::at_most("projector_completeness", r.completeness, tol));
    Ok(())
}
