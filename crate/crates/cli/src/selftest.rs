//! The invariant battery behind `kosmann selftest`, one function per
//! acceptance criterion. Every random draw comes from a ChaCha8 stream seeded
//! from the user seed, so reports are reproducible.

use std::f64::consts::PI;

use kosmann_core::exprcore::random::{derivative_gap, is_safe_point, random_expr};
use kosmann_core::exprcore::{parse, Num, PointBinding};
use kosmann_core::geometry::{
    conformal_killing_residual, g_killing_residual, halton_points, killing_residual,
    kosmann_coeffs, lie_derivative_metric, lie_derivative_tensor_density, natural_lift_coeffs,
    random_polynomial_field, reductive_metric_lie, Chart, GroupTag, TensorDensity, VectorFieldExpr,
};
use kosmann_core::liealg::{
    check_ad_invariance, decompose_reductive, random_matrix, reductive_projectors,
    verify_projector_family, SignatureMetric,
};
use kosmann_core::oracle::{numeric_lie_metric, numeric_lie_tensor, numeric_natural_lift, FlowConfig};
use kosmann_core::spinor::{
    build_gamma, lie_spinor_kosmann, lie_spinor_penrose, SpinorError, SpinorFieldExpr,
    KOSMANN_TOLERANCE,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{input, PENROSE_TOLERANCE};
use crate::report::{Check, Data, Report, Sig17};
use crate::scene::Scene;
use crate::CliError;

pub const MINKOWSKI: &str = include_str!("../scenes/minkowski.json");
pub const SPHERE: &str = include_str!("../scenes/sphere.json");
pub const POLAR: &str = include_str!("../scenes/polar.json");

pub const CRITERIA: [&str; 10] = [
    "clifford",
    "reductive_decomposition",
    "kosmann_identity",
    "killing_battery",
    "g_killing_equivalences",
    "reductive_metric_lie",
    "oracle_concordance",
    "penrose_reduction",
    "parser",
    "determinism",
];

const SYMBOLIC: f64 = 1e-12;
const MIXED: f64 = 1e-9;
const ORACLE: f64 = 1e-6;
/// Residuals above this count as clearly nonzero in the equivalence checks.
const NONZERO: f64 = 1e-6;

/// Fields of the shipped scenes that are not Killing.
const CONFORMAL_ONLY: [&str; 3] = ["dilation", "special_conformal0", "conformal_z"];

fn scene(text: &str) -> Scene {
    Scene::from_bytes(text.as_bytes()).expect("shipped scenes are valid")
}

/// A stream per (seed, criterion, sub-battery) so criteria can run alone.
fn stream(seed: u64, criterion: u64, sub: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(criterion * 16 + sub);
    rng
}

fn random_fields(rng: &mut ChaCha8Rng, chart: &Chart, count: usize) -> Vec<VectorFieldExpr> {
    (0..count).map(|_| random_polynomial_field(rng, chart, 2)).collect()
}

fn random_spinor(rng: &mut ChaCha8Rng, chart: &Chart, n: usize) -> SpinorFieldExpr {
    let mut pool = Vec::new();
    while pool.len() < 2 * n {
        pool.extend(random_polynomial_field(rng, chart, 1).0);
    }
    SpinorFieldExpr {
        re: pool[..n].to_vec(),
        im: pool[n..2 * n].to_vec(),
    }
}

/// The evaluation box of each shipped scene.
fn battery_points(s: &Scene, count: usize) -> Vec<PointBinding> {
    let m = s.dim();
    if m == 4 {
        halton_points(&s.chart, &[-1.0; 4], &[1.0; 4], count)
    } else if s.metric.get(1, 1).to_string().contains("sin") {
        halton_points(&s.chart, &[0.2, 0.0], &[PI - 0.2, 2.0 * PI], count)
    } else {
        halton_points(&s.chart, &[0.5, 0.0], &[2.0, 2.0 * PI], count)
    }
}

fn check_all(name: &str, parts: Vec<Check>) -> Check {
    let passed = parts.iter().all(|c| c.passed);
    let worst = parts
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.residual.0)
        .next()
        .unwrap_or(0.0);
    let mut check = Check::at_most(name, worst, 0.0);
    check.passed = passed;
    check.residual = Sig17(if passed { 0.0 } else { worst });
    for c in parts {
        let status = if c.passed { "pass" } else { "fail" };
        check.data.insert(
            c.name.clone(),
            Data::Text(format!(
                "{status}: residual {} (tolerance {})",
                c.residual.text(),
                c.tolerance.text()
            )),
        );
    }
    check
}

/// Criterion 1: `{γ^a, γ^b} = 2η^{ab} I` for six signatures.
pub fn clifford() -> Result<Check, CliError> {
    let mut parts = Vec::new();
    for (p, q) in [(1, 1), (2, 0), (0, 2), (1, 3), (2, 2), (0, 4)] {
        let rep = build_gamma(p, q).map_err(input)?;
        parts.push(Check::at_most(format!("clifford_{p}_{q}"), rep.clifford_residual(), SYMBOLIC));
    }
    Ok(check_all("clifford", parts))
}

/// Criterion 2: Recomposition, projector axioms and Ad-invariance for every signature
/// with `m <= 6`.
pub fn reductive_decomposition(seed: u64) -> Result<Check, CliError> {
    let mut recompose = 0.0f64;
    let mut projectors = 0.0f64;
    let mut ad = 0.0f64;
    for m in 1..=6usize {
        for p in 0..=m {
            let eta = SignatureMetric::new(p, m - p);
            let mut rng = stream(seed, 2, (m * 7 + p) as u64 % 16);
            for _ in 0..500 {
                let a = random_matrix(&mut rng, m);
                let split = decompose_reductive(&a, &eta).map_err(input)?;
                recompose = recompose.max((&split.recompose().0 - &a.0).amax());
            }
            let r = verify_projector_family(&reductive_projectors(&eta)).map_err(input)?;
            projectors = projectors.max(r.orthogonality).max(r.completeness);
            let inv = check_ad_invariance(&eta, 100, seed ^ ((m * 7 + p) as u64)).map_err(input)?;
            ad = ad.max(inv.max_residual());
        }
    }
    Ok(check_all(
        "reductive_decomposition",
        vec![
            Check::at_most("recomposition", recompose, SYMBOLIC),
            Check::at_most("projector_axioms", projectors, SYMBOLIC),
            Check::at_most("ad_invariance", ad, MIXED),
        ],
    ))
}

/// Criterion 3: The two Kosmann formulas agree for 50 random fields per scene.
pub fn kosmann_identity(seed: u64) -> Result<Check, CliError> {
    let mut parts = Vec::new();
    for (k, text) in [MINKOWSKI, SPHERE].into_iter().enumerate() {
        let s = scene(text);
        let frame = s.frame()?;
        let rep = s.gamma()?;
        let mut rng = stream(seed, 3, k as u64);
        let mut worst = 0.0f64;
        for xi in random_fields(&mut rng, &s.chart, 50) {
            let psi = random_spinor(&mut rng, &s.chart, rep.spinor_dim());
            let gap = match lie_spinor_kosmann(&xi, &psi, &s.metric, &frame, &rep, &s.points) {
                Ok(out) => out.max_disagreement,
                Err(SpinorError::KosmannMismatch { residual, .. }) => residual,
                Err(e) => return Err(input(e)),
            };
            worst = if gap.is_nan() { f64::NAN } else { worst.max(gap) };
        }
        parts.push(Check::at_most(format!("dim{}", s.dim()), worst, KOSMANN_TOLERANCE));
    }
    Ok(check_all("kosmann_identity", parts))
}

/// Criterion 4: Killing generators are Killing; dilation and special conformal fields
/// are conformal Killing but not Killing.
pub fn killing_battery() -> Result<Check, CliError> {
    let mut parts = Vec::new();
    for text in [MINKOWSKI, SPHERE] {
        let s = scene(text);
        for (name, xi) in &s.fields {
            if CONFORMAL_ONLY.contains(&name.as_str()) {
                let ck = conformal_killing_residual(xi, &s.metric, &s.points).map_err(input)?;
                let k = killing_residual(xi, &s.metric, &s.points).map_err(input)?;
                parts.push(Check::at_most(format!("{name}_conformal"), ck.max_norm, MIXED));
                parts.push(Check::above(format!("{name}_not_killing"), k.max_norm, NONZERO));
            } else {
                let k = killing_residual(xi, &s.metric, &s.points).map_err(input)?;
                parts.push(Check::at_most(format!("{name}_killing"), k.max_norm, SYMBOLIC));
            }
        }
    }
    Ok(check_all("killing_battery", parts))
}

/// Classifies a residual as zero, nonzero or undecided.
fn vanishes(x: f64) -> Option<bool> {
    if x <= MIXED {
        Some(true)
    } else if x > NONZERO {
        Some(false)
    } else {
        None
    }
}

/// Criterion 5: Killing ⇔ SO residual zero, conformal Killing ⇔ CSO residual zero,
/// and the GL residual is identically zero.
pub fn g_killing_equivalences(seed: u64) -> Result<Check, CliError> {
    let mut mismatches = 0usize;
    let mut fields = 0usize;
    let mut gl_worst = 0.0f64;
    let mut gl_structural = true;
    for (k, text) in [MINKOWSKI, SPHERE, POLAR].into_iter().enumerate() {
        let s = scene(text);
        let frame = s.frame()?;
        let mut rng = stream(seed, 5, k as u64);
        let mut battery: Vec<VectorFieldExpr> = s.fields.values().cloned().collect();
        battery.extend(random_fields(&mut rng, &s.chart, 10));
        for xi in &battery {
            let killing = killing_residual(xi, &s.metric, &s.points).map_err(input)?.max_norm;
            let conformal = conformal_killing_residual(xi, &s.metric, &s.points).map_err(input)?.max_norm;
            let so = g_killing_residual(xi, &frame, GroupTag::So).max_norm(&s.points).map_err(input)?;
            let cso = g_killing_residual(xi, &frame, GroupTag::Cso).max_norm(&s.points).map_err(input)?;
            for (a, b) in [(killing, so), (conformal, cso)] {
                match (vanishes(a), vanishes(b)) {
                    (Some(x), Some(y)) if x == y => {}
                    _ => mismatches += 1,
                }
            }
            fields += 1;
        }
        for xi in random_fields(&mut rng, &s.chart, 50) {
            let gl = g_killing_residual(&xi, &frame, GroupTag::Gl);
            gl_structural &= (0..s.dim()).all(|a| (0..s.dim()).all(|b| gl.get(a, b).is_zero()));
            gl_worst = gl_worst.max(gl.max_norm(&s.points).map_err(input)?);
        }
    }
    let mut eq = Check::at_most("equivalences", mismatches as f64, 0.0);
    eq.data.insert("fields".into(), Data::Scalar(Sig17(fields as f64)));
    let mut gl = Check::at_most("gl_identically_zero", gl_worst, 0.0);
    gl.passed &= gl_structural;
    Ok(check_all("g_killing_equivalences", vec![eq, gl]))
}

/// Criterion 6: The reductive metric Lie derivative vanishes for Kosmann lifts.
pub fn reductive_metric_lie_vanishes(seed: u64) -> Result<Check, CliError> {
    let mut parts = Vec::new();
    for (k, text) in [MINKOWSKI, SPHERE].into_iter().enumerate() {
        let s = scene(text);
        let frame = s.frame()?;
        let points = battery_points(&s, 50);
        let mut rng = stream(seed, 6, k as u64);
        let mut worst = 0.0f64;
        for xi in random_fields(&mut rng, &s.chart, 50) {
            let lift = kosmann_coeffs(&xi, &frame);
            let res = reductive_metric_lie(&lift, &s.metric, &frame).map_err(input)?;
            worst = worst.max(res.max_norm(&points).map_err(input)?);
        }
        parts.push(Check::at_most(format!("dim{}", s.dim()), worst, MIXED));
    }
    Ok(check_all("reductive_metric_lie", parts))
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Criterion 7: Symbolic `£g`, scalar densities of weight 0 and 1 and natural-lift
/// coefficients against the flow oracle, on every scene field plus random
/// polynomial fields on Minkowski space.
pub fn oracle_concordance(seed: u64) -> Result<Check, CliError> {
    let cfg = FlowConfig::default();
    let mut metric = 0.0f64;
    let mut density = 0.0f64;
    let mut lift = 0.0f64;
    let scenes = [
        (MINKOWSKI, "1 + x0*x1 - x2^2/2 + x3", 5),
        (SPHERE, "cos(x0) + x0*x1", 0),
        (POLAR, "x0^2 + sin(x1)", 0),
    ];
    for (k, (text, f, extra)) in scenes.into_iter().enumerate() {
        let s = scene(text);
        let frame = s.frame()?;
        let f = parse(f).map_err(input)?;
        let mut rng = stream(seed, 7, k as u64);
        let mut battery: Vec<VectorFieldExpr> = s.fields.values().cloned().collect();
        battery.extend(random_fields(&mut rng, &s.chart, extra));
        for xi in &battery {
            let lie_g = lie_derivative_metric(xi, &s.metric);
            let lift_sym = natural_lift_coeffs(xi, &frame).mixed(&frame);
            let densities: Vec<(TensorDensity, TensorDensity)> = [0, 1]
                .into_iter()
                .map(|w| {
                    let t = TensorDensity::scalar(f.clone(), Num::int(w));
                    let l = lie_derivative_tensor_density(xi, &t, &s.chart)?;
                    Ok((t, l))
                })
                .collect::<Result<_, kosmann_core::geometry::GeometryError>>()
                .map_err(input)?;
            for p in &s.points {
                let num = numeric_lie_metric(xi, &s.metric, p, &cfg).map_err(input)?;
                metric = metric.max((num - lie_g.evaluate(p).map_err(input)?).amax());
                for (t, l) in &densities {
                    let num = numeric_lie_tensor(xi, t, &s.chart, p, &cfg).map_err(input)?;
                    density = density.max(max_gap(&num, &l.evaluate(p).map_err(input)?));
                }
                let num = numeric_natural_lift(xi, &frame, p, &cfg).map_err(input)?;
                lift = lift.max((num - lift_sym.evaluate(p).map_err(input)?).amax());
            }
        }
    }
    Ok(check_all(
        "oracle_concordance",
        vec![
            Check::at_most("metric", metric, ORACLE),
            Check::at_most("scalar_density", density, ORACLE),
            Check::at_most("natural_lift", lift, ORACLE),
        ],
    ))
}

/// Criterion 8: Penrose minus Kosmann is `−¼(∇·ξ)ψ`; dilation of a constant spinor is `−ψ`.
pub fn penrose_reduction(seed: u64) -> Result<Check, CliError> {
    let s = scene(MINKOWSKI);
    let frame = s.frame()?;
    let rep = s.gamma()?;
    let mut rng = stream(seed, 8, 0);
    let mut battery: Vec<VectorFieldExpr> = s.fields.values().cloned().collect();
    battery.extend(random_fields(&mut rng, &s.chart, 20));
    let christ = kosmann_core::geometry::christoffel(&s.metric).map_err(input)?;
    let mut trace_gap = 0.0f64;
    for xi in &battery {
        let psi = random_spinor(&mut rng, &s.chart, rep.spinor_dim());
        let pen = lie_spinor_penrose(xi, &psi, &s.metric, &frame, &rep).map_err(input)?;
        let kos = lie_spinor_kosmann(xi, &psi, &s.metric, &frame, &rep, &s.points).map_err(input)?;
        let div = kosmann_core::geometry::divergence(xi, &christ);
        for p in &s.points {
            let d = div.evaluate(p).map_err(input)?;
            let lhs = pen.value.evaluate(p).map_err(input)? - kos.value.evaluate(p).map_err(input)?;
            let rhs = psi.evaluate(p).map_err(input)? * Complex64::from(-0.25 * d);
            trace_gap = trace_gap.max((lhs - rhs).camax());
        }
    }
    let psi = s.spinor()?;
    let dil = s.field("dilation")?;
    let out = lie_spinor_penrose(dil, psi, &s.metric, &frame, &rep).map_err(input)?;
    let mut dilation_gap = 0.0f64;
    for p in &s.points {
        let v = out.value.evaluate(p).map_err(input)? + psi.evaluate(p).map_err(input)?;
        dilation_gap = dilation_gap.max(v.camax());
    }
    Ok(check_all(
        "penrose_reduction",
        vec![
            Check::at_most("trace_identity", trace_gap, PENROSE_TOLERANCE),
            Check::at_most("dilation_constant_spinor", dilation_gap, PENROSE_TOLERANCE),
        ],
    ))
}

/// Criterion 9: Print/parse round trip for 1000 random trees, and symbolic against
/// finite-difference derivatives at up to 5 safe points per tree.
pub fn parser(seed: u64) -> Result<Check, CliError> {
    const NAMES: [&str; 3] = ["x0", "x1", "x2"];
    let mut rng = stream(seed, 9, 0);
    let mut round_trip_failures = 0usize;
    let mut worst_gap = 0.0f64;
    let mut checked_points = 0usize;
    let mut without_safe_points = 0usize;
    for _ in 0..1000 {
        let e = random_expr(&mut rng, 8, &NAMES).simplify();
        match parse(&e.to_string()) {
            Ok(back) if back.simplify() == e => {}
            _ => round_trip_failures += 1,
        }
        let mut found = 0;
        for _ in 0..200 {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = PointBinding::new(&NAMES, &v);
            if !is_safe_point(&e, &p) {
                continue;
            }
            let gap = derivative_gap(&e, &p).unwrap_or(f64::INFINITY);
            worst_gap = if gap.is_nan() { f64::NAN } else { worst_gap.max(gap) };
            checked_points += 1;
            found += 1;
            if found == 5 {
                break;
            }
        }
        if found < 5 {
            without_safe_points += 1;
        }
    }
    let mut deriv = Check::at_most("derivative_vs_finite_difference", worst_gap, ORACLE);
    deriv.data.insert("points".into(), Data::Scalar(Sig17(checked_points as f64)));
    deriv
        .data
        .insert("trees_with_fewer_than_5_safe_points".into(), Data::Scalar(Sig17(without_safe_points as f64)));
    Ok(check_all(
        "parser",
        vec![Check::at_most("round_trip_failures", round_trip_failures as f64, 0.0), deriv],
    ))
}

/// Criteria 1 to 9, in order.
pub fn battery(seed: u64) -> Result<Vec<Check>, CliError> {
    Ok(vec![
        clifford()?,
        reductive_decomposition(seed)?,
        kosmann_identity(seed)?,
        killing_battery()?,
        g_killing_equivalences(seed)?,
        reductive_metric_lie_vanishes(seed)?,
        oracle_concordance(seed)?,
        penrose_reduction(seed)?,
        parser(seed)?,
    ])
}

/// Runs the battery twice; criterion 10 passes when both runs serialize to
/// the same bytes.
pub fn run(seed: u64, report: &mut Report) -> Result<(), CliError> {
    let first = battery(seed)?;
    let second = battery(seed)?;
    let a = serde_json::to_string(&first).map_err(input)?;
    let b = serde_json::to_string(&second).map_err(input)?;
    for c in first {
        report.push(c);
    }
    let mut det = Check::at_most("determinism", if a == b { 0.0 } else { 1.0 }, 0.0);
    det.data.insert("compared_bytes".into(), Data::Scalar(Sig17(a.len() as f64)));
    report.push(det);
    Ok(())
}
