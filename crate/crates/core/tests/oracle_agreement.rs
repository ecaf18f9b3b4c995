use kosmann_core::exprcore::{parse, Num};
use kosmann_core::geometry::{
    halton_points, lie_derivative_metric, lie_derivative_tensor_density, natural_lift_coeffs,
    orthonormal_frame, Chart, MetricField, TensorDensity, VectorFieldExpr,
};
use kosmann_core::oracle::{
    flow_map, numeric_lie_metric, numeric_lie_tensor, numeric_natural_lift, FlowConfig,
};

fn field(comps: &[&str]) -> VectorFieldExpr {
    VectorFieldExpr(comps.iter().map(|c| parse(c).unwrap()).collect())
}

fn minkowski() -> (Chart, MetricField) {
    let chart = Chart::new(&["x0", "x1", "x2", "x3"], 1, 3).unwrap();
    let diag = ["1", "-1", "-1", "-1"].map(|s| parse(s).unwrap()).to_vec();
    let metric = MetricField::diagonal(chart.clone(), diag).unwrap();
    (chart, metric)
}

#[test]
fn boost_preserves_the_metric_numerically() {
    let (chart, g) = minkowski();
    let boost = field(&["x1", "x0", "0", "0"]);
    for p in halton_points(&chart, &[-1.0; 4], &[1.0; 4], 5) {
        let lie = numeric_lie_metric(&boost, &g, &p, &FlowConfig::default()).unwrap();
        assert!(lie.amax() <= 1e-6);
    }
}

#[test]
fn dilation_is_a_homothety_numerically() {
    let (chart, g) = minkowski();
    let dilation = field(&["x0", "x1", "x2", "x3"]);
    for p in halton_points(&chart, &[-1.0; 4], &[1.0; 4], 5) {
        let lie = numeric_lie_metric(&dilation, &g, &p, &FlowConfig::default()).unwrap();
        let want = g.components().evaluate(&p).unwrap() * 2.0;
        assert!((lie - want).amax() <= 1e-6);
    }
}

#[test]
fn weight_one_density_under_dilation() {
    let (chart, _) = minkowski();
    let dilation = field(&["x0", "x1", "x2", "x3"]);
    let f = parse("1 + x0^2 + x1*x3").unwrap();
    let density = TensorDensity::scalar(f.clone(), Num::int(1));
    let symbolic = lie_derivative_tensor_density(&dilation, &density, &chart).unwrap();
    for p in halton_points(&chart, &[-1.0; 4], &[1.0; 4], 5) {
        let num = numeric_lie_tensor(&dilation, &density, &chart, &p, &FlowConfig::default()).unwrap();
        let sym = symbolic.evaluate(&p).unwrap();
        assert!((num[0] - sym[0]).abs() <= 1e-6);
        // x·∇f + 4f, with x·∇f = 2x0^2 + 2x1x3
        let want = 4.0 * f.evaluate(&p).unwrap() + 2.0 * p.get("x0").unwrap().powi(2)
            + 2.0 * p.get("x1").unwrap() * p.get("x3").unwrap();
        assert!((sym[0] - want).abs() <= 1e-12);
    }
}

#[test]
fn rotation_lift_matches_symbolic_on_the_sphere() {
    let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
    let g = MetricField::diagonal(chart.clone(), vec![parse("1").unwrap(), parse("sin(x0)^2").unwrap()]).unwrap();
    let points = halton_points(&chart, &[0.3, 0.0], &[2.8, 6.2], 8);
    let frame = orthonormal_frame(&g, &points).unwrap();
    let rot_x = field(&["-sin(x1)", "-cos(x1)*cos(x0)/sin(x0)"]);
    let symbolic = natural_lift_coeffs(&rot_x, &frame).mixed(&frame);
    let lie_g = lie_derivative_metric(&rot_x, &g);
    for p in &points {
        let num = numeric_natural_lift(&rot_x, &frame, p, &FlowConfig::default()).unwrap();
        assert!((num - symbolic.evaluate(p).unwrap()).amax() <= 1e-6);
        assert!(lie_g.evaluate(p).unwrap().amax() <= 1e-12);
    }
}

#[test]
fn rotation_orbit_closes() {
    let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
    let rot = field(&["-x1", "x0"]);
    let start = chart.point(&[0.7, -0.2]);
    let end = flow_map(&rot, &chart, &start, 2.0 * std::f64::consts::PI, 2000).unwrap();
    for name in ["x0", "x1"] {
        assert!((end.get(name).unwrap() - start.get(name).unwrap()).abs() <= 1e-8);
    }
}
