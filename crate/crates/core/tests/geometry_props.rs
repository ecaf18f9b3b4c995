use kosmann_core::exprcore::{parse, Expr, PointBinding};
use kosmann_core::geometry::{
    halton_points, kosmann_coeffs, lie_derivative_metric, natural_lift_coeffs, orthonormal_frame,
    random_polynomial_field, Chart, FrameField, MetricField, VectorFieldExpr,
};
use kosmann_core::liealg::{decompose_reductive, eta_transpose, LieMatrix, SignatureMetric};
use kosmann_core::spinor::{build_gamma, lie_spinor_general, lie_spinor_kosmann, SpinorFieldExpr};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Setup {
    chart: Chart,
    metric: MetricField,
    frame: FrameField,
    points: Vec<PointBinding>,
}

fn minkowski() -> Setup {
    let chart = Chart::new(&["x0", "x1", "x2", "x3"], 1, 3).unwrap();
    let diag = ["1", "-1", "-1", "-1"].map(|s| parse(s).unwrap()).to_vec();
    let metric = MetricField::diagonal(chart.clone(), diag).unwrap();
    let points = halton_points(&chart, &[-1.0; 4], &[1.0; 4], 6);
    let frame = orthonormal_frame(&metric, &points).unwrap();
    Setup { chart, metric, frame, points }
}

fn sphere() -> Setup {
    let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
    let diag = vec![Expr::one(), parse("sin(x0)^2").unwrap()];
    let metric = MetricField::diagonal(chart.clone(), diag).unwrap();
    let points = halton_points(&chart, &[0.3, 0.0], &[2.8, 6.2], 6);
    let frame = orthonormal_frame(&metric, &points).unwrap();
    Setup { chart, metric, frame, points }
}

fn spinor(rng: &mut ChaCha8Rng, chart: &Chart, n: usize) -> SpinorFieldExpr {
    let mut pool = Vec::new();
    while pool.len() < 2 * n {
        pool.extend(random_polynomial_field(rng, chart, 1).0);
    }
    SpinorFieldExpr { re: pool[..n].to_vec(), im: pool[n..2 * n].to_vec() }
}

fn spinor_gap(a: &SpinorFieldExpr, b: &SpinorFieldExpr, points: &[PointBinding]) -> f64 {
    points
        .iter()
        .map(|p| (a.evaluate(p).unwrap() - b.evaluate(p).unwrap()).camax())
        .fold(0.0, f64::max)
}

fn signature() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6).prop_flat_map(|m| (0..=m).prop_map(move |p| (p, m - p)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reductive_parts_lie_in_their_subspaces(
        (p, q) in signature(),
        entries in prop::collection::vec(-5.0f64..5.0, 36),
    ) {
        let eta = SignatureMetric::new(p, q);
        let m = p + q;
        let a = LieMatrix(DMatrix::from_iterator(m, m, entries.into_iter().take(m * m)));
        let split = decompose_reductive(&a, &eta).unwrap();
        prop_assert!((&split.recompose().0 - &a.0).amax() <= 1e-12);
        let at = eta_transpose(&split.antisym, &eta).unwrap();
        prop_assert!((&at.0 + &split.antisym.0).amax() <= 1e-12);
        let st = eta_transpose(&split.sym_traceless, &eta).unwrap();
        prop_assert!((&st.0 - &split.sym_traceless.0).amax() <= 1e-12);
        prop_assert!(split.sym_traceless.trace().abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn metric_lie_derivative_is_linear_in_the_field(seed in any::<u64>()) {
        let s = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = random_polynomial_field(&mut rng, &s.chart, 2);
        let zeta = random_polynomial_field(&mut rng, &s.chart, 2);
        let sum = VectorFieldExpr(xi.0.iter().zip(&zeta.0).map(|(a, b)| a.add(b)).collect());
        let lhs = lie_derivative_metric(&sum, &s.metric);
        let rhs_a = lie_derivative_metric(&xi, &s.metric);
        let rhs_b = lie_derivative_metric(&zeta, &s.metric);
        for p in &s.points {
            let gap = lhs.evaluate(p).unwrap() - rhs_a.evaluate(p).unwrap() - rhs_b.evaluate(p).unwrap();
            prop_assert!(gap.amax() <= 1e-9);
        }
    }

    #[test]
    fn general_with_kosmann_coefficients_is_kosmann(seed in any::<u64>()) {
        for s in [minkowski(), sphere()] {
            let sig = s.chart.signature();
            let rep = build_gamma(sig.p, sig.q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xi = random_polynomial_field(&mut rng, &s.chart, 2);
            let psi = spinor(&mut rng, &s.chart, rep.spinor_dim());
            let general = lie_spinor_general(&kosmann_coeffs(&xi, &s.frame), &psi, &rep, &s.frame, &s.points).unwrap();
            let kos = lie_spinor_kosmann(&xi, &psi, &s.metric, &s.frame, &rep, &s.points).unwrap();
            prop_assert!(kos.max_disagreement <= 1e-9);
            prop_assert!(spinor_gap(&general, &kos.value, &s.points) <= 1e-9);
        }
    }

    #[test]
    fn kosmann_derivative_obeys_leibniz(seed in any::<u64>()) {
        let s = sphere();
        let rep = build_gamma(2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = random_polynomial_field(&mut rng, &s.chart, 2);
        let psi = spinor(&mut rng, &s.chart, rep.spinor_dim());
        let f = random_polynomial_field(&mut rng, &s.chart, 2).0.remove(0);
        let lhs = lie_spinor_kosmann(&xi, &psi.scale(&f), &s.metric, &s.frame, &rep, &s.points).unwrap();
        let kos = lie_spinor_kosmann(&xi, &psi, &s.metric, &s.frame, &rep, &s.points).unwrap();
        let rhs = psi.scale(&xi.apply(&s.chart, &f)).add(&kos.value.scale(&f));
        prop_assert!(spinor_gap(&lhs.value, &rhs, &s.points) <= 1e-9);
    }
}

#[test]
fn kosmann_lift_of_a_killing_field_is_the_natural_lift() {
    let s = minkowski();
    let boost = VectorFieldExpr(["x1", "x0", "0", "0"].map(|c| parse(c).unwrap()).to_vec());
    let natural = natural_lift_coeffs(&boost, &s.frame).full_algebra(&s.frame);
    let kosmann = kosmann_coeffs(&boost, &s.frame).full_algebra(&s.frame);
    assert!(natural.sub(&kosmann).max_norm(&s.points).unwrap() <= 1e-12);
}
