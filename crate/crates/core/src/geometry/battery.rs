use rand::Rng;

use crate::exprcore::{Expr, PointBinding};

use super::{Chart, VectorFieldExpr};

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    out
}

/// `count` Halton points inside the box `[lo, hi]`. The sequence starts at
/// index 1 so no point sits on the box corner.
pub fn halton_points(chart: &Chart, lo: &[f64], hi: &[f64], count: usize) -> Vec<PointBinding> {
    let m = chart.dim();
    assert!(m <= PRIMES.len(), "halton_points supports up to {} dimensions", PRIMES.len());
    assert!(lo.len() == m && hi.len() == m, "box dimension mismatch");
    (1..=count as u64)
        .map(|i| {
            let x: Vec<f64> = (0..m)
                .map(|k| lo[k] + (hi[k] - lo[k]) * radical_inverse(i, PRIMES[k]))
                .collect();
            chart.point(&x)
        })
        .collect()
}

/// Vector field whose components are random polynomials of total degree at
/// most `degree`, with small rational coefficients.
pub fn random_polynomial_field<R: Rng + ?Sized>(
    rng: &mut R,
    chart: &Chart,
    degree: u32,
) -> VectorFieldExpr {
    let m = chart.dim();
    let monomials = monomials(m, degree);
    let comps = (0..m)
        .map(|_| {
            let terms: Vec<Expr> = monomials
                .iter()
                .filter_map(|exps| {
                    if rng.gen_bool(0.4) {
                        return None;
                    }
                    let c = Expr::ratio(rng.gen_range(-6..=6), rng.gen_range(1..=4));
                    let mono = exps.iter().enumerate().fold(Expr::one(), |acc, (k, &e)| {
                        acc.mul(&chart.coordinate(k).powi(e as i64))
                    });
                    Some(c.mul(&mono))
                })
                .collect();
            Expr::sum(terms).simplify()
        })
        .collect();
    VectorFieldExpr(comps)
}

fn monomials(m: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                let used: u32 = prefix.iter().sum();
                (0..=degree - used).map(move |e| {
                    let mut next = prefix.clone();
                    next.push(e);
                    next
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn halton_points_stay_in_box() {
        let chart = Chart::new(&["x0", "x1"], 2, 0).unwrap();
        let pts = halton_points(&chart, &[0.2, -1.0], &[2.9, 1.0], 20);
        assert_eq!(pts.len(), 20);
        for p in &pts {
            let v = p.values();
            assert!(v[0] > 0.2 && v[0] < 2.9 && v[1] > -1.0 && v[1] < 1.0);
        }
        let first = pts[0].values();
        assert!((first[0] - 1.55).abs() < 1e-14 && (first[1] + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn monomial_count() {
        // C(m + d, d)
        assert_eq!(monomials(4, 2).len(), 15);
        assert_eq!(monomials(2, 3).len(), 10);
    }

    #[test]
    fn random_fields_are_reproducible() {
        let chart = Chart::new(&["x0", "x1", "x2"], 1, 2).unwrap();
        let a = random_polynomial_field(&mut ChaCha8Rng::seed_from_u64(7), &chart, 2);
        let b = random_polynomial_field(&mut ChaCha8Rng::seed_from_u64(7), &chart, 2);
        assert_eq!(a, b);
        assert_eq!(a.dim(), 3);
    }
}
