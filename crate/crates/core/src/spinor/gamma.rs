use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::liealg::SignatureMetric;

use super::SpinorError;

type CMatrix = DMatrix<Complex64>;

const MAX_DIM: usize = 6;

/// Constant gamma matrices `γ^a` for a signature `(p, q)` with `m = p + q` even.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRep {
    signature: SignatureMetric,
    gammas: Vec<CMatrix>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli() -> [CMatrix; 4] {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// `2k` Hermitian matrices that square to `I` and pairwise anticommute:
/// `σ3^{⊗j} ⊗ σ1 ⊗ I^{⊗(k−j−1)}` and the same with `σ2`.
fn euclidean_generators(k: usize) -> Vec<CMatrix> {
    let [id, s1, s2, s3] = pauli();
    let mut out = Vec::with_capacity(2 * k);
    for j in 0..k {
        for middle in [&s1, &s2] {
            let mut factors: Vec<&CMatrix> = vec![&s3; j];
            factors.push(middle);
            factors.extend(std::iter::repeat_n(&id, k - j - 1));
            out.push(kron_all(&factors));
        }
    }
    out
}

fn chiral_1_3() -> Vec<CMatrix> {
    let [id, s1, s2, s3] = pauli();
    let zero = CMatrix::zeros(2, 2);
    let block = |a: &CMatrix, b: &CMatrix, cc: &CMatrix, d: &CMatrix| {
        let mut out = CMatrix::zeros(4, 4);
        out.view_mut((0, 0), (2, 2)).copy_from(a);
        out.view_mut((0, 2), (2, 2)).copy_from(b);
        out.view_mut((2, 0), (2, 2)).copy_from(cc);
        out.view_mut((2, 2), (2, 2)).copy_from(d);
        out
    };
    let mut out = vec![block(&zero, &id, &id, &zero)];
    for s in [&s1, &s2, &s3] {
        out.push(block(&zero, s, &(-s), &zero));
    }
    out
}

impl GammaRep {
    pub fn signature(&self) -> SignatureMetric {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.gammas.len()
    }

    /// `N = 2^{m/2}`.
    pub fn spinor_dim(&self) -> usize {
        self.gammas.first().map_or(1, |g| g.nrows())
    }

    pub fn gamma(&self, a: usize) -> &CMatrix {
        &self.gammas[a]
    }

    pub fn gammas(&self) -> &[CMatrix] {
        &self.gammas
    }

    /// `γ^a γ^b`.
    pub fn product(&self, a: usize, b: usize) -> CMatrix {
        &self.gammas[a] * &self.gammas[b]
    }

    /// Max entrywise `|γ^aγ^b + γ^bγ^a − 2η^{ab} I|` over all pairs.
    pub fn clifford_residual(&self) -> f64 {
        let m = self.dim();
        let n = self.spinor_dim();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let mut anti = self.product(a, b) + self.product(b, a);
                if a == b {
                    anti -= CMatrix::identity(n, n) * c(2.0 * self.signature.sign(a), 0.0);
                }
                worst = worst.max(anti.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Entries of every `γ^a` as `[re, im]` pairs, row-major.
    pub fn to_pairs(&self) -> Vec<Vec<Vec<[f64; 2]>>> {
        self.gammas
            .iter()
            .map(|g| {
                (0..g.nrows())
                    .map(|i| (0..g.ncols()).map(|j| [g[(i, j)].re, g[(i, j)].im]).collect())
                    .collect()
            })
            .collect()
    }
}

/// Gamma matrices for signature `(p, q)`: the chiral basis for `(1, 3)`, the
/// Pauli tensor-product construction otherwise, with the last `q` generators
/// multiplied by `i`.
pub fn build_gamma(p: usize, q: usize) -> Result<GammaRep, SpinorError> {
    let m = p + q;
    if !m.is_multiple_of(2) {
        return Err(SpinorError::OddDimension(m));
    }
    if m == 0 || m > MAX_DIM {
        return Err(SpinorError::UnsupportedDimension(m));
    }
    let signature = SignatureMetric::new(p, q);
    let gammas = if (p, q) == (1, 3) {
        chiral_1_3()
    } else {
        euclidean_generators(m / 2)
            .into_iter()
            .enumerate()
            .map(|(a, g)| if a < p { g } else { g * c(0.0, 1.0) })
            .collect()
    };
    Ok(GammaRep { signature, gammas })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_relation_all_signatures() {
        for (p, q) in [(1, 1), (2, 0), (0, 2), (1, 3), (3, 1), (2, 2), (0, 4), (4, 0), (3, 3), (1, 5), (6, 0)] {
            let rep = build_gamma(p, q).unwrap();
            assert_eq!(rep.spinor_dim(), 1 << ((p + q) / 2));
            assert!(rep.clifford_residual() <= 1e-12, "({p},{q})");
        }
    }

    #[test]
    fn minkowski_squares() {
        let rep = build_gamma(1, 3).unwrap();
        let id = CMatrix::identity(4, 4);
        assert_eq!(rep.product(0, 0), id);
        for k in 1..4 {
            assert_eq!(rep.product(k, k), -id.clone());
        }
    }

    #[test]
    fn euclidean_generators_are_hermitian() {
        for g in euclidean_generators(3) {
            assert_eq!(g.adjoint(), g);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert_eq!(build_gamma(2, 1), Err(SpinorError::OddDimension(3)));
        assert_eq!(build_gamma(4, 4), Err(SpinorError::UnsupportedDimension(8)));
        assert_eq!(build_gamma(0, 0), Err(SpinorError::UnsupportedDimension(0)));
    }

    #[test]
    fn pairs_export_shape() {
        let pairs = build_gamma(1, 1).unwrap().to_pairs();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].len(), 2);
        assert_eq!(pairs[0][0].len(), 2);
    }
}
