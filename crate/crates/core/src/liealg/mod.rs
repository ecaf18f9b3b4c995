//! Matrix Lie algebras under a signature metric.
//!
//! With `η = diag(+1 (p times), -1 (q times))`, every real `m×m` matrix splits
//! uniquely as
//!
//! ```text
//! M = A + S + (tr M / m) I,   A ∈ so(p,q),  S ∈ V (η-symmetric, traceless)
//! ```
//!
//! and both `so(p,q)` and `V` are stable under `Ad_O` for `O ∈ SO(p,q)`.
//! The three projectors of this split form a family of complementary
//! idempotents, which [`verify_projector_family`] checks directly.

mod expm;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use expm::{matrix_exp, matrix_exp_complex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieAlgError {
    #[error("dimension mismatch: expected {expected}×{expected}, got {rows}×{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is singular (condition number {condition:e})")]
    Singular { condition: f64 },
    #[error("at least one sample is required")]
    NoSamples,
    #[error("empty projector family")]
    EmptyFamily,
    #[error("rows of unequal length")]
    Ragged,
}

/// `η = diag(+1 × p, -1 × q)`, plus signs first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignatureMetric {
    pub p: usize,
    pub q: usize,
}

impl SignatureMetric {
    pub fn new(p: usize, q: usize) -> Self {
        SignatureMetric { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Diagonal entry `η_aa` (equal to `η^aa`).
    pub fn sign(&self, a: usize) -> f64 {
        if a < self.p {
            1.0
        } else {
            -1.0
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| if i == j { self.sign(i) } else { 0.0 })
    }
}

/// A real square matrix, element of `gl(m, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieMatrix(pub DMatrix<f64>);

impl LieMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LieAlgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != rows.first().map_or(0, Vec::len)) {
            return Err(LieAlgError::Ragged);
        }
        let cols = rows.first().map_or(0, Vec::len);
        if cols != n {
            return Err(LieAlgError::DimensionMismatch {
                expected: n,
                rows: n,
                cols,
            });
        }
        Ok(LieMatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j])))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn identity(m: usize) -> Self {
        LieMatrix(DMatrix::identity(m, m))
    }

    pub fn zeros(m: usize) -> Self {
        LieMatrix(DMatrix::zeros(m, m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    fn check(&self, eta: &SignatureMetric) -> Result<(), LieAlgError> {
        let m = eta.dim();
        if self.0.nrows() != m || self.0.ncols() != m {
            return Err(LieAlgError::DimensionMismatch {
                expected: m,
                rows: self.0.nrows(),
                cols: self.0.ncols(),
            });
        }
        Ok(())
    }
}

/// The three parts of `M = antisym + sym_traceless + trace_scalar · I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductiveSplit {
    pub antisym: LieMatrix,
    pub sym_traceless: LieMatrix,
    pub trace_scalar: f64,
}

impl ReductiveSplit {
    pub fn recompose(&self) -> LieMatrix {
        let m = self.antisym.dim();
        LieMatrix(
            &self.antisym.0 + &self.sym_traceless.0 + DMatrix::identity(m, m) * self.trace_scalar,
        )
    }
}

/// `M^⊤ = η Mᵀ η`, the adjoint of `M` with respect to `η`.
pub fn eta_transpose(m: &LieMatrix, eta: &SignatureMetric) -> Result<LieMatrix, LieAlgError> {
    m.check(eta)?;
    let n = eta.dim();
    Ok(LieMatrix(DMatrix::from_fn(n, n, |i, j| {
        eta.sign(i) * m.0[(j, i)] * eta.sign(j)
    })))
}

pub fn decompose_reductive(
    m: &LieMatrix,
    eta: &SignatureMetric,
) -> Result<ReductiveSplit, LieAlgError> {
    let t = eta_transpose(m, eta)?;
    let n = eta.dim();
    let trace_scalar = m.trace() / n as f64;
    let antisym = (&m.0 - &t.0) * 0.5;
    let sym_traceless = (&m.0 + &t.0) * 0.5 - DMatrix::identity(n, n) * trace_scalar;
    Ok(ReductiveSplit {
        antisym: LieMatrix(antisym),
        sym_traceless: LieMatrix(sym_traceless),
        trace_scalar,
    })
}

/// `O M O⁻¹`, returned with the 2-norm condition number of `O`.
pub fn ad_action(o: &LieMatrix, m: &LieMatrix) -> Result<(LieMatrix, f64), LieAlgError> {
    let n = o.dim();
    if m.dim() != n || o.0.ncols() != n || m.0.ncols() != n {
        return Err(LieAlgError::DimensionMismatch {
            expected: n,
            rows: m.0.nrows(),
            cols: m.0.ncols(),
        });
    }
    let sv = o.0.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < 1e14) {
        return Err(LieAlgError::Singular { condition });
    }
    let inv = o
        .0
        .clone()
        .try_inverse()
        .ok_or(LieAlgError::Singular { condition })?;
    Ok((LieMatrix(&o.0 * &m.0 * inv), condition))
}

pub fn commutator(a: &LieMatrix, b: &LieMatrix) -> LieMatrix {
    LieMatrix(&a.0 * &b.0 - &b.0 * &a.0)
}

/// Uniform random matrix with entries in `[-1, 1]`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize) -> LieMatrix {
    LieMatrix(DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..=1.0)))
}

/// `η S` with `S` antisymmetric, entries uniform in `[-1, 1]`: a generic
/// element of `so(p,q)`.
pub fn random_so<R: Rng + ?Sized>(rng: &mut R, eta: &SignatureMetric) -> LieMatrix {
    let m = eta.dim();
    let mut s = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = rng.gen_range(-1.0..=1.0);
            s[(i, j)] = v;
            s[(j, i)] = -v;
        }
    }
    LieMatrix(eta.matrix() * s)
}

/// An element of the identity component `SO(p,q)^e`.
pub fn random_group_element<R: Rng + ?Sized>(rng: &mut R, eta: &SignatureMetric) -> LieMatrix {
    matrix_exp(&random_so(rng, eta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdInvarianceReport {
    pub samples: usize,
    /// max ‖P_so(Ad_O V)‖ over samples, V ∈ V.
    pub v_so_leak: f64,
    /// max |tr(Ad_O V)/m| over samples.
    pub v_trace_leak: f64,
    /// max ‖P_V(Ad_O A)‖ + |tr(Ad_O A)/m| for A ∈ so(p,q).
    pub so_leak: f64,
    /// max ‖P_V(Ad_O M) − Ad_O(P_V M)‖ for generic M.
    pub commutation: f64,
}

impl AdInvarianceReport {
    pub fn max_residual(&self) -> f64 {
        self.v_so_leak
            .max(self.v_trace_leak)
            .max(self.so_leak)
            .max(self.commutation)
    }
}

/// Samples `O ∈ SO(p,q)^e` and checks that `Ad_O` preserves `so(p,q)` and `V`.
/// Norms are max-abs over entries.
pub fn check_ad_invariance(
    eta: &SignatureMetric,
    samples: usize,
    seed: u64,
) -> Result<AdInvarianceReport, LieAlgError> {
    if samples == 0 {
        return Err(LieAlgError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = eta.dim();
    let mut report = AdInvarianceReport {
        samples,
        v_so_leak: 0.0,
        v_trace_leak: 0.0,
        so_leak: 0.0,
        commutation: 0.0,
    };
    for _ in 0..samples {
        let o = random_group_element(&mut rng, eta);
        let v = decompose_reductive(&random_matrix(&mut rng, m), eta)?.sym_traceless;
        let (adv, _) = ad_action(&o, &v)?;
        let split = decompose_reductive(&adv, eta)?;
        report.v_so_leak = report.v_so_leak.max(split.antisym.max_abs());
        report.v_trace_leak = report.v_trace_leak.max(split.trace_scalar.abs());

        let a = random_so(&mut rng, eta);
        let (ada, _) = ad_action(&o, &a)?;
        let split = decompose_reductive(&ada, eta)?;
        report.so_leak = report
            .so_leak
            .max(split.sym_traceless.max_abs() + split.trace_scalar.abs());

        let general = random_matrix(&mut rng, m);
        let (adm, _) = ad_action(&o, &general)?;
        let lhs = decompose_reductive(&adm, eta)?.sym_traceless;
        let (rhs, _) = ad_action(&o, &decompose_reductive(&general, eta)?.sym_traceless)?;
        report.commutation = report.commutation.max((&lhs.0 - &rhs.0).amax());
    }
    Ok(report)
}

/// Linear operators on a common `n`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily(pub Vec<DMatrix<f64>>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorReport {
    /// max over i, j of ‖Φ^i Φ^j − δ^{ij} Φ^j‖.
    pub orthogonality: f64,
    /// ‖Σ Φ^i − I‖.
    pub completeness: f64,
}

impl ProjectorReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.orthogonality <= tol && self.completeness <= tol
    }
}

pub fn verify_projector_family(family: &ProjectorFamily) -> Result<ProjectorReport, LieAlgError> {
    let first = family.0.first().ok_or(LieAlgError::EmptyFamily)?;
    let n = first.nrows();
    for phi in &family.0 {
        if phi.nrows() != n || phi.ncols() != n {
            return Err(LieAlgError::DimensionMismatch {
                expected: n,
                rows: phi.nrows(),
                cols: phi.ncols(),
            });
        }
    }
    let mut orthogonality = 0.0f64;
    for (i, a) in family.0.iter().enumerate() {
        for (j, b) in family.0.iter().enumerate() {
            let prod = a * b;
            let r = if i == j { (prod - b).amax() } else { prod.amax() };
            orthogonality = orthogonality.max(r);
        }
    }
    let total = family
        .0
        .iter()
        .fold(DMatrix::zeros(n, n), |acc, phi| acc + phi);
    let completeness = (total - DMatrix::<f64>::identity(n, n)).amax();
    Ok(ProjectorReport {
        orthogonality,
        completeness,
    })
}

/// The projectors onto `so(p,q)`, `V` and `R·I`, as `m²×m²` operators on
/// row-major vectorised matrices.
pub fn reductive_projectors(eta: &SignatureMetric) -> ProjectorFamily {
    let m = eta.dim();
    let n = m * m;
    let mut ops = vec![DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
    for col in 0..n {
        let mut basis = DMatrix::zeros(m, m);
        basis[(col / m, col % m)] = 1.0;
        let split = decompose_reductive(&LieMatrix(basis), eta).expect("square by construction");
        let trace_part = DMatrix::<f64>::identity(m, m) * split.trace_scalar;
        for (op, part) in ops
            .iter_mut()
            .zip([&split.antisym.0, &split.sym_traceless.0, &trace_part])
        {
            for row in 0..n {
                op[(row, col)] = part[(row / m, row % m)];
            }
        }
    }
    ProjectorFamily(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mat(rows: &[&[f64]]) -> LieMatrix {
        LieMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn eta_transpose_lorentzian_2d() {
        let eta = SignatureMetric::new(1, 1);
        let t = eta_transpose(&mat(&[&[0.0, 1.0], &[0.0, 0.0]]), &eta).unwrap();
        assert_eq!(t, mat(&[&[0.0, 0.0], &[-1.0, 0.0]]));
        // defining identity η(Mᵀv, w) = η(v, Mw) on basis pairs
        let m = mat(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = eta.matrix();
        for i in 0..2 {
            for j in 0..2 {
                let lhs = (t.0.transpose() * &e)[(i, j)];
                let rhs = (&e * &m.0)[(i, j)];
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_eta_transpose_is_transpose() {
        let m = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
        let t = eta_transpose(&m, &SignatureMetric::new(3, 0)).unwrap();
        assert_eq!(t.0, m.0.transpose());
    }

    #[test]
    fn decompose_known_matrix() {
        let split = decompose_reductive(&mat(&[&[1.0, 2.0], &[3.0, 4.0]]), &SignatureMetric::new(2, 0))
            .unwrap();
        assert_eq!(split.antisym, mat(&[&[0.0, -0.5], &[0.5, 0.0]]));
        assert_eq!(split.trace_scalar, 2.5);
        assert_eq!(split.sym_traceless, mat(&[&[-1.5, 2.5], &[2.5, 1.5]]));
    }

    #[test]
    fn decompose_identity_and_fixed_points() {
        let eta = SignatureMetric::new(1, 3);
        let split = decompose_reductive(&LieMatrix::identity(4), &eta).unwrap();
        assert_eq!(split.antisym.max_abs(), 0.0);
        assert_eq!(split.sym_traceless.max_abs(), 0.0);
        assert_eq!(split.trace_scalar, 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_so(&mut rng, &eta);
        let split = decompose_reductive(&a, &eta).unwrap();
        assert_abs_diff_eq!((&split.antisym.0 - &a.0).amax(), 0.0, epsilon = 1e-15);
        assert_eq!(split.sym_traceless.max_abs(), 0.0);
        assert_eq!(split.trace_scalar, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = eta_transpose(&LieMatrix::identity(3), &SignatureMetric::new(1, 1)).unwrap_err();
        assert!(matches!(err, LieAlgError::DimensionMismatch { expected: 2, .. }));
        assert!(LieMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn ad_fixes_the_centre_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let o = random_matrix(&mut rng, 3);
        let scalar = LieMatrix(DMatrix::identity(3, 3) * 2.5);
        let (r, cond) = ad_action(&o, &scalar).unwrap();
        assert!(cond >= 1.0);
        assert_abs_diff_eq!((&r.0 - &scalar.0).amax(), 0.0, epsilon = 1e-12);
        let m = random_matrix(&mut rng, 3);
        let (r, _) = ad_action(&LieMatrix::identity(3), &m).unwrap();
        assert_abs_diff_eq!((&r.0 - &m.0).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ad_rejects_singular() {
        let o = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(
            ad_action(&o, &LieMatrix::identity(2)),
            Err(LieAlgError::Singular { .. })
        ));
    }

    #[test]
    fn ad_invariance_zero_samples_is_an_error() {
        assert_eq!(
            check_ad_invariance(&SignatureMetric::new(2, 0), 0, 42),
            Err(LieAlgError::NoSamples)
        );
    }

    #[test]
    fn projector_family_edge_cases() {
        let id = ProjectorFamily(vec![DMatrix::identity(3, 3)]);
        assert!(verify_projector_family(&id).unwrap().passes(1e-12));

        let mut p = DMatrix::zeros(2, 2);
        p[(0, 0)] = 1.0;
        let doubled = verify_projector_family(&ProjectorFamily(vec![p.clone(), p])).unwrap();
        assert!(!doubled.passes(1e-12));

        let bad = ProjectorFamily(vec![DMatrix::identity(2, 2), DMatrix::identity(3, 3)]);
        assert!(verify_projector_family(&bad).is_err());
    }

    #[test]
    fn so_is_closed_under_commutator() {
        let eta = SignatureMetric::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let c = commutator(&random_so(&mut rng, &eta), &random_so(&mut rng, &eta));
            let t = eta_transpose(&c, &eta).unwrap();
            assert_abs_diff_eq!((&t.0 + &c.0).amax(), 0.0, epsilon = 1e-12);
        }
    }
}
