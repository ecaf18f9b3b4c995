use nalgebra::DMatrix;
use num_complex::Complex64;

use super::LieMatrix;

pub fn matrix_exp(m: &LieMatrix) -> LieMatrix {
    LieMatrix(m.0.exp())
}

pub fn matrix_exp_complex(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    m.exp()
}
