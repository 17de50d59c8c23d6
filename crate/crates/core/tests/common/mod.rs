#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use toricsim_core::{HamiltonianSpec, Pauli, PauliString, StateVector};

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn pauli_matrix(p: Pauli) -> DMatrix<Complex64> {
    match p {
        Pauli::I => DMatrix::identity(2, 2),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// Kronecker product with the highest site as the leftmost factor, so site k is bit k.
pub fn dense(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::identity(1, 1);
    for site in (0..p.n_sites()).rev() {
        m = m.kronecker(&pauli_matrix(p.pauli_at(site)));
    }
    m * p.phase().to_complex()
}

pub fn dense_hamiltonian(h: &HamiltonianSpec) -> DMatrix<Complex64> {
    let d = 1usize << h.n_sites();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for t in h.terms() {
        m += dense(&t.op) * Complex64::new(t.coefficient, 0.0);
    }
    m
}

/// Full spectrum through faer, on the real part alone when the matrix is real.
pub fn sorted_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    let mut v = if m.iter().all(|z| z.im == 0.0) {
        faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re)
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap()
    } else {
        faer::Mat::<faer::c64>::from_fn(n, n, |i, j| faer::c64::new(m[(i, j)].re, m[(i, j)].im))
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap()
    };
    v.sort_by(f64::total_cmp);
    v
}

pub fn column(v: &StateVector) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(v.len(), 1, v.amplitudes())
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `<w_i| p |w_j>`.
pub fn matrix_elements(p: &PauliString, basis: &[StateVector]) -> DMatrix<Complex64> {
    let images: Vec<StateVector> = basis.iter().map(|w| p.apply(w).unwrap()).collect();
    DMatrix::from_fn(basis.len(), basis.len(), |i, j| basis[i].inner(&images[j]).unwrap())
}

pub fn all_paulis() -> [Pauli; 4] {
    [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
}
