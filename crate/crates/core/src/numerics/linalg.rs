use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::CMatrix;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    DMatrix::identity(n, n)
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

/// Largest |H - H†| entry relative to the largest |H| entry (0 for the zero matrix).
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let diff = m - m.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Columns of the returned matrix are the matching eigenvectors.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // Symmetrize so round-off asymmetry cannot leak into the decomposition.
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigh(m).0.first().copied().unwrap_or(0.0)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

/// |0..n⟩⟨i| style projector |i⟩⟨j| of size n.
pub fn ket_bra(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = c(1.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorts_and_reconstructs() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(3.0);
        m[(1, 1)] = c(1.0);
        m[(2, 2)] = c(2.0);
        m[(0, 1)] = Complex64::new(0.0, 0.5);
        m[(1, 0)] = Complex64::new(0.0, -0.5);
        let (vals, vecs) = hermitian_eigh(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(3, vals.iter().map(|&v| c(v))));
        let rebuilt = &vecs * d * vecs.adjoint();
        assert!(frobenius_distance(&rebuilt, &m) < 1e-12);
    }

    #[test]
    fn kron_dimensions() {
        let a = identity(2);
        let b = identity(3);
        assert_eq!(kron(&a, &b).nrows(), 6);
    }
}
