//! Dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `Some(diagonal)` when every off-diagonal entry of a square matrix is zero.
pub fn diagonal_entries(m: &CMat) -> Option<Vec<C64>> {
    if !m.is_square() {
        return None;
    }
    let zero = C64::new(0.0, 0.0);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j && m[(i, j)] != zero {
                return None;
            }
        }
    }
    Some((0..m.nrows()).map(|i| m[(i, i)]).collect())
}

/// Operator (spectral) norm: the largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if let Some(d) = diagonal_entries(m) {
        return d.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}

/// Smallest singular value.
pub fn min_singular_value(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if let Some(d) = diagonal_entries(m) {
        return d.iter().fold(f64::INFINITY, |acc, z| acc.min(z.norm()));
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(f64::INFINITY, |acc, s| acc.min(*s))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Orthonormal basis (as columns) of the common null space of `mats`,
/// obtained from the SVD of the vertically stacked matrix. Singular values
/// below `threshold` count as zero.
pub fn joint_null_space(mats: &[&CMat], threshold: f64) -> CMat {
    let n = mats[0].ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let rows: usize = mats.iter().map(|m| m.nrows()).sum();
    let mut stacked = CMat::zeros(rows.max(n), n);
    let mut offset = 0;
    for m in mats {
        stacked.view_mut((offset, 0), (m.nrows(), n)).copy_from(m);
        offset += m.nrows();
    }
    let svd = SVD::new(stacked, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] < threshold)
        .collect();
    let mut basis = CMat::zeros(n, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        for row in 0..n {
            basis[(row, col)] = v_t[(k, row)].conj();
        }
    }
    basis
}

/// Orthonormal basis of the column space of `m`, singular values above
/// `threshold`.
pub fn range_basis(m: &CMat, threshold: f64) -> CMat {
    if let Some(d) = diagonal_entries(m) {
        let kept: Vec<usize> = (0..d.len()).filter(|&k| d[k].norm() > threshold).collect();
        let mut basis = CMat::zeros(m.nrows(), kept.len());
        for (col, &k) in kept.iter().enumerate() {
            basis[(k, col)] = C64::new(1.0, 0.0);
        }
        return basis;
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("requested U");
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > threshold)
        .collect();
    let mut basis = CMat::zeros(m.nrows(), kept.len());
    for (col, &k) in kept.iter().enumerate() {
        basis.set_column(col, &u.column(k));
    }
    basis
}

pub fn rank(m: &CMat, threshold: f64) -> usize {
    m.clone()
        .singular_values()
        .iter()
        .filter(|s| **s > threshold)
        .count()
}

/// Eigen-decomposition of a Hermitian matrix (eigenvalues unsorted).
pub fn hermitian_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues, eig.eigenvectors)
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `exp(-i t K)` for Hermitian `K`, through its spectral decomposition.
pub fn unitary_exp(k: &CMat, t: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(k);
    let phases = CVec::from_iterator(vals.len(), vals.iter().map(|v| (-I * t * *v).exp()));
    let scaled = CMat::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * phases[j]);
    scaled * vecs.adjoint()
}

/// `f(A)` for a Hermitian `A`, through its spectral decomposition.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(a);
    let scaled = CMat::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * f(vals[j]));
    scaled * vecs.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.nrows() == m.ncols() && max_abs(&(m - m.adjoint())) <= tol
}

/// Sums in a fixed left-to-right order so results do not depend on how a
/// parallel map was scheduled.
pub fn ordered_sum(values: impl IntoIterator<Item = C64>) -> C64 {
    values.into_iter().fold(C64::new(0.0, 0.0), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_diagonal() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0), c(2.0)]));
        let ns = joint_null_space(&[&a], 1e-8);
        assert_eq!(ns.ncols(), 1);
        assert!((ns[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_exp_of_pauli() {
        let sx = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let u = unitary_exp(&sx, std::f64::consts::FRAC_PI_2);
        // exp(-i pi/2 sx) = -i sx
        assert!(max_abs(&(u - sx.map(|z| -I * z))) < 1e-14);
    }

    #[test]
    fn op_norm_matches_largest_eigenvalue_for_psd() {
        let a = CMat::from_row_slice(2, 2, &[c(2.0), c(1.0), c(1.0), c(2.0)]);
        assert!((op_norm(&a) - 3.0).abs() < 1e-13);
        assert!((min_singular_value(&a) - 1.0).abs() < 1e-13);
    }
}
