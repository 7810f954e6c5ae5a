//! Rotations, Haar quadrature on SO(3), angular-momentum generators on the
//! truncated angular space `⊕_{l ≤ L} H_l ⊗ ℂ³`, and the invariant-subspace
//! computation behind the statement that invariant transversal fields vanish.
//!
//! Conventions: the spin-1 factor is written in the spherical basis
//! `χ_{+1} = -(x̂ + iŷ)/√2`, `χ_0 = ẑ`, `χ_{-1} = (x̂ - iŷ)/√2`, in which the
//! Cartesian action `v ↦ R v` is the standard `D¹(R) = exp(-iθ n·S)`.
//! Magnetic quantum numbers are always stored in ascending order.

use std::ops::Mul;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{lm_index, sph_harm_all};
use crate::linalg::{c, hermitian_eigenvalues, joint_null_space, unitary_exp, CMat, CVec, C64, I};
use crate::quadrature::{gauss_legendre, SphereRule};

/// Singular values below this count as zero in null-space computations.
pub const NULL_SPACE_THRESHOLD: f64 = 1e-8;

/// An element of SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Checks orthogonality and orientation to `1e-12`.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let defect = (m.transpose() * m - Matrix3::identity()).abs().max();
        let det = m.determinant();
        if defect > 1e-12 || (det - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "not a rotation: |RᵀR - I|_max = {defect:e}, det = {det}"
            )));
        }
        Ok(Self(m))
    }

    /// Rodrigues' formula; `axis` must be a unit vector to `1e-12`.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        if (axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "rotation axis must be a unit vector, |axis| = {}",
                axis.norm()
            )));
        }
        let k = Matrix3::new(
            0.0, -axis.z, axis.y, //
            axis.z, 0.0, -axis.x, //
            -axis.y, axis.x, 0.0,
        );
        let (s, co) = angle.sin_cos();
        Ok(Self(Matrix3::identity() + k * s + k * k * (1.0 - co)))
    }

    /// `R_z(α) R_y(β) R_z(γ)`.
    pub fn from_euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Self {
        let rz = |t: f64| {
            let (s, c) = t.sin_cos();
            Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
        };
        let (s, c) = beta.sin_cos();
        let ry = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
        Self(rz(alpha) * ry * rz(gamma))
    }

    /// Haar-distributed rotation from a normalized Gaussian quaternion.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let quat = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
        Self(*quat.to_rotation_matrix().matrix())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn apply_inverse(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0.tr_mul(v)
    }

    /// Rotation vector `θ n` (axis times angle, angle in `[0, π]`).
    pub fn rotation_vector(&self) -> Vector3<f64> {
        let rot = Rotation3::from_matrix_unchecked(self.0);
        UnitQuaternion::from_rotation_matrix(&rot).scaled_axis()
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

/// Weighted rotation nodes approximating the normalized Haar integral.
#[derive(Clone, Debug)]
pub struct HaarQuadrature {
    pub nodes: Vec<(Rotation, f64)>,
    /// Wigner matrix entries of degree up to `order` are averaged exactly;
    /// `None` for Monte-Carlo rules.
    pub order: Option<usize>,
}

impl HaarQuadrature {
    /// Product rule in ZYZ Euler angles: `order + 1` uniform nodes in each of
    /// `α`, `γ` and `⌊order/2⌋ + 1` Gauss nodes in `cos β`.
    pub fn product(order: usize) -> Self {
        let order = order.max(1);
        let n_uniform = order + 1;
        let betas = gauss_legendre(order / 2 + 1, -1.0, 1.0);
        let mut nodes = Vec::with_capacity(n_uniform * n_uniform * betas.len());
        let tau = 2.0 * std::f64::consts::PI;
        for a in 0..n_uniform {
            let alpha = tau * a as f64 / n_uniform as f64;
            for &(cb, wb) in &betas {
                let beta = cb.clamp(-1.0, 1.0).acos();
                for g in 0..n_uniform {
                    let gamma = tau * g as f64 / n_uniform as f64;
                    let w = 0.5 * wb / (n_uniform * n_uniform) as f64;
                    nodes.push((Rotation::from_euler_zyz(alpha, beta, gamma), w));
                }
            }
        }
        Self {
            nodes,
            order: Some(order),
        }
    }

    /// Equal-weight Monte-Carlo rule from a seeded generator.
    pub fn monte_carlo<R: Rng + ?Sized>(samples: usize, rng: &mut R) -> Self {
        let w = 1.0 / samples as f64;
        Self {
            nodes: (0..samples).map(|_| (Rotation::random(rng), w)).collect(),
            order: None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }
}

/// `(J_x, J_y, J_z)` for spin `j` in the basis `m = -j, …, j`.
pub fn spin_matrices(j: usize) -> [CMat; 3] {
    let dim = 2 * j + 1;
    let jf = j as f64;
    let mut jp = CMat::zeros(dim, dim);
    let mut jz = CMat::zeros(dim, dim);
    for a in 0..dim {
        let m = a as f64 - jf;
        jz[(a, a)] = c(m);
        if a + 1 < dim {
            // J+ |m> = sqrt((j-m)(j+m+1)) |m+1>
            jp[(a + 1, a)] = c(((jf - m) * (jf + m + 1.0)).sqrt());
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).map(|z| z * 0.5);
    let jy = (&jp - &jm).map(|z| z / (2.0 * I));
    [jx, jy, jz]
}

/// Wigner matrix `D^j(R) = exp(-iθ n·J)` on the `m`-ascending basis.
pub fn wigner_d(j: usize, r: &Rotation) -> CMat {
    let v = r.rotation_vector();
    let [jx, jy, jz] = spin_matrices(j);
    let k = jx.map(|z| z * v.x) + jy.map(|z| z * v.y) + jz.map(|z| z * v.z);
    unitary_exp(&k, 1.0)
}

/// Cartesian components of the spherical spin-1 basis vector `χ_s`.
pub fn spin1_vector(s: i64) -> Vector3<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match s {
        1 => Vector3::new(c(-r), C64::new(0.0, -r), c(0.0)),
        0 => Vector3::new(c(0.0), c(0.0), c(1.0)),
        -1 => Vector3::new(c(r), C64::new(0.0, -r), c(0.0)),
        _ => panic!("spin-1 index out of range: {s}"),
    }
}

/// One basis element of `H_l ⊗ ℂ³`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngularBasisIndex {
    pub l: usize,
    pub m: i64,
    pub s: i64,
}

/// Basis of the coefficient space of `⊕_{l ≤ L} H_l ⊗ ℂ³`, ordered by `l`,
/// then `m`, then `s`.
#[derive(Clone, Debug)]
pub struct AngularBasis {
    pub l_max: usize,
    pub indices: Vec<AngularBasisIndex>,
}

impl AngularBasis {
    pub fn new(l_max: usize) -> Self {
        let mut indices = Vec::with_capacity(3 * (l_max + 1) * (l_max + 1));
        for l in 0..=l_max {
            for m in -(l as i64)..=(l as i64) {
                for s in -1..=1 {
                    indices.push(AngularBasisIndex { l, m, s });
                }
            }
        }
        Self { l_max, indices }
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn index_of(&self, idx: AngularBasisIndex) -> usize {
        3 * lm_index(idx.l, idx.m) + (idx.s + 1) as usize
    }

    /// Value of the basis field `Y_{l,m}(e) χ_s` at `e`.
    pub fn field_value(&self, a: usize, ylm: &[C64]) -> Vector3<C64> {
        let idx = self.indices[a];
        spin1_vector(idx.s) * ylm[lm_index(idx.l, idx.m)]
    }
}

/// Total angular momentum `J = L ⊗ 1 + 1 ⊗ S` on an [`AngularBasis`].
#[derive(Clone, Debug)]
pub struct GeneratorTriple {
    pub basis: AngularBasis,
    pub jx: CMat,
    pub jy: CMat,
    pub jz: CMat,
}

impl GeneratorTriple {
    pub fn as_array(&self) -> [&CMat; 3] {
        [&self.jx, &self.jy, &self.jz]
    }

    pub fn casimir(&self) -> CMat {
        &self.jx * &self.jx + &self.jy * &self.jy + &self.jz * &self.jz
    }

    /// Indices of the `l`-block.
    pub fn block_indices(&self, l: usize) -> Vec<usize> {
        (0..self.basis.dim())
            .filter(|&a| self.basis.indices[a].l == l)
            .collect()
    }

    /// Compression `Qᴴ J Q` of all three generators onto the columns of `q`.
    pub fn compress(&self, q: &CMat) -> [CMat; 3] {
        let qa = q.adjoint();
        [&qa * &self.jx * q, &qa * &self.jy * q, &qa * &self.jz * q]
    }

    /// Largest deviation from `[J_x, J_y] = i J_z` and cyclic permutations.
    pub fn commutation_defect(&self) -> f64 {
        let comm = |a: &CMat, b: &CMat, cc: &CMat| {
            crate::linalg::max_abs(&(a * b - b * a - cc.map(|z| I * z)))
        };
        comm(&self.jx, &self.jy, &self.jz)
            .max(comm(&self.jy, &self.jz, &self.jx))
            .max(comm(&self.jz, &self.jx, &self.jy))
    }
}

pub fn generators(l_max: usize) -> GeneratorTriple {
    let basis = AngularBasis::new(l_max);
    let dim = basis.dim();
    let spin = spin_matrices(1);
    let mut j = [CMat::zeros(dim, dim), CMat::zeros(dim, dim), CMat::zeros(dim, dim)];
    for l in 0..=l_max {
        let orb = spin_matrices(l);
        let offset = 3 * l * l;
        let block_dim = 3 * (2 * l + 1);
        let id_orb = CMat::identity(2 * l + 1, 2 * l + 1);
        let id_spin = CMat::identity(3, 3);
        for a in 0..3 {
            let block = orb[a].kronecker(&id_spin) + id_orb.kronecker(&spin[a]);
            j[a].view_mut((offset, offset), (block_dim, block_dim))
                .copy_from(&block);
        }
    }
    let [jx, jy, jz] = j;
    GeneratorTriple { basis, jx, jy, jz }
}

/// Orthonormal basis of the vectors annihilated by all three generators.
pub fn invariant_subspace(gen: &GeneratorTriple) -> CMat {
    joint_null_space(&gen.as_array(), NULL_SPACE_THRESHOLD)
}

/// Joint null space of an arbitrary generator triple (e.g. a compression).
pub fn invariant_subspace_of(j: &[CMat; 3]) -> CMat {
    joint_null_space(&[&j[0], &j[1], &j[2]], NULL_SPACE_THRESHOLD)
}

/// Isometry from scalar harmonics `Y_{j,μ}`, `j ≤ L - 1`, to the coefficients
/// of the longitudinal fields `e ↦ Y_{j,μ}(e) e`. These are exactly the
/// longitudinal fields contained in the truncated space.
pub fn longitudinal_embedding(basis: &AngularBasis) -> CMat {
    let l_max = basis.l_max;
    if l_max == 0 {
        return CMat::zeros(basis.dim(), 0);
    }
    let n_scalar = l_max * l_max;
    let rule = SphereRule::product(2 * l_max + 2);
    let mut m = CMat::zeros(basis.dim(), n_scalar);
    for (e, w) in rule.directions.iter().zip(&rule.weights) {
        let y = sph_harm_all(l_max, e);
        let ec = e.map(c);
        for a in 0..basis.dim() {
            let field = basis.field_value(a, &y);
            // conj(Y_lm χ_s) · e
            let proj: C64 = field.iter().zip(ec.iter()).map(|(f, x)| f.conj() * x).sum();
            for col in 0..n_scalar {
                m[(a, col)] += proj * y[col] * *w;
            }
        }
    }
    m
}

/// Orthogonal projector removing the longitudinal channels `Y_{j,μ}(e) e`
/// from the truncated angular space. It commutes with the generators, is
/// Hermitian and idempotent, and its rank is the total dimension minus the
/// number of longitudinal channels.
pub fn transversality_projector(gen: &GeneratorTriple) -> CMat {
    let m = longitudinal_embedding(&gen.basis);
    CMat::identity(gen.basis.dim(), gen.basis.dim()) - &m * m.adjoint()
}

/// Coefficients of the radial field `e ↦ e`, normalized, on the `l = 1` block.
pub fn radial_field_coefficients(basis: &AngularBasis) -> CVec {
    let mut v = CVec::zeros(basis.dim());
    if basis.l_max == 0 {
        return v;
    }
    // e = sqrt(4π/3) Σ_q Y*_{1q}(e) χ_q and Y*_{1q} = (-1)^q Y_{1,-q}
    for q in -1..=1_i64 {
        let sign = if q == 0 { 1.0 } else { -1.0 };
        v[basis.index_of(AngularBasisIndex { l: 1, m: -q, s: q })] = c(sign / 3f64.sqrt());
    }
    v
}

/// Outcome of the invariant-field check at one truncation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Lemma1Report {
    pub l_max: usize,
    /// Dimension of the invariant subspace of the full angular space.
    pub invariant_dim: usize,
    /// Largest norm of the transversal projection of an invariant vector.
    pub transversal_overlap: f64,
    /// Dimension of the invariant subspace after compressing the generators
    /// to the range of the transversality projector.
    pub restricted_invariant_dim: usize,
    /// Overlap of the invariant vector with the radial field `e ↦ e`.
    pub radial_alignment: f64,
}

pub fn verify_lemma1(l_max: usize) -> Result<Lemma1Report> {
    if l_max == 0 {
        return Err(Error::Domain("verify_lemma1 needs L_max ≥ 1".into()));
    }
    let gen = generators(l_max);
    let inv = invariant_subspace(&gen);
    let proj = transversality_projector(&gen);
    let transversal_overlap = (0..inv.ncols())
        .map(|k| (&proj * inv.column(k)).norm())
        .fold(0.0, f64::max);
    let radial = radial_field_coefficients(&gen.basis);
    let radial_alignment = (0..inv.ncols())
        .map(|k| inv.column(k).dotc(&radial).norm())
        .fold(0.0, f64::max);
    let q = crate::linalg::range_basis(&proj, 0.5);
    let restricted = invariant_subspace_of(&gen.compress(&q));
    Ok(Lemma1Report {
        l_max,
        invariant_dim: inv.ncols(),
        transversal_overlap,
        restricted_invariant_dim: restricted.ncols(),
        radial_alignment,
    })
}

/// Sorted eigenvalues of the Casimir restricted to the `l`-block.
pub fn casimir_block_spectrum(gen: &GeneratorTriple, l: usize) -> Vec<f64> {
    let idx = gen.block_indices(l);
    let cas = gen.casimir();
    let block = CMat::from_fn(idx.len(), idx.len(), |a, b| cas[(idx[a], idx[b])]);
    hermitian_eigenvalues(&block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_rotation(seed: u64) -> Rotation {
        Rotation::random(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn axis_angle_identity_and_quarter_turn() {
        let z = Vector3::z();
        let id = Rotation::from_axis_angle(&z, 0.0).unwrap();
        assert_eq!(*id.matrix(), Matrix3::identity());
        let q = Rotation::from_axis_angle(&z, FRAC_PI_2).unwrap();
        let v = q.apply(&Vector3::x());
        assert!((v - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn axis_angle_composes_additively() {
        let axis = Vector3::new(1.0, -2.0, 0.5).normalize();
        let a = Rotation::from_axis_angle(&axis, 0.7).unwrap();
        let b = Rotation::from_axis_angle(&axis, -1.9).unwrap();
        let ab = Rotation::from_axis_angle(&axis, 0.7 - 1.9).unwrap();
        assert!(((a * b).matrix() - ab.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn non_unit_axis_rejected() {
        assert!(Rotation::from_axis_angle(&Vector3::new(1.0, 1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn random_rotations_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let r = Rotation::random(&mut rng);
            assert!(Rotation::from_matrix(*r.matrix()).is_ok());
        }
    }

    #[test]
    fn haar_weights_normalized_and_entries_average_to_zero() {
        for order in 1..6 {
            let q = HaarQuadrature::product(order);
            assert!((q.total_weight() - 1.0).abs() < 1e-12);
            assert!(q.nodes.iter().all(|(_, w)| *w > 0.0));
            let mut avg = Matrix3::zeros();
            for (r, w) in &q.nodes {
                avg += r.matrix() * *w;
            }
            assert!(avg.abs().max() < 1e-12, "order {order}");
        }
    }

    #[test]
    fn haar_average_of_rotated_vector_vanishes() {
        let q = HaarQuadrature::product(2);
        let v = Vector3::new(0.3, -1.2, 2.0);
        let avg: Vector3<f64> = q.nodes.iter().map(|(r, w)| r.apply(&v) * *w).sum();
        assert!(avg.norm() < 1e-12);
    }

    #[test]
    fn haar_second_moments_match_schur_orthogonality() {
        // ∫ R_ij R_kl dR = δ_ik δ_jl / 3
        let q = HaarQuadrature::product(2);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let s: f64 = q
                            .nodes
                            .iter()
                            .map(|(r, w)| w * r.matrix()[(i, j)] * r.matrix()[(k, l)])
                            .sum();
                        let expected = if i == k && j == l { 1.0 / 3.0 } else { 0.0 };
                        assert!((s - expected).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn d1_matches_cartesian_action() {
        let r = random_rotation(11);
        let d = wigner_d(1, &r);
        for s in -1..=1_i64 {
            let rotated = r.matrix().map(c) * spin1_vector(s);
            let mut expected = Vector3::zeros();
            for sp in -1..=1_i64 {
                expected += spin1_vector(sp) * d[((sp + 1) as usize, (s + 1) as usize)];
            }
            assert!((rotated - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn wigner_d_is_a_representation() {
        let (a, b) = (random_rotation(1), random_rotation(2));
        for j in 0..4 {
            let lhs = wigner_d(j, &(a * b));
            let rhs = wigner_d(j, &a) * wigner_d(j, &b);
            assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }
        let half_turn = Rotation::from_axis_angle(&Vector3::x(), PI).unwrap();
        let d = wigner_d(2, &half_turn);
        assert!(max_abs(&(&d * d.adjoint() - CMat::identity(5, 5))) < 1e-13);
    }

    #[test]
    fn scalar_harmonics_rotate_with_wigner_d() {
        // Y_lm(R⁻¹ e) = Σ_m' Y_lm'(e) D^l_{m'm}(R)
        let r = random_rotation(5);
        let e = Vector3::new(0.2, -0.5, 0.7).normalize();
        let l = 3;
        let y = sph_harm_all(l, &e);
        let y_rot = sph_harm_all(l, &r.apply_inverse(&e));
        let d = wigner_d(l, &r);
        for m in -(l as i64)..=(l as i64) {
            let mut rhs = C64::new(0.0, 0.0);
            for mp in -(l as i64)..=(l as i64) {
                rhs += y[lm_index(l, mp)] * d[((mp + l as i64) as usize, (m + l as i64) as usize)];
            }
            assert!((y_rot[lm_index(l, m)] - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn l0_block_is_pure_spin() {
        let g = generators(0);
        let s = spin_matrices(1);
        assert!(max_abs(&(&g.jx - &s[0])) < 1e-15);
        assert!(max_abs(&(&g.jz - &s[2])) < 1e-15);
    }

    #[test]
    fn commutation_relations_hold_up_to_l6() {
        for l in 0..=6 {
            assert!(generators(l).commutation_defect() < 1e-10, "L_max = {l}");
        }
    }

    #[test]
    fn jz_spectrum_is_integer_and_bounded() {
        let l_max = 3;
        let g = generators(l_max);
        for ev in hermitian_eigenvalues(&g.jz) {
            assert!((ev - ev.round()).abs() < 1e-12);
            assert!(ev.abs() <= (l_max + 1) as f64 + 1e-12);
        }
    }

    #[test]
    fn casimir_on_l1_block() {
        let g = generators(2);
        let spec = casimir_block_spectrum(&g, 1);
        let expected = [0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0];
        for (a, b) in spec.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn invariant_dimensions() {
        assert_eq!(invariant_subspace(&generators(0)).ncols(), 0);
        for l in 1..=4 {
            assert_eq!(invariant_subspace(&generators(l)).ncols(), 1);
        }
    }

    #[test]
    fn invariant_vector_is_the_radial_field() {
        let g = generators(2);
        let inv = invariant_subspace(&g);
        let radial = radial_field_coefficients(&g.basis);
        assert!((inv.column(0).dotc(&radial).norm() - 1.0).abs() < 1e-12);
        // and it really is e ↦ e when synthesized
        let e = Vector3::new(0.3, 0.4, -0.2).normalize();
        let y = sph_harm_all(2, &e);
        let mut field = Vector3::<C64>::zeros();
        for a in 0..g.basis.dim() {
            field += g.basis.field_value(a, &y) * radial[a];
        }
        let scale = (4.0 * PI / 3.0).sqrt() * 3f64.sqrt();
        assert!((field * c(scale) - e.map(c)).norm() < 1e-13);
    }

    #[test]
    fn transversality_projector_properties() {
        for l_max in 1..=3 {
            let g = generators(l_max);
            let p = transversality_projector(&g);
            assert!(max_abs(&(&p * &p - &p)) < 1e-12);
            assert!(max_abs(&(&p - p.adjoint())) < 1e-13);
            let expected_rank = g.basis.dim() - l_max * l_max;
            assert_eq!(crate::linalg::rank(&p, 0.5), expected_rank);
            let radial = radial_field_coefficients(&g.basis);
            assert!((&p * radial).norm() < 1e-10);
            for a in g.as_array() {
                assert!(max_abs(&(&p * a - a * &p)) < 1e-12);
            }
        }
    }

    #[test]
    fn lemma1_reports() {
        for l in 1..=4 {
            let rep = verify_lemma1(l).unwrap();
            assert_eq!(rep.invariant_dim, 1);
            assert!(rep.transversal_overlap <= 1e-10);
            assert_eq!(rep.restricted_invariant_dim, 0);
        }
        assert!(verify_lemma1(0).is_err());
    }
}
