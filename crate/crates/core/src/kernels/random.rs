//! Seeded random kernels: a polynomial in `r` times smooth momentum factors,
//! symmetrized and cut to the support region.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{apply_support, hermitian_partner, linear_combination, symmetrize, KernelFunction, KernelSequence};
use crate::error::Result;
use crate::linalg::{c, C64, I};
use crate::transversal::MomentumPoint;

/// Momentum dependence of each slot factor `ε_λ(k) · v(k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentumStyle {
    /// `v(k) = c + B k`: band-limited, so quadrature rules of modest degree
    /// are exact for it.
    Polynomial,
    /// `v(k) = c e^{i k·a}`: every angular degree is present.
    PlaneWave,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomKernelSpec {
    pub style: MomentumStyle,
    /// Number of product terms.
    pub terms: usize,
    /// Degree of the polynomial in `r`.
    pub r_degree: usize,
    /// Standard deviation of the plane-wave vectors `a`.
    pub wave_scale: f64,
}

impl RandomKernelSpec {
    pub fn new(style: MomentumStyle) -> Self {
        Self {
            style,
            terms: 2,
            r_degree: 2,
            wave_scale: 2.0,
        }
    }
}

#[derive(Clone, Debug)]
enum SlotFactor {
    Polynomial { c: Vector3<C64>, b: Matrix3<C64> },
    PlaneWave { c: Vector3<C64>, a: Vector3<f64> },
}

impl SlotFactor {
    fn eval(&self, p: &MomentumPoint) -> C64 {
        let eps = p.polarization.map(c);
        let v = match self {
            SlotFactor::Polynomial { c: c0, b } => c0 + b * p.k.map(c),
            SlotFactor::PlaneWave { c: c0, a } => c0 * (I * p.k.dot(a)).exp(),
        };
        eps.dot(&v) * p.norm().sqrt()
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn draw_slot<R: Rng + ?Sized>(spec: &RandomKernelSpec, rng: &mut R) -> SlotFactor {
    let c0 = Vector3::from_fn(|_, _| complex_normal(rng));
    match spec.style {
        MomentumStyle::Polynomial => SlotFactor::Polynomial {
            c: c0,
            b: Matrix3::from_fn(|_, _| complex_normal(rng)),
        },
        MomentumStyle::PlaneWave => SlotFactor::PlaneWave {
            c: c0,
            a: Vector3::from_fn(|_, _| {
                let x: f64 = StandardNormal.sample(rng);
                x * spec.wave_scale
            }),
        },
    }
}

/// Random kernel from a full spec.
pub fn random_kernel_with<R: Rng + ?Sized>(m: usize, n: usize, spec: &RandomKernelSpec, rng: &mut R) -> KernelFunction {
    let poly: Vec<C64> = (0..=spec.r_degree).map(|_| complex_normal(rng)).collect();
    let terms: Vec<Vec<SlotFactor>> = (0..spec.terms.max(1))
        .map(|_| (0..m + n).map(|_| draw_slot(spec, rng)).collect())
        .collect();
    let raw = KernelFunction::new(m, n, move |r, cre, ann| {
        let pr = poly.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * r + a);
        let mut sum = C64::new(0.0, 0.0);
        for term in &terms {
            let mut prod = C64::new(1.0, 0.0);
            for (f, p) in term.iter().zip(cre.iter().chain(ann)) {
                prod *= f.eval(p);
            }
            sum += prod;
        }
        pr * sum
    })
    .with_flags(false, false);
    apply_support(&symmetrize(&raw))
}

/// Random symmetric, supported kernel with two terms and a quadratic in `r`.
pub fn random_kernel<R: Rng + ?Sized>(m: usize, n: usize, style: MomentumStyle, rng: &mut R) -> KernelFunction {
    random_kernel_with(m, n, &RandomKernelSpec::new(style), rng)
}

/// Independent random members for every `(m, n)` of the index set.
pub fn random_sequence<R: Rng + ?Sized>(
    index_set: &[(usize, usize)],
    xi: f64,
    style: MomentumStyle,
    rng: &mut R,
) -> Result<KernelSequence> {
    let mut seq = KernelSequence::new(xi)?;
    for &(m, n) in index_set {
        seq.insert(random_kernel(m, n, style, rng));
    }
    Ok(seq)
}

/// Random sequence with `w_{n,m}(r; K̃, K) = conj(w_{m,n}(r; K, K̃))`, so that
/// its assembly is Hermitian. The index set is closed under `(m, n) ↦ (n, m)`.
pub fn hermitian_sequence<R: Rng + ?Sized>(
    index_set: &[(usize, usize)],
    xi: f64,
    style: MomentumStyle,
    rng: &mut R,
) -> Result<KernelSequence> {
    let mut seq = KernelSequence::new(xi)?;
    let mut orders: Vec<(usize, usize)> = index_set.iter().map(|&(m, n)| (m.min(n), m.max(n))).collect();
    orders.sort();
    orders.dedup();
    for (m, n) in orders {
        let w = random_kernel(m, n, style, rng);
        if m == n {
            let half = c(0.5);
            seq.insert(linear_combination(half, &w, half, &hermitian_partner(&w))?);
        } else {
            seq.insert(hermitian_partner(&w));
            seq.insert(w);
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasis;
    use crate::kernels::assemble_sum;
    use crate::linalg::{is_hermitian, max_abs};
    use crate::transversal::ModeSpace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_kernels_reproduce() {
        let p = MomentumPoint::new(Vector3::new(0.1, 0.2, -0.3), 1).unwrap();
        let q = MomentumPoint::new(Vector3::new(-0.2, 0.1, 0.1), 0).unwrap();
        for style in [MomentumStyle::Polynomial, MomentumStyle::PlaneWave] {
            let a = random_kernel(1, 1, style, &mut ChaCha8Rng::seed_from_u64(9));
            let b = random_kernel(1, 1, style, &mut ChaCha8Rng::seed_from_u64(9));
            let d = random_kernel(1, 1, style, &mut ChaCha8Rng::seed_from_u64(10));
            assert_eq!(a.eval(0.3, &[p], &[q]), b.eval(0.3, &[p], &[q]));
            assert_ne!(a.eval(0.3, &[p], &[q]), d.eval(0.3, &[p], &[q]));
            assert!(a.symmetric && a.supported);
        }
    }

    #[test]
    fn hermitian_sequence_assembles_hermitian() {
        let space = ModeSpace::coefficient(1, 3, 4).unwrap();
        let basis = FockBasis::new(&space, 2, Some(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let all = [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)];
        let seq = hermitian_sequence(&all, 0.5, MomentumStyle::Polynomial, &mut rng).unwrap();
        assert_eq!(seq.len(), 6);
        let h = assemble_sum(&seq, &space, &basis).unwrap();
        assert!(max_abs(h.matrix()) > 1e-6);
        assert!(is_hermitian(h.matrix(), 1e-12));
    }
}
