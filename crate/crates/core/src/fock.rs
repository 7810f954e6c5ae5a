//! Truncated bosonic Fock space over a finite mode basis.
//!
//! Basis states are occupation multisets, stored as sorted mode tuples. The
//! basis is capped in particle number and in field energy `Σ ω_α`, and every
//! operator here is the compression of its untruncated counterpart to the
//! capped span.

use std::collections::HashMap;
use std::ops::Deref;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{c, max_abs, CMat, CVec, C64};
use crate::so3::Rotation;
use crate::transversal::ModeSpace;

/// States with energy up to `E_max + ENERGY_TOL` are kept; the same slack is
/// used by kernel support cuts so boundary states are treated consistently.
pub const ENERGY_TOL: f64 = 1e-12;

/// Field energy of a sorted mode tuple. Every energy in the crate goes
/// through this one function so equal states give bit-identical energies.
pub fn state_energy(freqs: &[f64], state: &[usize]) -> f64 {
    state.iter().fold(0.0, |acc, &a| acc + freqs[a])
}

/// `√(N! / Π n_α!)`, the norm of the unsymmetrized sum over orderings.
pub fn occupation_norm(state: &[usize]) -> f64 {
    ordering_count(state).sqrt()
}

/// Number of distinct orderings of a sorted multiset, `N! / Π n_α!`.
pub fn ordering_count(state: &[usize]) -> f64 {
    // product of binomials, exact in integers at every step
    let (mut count, mut placed) = (1u128, 0u128);
    for (_, group) in &state.iter().chunk_by(|a| **a) {
        for i in 1..=group.count() as u128 {
            placed += 1;
            count = count * placed / i;
        }
    }
    count as f64
}

/// Distinct orderings of a sorted tuple, in lexicographic order.
pub fn distinct_orderings(state: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = state.to_vec();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let n = current.len();
        if n < 2 {
            break;
        }
        let Some(i) = (0..n - 1).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

/// Sorted tuple with `alpha` inserted.
pub fn with_mode(state: &[usize], alpha: usize) -> Vec<usize> {
    let pos = state.partition_point(|&b| b <= alpha);
    let mut out = Vec::with_capacity(state.len() + 1);
    out.extend_from_slice(&state[..pos]);
    out.push(alpha);
    out.extend_from_slice(&state[pos..]);
    out
}

/// Sorted tuple with one copy of `alpha` removed, if present.
pub fn without_mode(state: &[usize], alpha: usize) -> Option<Vec<usize>> {
    let pos = state.iter().position(|&b| b == alpha)?;
    let mut out = state.to_vec();
    out.remove(pos);
    Some(out)
}

pub fn occupation(state: &[usize], alpha: usize) -> usize {
    state.iter().filter(|&&b| b == alpha).count()
}

/// Occupation-number basis, vacuum first, then by particle number, then
/// lexicographically.
#[derive(Clone, Debug)]
pub struct FockBasis {
    frequencies: Vec<f64>,
    n_max: usize,
    e_max: Option<f64>,
    states: Vec<Vec<usize>>,
    energies: Vec<f64>,
    index: HashMap<Vec<usize>, usize>,
}

impl FockBasis {
    pub fn new(modes: &ModeSpace, n_max: usize, e_max: Option<f64>) -> Result<Self> {
        Self::from_frequencies(modes.frequencies(), n_max, e_max)
    }

    /// Basis over modes with the given positive frequencies. `e_max = None`
    /// disables the energy cap.
    pub fn from_frequencies(frequencies: Vec<f64>, n_max: usize, e_max: Option<f64>) -> Result<Self> {
        if let Some(e) = e_max {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::Domain(format!("energy cap must lie in (0, 1], got {e}")));
            }
        }
        if frequencies.iter().any(|w| *w <= 0.0 || !w.is_finite()) {
            return Err(Error::Domain("mode frequencies must be positive".into()));
        }
        let cap = e_max.map_or(f64::INFINITY, |e| e + ENERGY_TOL);
        let d = frequencies.len();
        let mut states = vec![Vec::new()];
        let mut frontier = vec![Vec::<usize>::new()];
        for _ in 0..n_max {
            let mut next = Vec::new();
            for s in &frontier {
                let start = s.last().copied().unwrap_or(0);
                for a in start..d {
                    let mut t = s.clone();
                    t.push(a);
                    if state_energy(&frequencies, &t) <= cap {
                        next.push(t);
                    }
                }
            }
            // nondecreasing extension of a lexicographically sorted list stays sorted
            states.extend(next.iter().cloned());
            frontier = next;
        }
        let energies = states.iter().map(|s| state_energy(&frequencies, s)).collect();
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self {
            frequencies,
            n_max,
            e_max,
            states,
            energies,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn e_max(&self) -> Option<f64> {
        self.e_max
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[usize] {
        &self.states[i]
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.energies[i]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn index_of(&self, state: &[usize]) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Indices of the `n`-particle states.
    pub fn sector(&self, n: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.states[i].len() == n).collect()
    }

    /// States `|s⟩` such that every state reachable by adding `extra`
    /// particles of any modes stays in the basis.
    pub fn is_safe(&self, i: usize, extra: usize) -> bool {
        let s = &self.states[i];
        if s.len() + extra > self.n_max {
            return false;
        }
        match self.e_max {
            None => true,
            Some(e) => {
                let top = self.frequencies.iter().cloned().fold(0.0, f64::max);
                self.energies[i] + extra as f64 * top <= e + ENERGY_TOL
            }
        }
    }
}

/// A dense matrix on a [`FockBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    matrix: CMat,
    hermitian: bool,
}

impl FockOperator {
    pub fn new(matrix: CMat) -> Self {
        Self {
            matrix,
            hermitian: false,
        }
    }

    /// Checks `‖A − A†‖_max ≤ 1e-12`.
    pub fn hermitian(matrix: CMat) -> Result<Self> {
        let defect = max_abs(&(&matrix - matrix.adjoint()));
        if matrix.nrows() != matrix.ncols() || defect > 1e-12 {
            return Err(Error::Domain(format!("matrix not Hermitian, defect {defect:e}")));
        }
        Ok(Self {
            matrix,
            hermitian: true,
        })
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn adjoint(&self) -> FockOperator {
        Self {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }
}

impl Deref for FockOperator {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.matrix
    }
}

fn check_modes(basis: &FockBasis, len: usize) -> Result<()> {
    if len != basis.modes() {
        return Err(Error::Dimension {
            expected: basis.modes(),
            got: len,
        });
    }
    Ok(())
}

/// `a*(f)` for mode coefficients `f`, compressed to the basis.
pub fn create(f: &CVec, basis: &FockBasis) -> Result<FockOperator> {
    check_modes(basis, f.len())?;
    let mut out = CMat::zeros(basis.dim(), basis.dim());
    for (col, state) in basis.states().iter().enumerate() {
        let c_in = occupation_norm(state);
        let n = state.len() as f64;
        for (alpha, fa) in f.iter().enumerate() {
            if *fa == C64::new(0.0, 0.0) {
                continue;
            }
            let target = with_mode(state, alpha);
            if let Some(row) = basis.index_of(&target) {
                // (n+1)^{1/2} S_{n+1}: c_in √(n+1) / c_out = √(n_α + 1)
                out[(row, col)] += fa * (c_in * (n + 1.0).sqrt() / occupation_norm(&target));
            }
        }
    }
    Ok(FockOperator::new(out))
}

/// `a(f) = a*(f)†`.
pub fn annihilate(f: &CVec, basis: &FockBasis) -> Result<FockOperator> {
    Ok(create(f, basis)?.adjoint())
}

/// `a*_α`, the creator of a single basis mode.
pub fn create_mode(alpha: usize, basis: &FockBasis) -> Result<FockOperator> {
    let mut f = CVec::zeros(basis.modes());
    if alpha >= f.len() {
        return Err(Error::Dimension {
            expected: basis.modes(),
            got: alpha,
        });
    }
    f[alpha] = c(1.0);
    create(&f, basis)
}

/// `Γ(A)`: the symmetrized tensor power of `A` on every particle sector.
pub fn gamma(a: &CMat, basis: &FockBasis) -> Result<FockOperator> {
    check_modes(basis, a.nrows())?;
    check_modes(basis, a.ncols())?;
    let dim = basis.dim();
    let mut out = CMat::zeros(dim, dim);
    for n in 0..=basis.n_max() {
        let sector = basis.sector(n);
        for &col in &sector {
            let sn = basis.state(col);
            let cn = occupation_norm(sn);
            for &row in &sector {
                let sm = basis.state(row);
                let sum: C64 = distinct_orderings(sm)
                    .iter()
                    .map(|ord| {
                        ord.iter()
                            .zip(sn)
                            .fold(c(1.0), |acc, (&i, &j)| acc * a[(i, j)])
                    })
                    .sum();
                out[(row, col)] = sum * (cn / occupation_norm(sm));
            }
        }
    }
    Ok(FockOperator::new(out))
}

/// `dΓ(A) = Σ_{αβ} A_{αβ} a*_α a_β`.
pub fn dgamma(a: &CMat, basis: &FockBasis) -> Result<FockOperator> {
    check_modes(basis, a.nrows())?;
    check_modes(basis, a.ncols())?;
    let mut out = CMat::zeros(basis.dim(), basis.dim());
    for (col, state) in basis.states().iter().enumerate() {
        for &beta in state.iter().dedup() {
            let nb = occupation(state, beta) as f64;
            let rest = without_mode(state, beta).expect("beta occupied");
            for alpha in 0..basis.modes() {
                let coeff = a[(alpha, beta)];
                if coeff == C64::new(0.0, 0.0) {
                    continue;
                }
                let target = with_mode(&rest, alpha);
                if let Some(row) = basis.index_of(&target) {
                    let na = occupation(&rest, alpha) as f64;
                    out[(row, col)] += coeff * (nb.sqrt() * (na + 1.0).sqrt());
                }
            }
        }
    }
    Ok(FockOperator::new(out))
}

/// Free field energy `H_f = dΓ(ω)`, diagonal with entries `Σ ω_α`.
pub fn hf(basis: &FockBasis) -> FockOperator {
    let diag = CVec::from_iterator(basis.dim(), basis.energies().iter().map(|e| c(*e)));
    FockOperator {
        matrix: CMat::from_diagonal(&diag),
        hermitian: true,
    }
}

/// `𝒰_ℱ(R) = Γ(𝒰_𝔥(R))`; needs the coefficient picture.
pub fn u_fock(r: &Rotation, modes: &ModeSpace, basis: &FockBasis) -> Result<FockOperator> {
    let u = modes.rotation_matrix(r)?;
    gamma(&u, basis)
}

/// The basis vector of a state.
pub fn basis_vector(basis: &FockBasis, state: &[usize]) -> Option<CVec> {
    let i = basis.index_of(state)?;
    let mut v = CVec::zeros(basis.dim());
    v[i] = c(1.0);
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitary_exp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_vec(d: usize, rng: &mut ChaCha8Rng) -> CVec {
        CVec::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn combinatorics() {
        assert!((occupation_norm(&[0, 0, 1]) - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(distinct_orderings(&[0, 0, 1]).len(), 3);
        assert_eq!(distinct_orderings(&[]).len(), 1);
        assert_eq!(distinct_orderings(&[1, 2, 3]).len(), 6);
        assert_eq!(with_mode(&[0, 2], 1), vec![0, 1, 2]);
        assert_eq!(without_mode(&[0, 1, 1], 1), Some(vec![0, 1]));
        assert_eq!(without_mode(&[0, 1], 3), None);
    }

    #[test]
    fn basis_dimensions() {
        let f = vec![0.3; 5];
        assert_eq!(FockBasis::from_frequencies(f.clone(), 0, None).unwrap().dim(), 1);
        assert_eq!(FockBasis::from_frequencies(f.clone(), 1, None).unwrap().dim(), 6);
        assert_eq!(FockBasis::from_frequencies(f.clone(), 2, None).unwrap().dim(), 1 + 5 + 15);
        // cap 0.5 removes every two-particle state
        assert_eq!(FockBasis::from_frequencies(f, 2, Some(0.5)).unwrap().dim(), 6);
        assert_eq!(FockBasis::from_frequencies(vec![], 3, None).unwrap().dim(), 1);
        assert!(FockBasis::from_frequencies(vec![0.3], 1, Some(0.0)).is_err());
    }

    #[test]
    fn canonical_order() {
        let b = FockBasis::from_frequencies(vec![0.1, 0.2, 0.3], 2, None).unwrap();
        assert!(b.state(0).is_empty());
        for w in b.states().windows(2) {
            assert!((w[0].len(), &w[0]) < (w[1].len(), &w[1]));
        }
    }

    #[test]
    fn creation_on_vacuum_and_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = FockBasis::from_frequencies(vec![0.2, 0.3, 0.5], 2, Some(1.0)).unwrap();
        let (f, g) = (random_vec(3, &mut rng), random_vec(3, &mut rng));
        let a_star = create(&f, &b).unwrap();
        let omega = basis_vector(&b, &[]).unwrap();
        let one = &*a_star * &omega;
        assert!((one.norm() - f.norm()).abs() < 1e-14);
        assert_eq!(annihilate(&f, &b).unwrap().matrix(), &a_star.matrix().adjoint());
        let amp = omega.dotc(&(annihilate(&f, &b).unwrap().matrix() * create(&g, &b).unwrap().matrix() * &omega));
        assert!((amp - f.dotc(&g)).norm() < 1e-13);
    }

    #[test]
    fn ccr_on_safe_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = FockBasis::from_frequencies(vec![0.1, 0.15, 0.2, 0.25], 3, Some(1.0)).unwrap();
        let (f, g) = (random_vec(4, &mut rng), random_vec(4, &mut rng));
        let (af, ag) = (annihilate(&f, &b).unwrap(), create(&g, &b).unwrap());
        let comm = af.matrix() * ag.matrix() - ag.matrix() * af.matrix();
        let ip = f.dotc(&g);
        for col in 0..b.dim() {
            if !b.is_safe(col, 1) {
                continue;
            }
            for row in 0..b.dim() {
                let expected = if row == col { ip } else { c(0.0) };
                assert!((comm[(row, col)] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_is_functorial_and_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 4;
        let b = FockBasis::from_frequencies(vec![0.2; d], 3, None).unwrap();
        let (a, bm) = (random_matrix(d, &mut rng), random_matrix(d, &mut rng));
        let lhs = gamma(&a, &b).unwrap().into_matrix() * gamma(&bm, &b).unwrap().into_matrix();
        let rhs = gamma(&(&a * &bm), &b).unwrap();
        assert!(max_abs(&(lhs - rhs.matrix())) < 1e-12);
        assert!(max_abs(&(gamma(&CMat::identity(d, d), &b).unwrap().into_matrix() - CMat::identity(b.dim(), b.dim()))) < 1e-14);
        let h = &a + a.adjoint();
        let u = unitary_exp(&h, 0.7);
        let gu = gamma(&u, &b).unwrap();
        assert!(max_abs(&(gu.matrix() * gu.matrix().adjoint() - CMat::identity(b.dim(), b.dim()))) < 1e-12);
        let scaled = gamma(&CMat::identity(d, d).map(|z| z * C64::new(0.0, 2.0)), &b).unwrap();
        for i in 0..b.dim() {
            let n = b.state(i).len() as i32;
            assert!((scaled[(i, i)] - C64::new(0.0, 2.0).powi(n)).norm() < 1e-12);
        }
    }

    #[test]
    fn dgamma_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 3;
        let b = FockBasis::from_frequencies(vec![0.2; d], 3, None).unwrap();
        let a = random_matrix(d, &mut rng);
        let da = dgamma(&a, &b).unwrap();
        assert!(da.column(0).norm() == 0.0);
        let one = b.sector(1);
        for (i, &r) in one.iter().enumerate() {
            for (j, &cc) in one.iter().enumerate() {
                assert!((da[(r, cc)] - a[(i, j)]).norm() < 1e-14);
            }
        }
        let h = &a + a.adjoint();
        for t in [0.3, 1.0] {
            let lhs = unitary_exp(dgamma(&h, &b).unwrap().matrix(), t);
            let rhs = gamma(&unitary_exp(&h, t), &b).unwrap();
            assert!(max_abs(&(lhs - rhs.matrix())) < 1e-10);
        }
    }

    #[test]
    fn free_energy() {
        let freqs = vec![0.1, 0.35, 0.6];
        let b = FockBasis::from_frequencies(freqs.clone(), 3, Some(1.0)).unwrap();
        let h = hf(&b);
        assert_eq!(h[(0, 0)], c(0.0));
        for i in 0..b.dim() {
            let direct: f64 = b.state(i).iter().map(|&a| freqs[a]).sum();
            assert_eq!(h[(i, i)].re, direct);
            assert!(direct <= 1.0 + ENERGY_TOL);
        }
        let omega = CMat::from_diagonal(&CVec::from_iterator(3, freqs.iter().map(|w| c(*w))));
        assert!(max_abs(&(dgamma(&omega, &b).unwrap().into_matrix() - h.matrix())) < 1e-15);
    }

    #[test]
    fn rotations_on_fock_space() {
        let modes = ModeSpace::coefficient(1, 2, 4).unwrap();
        let b = FockBasis::new(&modes, 2, Some(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (r1, r2) = (Rotation::random(&mut rng), Rotation::random(&mut rng));
        let u1 = u_fock(&r1, &modes, &b).unwrap();
        let u2 = u_fock(&r2, &modes, &b).unwrap();
        let u12 = u_fock(&(r1 * r2), &modes, &b).unwrap();
        let id = CMat::identity(b.dim(), b.dim());
        assert!(max_abs(&(u_fock(&Rotation::identity(), &modes, &b).unwrap().into_matrix() - &id)) < 1e-12);
        assert!(max_abs(&(u1.matrix() * u1.matrix().adjoint() - &id)) < 1e-11);
        assert!(max_abs(&(u1.matrix() * u2.matrix() - u12.matrix())) < 1e-11);
        let h = hf(&b);
        assert!(max_abs(&(u1.matrix() * h.matrix() * u1.matrix().adjoint() - h.matrix())) < 1e-11);
        let f = random_vec(modes.dim(), &mut rng);
        let lhs = u1.matrix() * create(&f, &b).unwrap().matrix() * u1.matrix().adjoint();
        let rhs = create(&(modes.rotation_matrix(&r1).unwrap() * &f), &b).unwrap();
        assert!(max_abs(&(lhs - rhs.matrix())) < 1e-11);
        let node = ModeSpace::node(1, 2).unwrap();
        let nb = FockBasis::new(&node, 1, None).unwrap();
        assert!(u_fock(&r1, &node, &nb).is_err());
    }
}
