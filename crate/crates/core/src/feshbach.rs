//! Smooth cutoffs, Feshbach pairs and the Feshbach operator
//! `F_χ(H, T) = H_χ − χ W χ̄ H_χ̄^{-1} χ̄ W χ`, a toy atom with a simple
//! invariant ground state, and the reduction `V_at† P T P V_at`.

use std::f64::consts::FRAC_PI_2;

use roots::{find_root_brent, SimpleConvergency};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockOperator};
use crate::linalg::{
    commutator, diagonal_entries, hermitian_function, kron, max_abs, min_singular_value, op_norm, range_basis, CMat,
    CVec, C64,
};
use crate::so3::{spin_matrices, wigner_d, Rotation};

/// Range threshold used when extracting `Ran χ` and `Ran χ̄`.
pub const RANGE_THRESHOLD: f64 = 1e-12;
/// Tolerance for condition (a), the commutators `[χ, T]` and `[χ̄, T]`.
pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Default lower bound on the compressed singular values of condition (b).
pub const DEFAULT_SIGMA_MIN: f64 = 1e-6;

/// `a b`, scaling rows or columns when a factor is diagonal.
fn dmul(a: &CMat, b: &CMat) -> CMat {
    if let Some(d) = diagonal_entries(a) {
        let mut out = b.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row *= d[i];
        }
        out
    } else if let Some(d) = diagonal_entries(b) {
        let mut out = a.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col *= d[j];
        }
        out
    } else {
        a * b
    }
}

/// `a b c` with diagonal factors applied by scaling.
fn dmul3(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    dmul(&dmul(a, b), c)
}

/// Cosine ramp `η` with `η ≡ 1` on `[0, a]`, `η ≡ 0` on `[b, ∞)` and the
/// matching sine ramp `η̄ = (1 − η²)^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub a: f64,
    pub b: f64,
}

impl CutoffFunction {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0 < a && a < b && b < 1.0) {
            return Err(Error::Domain(format!("cutoff needs 0 < a < b < 1, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    fn phase(&self, t: f64) -> f64 {
        FRAC_PI_2 * ((t - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
    }

    pub fn eta(&self, t: f64) -> f64 {
        if t <= self.a {
            1.0
        } else if t >= self.b {
            0.0
        } else {
            self.phase(t).cos()
        }
    }

    pub fn eta_bar(&self, t: f64) -> f64 {
        if t <= self.a {
            0.0
        } else if t >= self.b {
            1.0
        } else {
            self.phase(t).sin()
        }
    }
}

impl Default for CutoffFunction {
    fn default() -> Self {
        Self { a: 0.5, b: 0.75 }
    }
}

pub fn make_eta(a: f64, b: f64) -> Result<CutoffFunction> {
    CutoffFunction::new(a, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiPair {
    pub chi: CMat,
    pub chi_bar: CMat,
}

impl ChiPair {
    /// `max(‖χ² + χ̄² − 1‖_max, ‖[χ, χ̄]‖_max)`.
    pub fn algebra_residual(&self) -> f64 {
        let n = self.chi.nrows();
        let sum = &self.chi * &self.chi + &self.chi_bar * &self.chi_bar - CMat::identity(n, n);
        max_abs(&sum).max(max_abs(&commutator(&self.chi, &self.chi_bar)))
    }
}

/// `χ = P ⊗ η(H_f)`, `χ̄ = (1 − P) ⊗ 1 + P ⊗ η̄(H_f)`, atom index major.
pub fn make_chi(p_at: &CMat, eta: &CutoffFunction, basis: &FockBasis) -> ChiPair {
    let diag = |f: &dyn Fn(f64) -> f64| {
        CMat::from_diagonal(&CVec::from_iterator(basis.dim(), basis.energies().iter().map(|e| C64::new(f(*e), 0.0))))
    };
    let n_at = p_at.nrows();
    let q_at = CMat::identity(n_at, n_at) - p_at;
    let eta_f = diag(&|e| eta.eta(e));
    let eta_bar_f = diag(&|e| eta.eta_bar(e));
    ChiPair {
        chi: kron(p_at, &eta_f),
        chi_bar: kron(&q_at, &CMat::identity(basis.dim(), basis.dim())) + kron(p_at, &eta_bar_f),
    }
}

/// `χ = η(H_f)`, `χ̄ = η̄(H_f)` on the Fock space alone.
pub fn make_chi_fock(eta: &CutoffFunction, basis: &FockBasis) -> ChiPair {
    make_chi(&CMat::identity(1, 1), eta, basis)
}

/// Numerical rendering of the Feshbach-pair conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    /// Condition (a): `‖[χ, T]‖` and `‖[χ̄, T]‖`.
    pub commutator_chi: f64,
    pub commutator_chi_bar: f64,
    /// Condition (b): smallest singular values of `T` and `H_χ̄` on `Ran χ̄`.
    pub sigma_t: f64,
    pub sigma_h: f64,
    pub sigma_min: f64,
    /// Condition (c): `‖χ̄ H_χ̄^{-1} χ̄ W χ‖`, when (b) holds.
    pub correction_norm: Option<f64>,
    pub chi_bar_rank: usize,
    pub valid: bool,
}

/// A checked pair `(H, T)` with cutoffs; [`feshbach_map`] only runs on valid
/// pairs.
#[derive(Clone, Debug)]
pub struct FeshbachPair {
    pub h: CMat,
    pub t: CMat,
    pub chi: ChiPair,
    pub report: PairReport,
    /// Orthonormal basis of `Ran χ̄`.
    q: CMat,
    /// `(Q† H_χ̄ Q)^{-1}` when (b) holds.
    inverse: Option<CMat>,
}

impl FeshbachPair {
    pub fn w(&self) -> CMat {
        &self.h - &self.t
    }

    /// `H_χ = T + χ W χ`.
    pub fn h_chi(&self) -> CMat {
        &self.t + dmul3(&self.chi.chi, &self.w(), &self.chi.chi)
    }

    /// `H_χ̄ = T + χ̄ W χ̄`.
    pub fn h_chi_bar(&self) -> CMat {
        &self.t + dmul3(&self.chi.chi_bar, &self.w(), &self.chi.chi_bar)
    }

    /// `H_χ̄^{-1}` on `Ran χ̄`, extended by zero.
    pub fn h_chi_bar_inverse(&self) -> Result<CMat> {
        let inv = self.inverse.as_ref().ok_or_else(|| Error::InvalidPair(self.describe()))?;
        Ok(&self.q * inv * self.q.adjoint())
    }

    fn describe(&self) -> String {
        let r = &self.report;
        format!(
            "[χ,T] = {:.2e}, [χ̄,T] = {:.2e}, σ(T) = {:.2e}, σ(H_χ̄) = {:.2e}, threshold {:.1e}",
            r.commutator_chi, r.commutator_chi_bar, r.sigma_t, r.sigma_h, r.sigma_min
        )
    }
}

/// Checks conditions (a)–(c) for `(H, T)` and the cutoffs.
pub fn check_pair(h: &CMat, t: &CMat, chi: &ChiPair, sigma_min: f64) -> Result<FeshbachPair> {
    let n = h.nrows();
    for m in [t, &chi.chi, &chi.chi_bar] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: m.nrows(),
            });
        }
    }
    let comm = |a: &CMat, b: &CMat| dmul(a, b) - dmul(b, a);
    let commutator_chi = op_norm(&comm(&chi.chi, t));
    let commutator_chi_bar = op_norm(&comm(&chi.chi_bar, t));
    let q = range_basis(&chi.chi_bar, RANGE_THRESHOLD);
    let w = h - t;
    let h_bar = t + dmul3(&chi.chi_bar, &w, &chi.chi_bar);
    let (sigma_t, sigma_h, compressed) = if q.ncols() == 0 {
        (f64::INFINITY, f64::INFINITY, CMat::zeros(0, 0))
    } else {
        let ct = q.adjoint() * t * &q;
        let ch = q.adjoint() * &h_bar * &q;
        (min_singular_value(&ct), min_singular_value(&ch), ch)
    };
    let cond_a = commutator_chi <= COMMUTATOR_TOL && commutator_chi_bar <= COMMUTATOR_TOL;
    let cond_b = sigma_t > sigma_min && sigma_h > sigma_min;
    let inverse = if cond_b {
        Some(compressed.try_inverse().ok_or_else(|| Error::InvalidPair("H_χ̄ not invertible on Ran χ̄".into()))?)
    } else {
        None
    };
    let correction_norm = inverse.as_ref().map(|inv| {
        let right = q.adjoint() * dmul3(&chi.chi_bar, &w, &chi.chi);
        op_norm(&dmul(&chi.chi_bar, &(&q * (inv * right))))
    });
    let report = PairReport {
        commutator_chi,
        commutator_chi_bar,
        sigma_t,
        sigma_h,
        sigma_min,
        correction_norm,
        chi_bar_rank: q.ncols(),
        valid: cond_a && cond_b,
    };
    Ok(FeshbachPair {
        h: h.clone(),
        t: t.clone(),
        chi: chi.clone(),
        report,
        q,
        inverse,
    })
}

/// `F_χ(H, T) = H_χ − χ W χ̄ H_χ̄^{-1} χ̄ W χ` on the full space.
pub fn feshbach_map(pair: &FeshbachPair) -> Result<CMat> {
    if !pair.report.valid {
        return Err(Error::InvalidPair(pair.describe()));
    }
    let w = pair.w();
    let (chi, chi_bar) = (&pair.chi.chi, &pair.chi.chi_bar);
    let inv = pair.inverse.as_ref().ok_or_else(|| Error::InvalidPair(pair.describe()))?;
    // χ W χ̄ Q (Q† H_χ̄ Q)^{-1} Q† χ̄ W χ
    let left = dmul3(chi, &w, chi_bar) * &pair.q;
    let right = pair.q.adjoint() * dmul3(chi_bar, &w, chi);
    Ok(pair.h_chi() - left * (inv * right))
}

/// `F_χ(H − z, T − z)` compressed to an orthonormal basis of `Ran χ`.
pub fn compressed_feshbach(h: &CMat, t: &CMat, chi: &ChiPair, z: f64, sigma_min: f64) -> Result<CMat> {
    let n = h.nrows();
    let shift = CMat::identity(n, n) * C64::new(z, 0.0);
    let pair = check_pair(&(h - &shift), &(t - &shift), chi, sigma_min)?;
    let f = feshbach_map(&pair)?;
    let p = range_basis(&chi.chi, RANGE_THRESHOLD);
    Ok(p.adjoint() * f * &p)
}

/// Real `z` in `[lo, hi]` at which `det F_χ(H − z, T − z)|_{Ran χ}` changes
/// sign, located on a uniform scan and refined by Brent's method. Assumes
/// `H`, `T` Hermitian so the determinant is real.
pub fn singular_points(
    h: &CMat,
    t: &CMat,
    chi: &ChiPair,
    (lo, hi): (f64, f64),
    scan: usize,
    sigma_min: f64,
) -> Result<Vec<f64>> {
    let det = |z: f64| -> f64 {
        compressed_feshbach(h, t, chi, z, sigma_min)
            .map(|f| f.determinant().re)
            .unwrap_or(f64::NAN)
    };
    let zs: Vec<f64> = (0..=scan).map(|i| lo + (hi - lo) * i as f64 / scan as f64).collect();
    let vals: Vec<f64> = zs.iter().map(|&z| det(z)).collect();
    let mut roots = Vec::new();
    for i in 0..scan {
        let (a, b) = (vals[i], vals[i + 1]);
        if !a.is_finite() || !b.is_finite() {
            continue;
        }
        if a == 0.0 {
            roots.push(zs[i]);
            continue;
        }
        if a * b < 0.0 {
            let mut conv = SimpleConvergency {
                eps: 1e-15,
                max_iter: 200,
            };
            let z = find_root_brent(zs[i], zs[i + 1], det, &mut conv)
                .map_err(|e| Error::RootSearch(format!("{e:?} in [{}, {}]", zs[i], zs[i + 1])))?;
            roots.push(z);
        }
    }
    Ok(roots)
}

/// Atomic toy model: rotation blocks `(j, E)` with `H_at = E` on each block
/// and `𝒰_at(R) = ⊕ D^j(R)`.
#[derive(Clone, Debug)]
pub struct ToyAtom {
    pub blocks: Vec<(usize, f64)>,
    pub h_at: CMat,
    pub e_at: f64,
    pub phi_at: CVec,
    pub p_at: CMat,
    pub gap: f64,
}

/// Builds the atom and enforces a simple, invariant ground state separated
/// from the rest of the spectrum by more than `min_gap`.
pub fn toy_atom(blocks: &[(usize, f64)], min_gap: f64) -> Result<ToyAtom> {
    if blocks.is_empty() {
        return Err(Error::Domain("toy atom needs at least one block".into()));
    }
    let (ground, &(j0, e0)) = blocks
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("nonempty");
    if j0 != 0 {
        return Err(Error::Degenerate(format!("lowest block has j = {j0}, multiplicity {}", 2 * j0 + 1)));
    }
    let gap = blocks
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ground)
        .map(|(_, (_, e))| e - e0)
        .fold(f64::INFINITY, f64::min);
    if gap <= min_gap {
        return Err(Error::Degenerate(format!("ground gap {gap} not above {min_gap}")));
    }
    let dim: usize = blocks.iter().map(|(j, _)| 2 * j + 1).sum();
    let mut diag = Vec::with_capacity(dim);
    let mut start = 0;
    let mut ground_index = 0;
    for (i, (j, e)) in blocks.iter().enumerate() {
        if i == ground {
            ground_index = start;
        }
        diag.extend(std::iter::repeat_n(C64::new(*e, 0.0), 2 * j + 1));
        start += 2 * j + 1;
    }
    let mut phi_at = CVec::zeros(dim);
    phi_at[ground_index] = C64::new(1.0, 0.0);
    let p_at = &phi_at * phi_at.adjoint();
    Ok(ToyAtom {
        blocks: blocks.to_vec(),
        h_at: CMat::from_diagonal(&CVec::from_vec(diag)),
        e_at: e0,
        phi_at,
        p_at,
        gap,
    })
}

impl ToyAtom {
    pub fn dim(&self) -> usize {
        self.h_at.nrows()
    }

    pub fn j_max(&self) -> usize {
        self.blocks.iter().map(|(j, _)| *j).max().unwrap_or(0)
    }

    fn block_diagonal(&self, f: impl Fn(usize) -> CMat) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        let mut start = 0;
        for (j, _) in &self.blocks {
            let size = 2 * j + 1;
            out.view_mut((start, start), (size, size)).copy_from(&f(*j));
            start += size;
        }
        out
    }

    /// `𝒰_at(R)`.
    pub fn rep(&self, r: &Rotation) -> CMat {
        self.block_diagonal(|j| wigner_d(j, r))
    }

    pub fn generators(&self) -> [CMat; 3] {
        [0, 1, 2].map(|a| self.block_diagonal(|j| spin_matrices(j)[a].clone()))
    }
}

/// `V_at† P T P V_at = (φ_at† ⊗ 1) T (φ_at ⊗ 1)` on the Fock factor.
pub fn reduce(t_op: &CMat, atom: &ToyAtom, basis: &FockBasis) -> Result<FockOperator> {
    let n = atom.dim() * basis.dim();
    if t_op.nrows() != n || t_op.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: t_op.nrows(),
        });
    }
    let phi = CMat::from_column_slice(atom.dim(), 1, atom.phi_at.as_slice());
    let v = kron(&phi, &CMat::identity(basis.dim(), basis.dim()));
    Ok(FockOperator::new(v.adjoint() * t_op * v))
}

/// `H_f` as a diagonal matrix shifted by `-z`.
pub fn shifted_hf(basis: &FockBasis, z: f64) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(basis.dim(), basis.energies().iter().map(|e| C64::new(e - z, 0.0))))
}

/// `f(A)` for Hermitian `A`, re-exported for cutoff construction on general
/// operators.
pub fn cutoff_of(a: &CMat, eta: &CutoffFunction) -> ChiPair {
    ChiPair {
        chi: hermitian_function(a, |t| eta.eta(t)),
        chi_bar: hermitian_function(a, |t| eta.eta_bar(t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hermitian_eigenvalues};
    use crate::transversal::ModeSpace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn cutoff_ramp() {
        let eta = make_eta(0.5, 0.75).unwrap();
        assert_eq!(eta.eta(0.5), 1.0);
        assert!(eta.eta(0.75).abs() < 1e-16);
        let mut prev = 1.0;
        for i in 0..1000 {
            let t = i as f64 / 999.0;
            let (e, eb) = (eta.eta(t), eta.eta_bar(t));
            assert!((e * e + eb * eb - 1.0).abs() < 1e-14);
            assert!(e <= prev);
            prev = e;
        }
        assert!(make_eta(0.6, 0.6).is_err());
        assert!(make_eta(0.7, 0.6).is_err());
    }

    #[test]
    fn chi_algebra() {
        let space = ModeSpace::coefficient(1, 3, 4).unwrap();
        let basis = FockBasis::new(&space, 2, Some(1.0)).unwrap();
        let atom = toy_atom(&[(0, 0.0), (1, 1.0)], 0.1).unwrap();
        let chi = make_chi(&atom.p_at, &CutoffFunction::default(), &basis);
        assert!(chi.algebra_residual() <= 1e-12);
        let q = kron(&(CMat::identity(4, 4) - &atom.p_at), &CMat::identity(basis.dim(), basis.dim()));
        assert_eq!(max_abs(&(&chi.chi * q)), 0.0);
        assert!(max_abs(&commutator(&chi.chi, &chi.chi_bar)) <= 1e-13);
    }

    #[test]
    fn two_by_two_closed_form() {
        let g = 0.3;
        let h = CMat::from_row_slice(2, 2, &[c(0.0), c(g), c(g), c(1.0)]);
        let t = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0), c(1.0)]));
        let chi = ChiPair {
            chi: CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)])),
            chi_bar: CMat::from_diagonal(&CVec::from_vec(vec![c(0.0), c(1.0)])),
        };
        for z in [-0.4, 0.2, 0.7] {
            let f = compressed_feshbach(&h, &t, &chi, z, DEFAULT_SIGMA_MIN).unwrap();
            assert!((f[(0, 0)].re - (-z - g * g / (1.0 - z))).abs() < 1e-14);
        }
        let zeros = [singular_points(&h, &t, &chi, (-2.0, 0.99), 400, DEFAULT_SIGMA_MIN).unwrap(),
            singular_points(&h, &t, &chi, (1.01, 3.0), 400, DEFAULT_SIGMA_MIN).unwrap()]
        .concat();
        let eig = hermitian_eigenvalues(&h);
        assert_eq!(zeros.len(), 2);
        for (z, e) in zeros.iter().zip(&eig) {
            assert!((z - e).abs() < 1e-12, "{z} vs {e}");
            let closed = if *z < 0.5 { 0.5 - (0.25 + g * g).sqrt() } else { 0.5 + (0.25 + g * g).sqrt() };
            assert!((z - closed).abs() < 1e-12);
        }
        // T − z singular on Ran χ̄
        let pair = check_pair(&(&h - CMat::identity(2, 2)), &(&t - CMat::identity(2, 2)), &chi, DEFAULT_SIGMA_MIN).unwrap();
        assert!(!pair.report.valid);
        assert!(feshbach_map(&pair).is_err());
        // W closes the gap of H_χ̄
        let closing = CMat::from_row_slice(2, 2, &[c(0.0), c(g), c(g), c(0.0)]);
        let pair = check_pair(&closing, &t, &chi, DEFAULT_SIGMA_MIN).unwrap();
        assert!(pair.report.sigma_t > 0.5 && pair.report.sigma_h < 1e-12);
        assert!(!pair.report.valid);
    }

    #[test]
    fn zero_coupling_gives_t() {
        let t = CMat::from_diagonal(&CVec::from_vec((0..5).map(|i| c(0.3 * i as f64 + 0.1)).collect()));
        let chi = cutoff_of(&(&t - CMat::identity(5, 5) * c(0.1)), &CutoffFunction::default());
        let pair = check_pair(&t, &t, &chi, DEFAULT_SIGMA_MIN).unwrap();
        assert!(pair.report.valid);
        assert_eq!(feshbach_map(&pair).unwrap(), t);
    }

    #[test]
    fn isospectrality_20x20() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 20;
        let diag: Vec<f64> = (0..n).map(|i| if i < 3 { 0.1 * i as f64 } else { 1.0 + 0.1 * i as f64 }).collect();
        let t = CMat::from_diagonal(&CVec::from_vec(diag.iter().map(|d| c(*d)).collect()));
        let mut v = CMat::from_fn(n, n, |_, _| {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        v = (&v + v.adjoint()) * c(0.5 * 0.05);
        let h = &t + v;
        let chi = ChiPair {
            chi: CMat::from_diagonal(&CVec::from_vec(diag.iter().map(|d| c(if *d < 0.5 { 1.0 } else { 0.0 })).collect())),
            chi_bar: CMat::from_diagonal(&CVec::from_vec(diag.iter().map(|d| c(if *d < 0.5 { 0.0 } else { 1.0 })).collect())),
        };
        let window = (-0.4, 0.6);
        let zeros = singular_points(&h, &t, &chi, window, 2000, DEFAULT_SIGMA_MIN).unwrap();
        let eig: Vec<f64> = hermitian_eigenvalues(&h).into_iter().filter(|e| *e > window.0 && *e < window.1).collect();
        assert_eq!(zeros.len(), eig.len());
        assert_eq!(eig.len(), 3);
        for (z, e) in zeros.iter().zip(&eig) {
            assert!((z - e).abs() < 1e-10, "{z} vs {e}");
            let f = compressed_feshbach(&h, &t, &chi, *z, DEFAULT_SIGMA_MIN).unwrap();
            assert!(min_singular_value(&f) < 1e-10);
        }
    }

    #[test]
    fn toy_atom_hypothesis() {
        let atom = toy_atom(&[(0, 0.0), (1, 1.0)], 0.5).unwrap();
        assert_eq!(atom.dim(), 4);
        assert_eq!(atom.gap, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let r = Rotation::random(&mut rng);
            let u = atom.rep(&r);
            assert!(crate::linalg::max_abs_vec(&(&u * &atom.phi_at - &atom.phi_at)) < 1e-13);
            assert!(max_abs(&(&u * &atom.h_at * u.adjoint() - &atom.h_at)) < 1e-12);
        }
        assert!(matches!(toy_atom(&[(1, 0.0), (0, 1.0)], 0.1), Err(Error::Degenerate(_))));
        assert!(matches!(toy_atom(&[(0, 0.0), (0, 0.0)], 0.1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn reduce_examples() {
        let space = ModeSpace::coefficient(1, 3, 4).unwrap();
        let basis = FockBasis::new(&space, 1, Some(1.0)).unwrap();
        let atom = toy_atom(&[(0, -0.5), (1, 1.0)], 0.5).unwrap();
        let n = atom.dim() * basis.dim();
        let id = reduce(&CMat::identity(n, n), &atom, &basis).unwrap();
        assert_eq!(*id.matrix(), CMat::identity(basis.dim(), basis.dim()));
        let hat = kron(&atom.h_at, &CMat::identity(basis.dim(), basis.dim()));
        let red = reduce(&hat, &atom, &basis).unwrap();
        assert_eq!(*red.matrix(), CMat::identity(basis.dim(), basis.dim()) * c(-0.5));
    }
}
