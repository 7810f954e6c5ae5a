//! Coupling kernels `w_{m,n}(r; K̃, K)`, their norms, and the operators
//! `H_{m,n}[w]` they define on a truncated Fock space.
//!
//! A kernel is a closure of the spectral parameter `r ∈ [0, 1]`, `m` created
//! points and `n` annihilated points. Discretization against the mode basis
//! of a [`ModeSpace`](crate::transversal::ModeSpace) gives an
//! [`AmplitudeTensor`]; the operator is then assembled either from the
//! quadratic-form definition ([`assemble_form`]) or as a normal-ordered
//! product of ladder operators ([`assemble_ops`]).

mod amplitude;
mod averaging;
mod pairing;
mod random;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, ENERGY_TOL};
use crate::linalg::C64;
use crate::transversal::{MomentumGrid, MomentumPoint};

pub use amplitude::{
    assemble_form, assemble_kernel, assemble_ops, assemble_sources, assemble_sum, discretize,
    norm_bound_report, AmplitudeTensor, DiscretizedKernel, KernelSource, NormBoundReport,
};
pub use averaging::{
    exact_average_kernel, exact_average_sequence, haar_average_kernel, haar_average_sequence,
    project_invariant, rotate_kernel, synthesize, ProjectedKernel,
};
pub use pairing::{
    exact_average_operator, pairing_limit, pairing_on_grid, proof_pairing, richardson,
    test_function, vacuum_block, vanishing_report, Bump, PairingProbe, PairingRules,
    PairingTerms, ProbeSet, VanishingConfig, VanishingReport, DESIGN_SHRINK_FACTOR, MIN_BUMP_RADIUS,
};
pub use random::{
    hermitian_sequence, random_kernel, random_kernel_with, random_sequence, MomentumStyle,
    RandomKernelSpec,
};

pub type KernelFn = Arc<dyn Fn(f64, &[MomentumPoint], &[MomentumPoint]) -> C64 + Send + Sync>;

/// `w_{m,n}` together with the symmetry and support flags.
#[derive(Clone)]
pub struct KernelFunction {
    pub m: usize,
    pub n: usize,
    f: KernelFn,
    pub symmetric: bool,
    pub supported: bool,
}

impl fmt::Debug for KernelFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelFunction")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("symmetric", &self.symmetric)
            .field("supported", &self.supported)
            .finish()
    }
}

impl KernelFunction {
    pub fn new(
        m: usize,
        n: usize,
        f: impl Fn(f64, &[MomentumPoint], &[MomentumPoint]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            m,
            n,
            f: Arc::new(f),
            symmetric: m <= 1 && n <= 1,
            supported: false,
        }
    }

    pub fn zero(m: usize, n: usize) -> Self {
        let mut w = Self::new(m, n, |_, _, _| C64::new(0.0, 0.0));
        w.symmetric = true;
        w.supported = true;
        w
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    #[inline]
    pub fn eval(&self, r: f64, created: &[MomentumPoint], annihilated: &[MomentumPoint]) -> C64 {
        debug_assert_eq!(created.len(), self.m);
        debug_assert_eq!(annihilated.len(), self.n);
        (self.f)(r, created, annihilated)
    }

    /// Sets the flags without touching the values; for kernels known to have
    /// the properties by construction.
    pub fn with_flags(mut self, symmetric: bool, supported: bool) -> Self {
        self.symmetric = symmetric;
        self.supported = supported;
        self
    }
}

/// `Σ |k_j|`.
pub fn total_energy(points: &[MomentumPoint]) -> f64 {
    points.iter().map(|p| p.norm()).sum()
}

/// Average over the `m! n!` permutations within the two blocks.
pub fn symmetrize(w: &KernelFunction) -> KernelFunction {
    if w.symmetric {
        return w.clone();
    }
    let perms_m: Vec<Vec<usize>> = (0..w.m).permutations(w.m).collect();
    let perms_n: Vec<Vec<usize>> = (0..w.n).permutations(w.n).collect();
    let scale = 1.0 / (perms_m.len() * perms_n.len()) as f64;
    let inner = w.clone();
    KernelFunction {
        m: w.m,
        n: w.n,
        f: Arc::new(move |r, cre, ann| {
            let mut acc = C64::new(0.0, 0.0);
            let mut c2 = cre.to_vec();
            let mut a2 = ann.to_vec();
            for pm in &perms_m {
                for (dst, &src) in c2.iter_mut().zip(pm) {
                    *dst = cre[src];
                }
                for pn in &perms_n {
                    for (dst, &src) in a2.iter_mut().zip(pn) {
                        *dst = ann[src];
                    }
                    acc += inner.eval(r, &c2, &a2);
                }
            }
            acc * scale
        }),
        symmetric: true,
        supported: w.supported,
    }
}

/// `1_{Σ[K̃] + r ≤ 1} w 1_{Σ[K] + r ≤ 1}`.
pub fn apply_support(w: &KernelFunction) -> KernelFunction {
    if w.supported {
        return w.clone();
    }
    let inner = w.clone();
    KernelFunction {
        m: w.m,
        n: w.n,
        f: Arc::new(move |r, cre, ann| {
            if in_support(r, cre, ann) {
                inner.eval(r, cre, ann)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
        symmetric: w.symmetric,
        supported: true,
    }
}

#[inline]
pub fn in_support(r: f64, cre: &[MomentumPoint], ann: &[MomentumPoint]) -> bool {
    total_energy(cre) + r <= 1.0 + ENERGY_TOL && total_energy(ann) + r <= 1.0 + ENERGY_TOL
}

/// `w_{n,m}(r; K̃, K) = conj(w_{m,n}(r; K, K̃))`, the kernel of `H_{m,n}[w]†`.
pub fn hermitian_partner(w: &KernelFunction) -> KernelFunction {
    let inner = w.clone();
    KernelFunction {
        m: w.n,
        n: w.m,
        f: Arc::new(move |r, cre, ann| inner.eval(r, ann, cre).conj()),
        symmetric: w.symmetric,
        supported: w.supported,
    }
}

/// `a w₁ + b w₂` for kernels of equal orders.
pub fn linear_combination(a: C64, w1: &KernelFunction, b: C64, w2: &KernelFunction) -> Result<KernelFunction> {
    if w1.orders() != w2.orders() {
        return Err(Error::Domain(format!(
            "kernel orders differ: {:?} vs {:?}",
            w1.orders(),
            w2.orders()
        )));
    }
    let (x, y) = (w1.clone(), w2.clone());
    Ok(KernelFunction {
        m: w1.m,
        n: w1.n,
        f: Arc::new(move |r, cre, ann| a * x.eval(r, cre, ann) + b * y.eval(r, cre, ann)),
        symmetric: w1.symmetric && w2.symmetric,
        supported: w1.supported && w2.supported,
    })
}

/// A finite family `(w_{m,n})` with the weight parameter `ξ`.
#[derive(Clone, Debug)]
pub struct KernelSequence {
    pub xi: f64,
    members: BTreeMap<(usize, usize), KernelFunction>,
}

impl KernelSequence {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::Domain(format!("ξ must lie in (0, 1), got {xi}")));
        }
        Ok(Self {
            xi,
            members: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, w: KernelFunction) -> Option<KernelFunction> {
        self.members.insert(w.orders(), w)
    }

    pub fn with(mut self, w: KernelFunction) -> Self {
        self.insert(w);
        self
    }

    pub fn get(&self, m: usize, n: usize) -> Option<&KernelFunction> {
        self.members.get(&(m, n))
    }

    pub fn remove(&mut self, m: usize, n: usize) -> Option<KernelFunction> {
        self.members.remove(&(m, n))
    }

    pub fn iter(&self) -> impl Iterator<Item = &KernelFunction> {
        self.members.values()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn orders(&self) -> Vec<(usize, usize)> {
        self.members.keys().copied().collect()
    }
}

/// Sample points of `I = [0, 1]` standing in for the supremum over `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RGrid {
    points: Vec<f64>,
}

pub const DEFAULT_RGRID_SIZE: usize = 33;

impl RGrid {
    /// `n ≥ 2` uniform points including both endpoints.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("an r-grid needs at least the two endpoints".into()));
        }
        Ok(Self {
            points: (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
        })
    }

    /// Uniform points united with every basis energy, so the supremum covers
    /// all spectral values at which assembly evaluates kernels.
    pub fn for_basis(n: usize, basis: &FockBasis) -> Result<Self> {
        Self::uniform(n).map(|g| g.with_points(basis.energies().iter().copied().filter(|e| *e <= 1.0)))
    }

    pub fn with_points(mut self, extra: impl IntoIterator<Item = f64>) -> Self {
        self.points.extend(extra.into_iter().filter(|r| (0.0..=1.0).contains(r)));
        self.points.sort_by(|a, b| a.total_cmp(b));
        self.points.dedup();
        self
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Visits every tuple of `slots` grid points in row-major order (slot 0
/// most significant), split into contiguous chunks over the first slot.
pub(crate) fn tuple_chunks(grid_len: usize, slots: usize) -> (usize, usize) {
    if slots == 0 {
        (1, 1)
    } else {
        (grid_len, grid_len.pow(slots as u32 - 1))
    }
}

pub(crate) fn decode_tuple(mut t: usize, grid_len: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = t % grid_len;
        t /= grid_len;
    }
}

/// `‖w‖ = (Σ_{node tuples} Π W |k|^{-2} · max_{r ∈ rgrid} |w(r)|²)^{1/2}`.
///
/// For supported kernels the maximum skips values of `r` at which the
/// support cut forces zero.
pub fn wmn_norm(w: &KernelFunction, grid: &MomentumGrid, rgrid: &RGrid) -> Result<f64> {
    let slots = w.m + w.n;
    let pts = grid.points();
    let measure: Vec<f64> = pts
        .iter()
        .zip(grid.weights())
        .map(|(p, wt)| wt / p.norm().powi(2))
        .collect();
    let (chunks, per_chunk) = tuple_chunks(pts.len(), slots);
    let partial: Vec<Result<f64>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut idx = vec![0usize; slots];
            let mut buf: Vec<MomentumPoint> = vec![pts[0]; slots];
            let mut sum = 0.0;
            for t in chunk * per_chunk..(chunk + 1) * per_chunk {
                decode_tuple(t, pts.len(), &mut idx);
                let mut mu = 1.0;
                for (s, &q) in idx.iter().enumerate() {
                    buf[s] = pts[q];
                    mu *= measure[q];
                }
                let (cre, ann) = buf.split_at(w.m);
                let r_top = if w.supported {
                    1.0 - total_energy(cre).max(total_energy(ann)) + ENERGY_TOL
                } else {
                    f64::INFINITY
                };
                let mut sup = 0.0_f64;
                for &r in rgrid.points() {
                    if r > r_top {
                        break;
                    }
                    let v = w.eval(r, cre, ann);
                    if !v.re.is_finite() || !v.im.is_finite() {
                        return Err(Error::NonFinite(format!("kernel value at r = {r}")));
                    }
                    sup = sup.max(v.norm_sqr());
                }
                sum += mu * sup;
            }
            Ok(sum)
        })
        .collect();
    let mut total = 0.0;
    for p in partial {
        total += p?;
    }
    Ok(total.sqrt())
}

/// `‖w̲‖_ξ = Σ ξ^{-(m+n)} ‖w_{m,n}‖`.
pub fn xi_norm(seq: &KernelSequence, grid: &MomentumGrid, rgrid: &RGrid) -> Result<f64> {
    let mut total = 0.0;
    for w in seq.iter() {
        total += seq.xi.powi(-((w.m + w.n) as i32)) * wmn_norm(w, grid, rgrid)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use nalgebra::Vector3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64, z: f64, l: usize) -> MomentumPoint {
        MomentumPoint::new(Vector3::new(x, y, z), l).unwrap()
    }

    fn asymmetric() -> KernelFunction {
        KernelFunction::new(0, 2, |r, _, ann| C64::new(ann[0].k.x + 2.0 * ann[1].k.y, r))
    }

    #[test]
    fn symmetrize_swaps_and_is_idempotent() {
        let s = symmetrize(&asymmetric());
        let (a, b) = (pt(0.1, 0.2, 0.3, 0), pt(-0.2, 0.1, 0.05, 1));
        assert!((s.eval(0.3, &[], &[a, b]) - s.eval(0.3, &[], &[b, a])).norm() < 1e-15);
        let ss = symmetrize(&s);
        assert_eq!(ss.eval(0.3, &[], &[a, b]), s.eval(0.3, &[], &[a, b]));
        let sym = KernelFunction::new(0, 2, |_, _, ann| c(ann[0].k.x + ann[1].k.x));
        let sym_s = symmetrize(&sym.clone().with_flags(false, false));
        assert!((sym_s.eval(0.0, &[], &[a, b]) - sym.eval(0.0, &[], &[a, b])).norm() < 1e-15);
    }

    #[test]
    fn support_cut() {
        let w = apply_support(&KernelFunction::new(1, 1, |_, _, _| c(2.0)));
        let (a, b) = (pt(0.3, 0.0, 0.0, 0), pt(0.0, 0.5, 0.0, 1));
        assert_eq!(w.eval(0.6, &[a], &[a]), c(2.0));
        assert_eq!(w.eval(0.6, &[b], &[a]), c(0.0));
        assert_eq!(w.eval(0.6, &[a], &[b]), c(0.0));
        let again = apply_support(&w);
        assert_eq!(again.eval(0.2, &[b], &[a]), w.eval(0.2, &[b], &[a]));
    }

    #[test]
    fn indicator_norm_is_sqrt_8pi() {
        let w = apply_support(&KernelFunction::new(0, 1, |_, _, _| c(1.5)));
        for nr in [2, 4, 8] {
            let grid = MomentumGrid::new(nr, 4).unwrap();
            let norm = wmn_norm(&w, &grid, &RGrid::uniform(33).unwrap()).unwrap();
            assert!((norm - 1.5 * (8.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_is_monotone_and_zero_on_zero() {
        let grid = MomentumGrid::new(2, 2).unwrap();
        let rg = RGrid::uniform(5).unwrap();
        assert_eq!(wmn_norm(&KernelFunction::zero(1, 1), &grid, &rg).unwrap(), 0.0);
        let small = KernelFunction::new(1, 0, |r, c, _| C64::new(c[0].k.x * r, 0.0));
        let big = KernelFunction::new(1, 0, |r, c, _| C64::new(c[0].k.x * r, 0.5));
        assert!(wmn_norm(&small, &grid, &rg).unwrap() <= wmn_norm(&big, &grid, &rg).unwrap());
        let nan = KernelFunction::new(1, 0, |_, _, _| C64::new(f64::NAN, 0.0));
        assert!(matches!(wmn_norm(&nan, &grid, &rg), Err(Error::NonFinite(_))));
    }

    #[test]
    fn xi_norm_simple_cases() {
        let grid = MomentumGrid::new(2, 2).unwrap();
        let rg = RGrid::uniform(9).unwrap();
        let w00 = KernelFunction::new(0, 0, |r, _, _| c(0.5 - r));
        for xi in [0.2, 0.7] {
            let s = KernelSequence::new(xi).unwrap().with(w00.clone());
            assert!((xi_norm(&s, &grid, &rg).unwrap() - 0.5).abs() < 1e-15);
        }
        let w11 = apply_support(&KernelFunction::new(1, 1, |_, c, a| C64::new(c[0].k.z, a[0].k.x)));
        let s = KernelSequence::new(0.5).unwrap().with(w11.clone());
        let expected = 4.0 * wmn_norm(&w11, &grid, &rg).unwrap();
        assert!((xi_norm(&s, &grid, &rg).unwrap() - expected).abs() < 1e-14);
        assert!(KernelSequence::new(1.0).is_err());
    }

    #[test]
    fn xi_norm_triangle_inequality() {
        let grid = MomentumGrid::new(2, 2).unwrap();
        let rg = RGrid::uniform(9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a = random_sequence(&[(0, 1), (1, 1)], 0.5, MomentumStyle::Polynomial, &mut rng).unwrap();
            let b = random_sequence(&[(0, 1), (1, 1)], 0.5, MomentumStyle::Polynomial, &mut rng).unwrap();
            let mut sum = KernelSequence::new(0.5).unwrap();
            for (m, n) in [(0, 1), (1, 1)] {
                sum.insert(linear_combination(c(1.0), a.get(m, n).unwrap(), c(1.0), b.get(m, n).unwrap()).unwrap());
            }
            let lhs = xi_norm(&sum, &grid, &rg).unwrap();
            let rhs = xi_norm(&a, &grid, &rg).unwrap() + xi_norm(&b, &grid, &rg).unwrap();
            assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn rgrid_construction() {
        let g = RGrid::uniform(3).unwrap().with_points([0.25, 0.5, 2.0]);
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 1.0]);
        assert!(RGrid::uniform(1).is_err());
    }
}
