//! The delta-sequence pairing `⟨g, H[w̲] S₂(f₁ ⊗ f₂)⟩` and the probes that
//! detect surviving marginal kernels.

use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::amplitude::{assemble_form, assemble_sources, DiscretizedKernel, KernelSource};
use super::averaging::{exact_average_sequence, haar_average_sequence, ProjectedKernel};
use super::{in_support, wmn_norm, KernelFunction, KernelSequence, RGrid};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockOperator};
use crate::linalg::{c, CVec, C64};
use crate::quadrature::ball_rule;
use crate::so3::{HaarQuadrature, Rotation};
use crate::transversal::{act_h, HClosure, ModeSpace, MomentumPoint};

/// Quadrature sizes for the pairing integrals: `local` covers the bump,
/// `coarse` the bump inside the triple integral, `outer` the ball
/// `|k| ≤ 1 − r` of the limit formula and `inner` the `k₂` ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairingRules {
    pub local_radial: usize,
    pub local_degree: usize,
    pub coarse_radial: usize,
    pub coarse_degree: usize,
    pub outer_radial: usize,
    pub outer_degree: usize,
    pub inner_radial: usize,
    pub inner_degree: usize,
}

impl Default for PairingRules {
    fn default() -> Self {
        Self {
            local_radial: 8,
            local_degree: 7,
            coarse_radial: 4,
            coarse_degree: 5,
            outer_radial: 8,
            outer_degree: 8,
            inner_radial: 4,
            inner_degree: 4,
        }
    }
}

/// Bump radii below this are not resolved by the fixed-size rules.
pub const MIN_BUMP_RADIUS: f64 = 1e-3;

/// `f_{ε,x}(k, λ) = 2^{-1/4} C φ(|k − x|)` with
/// `φ(s) = exp(−1/(1 − s²/ρ²))` on `s < ρ = min(ε, 1 − |x|)` and `C` fixed by
/// `∫ C² φ² = 1` on the bump's own rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: Vector3<f64>,
    pub radius: f64,
    pub scale: f64,
}

impl Bump {
    pub fn new(eps: f64, x: &Vector3<f64>, rules: &PairingRules) -> Result<Self> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::Domain(format!("ε must be positive, got {eps}")));
        }
        if x.norm() >= 1.0 {
            return Err(Error::Domain(format!("bump center |x| = {} not inside the unit ball", x.norm())));
        }
        let radius = eps.min(1.0 - x.norm());
        if radius < MIN_BUMP_RADIUS {
            log::warn!("bump radius {radius:.2e} is below the pairing rule resolution");
        }
        let mut bump = Self {
            center: *x,
            radius,
            scale: 1.0,
        };
        let mass: f64 = ball_rule(x, radius, rules.local_radial, rules.local_degree)
            .iter()
            .map(|(k, w)| w * bump.profile(k).powi(2))
            .sum();
        bump.scale = mass.sqrt().recip();
        Ok(bump)
    }

    fn profile(&self, k: &Vector3<f64>) -> f64 {
        let s = (k - self.center).norm() / self.radius;
        if s < 1.0 {
            (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    }

    pub fn value(&self, k: &Vector3<f64>) -> f64 {
        2f64.powf(-0.25) * self.scale * self.profile(k)
    }

    pub fn closure(&self) -> HClosure {
        let b = self.clone();
        Arc::new(move |p: &MomentumPoint| c(b.value(&p.k)))
    }
}

/// Both polarizations at each node of a ball rule.
fn polarized_rule(center: &Vector3<f64>, radius: f64, radial: usize, degree: usize) -> Vec<(MomentumPoint, f64)> {
    if radius <= 0.0 {
        return Vec::new();
    }
    ball_rule(center, radius, radial, degree)
        .into_iter()
        .filter(|(k, _)| k.norm() > 0.0)
        .flat_map(|(k, w)| (0..2).map(move |l| (MomentumPoint::new(k, l).expect("k ≠ 0"), w)))
        .collect()
}

/// `F(r) = Σ_λ ∫ w₀₁(r; k, λ) f(k, λ) |k|^{-1/2} d³k` over the ball where
/// the support condition allows `k`.
pub fn pairing_limit(w01: &KernelFunction, f: &HClosure, r: f64, rules: &PairingRules) -> C64 {
    let radius = if w01.supported { 1.0 - r } else { 1.0 };
    polarized_rule(&Vector3::zeros(), radius, rules.outer_radial, rules.outer_degree)
        .iter()
        .map(|(p, w)| w01.eval(r, &[], &[*p]) * f(p) * (w / p.norm().sqrt()))
        .fold(c(0.0), |a, b| a + b)
}

/// The three lines of `2^{-1/2}⟨g, H[w̲] S₂(f₁ ⊗ f₂)⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingTerms {
    pub eps: f64,
    pub radius: f64,
    /// `½ Σ ∫ conj(g) f₁(k̃) w₀₁(|k̃|; k) f₂(k) |k|^{-1/2}`.
    pub term45: C64,
    /// `½ Σ ∫ conj(g) f₂(k̃) w₀₁(|k̃|; k) f₁(k) |k|^{-1/2}`.
    pub term456: C64,
    /// `Σ ∫ conj(g) w₁₂(0; k̃; k₁, k₂) f₁ f₂ (|k̃||k₁||k₂|)^{-1/2}`.
    pub term4567: C64,
    /// `F(|x|)`, the limit of `√2 · term45`.
    pub limit: C64,
    pub resolution_warning: bool,
}

impl PairingTerms {
    pub fn scaled45(&self) -> C64 {
        self.term45 * std::f64::consts::SQRT_2
    }

    pub fn total(&self) -> C64 {
        self.term45 + self.term456 + self.term4567
    }
}

/// Evaluates the pairing with `f₁ = g = 𝒰_𝔥(R) f_{ε,x}` and
/// `f₂ = 𝒰_𝔥(R) h` by quadrature on balls around `R x` and the origin.
pub fn proof_pairing(
    eps: f64,
    x: &Vector3<f64>,
    rot: &Rotation,
    h: &HClosure,
    seq: &KernelSequence,
    rules: &PairingRules,
) -> Result<PairingTerms> {
    let bump = Bump::new(eps, x, rules)?;
    let center = rot.apply(x);
    let f1 = act_h(rot, &bump.closure());
    let f2 = act_h(rot, h);
    let zero = c(0.0);

    let (mut term45, mut term456, mut limit) = (zero, zero, zero);
    if let Some(w01) = seq.get(0, 1) {
        let local = polarized_rule(&center, bump.radius, rules.local_radial, rules.local_degree);
        let f1_local: Vec<C64> = local.iter().map(|(p, _)| f1(p)).collect();
        let f2_local: Vec<C64> = local.iter().map(|(p, _)| f2(p)).collect();
        for (j, (pj, wj)) in local.iter().enumerate() {
            let r = pj.norm();
            term45 += f1_local[j].norm_sqr() * pairing_limit(w01, &f2, r, rules) * *wj;
            // row j of G₁ applied to f₁
            let mut g1f1 = zero;
            for (i, (pi, wi)) in local.iter().enumerate() {
                g1f1 += w01.eval(r, &[], &[*pi]) * f1_local[i] * (wi / pi.norm().sqrt());
            }
            term456 += f1_local[j].conj() * f2_local[j] * g1f1 * *wj;
        }
        term45 *= 0.5;
        term456 *= 0.5;
        limit = pairing_limit(w01, &f2, x.norm(), rules);
    }

    let mut term4567 = zero;
    if let Some(w12) = seq.get(1, 2) {
        let coarse = polarized_rule(&center, bump.radius, rules.coarse_radial, rules.coarse_degree);
        let f1_coarse: Vec<C64> = coarse.iter().map(|(p, _)| f1(p)).collect();
        for (i, (pi, wi)) in coarse.iter().enumerate() {
            let inner_radius = if w12.supported { 1.0 - pi.norm() } else { 1.0 };
            let inner: Vec<(MomentumPoint, C64)> =
                polarized_rule(&Vector3::zeros(), inner_radius, rules.inner_radial, rules.inner_degree)
                    .into_iter()
                    .map(|(p2, w2)| (p2, f2(&p2) * (w2 / p2.norm().sqrt())))
                    .collect();
            for (j, (pj, wj)) in coarse.iter().enumerate() {
                // G₂(k̃_j, k_i)
                let mut g2 = zero;
                for (p2, f2w) in &inner {
                    g2 += w12.eval(0.0, &[*pj], &[*pi, *p2]) * f2w;
                }
                g2 /= (pj.norm() * pi.norm()).sqrt();
                term4567 += f1_coarse[j].conj() * g2 * f1_coarse[i] * (wj * wi);
            }
        }
    }

    Ok(PairingTerms {
        eps,
        radius: bump.radius,
        term45,
        term456,
        term4567,
        limit,
        resolution_warning: bump.radius < MIN_BUMP_RADIUS,
    })
}

/// `(4 T(ε/2) − T(ε)) / 3`, removing the `O(ε²)` error of a symmetric bump.
pub fn richardson(t_eps: C64, t_half: C64) -> C64 {
    (t_half * 4.0 - t_eps) / 3.0
}

/// The three pairing lines as node sums on the mode grid, for `g`, `f₁`, `f₂`
/// given by mode coefficients.
pub fn pairing_on_grid(
    space: &ModeSpace,
    g: &CVec,
    f1: &CVec,
    f2: &CVec,
    seq: &KernelSequence,
) -> Result<PairingTerms> {
    let grid = space.grid();
    let pts = grid.points();
    let wts = grid.weights();
    let g = space.values_of(g)?.values;
    let f1 = space.values_of(f1)?.values;
    let f2 = space.values_of(f2)?.values;
    let zero = c(0.0);
    let scaled = |v: &CVec| -> Vec<C64> {
        v.iter()
            .zip(pts.iter().zip(wts))
            .map(|(x, (p, w))| x * (w / p.norm().sqrt()))
            .collect()
    };
    let (f1s, f2s) = (scaled(&f1), scaled(&f2));

    let (mut term45, mut term456) = (zero, zero);
    if let Some(w01) = seq.get(0, 1) {
        for (j, pj) in pts.iter().enumerate() {
            let r = pj.norm();
            let (mut a, mut b) = (zero, zero);
            for (i, pi) in pts.iter().enumerate() {
                let v = w01.eval(r, &[], &[*pi]);
                a += v * f2s[i];
                b += v * f1s[i];
            }
            term45 += g[j].conj() * f1[j] * a * wts[j];
            term456 += g[j].conj() * f2[j] * b * wts[j];
        }
        term45 *= 0.5;
        term456 *= 0.5;
    }

    let mut term4567 = zero;
    if let Some(w12) = seq.get(1, 2) {
        for (j, pj) in pts.iter().enumerate() {
            let gj = g[j].conj() * (wts[j] / pj.norm().sqrt());
            if gj == zero {
                continue;
            }
            for (a, pa) in pts.iter().enumerate() {
                for (b, pb) in pts.iter().enumerate() {
                    if w12.supported && !in_support(0.0, &[*pj], &[*pa, *pb]) {
                        continue;
                    }
                    term4567 += gj * w12.eval(0.0, &[*pj], &[*pa, *pb]) * f1s[a] * f2s[b];
                }
            }
        }
    }
    Ok(PairingTerms {
        eps: 0.0,
        radius: 0.0,
        term45,
        term456,
        term4567,
        limit: zero,
        resolution_warning: false,
    })
}

/// `max |H[P, 0]|, |H[0, P]|` over one-particle states `P`.
pub fn vacuum_block(op: &FockOperator, basis: &FockBasis) -> f64 {
    basis
        .sector(1)
        .into_iter()
        .map(|i| op[(i, 0)].norm().max(op[(0, i)].norm()))
        .fold(0.0, f64::max)
}

/// Smallest ratio of the marginal probe at Haar orders `q` and `2q` that the
/// quadrature averaging is designed to reach at the default order.
pub const DESIGN_SHRINK_FACTOR: f64 = 10.0;

/// Settings for [`vanishing_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VanishingConfig {
    /// Haar product order `q`; the quadrature probes compare `q` and `2q`.
    pub haar_order: usize,
    pub x: [f64; 3],
    /// Halving sequence of bump widths.
    pub eps: Vec<f64>,
    /// Rotations sampled for the spread of `F_R(|x|)`.
    pub rotations: usize,
    pub rgrid_points: usize,
    pub rules: PairingRules,
    pub seed: u64,
}

impl Default for VanishingConfig {
    fn default() -> Self {
        Self {
            haar_order: 4,
            x: [0.2, -0.1, 0.3],
            eps: vec![0.2, 0.1, 0.05],
            rotations: 4,
            rgrid_points: 33,
            rules: PairingRules::default(),
            seed: 0,
        }
    }
}

/// Smooth test function `h(k, λ) = e^{-|k|²} ε_λ(k) · v(k)` used as `f₂`.
pub fn test_function() -> HClosure {
    Arc::new(|p: &MomentumPoint| {
        let k = p.k;
        let v = Vector3::new(C64::new(1.0 + k.z, 0.0), C64::new(0.0, 0.5), C64::new(-0.3 + 0.2 * k.x, 0.1));
        p.project(&v) * (-k.norm_squared()).exp()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingProbe {
    /// `|√2 · term45(ε)|` per bump width.
    pub scaled: Vec<f64>,
    /// Richardson extrapolation of the last two widths.
    pub extrapolated: f64,
    /// `|F(|x|)|` at the identity rotation.
    pub limit: f64,
    /// `max_R |F_R(|x|) − F_I(|x|)|`.
    pub r_spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    /// `‖w₀₁‖` and `‖w₁₀‖` in the kernel norm.
    pub norm01: f64,
    pub norm10: f64,
    pub vacuum_block: f64,
    pub pairing: Option<PairingProbe>,
}

impl ProbeSet {
    pub fn marginal(&self) -> f64 {
        self.norm01.max(self.norm10)
    }

    /// Largest of all probes.
    pub fn max_probe(&self) -> f64 {
        let p = self
            .pairing
            .as_ref()
            .map(|p| p.extrapolated.max(p.r_spread))
            .unwrap_or(0.0);
        self.marginal().max(self.vacuum_block).max(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub exact: ProbeSet,
    /// Largest coefficient of the exactly averaged marginal amplitudes over
    /// the r-grid.
    pub exact_coefficients: f64,
    pub quadrature_q: ProbeSet,
    pub quadrature_2q: ProbeSet,
    pub shrink: f64,
    pub control: ProbeSet,
    /// `‖w̄₁₁‖` after exact averaging, when the sequence has a (1,1) member.
    pub averaged_w11: Option<f64>,
}

fn marginal_only(seq: &KernelSequence) -> KernelSequence {
    let mut out = KernelSequence::new(seq.xi).expect("ξ already validated");
    for (m, n) in [(0, 1), (1, 0)] {
        if let Some(w) = seq.get(m, n) {
            out.insert(w.clone());
        }
    }
    out
}

fn norm_of(seq: &KernelSequence, m: usize, n: usize, space: &ModeSpace, rgrid: &RGrid) -> Result<f64> {
    seq.get(m, n)
        .map(|w| wmn_norm(w, space.grid(), rgrid))
        .unwrap_or(Ok(0.0))
}

fn pairing_probe(seq: &KernelSequence, cfg: &VanishingConfig) -> Result<Option<PairingProbe>> {
    let Some(w01) = seq.get(0, 1) else {
        return Ok(None);
    };
    let x = Vector3::from(cfg.x);
    let h = test_function();
    let only01 = KernelSequence::new(seq.xi)?.with(w01.clone());
    let mut scaled = Vec::new();
    let mut raw = Vec::new();
    for &eps in &cfg.eps {
        let t = proof_pairing(eps, &x, &Rotation::identity(), &h, &only01, &cfg.rules)?;
        scaled.push(t.scaled45().norm());
        raw.push(t.scaled45());
    }
    let extrapolated = match raw.len() {
        0 => 0.0,
        1 => raw[0].norm(),
        n => richardson(raw[n - 2], raw[n - 1]).norm(),
    };
    let base = pairing_limit(w01, &h, x.norm(), &cfg.rules);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.seed);
    let mut r_spread = 0.0_f64;
    for _ in 0..cfg.rotations {
        let rot = Rotation::random(&mut rng);
        let f = pairing_limit(w01, &act_h(&rot, &h), x.norm(), &cfg.rules);
        r_spread = r_spread.max((f - base).norm());
    }
    Ok(Some(PairingProbe {
        scaled,
        extrapolated,
        limit: base.norm(),
        r_spread,
    }))
}

fn probe_set(
    seq: &KernelSequence,
    vacuum: f64,
    space: &ModeSpace,
    rgrid: &RGrid,
    cfg: Option<&VanishingConfig>,
) -> Result<ProbeSet> {
    Ok(ProbeSet {
        norm01: norm_of(seq, 0, 1, space, rgrid)?,
        norm10: norm_of(seq, 1, 0, space, rgrid)?,
        vacuum_block: vacuum,
        pairing: match cfg {
            Some(cfg) => pairing_probe(seq, cfg)?,
            None => None,
        },
    })
}

/// Averages the sequence exactly and by Haar quadrature at orders `q` and
/// `2q`, and reports the marginal probes for each next to the unaveraged
/// control. Only the marginal members reach the vacuum↔one-particle block,
/// so the quadrature and control blocks are assembled from those alone.
pub fn vanishing_report(
    seq: &KernelSequence,
    space: &ModeSpace,
    basis: &FockBasis,
    cfg: &VanishingConfig,
) -> Result<VanishingReport> {
    let rgrid = RGrid::for_basis(cfg.rgrid_points, basis)?;

    let projected: Vec<ProjectedKernel> = seq
        .iter()
        .map(|w| ProjectedKernel::new(w, space))
        .collect::<Result<_>>()?;
    let refs: Vec<&dyn KernelSource> = projected.iter().map(|p| p as &dyn KernelSource).collect();
    let exact_op = assemble_sources(&refs, basis)?;
    let mut exact_coefficients = 0.0_f64;
    for p in &projected {
        if p.orders().0 + p.orders().1 == 1 {
            for &r in rgrid.points() {
                exact_coefficients = exact_coefficients.max(p.amplitudes(r)?.max_abs());
            }
        }
    }
    let exact_seq = exact_average_sequence(seq, space)?;
    let exact = probe_set(&exact_seq, vacuum_block(&exact_op, basis), space, &rgrid, Some(cfg))?;

    let marginal_vacuum = |s: &KernelSequence| -> Result<f64> {
        let sources: Vec<DiscretizedKernel> = marginal_only(s).iter().map(|w| DiscretizedKernel::new(w, space)).collect();
        let refs: Vec<&dyn KernelSource> = sources.iter().map(|p| p as &dyn KernelSource).collect();
        Ok(vacuum_block(&assemble_sources(&refs, basis)?, basis))
    };
    let quad_probe = |order: usize| -> Result<ProbeSet> {
        let avg = haar_average_sequence(&marginal_only(seq), &HaarQuadrature::product(order));
        probe_set(&avg, marginal_vacuum(&avg)?, space, &rgrid, None)
    };
    let quadrature_q = quad_probe(cfg.haar_order)?;
    let quadrature_2q = quad_probe(2 * cfg.haar_order)?;
    let shrink = quadrature_q.marginal() / quadrature_2q.marginal();

    let control = probe_set(seq, marginal_vacuum(seq)?, space, &rgrid, Some(cfg))?;
    let averaged_w11 = match exact_seq.get(1, 1) {
        Some(w) => Some(wmn_norm(w, space.grid(), &rgrid)?),
        None => None,
    };
    Ok(VanishingReport {
        exact,
        exact_coefficients,
        quadrature_q,
        quadrature_2q,
        shrink,
        control,
        averaged_w11,
    })
}

/// Assembled `H[w̲]` of the exactly averaged sequence.
pub fn exact_average_operator(seq: &KernelSequence, space: &ModeSpace, basis: &FockBasis) -> Result<FockOperator> {
    let mut total = crate::linalg::CMat::zeros(basis.dim(), basis.dim());
    for w in seq.iter() {
        total += assemble_form(&ProjectedKernel::new(w, space)?, basis)?.into_matrix();
    }
    Ok(FockOperator::new(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{create, FockBasis};
    use crate::kernels::{assemble_sum, random_kernel, MomentumStyle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bump_is_normalized_and_supported() {
        let rules = PairingRules::default();
        let x = Vector3::new(0.3, 0.1, -0.2);
        let b = Bump::new(0.1, &x, &rules).unwrap();
        let mass: f64 = ball_rule(&x, b.radius, rules.local_radial, rules.local_degree)
            .iter()
            .map(|(k, w)| 2.0 * w * b.value(k).powi(2))
            .sum();
        assert!((mass - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(b.value(&(x + Vector3::new(0.1, 0.0, 0.0))), 0.0);
        assert!(Bump::new(0.1, &Vector3::new(1.0, 0.0, 0.0), &rules).is_err());
        assert!(Bump::new(0.0, &x, &rules).is_err());
        let edge = Bump::new(0.2, &Vector3::new(0.0, 0.0, 0.95), &rules).unwrap();
        assert!((edge.radius - 0.05).abs() < 1e-15);
    }

    #[test]
    fn pairing_terms_follow_the_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let seq = KernelSequence::new(0.5)
            .unwrap()
            .with(random_kernel(0, 1, MomentumStyle::Polynomial, &mut rng))
            .with(random_kernel(1, 2, MomentumStyle::Polynomial, &mut rng));
        let x = Vector3::new(0.2, -0.1, 0.3);
        let rot = Rotation::random(&mut rng);
        let h = test_function();
        let rules = PairingRules::default();
        let terms: Vec<PairingTerms> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&e| proof_pairing(e, &x, &rot, &h, &seq, &rules).unwrap())
            .collect();
        for w in terms.windows(2) {
            assert!(w[1].term456.norm() < w[0].term456.norm());
            assert!(w[1].term4567.norm() < w[0].term4567.norm());
            let err = |t: &PairingTerms| (t.scaled45() - t.limit).norm();
            assert!(err(&w[1]) < err(&w[0]));
        }
    }

    #[test]
    fn grid_pairing_matches_fock_matrix_elements() {
        let space = ModeSpace::coefficient(1, 3, 4).unwrap();
        let basis = FockBasis::new(&space, 2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let coeffs = |rng: &mut ChaCha8Rng| {
            use rand_distr::{Distribution, StandardNormal};
            CVec::from_fn(space.dim(), |_, _| {
                C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
            })
        };
        let (g, f1, f2) = (coeffs(&mut rng), coeffs(&mut rng), coeffs(&mut rng));
        let w12 = random_kernel(1, 2, MomentumStyle::Polynomial, &mut rng);
        let w01 = random_kernel(0, 1, MomentumStyle::Polynomial, &mut rng);
        let omega = {
            let mut v = CVec::zeros(basis.dim());
            v[0] = c(1.0);
            v
        };
        let ag = create(&g, &basis).unwrap().matrix() * &omega;
        let a12 = create(&f1, &basis).unwrap().matrix() * (create(&f2, &basis).unwrap().matrix() * &omega);
        for seq in [
            KernelSequence::new(0.5).unwrap().with(w12.clone()),
            KernelSequence::new(0.5).unwrap().with(w12).with(w01),
        ] {
            let h = assemble_sum(&seq, &space, &basis).unwrap();
            let direct = ag.dotc(&(h.matrix() * &a12)) * 0.5;
            let t = pairing_on_grid(&space, &g, &f1, &f2, &seq).unwrap();
            assert!((t.total() - direct).norm() < 1e-9 * direct.norm().max(1.0), "{} vs {}", t.total(), direct);
        }
    }

    #[test]
    fn vanishing_report_separates_averaged_from_control() {
        let space = ModeSpace::coefficient(1, 3, 4).unwrap();
        let basis = FockBasis::new(&space, 2, Some(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let seq = KernelSequence::new(0.5)
            .unwrap()
            .with(random_kernel(0, 1, MomentumStyle::PlaneWave, &mut rng))
            .with(random_kernel(1, 0, MomentumStyle::PlaneWave, &mut rng))
            .with(random_kernel(1, 1, MomentumStyle::Polynomial, &mut rng));
        let cfg = VanishingConfig {
            eps: vec![0.2, 0.1],
            rotations: 2,
            ..VanishingConfig::default()
        };
        let rep = vanishing_report(&seq, &space, &basis, &cfg).unwrap();
        assert!(rep.exact.max_probe() <= 1e-10, "{:?}", rep.exact);
        assert!(rep.exact_coefficients <= 1e-12);
        assert!(rep.control.marginal() > 1e-3);
        assert!(rep.control.vacuum_block > 1e-3);
        assert!(rep.shrink > 1.0);
        assert!(rep.averaged_w11.unwrap() > 1e-6);
    }
}
