//! The one-photon space `𝔥 = L²(ℝ³ × ℤ₂)` restricted to the unit ball: the
//! polarization frame, the isomorphism `φ` onto transversal vector fields, the
//! rotation representation `𝒰_𝔥`, and two discretizations.
//!
//! * The **node picture** samples a function at the points `(r_i e_a, λ)` of
//!   a [`MomentumGrid`]; inner products are weighted sums.
//! * The **coefficient picture** expands the angular dependence in the
//!   transversal multipoles `X^M_{jm} = L Y_{jm}/√(j(j+1))` and
//!   `X^E_{jm} = e × X^M_{jm}`, `1 ≤ j ≤ L_max`, keeping the radial dependence
//!   at the radial nodes. Rotations act on it by exact Wigner blocks.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{lm_index, sph_harm_all};
use crate::linalg::{c, CMat, CVec, C64, I};
use crate::quadrature::{RadialRule, SphereRule};
use crate::so3::{invariant_subspace_of, spin_matrices, wigner_d, HaarQuadrature, Rotation};

/// A function on `ℝ³ × {1, 2}`; polarization labels are stored as 0 and 1.
pub type HClosure = Arc<dyn Fn(&MomentumPoint) -> C64 + Send + Sync>;

/// A vector field `k ↦ v(k) ∈ ℂ³`, defined for `k ≠ 0`.
pub type FieldClosure = Arc<dyn Fn(&Vector3<f64>) -> Vector3<C64> + Send + Sync>;

/// Polarization frame `(θ̂, φ̂)` at the unit vector `e`.
///
/// At the poles the frame is `ε₁ = x̂`, `ε₂ = ±ŷ`, signed so that
/// `ε₁ × ε₂ = e`.
pub fn eval_frame(e: &Vector3<f64>) -> Result<[Vector3<f64>; 2]> {
    if (e.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "frame needs a unit vector, |e| = {}",
            e.norm()
        )));
    }
    Ok(frame_unchecked(&e.normalize()))
}

/// Frame at `k / |k|` for any nonzero `k`.
pub fn polarization_frame(k: &Vector3<f64>) -> Result<[Vector3<f64>; 2]> {
    let n = k.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Domain("polarization frame undefined at k = 0".into()));
    }
    Ok(frame_unchecked(&(k / n)))
}

fn frame_unchecked(e: &Vector3<f64>) -> [Vector3<f64>; 2] {
    let rho = e.x.hypot(e.y);
    if rho == 0.0 {
        let sign = if e.z >= 0.0 { 1.0 } else { -1.0 };
        return [Vector3::x(), Vector3::new(0.0, sign, 0.0)];
    }
    let (cp, sp) = (e.x / rho, e.y / rho);
    [
        Vector3::new(e.z * cp, e.z * sp, -rho),
        Vector3::new(-sp, cp, 0.0),
    ]
}

/// An evaluation point `(k, λ)` with its polarization vector `ε_λ(k)`
/// precomputed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumPoint {
    pub k: Vector3<f64>,
    pub lambda: usize,
    pub polarization: Vector3<f64>,
}

impl MomentumPoint {
    /// `lambda` is 0 or 1; `k` must be nonzero.
    pub fn new(k: Vector3<f64>, lambda: usize) -> Result<Self> {
        if lambda > 1 {
            return Err(Error::Domain(format!("polarization index {lambda} not in {{0, 1}}")));
        }
        let frame = polarization_frame(&k)?;
        Ok(Self {
            k,
            lambda,
            polarization: frame[lambda],
        })
    }

    pub fn norm(&self) -> f64 {
        self.k.norm()
    }

    /// `ε_λ(k) · v`.
    pub fn project(&self, v: &Vector3<C64>) -> C64 {
        v.x * self.polarization.x + v.y * self.polarization.y + v.z * self.polarization.z
    }
}

/// Product grid on the unit ball: radial Gauss nodes for `r² dr` times a
/// sphere rule, times the two polarizations. Point `p = (i N_a + a)·2 + λ`.
#[derive(Clone, Debug)]
pub struct MomentumGrid {
    pub radial: RadialRule,
    pub sphere: SphereRule,
    points: Vec<MomentumPoint>,
    weights: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(radial_nodes: usize, angular_degree: usize) -> Result<Self> {
        let radial = RadialRule::gauss_legendre(radial_nodes)?;
        let sphere = SphereRule::product(angular_degree);
        let mut points = Vec::with_capacity(2 * radial.len() * sphere.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
            for (e, we) in sphere.directions.iter().zip(&sphere.weights) {
                for lambda in 0..2 {
                    points.push(MomentumPoint::new(e * *r, lambda)?);
                    weights.push(wr * we);
                }
            }
        }
        Ok(Self {
            radial,
            sphere,
            points,
            weights,
        })
    }

    pub fn points(&self) -> &[MomentumPoint] {
        &self.points
    }

    /// Weight of point `p` for the measure `d³k` (summed over `λ` separately).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_index(&self, i: usize, a: usize, lambda: usize) -> usize {
        (i * self.sphere.len() + a) * 2 + lambda
    }

    /// `(i, a, λ)` of point `p`.
    pub fn point_labels(&self, p: usize) -> (usize, usize, usize) {
        let n_a = self.sphere.len();
        (p / 2 / n_a, (p / 2) % n_a, p % 2)
    }

    pub fn sample(&self, h: &HClosure) -> HVector {
        HVector {
            picture: Picture::Node,
            values: CVec::from_iterator(self.len(), self.points.iter().map(|p| h(p))),
        }
    }

    /// `Σ_p W_p conj(a_p) b_p`.
    pub fn inner(&self, a: &CVec, b: &CVec) -> C64 {
        a.iter()
            .zip(b.iter())
            .zip(&self.weights)
            .map(|((x, y), w)| x.conj() * y * *w)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Picture {
    Node,
    Coefficient,
}

/// An element of `𝔥` in one of the two pictures.
#[derive(Clone, Debug, PartialEq)]
pub struct HVector {
    pub picture: Picture,
    pub values: CVec,
}

impl HVector {
    pub fn inner(&self, other: &HVector, grid: &MomentumGrid) -> Result<C64> {
        if self.picture != other.picture || self.values.len() != other.values.len() {
            return Err(Error::Dimension {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(match self.picture {
            Picture::Node => grid.inner(&self.values, &other.values),
            Picture::Coefficient => self.values.dotc(&other.values),
        })
    }

    pub fn norm(&self, grid: &MomentumGrid) -> f64 {
        self.inner(self, grid).map(|z| z.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tau {
    Electric,
    Magnetic,
}

/// Transversal multipole channel; `l ≥ 1` always.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultipoleChannel {
    pub tau: Tau,
    pub l: usize,
    pub m: i64,
}

/// Channels ordered by `l`, then type (electric first), then `m`, so each
/// `(l, τ)` block is contiguous.
pub fn multipole_channels(l_max: usize) -> Vec<MultipoleChannel> {
    let mut out = Vec::new();
    for l in 1..=l_max {
        for tau in [Tau::Electric, Tau::Magnetic] {
            for m in -(l as i64)..=(l as i64) {
                out.push(MultipoleChannel { tau, l, m });
            }
        }
    }
    out
}

/// Value of the vector harmonic of `ch` at the unit vector `e`, given the
/// scalar harmonics `ylm = sph_harm_all(L, e)` with `L ≥ ch.l`.
pub fn vector_harmonic(ch: &MultipoleChannel, e: &Vector3<f64>, ylm: &[C64]) -> Vector3<C64> {
    let (l, m) = (ch.l as i64, ch.m);
    let lf = ch.l as f64;
    let mf = m as f64;
    let y = |mm: i64| {
        if mm.abs() > l {
            C64::new(0.0, 0.0)
        } else {
            ylm[lm_index(ch.l, mm)]
        }
    };
    let up = ((lf - mf) * (lf + mf + 1.0)).sqrt() * y(m + 1);
    let down = ((lf + mf) * (lf - mf + 1.0)).sqrt() * y(m - 1);
    let scale = 1.0 / (lf * (lf + 1.0)).sqrt();
    let magnetic = Vector3::new(
        (up + down) * 0.5 * scale,
        (up - down) / (2.0 * I) * scale,
        y(m) * mf * scale,
    );
    match ch.tau {
        Tau::Magnetic => magnetic,
        Tau::Electric => e.map(c).cross(&magnetic),
    }
}

/// A discretized `𝔥` with an orthonormal mode basis `e_α`.
///
/// Node picture: `α = p` and `e_p = δ_p / √W_p`. Coefficient picture:
/// `α = i·n_ch + c` and `e_α(r e, λ) = ℓ_i(r) ε_λ(e)·X_c(e) / √w_i`, where
/// `ℓ_i` is the Lagrange polynomial through the radial nodes.
#[derive(Clone, Debug)]
pub struct ModeSpace {
    grid: MomentumGrid,
    picture: Picture,
    l_max: usize,
    channels: Vec<MultipoleChannel>,
    /// `S[p, α] = e_α(point p)`.
    synthesis: CMat,
}

impl ModeSpace {
    pub fn node(radial_nodes: usize, angular_degree: usize) -> Result<Self> {
        let grid = MomentumGrid::new(radial_nodes, angular_degree)?;
        let synthesis = CMat::from_diagonal(&CVec::from_iterator(
            grid.len(),
            grid.weights().iter().map(|w| c(1.0 / w.sqrt())),
        ));
        Ok(Self {
            grid,
            picture: Picture::Node,
            l_max: 0,
            channels: Vec::new(),
            synthesis,
        })
    }

    /// Needs `angular_degree ≥ 2 L_max + 2` so that the multipoles stay
    /// orthonormal under the sphere rule.
    pub fn coefficient(l_max: usize, radial_nodes: usize, angular_degree: usize) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::Domain("coefficient picture needs L_max ≥ 1".into()));
        }
        if angular_degree < 2 * l_max + 2 {
            return Err(Error::Domain(format!(
                "angular degree {angular_degree} below 2 L_max + 2 = {}",
                2 * l_max + 2
            )));
        }
        let grid = MomentumGrid::new(radial_nodes, angular_degree)?;
        let channels = multipole_channels(l_max);
        let n_ch = channels.len();
        let n_a = grid.sphere.len();
        let mut synthesis = CMat::zeros(grid.len(), radial_nodes * n_ch);
        for (a, e) in grid.sphere.directions.iter().enumerate() {
            let ylm = sph_harm_all(l_max, e);
            let frame = frame_unchecked(e);
            for (ci, ch) in channels.iter().enumerate() {
                let x = vector_harmonic(ch, e, &ylm);
                for (lambda, eps) in frame.iter().enumerate() {
                    let v = x.x * eps.x + x.y * eps.y + x.z * eps.z;
                    for i in 0..radial_nodes {
                        let p = (i * n_a + a) * 2 + lambda;
                        synthesis[(p, i * n_ch + ci)] = v / grid.radial.weights[i].sqrt();
                    }
                }
            }
        }
        Ok(Self {
            grid,
            picture: Picture::Coefficient,
            l_max,
            channels,
            synthesis,
        })
    }

    pub fn dim(&self) -> usize {
        self.synthesis.ncols()
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn channels(&self) -> &[MultipoleChannel] {
        &self.channels
    }

    pub fn radial_index(&self, alpha: usize) -> usize {
        match self.picture {
            Picture::Node => self.grid.point_labels(alpha).0,
            Picture::Coefficient => alpha / self.channels.len(),
        }
    }

    /// Channel of a coefficient-picture mode.
    pub fn channel(&self, alpha: usize) -> Option<MultipoleChannel> {
        match self.picture {
            Picture::Node => None,
            Picture::Coefficient => Some(self.channels[alpha % self.channels.len()]),
        }
    }

    /// `ω = |k|` of mode `α`.
    pub fn frequency(&self, alpha: usize) -> f64 {
        self.grid.radial.nodes[self.radial_index(alpha)]
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.frequency(a)).collect()
    }

    /// `S[p, α] = e_α(point p)`.
    pub fn synthesis_matrix(&self) -> &CMat {
        &self.synthesis
    }

    /// Mode coefficients `⟨e_α, h⟩` of grid values `h`.
    pub fn coefficients_of(&self, h: &HVector) -> Result<CVec> {
        if h.picture != Picture::Node || h.values.len() != self.grid.len() {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                got: h.values.len(),
            });
        }
        let weighted = CVec::from_iterator(
            h.values.len(),
            h.values.iter().zip(self.grid.weights()).map(|(v, w)| v * *w),
        );
        Ok(self.synthesis.adjoint() * weighted)
    }

    pub fn project(&self, h: &HClosure) -> CVec {
        self.coefficients_of(&self.grid.sample(h))
            .expect("sampled on own grid")
    }

    /// Grid values of the function with mode coefficients `coeffs`.
    pub fn values_of(&self, coeffs: &CVec) -> Result<HVector> {
        if coeffs.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        Ok(HVector {
            picture: Picture::Node,
            values: &self.synthesis * coeffs,
        })
    }

    /// Coefficient-picture analysis of a closure.
    pub fn analysis(&self, h: &HClosure) -> Result<HVector> {
        self.require_coefficient()?;
        Ok(HVector {
            picture: Picture::Coefficient,
            values: self.project(h),
        })
    }

    /// Grid values of a coefficient-picture vector.
    pub fn synthesis(&self, h: &HVector) -> Result<HVector> {
        self.require_coefficient()?;
        if h.picture != Picture::Coefficient {
            return Err(Error::UnsupportedPicture {
                required: "coefficient",
            });
        }
        self.values_of(&h.values)
    }

    /// `e_α(k, λ)` at an arbitrary nonzero point (coefficient picture only).
    pub fn mode_value(&self, alpha: usize, point: &MomentumPoint) -> Result<C64> {
        self.require_coefficient()?;
        let ch = self.channels[alpha % self.channels.len()];
        let i = self.radial_index(alpha);
        let r = point.norm();
        let e = point.k / r;
        let ylm = sph_harm_all(self.l_max, &e);
        let x = vector_harmonic(&ch, &e, &ylm);
        Ok(point.project(&x) * self.grid.radial.lagrange(i, r) / self.grid.radial.weights[i].sqrt())
    }

    /// All `e_α(k, λ)` at one nonzero point (coefficient picture only).
    pub fn mode_values(&self, point: &MomentumPoint) -> Result<CVec> {
        self.require_coefficient()?;
        let r = point.norm();
        let e = point.k / r;
        let ylm = sph_harm_all(self.l_max, &e);
        let n_ch = self.channels.len();
        let angular: Vec<C64> = self
            .channels
            .iter()
            .map(|ch| point.project(&vector_harmonic(ch, &e, &ylm)))
            .collect();
        let radial: Vec<f64> = (0..self.grid.radial.len())
            .map(|i| self.grid.radial.lagrange(i, r) / self.grid.radial.weights[i].sqrt())
            .collect();
        Ok(CVec::from_fn(self.dim(), |a, _| angular[a % n_ch] * radial[a / n_ch]))
    }

    /// Closure for the function with mode coefficients `coeffs`, evaluated
    /// off the grid by radial interpolation (coefficient picture only).
    pub fn closure(&self, coeffs: &CVec) -> Result<HClosure> {
        self.require_coefficient()?;
        if coeffs.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        let space = self.clone();
        let coeffs = coeffs.clone();
        Ok(Arc::new(move |p: &MomentumPoint| {
            (0..space.dim())
                .filter(|&a| coeffs[a] != C64::new(0.0, 0.0))
                .map(|a| coeffs[a] * space.mode_value(a, p).expect("coefficient picture"))
                .sum()
        }))
    }

    /// `𝒰_𝔥(R)` on mode coefficients: block `D^l(R)` on every `(i, l, τ)`.
    pub fn rotation_matrix(&self, r: &Rotation) -> Result<CMat> {
        self.require_coefficient()?;
        let mut u = CMat::zeros(self.dim(), self.dim());
        let blocks: Vec<CMat> = (0..=self.l_max).map(|l| wigner_d(l, r)).collect();
        for (start, l) in self.blocks() {
            let size = 2 * l + 1;
            u.view_mut((start, start), (size, size)).copy_from(&blocks[l]);
        }
        Ok(u)
    }

    /// Generators of `𝒰_𝔥` on mode coefficients.
    pub fn generators(&self) -> Result<[CMat; 3]> {
        self.require_coefficient()?;
        let mut j = [
            CMat::zeros(self.dim(), self.dim()),
            CMat::zeros(self.dim(), self.dim()),
            CMat::zeros(self.dim(), self.dim()),
        ];
        for (start, l) in self.blocks() {
            let s = spin_matrices(l);
            for a in 0..3 {
                j[a].view_mut((start, start), (2 * l + 1, 2 * l + 1))
                    .copy_from(&s[a]);
            }
        }
        Ok(j)
    }

    /// Start index and degree of each `(i, l, τ)` block.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if self.picture == Picture::Node {
            return out;
        }
        let n_ch = self.channels.len();
        for i in 0..self.grid.radial.len() {
            let mut c0 = 0;
            while c0 < n_ch {
                let l = self.channels[c0].l;
                out.push((i * n_ch + c0, l));
                c0 += 2 * l + 1;
            }
        }
        out
    }

    fn require_coefficient(&self) -> Result<()> {
        match self.picture {
            Picture::Coefficient => Ok(()),
            Picture::Node => Err(Error::UnsupportedPicture {
                required: "coefficient",
            }),
        }
    }
}

/// `φ(h)(k) = ε₁(k) h(k, 1) + ε₂(k) h(k, 2)`.
pub fn phi(h: &HClosure) -> FieldClosure {
    let h = h.clone();
    Arc::new(move |k: &Vector3<f64>| {
        let mut out = Vector3::zeros();
        for lambda in 0..2 {
            let p = MomentumPoint::new(*k, lambda).expect("k ≠ 0");
            out += p.polarization.map(c) * h(&p);
        }
        out
    })
}

/// `φ⁻¹(v)(k, λ) = ε_λ(k) · v(k)`; any longitudinal part of `v` is dropped.
pub fn phi_inv(v: &FieldClosure) -> HClosure {
    let v = v.clone();
    Arc::new(move |p: &MomentumPoint| p.project(&v(&p.k)))
}

/// Largest `|k̂ · v(k)| / |v(k)|` over the grid.
pub fn longitudinal_residual(v: &FieldClosure, grid: &MomentumGrid) -> f64 {
    grid.points()
        .iter()
        .step_by(2)
        .map(|p| {
            let val = v(&p.k);
            let n = val.norm();
            if n == 0.0 {
                0.0
            } else {
                let e = p.k.normalize();
                (val.x * e.x + val.y * e.y + val.z * e.z).norm() / n
            }
        })
        .fold(0.0, f64::max)
}

/// `φ⁻¹` sampled on the grid; warns when the input is not transversal.
pub fn phi_inv_on_grid(v: &FieldClosure, grid: &MomentumGrid) -> (HVector, f64) {
    let residual = longitudinal_residual(v, grid);
    if residual > 1e-12 {
        log::warn!("phi_inv: longitudinal part {residual:e} discarded");
    }
    (grid.sample(&phi_inv(v)), residual)
}

/// `M_{λλ'}(R, k) = ε_λ(k) · R ε_{λ'}(R⁻¹ k)`.
pub fn mixing_matrix(r: &Rotation, k: &Vector3<f64>) -> Result<Matrix2<f64>> {
    let here = polarization_frame(k)?;
    let there = polarization_frame(&r.apply_inverse(k))?;
    Ok(Matrix2::from_fn(|a, b| here[a].dot(&r.apply(&there[b]))))
}

/// Mixing matrix for a precomputed point, reusing its polarization vector.
pub(crate) fn mixing_row(r: &Rotation, p: &MomentumPoint) -> [(MomentumPoint, f64); 2] {
    let back = r.apply_inverse(&p.k);
    let pts = [
        MomentumPoint::new(back, 0).expect("k ≠ 0"),
        MomentumPoint::new(back, 1).expect("k ≠ 0"),
    ];
    pts.map(|q| {
        let coeff = p.polarization.dot(&r.apply(&q.polarization));
        (q, coeff)
    })
}

/// `(𝒰_𝔥(R) h)(k, λ) = Σ_{λ'} M_{λλ'}(R, k) h(R⁻¹k, λ')`.
pub fn act_h(r: &Rotation, h: &HClosure) -> HClosure {
    let h = h.clone();
    let r = *r;
    Arc::new(move |p: &MomentumPoint| {
        mixing_row(&r, p)
            .iter()
            .map(|(q, m)| h(q) * *m)
            .sum()
    })
}

/// `κ_{l,x}(k, λ) = 1_{|k| ≤ Λ} (2|k|)^{-1/2} [ε_λ(k)]_l e^{-ik·x}`, with
/// `l ∈ {1, 2, 3}`.
pub fn kappa(l: usize, x: Vector3<f64>, cutoff: f64) -> Result<HClosure> {
    if !(1..=3).contains(&l) {
        return Err(Error::Domain(format!("component index {l} not in 1..=3")));
    }
    if cutoff <= 0.0 || !cutoff.is_finite() {
        return Err(Error::Domain(format!("cutoff must be positive, got {cutoff}")));
    }
    Ok(Arc::new(move |p: &MomentumPoint| {
        let kn = p.norm();
        if kn > cutoff {
            return C64::new(0.0, 0.0);
        }
        let phase = (-I * p.k.dot(&x)).exp();
        phase * (p.polarization[l - 1] / (2.0 * kn).sqrt())
    }))
}

/// Quadrature average `Σ_R w_R 𝒰_𝔥(R) h`, sampled on the grid.
pub fn rotation_average_h(h: &HClosure, quad: &HaarQuadrature, grid: &MomentumGrid) -> HVector {
    let mut acc = CVec::zeros(grid.len());
    for (r, w) in &quad.nodes {
        acc += grid.sample(&act_h(r, h)).values * c(*w);
    }
    HVector {
        picture: Picture::Node,
        values: acc,
    }
}

/// Quadrature average of mode coefficients under `𝒰_𝔥`.
pub fn rotation_average_coefficients(space: &ModeSpace, v: &CVec, quad: &HaarQuadrature) -> Result<CVec> {
    let mut acc = CVec::zeros(v.len());
    for (r, w) in &quad.nodes {
        acc += space.rotation_matrix(r)? * v * c(*w);
    }
    Ok(acc)
}

/// Exact projection onto the invariant part of `𝒰_𝔥`, computed blockwise
/// from the generator null space. It is identically zero, since no block has
/// degree 0.
pub fn invariant_projection(space: &ModeSpace, v: &CVec) -> Result<CVec> {
    let mut out = CVec::zeros(v.len());
    for (start, l) in space.blocks() {
        let basis = invariant_subspace_of(&spin_matrices(l));
        if basis.ncols() == 0 {
            continue;
        }
        let block = v.rows(start, 2 * l + 1).into_owned();
        let proj = &basis * (basis.adjoint() * block);
        out.rows_mut(start, 2 * l + 1).copy_from(&proj);
    }
    Ok(out)
}

/// Quadrature average `Σ_R w_R R v(R⁻¹ k)` of a vector field.
pub fn rotation_average_field(v: &FieldClosure, quad: &HaarQuadrature) -> FieldClosure {
    let v = v.clone();
    let nodes = quad.nodes.clone();
    Arc::new(move |k: &Vector3<f64>| {
        let mut acc = Vector3::<C64>::zeros();
        for (r, w) in &nodes {
            let val = v(&r.apply_inverse(k));
            acc += r.matrix().map(c) * val * c(*w);
        }
        acc
    })
}
