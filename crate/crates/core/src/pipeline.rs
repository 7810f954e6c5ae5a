//! End-to-end checks that a rotation-invariant model keeps its marginal
//! sector empty after one Feshbach step.
//!
//! Model (a): a toy atom coupled linearly to the field, reduced to the Fock
//! space through the atomic ground state. Model (b): a kernel sequence on the
//! Fock space alone with `χ = η(H_f)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feshbach::{
    check_pair, feshbach_map, make_chi, make_chi_fock, reduce, shifted_hf, toy_atom, CutoffFunction, PairReport,
    ToyAtom, DEFAULT_SIGMA_MIN,
};
use crate::fock::{basis_vector, create, create_mode, u_fock, FockBasis};
use crate::kernels::{
    random_kernel, test_function, vacuum_block, Bump, DiscretizedKernel, KernelFunction, KernelSource,
    MomentumStyle, PairingRules, ProjectedKernel,
};
use crate::linalg::{c, kron, max_abs, op_norm, CMat, CVec, C64};
use crate::so3::{HaarQuadrature, Rotation};
use crate::transversal::ModeSpace;

/// Shared discretization of the field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldConfig {
    pub l_max: usize,
    pub radial_nodes: usize,
    pub angular_degree: usize,
    pub n_max: usize,
    pub e_max: Option<f64>,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            l_max: 1,
            radial_nodes: 3,
            angular_degree: 4,
            n_max: 2,
            e_max: Some(1.0),
        }
    }
}

impl FieldConfig {
    pub fn build(&self) -> Result<(ModeSpace, FockBasis)> {
        let space = ModeSpace::coefficient(self.l_max, self.radial_nodes, self.angular_degree)?;
        let basis = FockBasis::new(&space, self.n_max, self.e_max)?;
        Ok((space, basis))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AtomPipelineConfig {
    pub field: FieldConfig,
    /// Rotation blocks `(j, E)` of the toy atom.
    pub atom_blocks: Vec<(usize, f64)>,
    pub min_gap: f64,
    pub z: f64,
    pub coupling: f64,
    pub eta: CutoffFunction,
    pub sigma_min: f64,
    pub rotations: usize,
    /// Average the coupling over SO(3); `false` gives the control run.
    pub averaged: bool,
    pub seed: u64,
}

impl Default for AtomPipelineConfig {
    fn default() -> Self {
        Self {
            field: FieldConfig::default(),
            atom_blocks: vec![(0, 0.0), (1, 1.0)],
            min_gap: 0.5,
            z: -0.1,
            coupling: 0.1,
            eta: CutoffFunction::default(),
            sigma_min: DEFAULT_SIGMA_MIN,
            rotations: 10,
            averaged: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldPipelineConfig {
    pub field: FieldConfig,
    /// Spectral shift `z₀` in `w₀₀(r) = r − z₀`.
    pub z0: f64,
    pub coupling: f64,
    pub orders: Vec<(usize, usize)>,
    pub eta: CutoffFunction,
    pub sigma_min: f64,
    pub rotations: usize,
    pub averaged: bool,
    pub seed: u64,
}

impl Default for FieldPipelineConfig {
    fn default() -> Self {
        Self {
            field: FieldConfig::default(),
            z0: -0.1,
            coupling: 0.02,
            orders: vec![(0, 1), (1, 0), (1, 1), (0, 2), (2, 0)],
            eta: CutoffFunction::default(),
            sigma_min: DEFAULT_SIGMA_MIN,
            rotations: 10,
            averaged: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub averaged: bool,
    pub fock_dim: usize,
    pub total_dim: usize,
    pub pair: PairReport,
    /// `max |⟨e_α, F Ω⟩|, |⟨Ω, F e_α⟩|` of the reduced Feshbach operator.
    pub vacuum_block: f64,
    /// `max_R |P(R) − P(1)|` for `P(R) = ½⟨a*(g_R)Ω, F a*(g_R) a*(h_R) Ω⟩`.
    pub pairing_spread: f64,
    /// `max_R ‖[F, 𝒰_ℱ(R)]‖` on the Fock space.
    pub commutator: f64,
    /// `max_R ‖[reduce(H), 𝒰_ℱ(R)]‖`, or of the assembled `H` in model (b).
    pub reduced_commutator: f64,
}

impl PipelineReport {
    pub fn marginal_probe(&self) -> f64 {
        self.vacuum_block.max(self.pairing_spread)
    }
}

/// Orders of the averaging rule needed for exactness: products of
/// `D^j ⊗ D^{j'} ⊗ D^l` reach degree `2 j_max + L_max`.
fn averaging_order(atom: &ToyAtom, space: &ModeSpace) -> usize {
    let q = (2 * atom.j_max() + space.l_max()).max(2);
    q + q % 2
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

/// `W₀ = Σ_α B_α ⊗ a*_α + h.c.`, with `B_α` replaced by its Haar average
/// `Σ_R w_R Σ_α U_h(R)_{γα} U_at(R) B_α U_at(R)†` when `averaged`.
pub fn atom_coupling<R: Rng + ?Sized>(
    atom: &ToyAtom,
    space: &ModeSpace,
    basis: &FockBasis,
    averaged: bool,
    rng: &mut R,
) -> Result<CMat> {
    let n_at = atom.dim();
    let d = space.dim();
    let raw: Vec<CMat> = (0..d).map(|_| CMat::from_fn(n_at, n_at, |_, _| complex_normal(rng))).collect();
    let b = if averaged {
        let quad = HaarQuadrature::product(averaging_order(atom, space));
        let mut acc = vec![CMat::zeros(n_at, n_at); d];
        for (rot, w) in &quad.nodes {
            let u_at = atom.rep(rot);
            let u_h = space.rotation_matrix(rot)?;
            let conj: Vec<CMat> = raw.iter().map(|b| &u_at * b * u_at.adjoint()).collect();
            for (gamma, slot) in acc.iter_mut().enumerate() {
                for (alpha, cb) in conj.iter().enumerate() {
                    let coef = u_h[(gamma, alpha)];
                    if coef != c(0.0) {
                        *slot += cb * (coef * *w);
                    }
                }
            }
        }
        acc
    } else {
        raw
    };
    let mut w0 = CMat::zeros(n_at * basis.dim(), n_at * basis.dim());
    for (alpha, b_alpha) in b.iter().enumerate() {
        w0 += kron(b_alpha, create_mode(alpha, basis)?.matrix());
    }
    Ok(&w0 + w0.adjoint())
}

/// `𝒰_at(R) ⊗ 𝒰_ℱ(R)`.
pub fn joint_rep(atom: &ToyAtom, space: &ModeSpace, basis: &FockBasis, r: &Rotation) -> Result<CMat> {
    Ok(kron(&atom.rep(r), u_fock(r, space, basis)?.matrix()))
}

/// Test vectors `g` (a projected bump) and `h` for the pairing probe.
fn pairing_vectors(space: &ModeSpace) -> Result<(CVec, CVec)> {
    let bump = Bump::new(0.4, &nalgebra::Vector3::new(0.2, -0.1, 0.3), &PairingRules::default())?;
    Ok((space.project(&bump.closure()), space.project(&test_function())))
}

struct Probes {
    vacuum_block: f64,
    pairing_spread: f64,
    commutator: f64,
    reduced_commutator: f64,
}

fn probe_fock_operator(
    f: &CMat,
    reduced_h: &CMat,
    space: &ModeSpace,
    basis: &FockBasis,
    rotations: &[Rotation],
) -> Result<Probes> {
    let (g, h) = pairing_vectors(space)?;
    let omega = basis_vector(basis, &[]).expect("vacuum");
    let pairing = |r: &Rotation| -> Result<C64> {
        let u = space.rotation_matrix(r)?;
        let (gr, hr) = (&u * &g, &u * &h);
        let left = create(&gr, basis)?.matrix() * &omega;
        let right = create(&gr, basis)?.matrix() * (create(&hr, basis)?.matrix() * &omega);
        Ok(left.dotc(&(f * right)) * 0.5)
    };
    let base = pairing(&Rotation::identity())?;
    let mut probes = Probes {
        vacuum_block: vacuum_block(&crate::fock::FockOperator::new(f.clone()), basis),
        pairing_spread: 0.0,
        commutator: 0.0,
        reduced_commutator: 0.0,
    };
    for r in rotations {
        probes.pairing_spread = probes.pairing_spread.max((pairing(r)? - base).norm());
        let u = u_fock(r, space, basis)?;
        let uf = u.matrix();
        probes.commutator = probes.commutator.max(op_norm(&(uf * f - f * uf)));
        probes.reduced_commutator = probes
            .reduced_commutator
            .max(op_norm(&(uf * reduced_h - reduced_h * uf)));
    }
    Ok(probes)
}

fn sample_rotations(n: usize, rng: &mut ChaCha8Rng) -> Vec<Rotation> {
    (0..n).map(|_| Rotation::random(rng)).collect()
}

/// Model (a): `H_g = H_at ⊗ 1 + 1 ⊗ H_f + g W₀`, `T = H₀`,
/// `χ = P_at ⊗ η(H_f)`, and `F_{z,g} = reduce(F_χ(H_g − z, H₀ − z))`.
pub fn pipeline_corollary_a(cfg: &AtomPipelineConfig) -> Result<(PipelineReport, CMat)> {
    let (space, basis) = cfg.field.build()?;
    let atom = toy_atom(&cfg.atom_blocks, cfg.min_gap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w0 = atom_coupling(&atom, &space, &basis, cfg.averaged, &mut rng)?;
    let n = atom.dim() * basis.dim();
    let h0 = kron(&atom.h_at, &CMat::identity(basis.dim(), basis.dim())) + kron(&CMat::identity(atom.dim(), atom.dim()), &shifted_hf(&basis, 0.0));
    let shift = CMat::identity(n, n) * c(cfg.z);
    let h_g = &h0 + w0 * c(cfg.coupling);
    let chi = make_chi(&atom.p_at, &cfg.eta, &basis);
    let pair = check_pair(&(&h_g - &shift), &(&h0 - &shift), &chi, cfg.sigma_min)?;
    let f = feshbach_map(&pair)?;
    let f_red = reduce(&f, &atom, &basis)?;
    let h_red = reduce(&h_g, &atom, &basis)?;
    let rotations = sample_rotations(cfg.rotations, &mut rng);
    let probes = probe_fock_operator(f_red.matrix(), h_red.matrix(), &space, &basis, &rotations)?;
    Ok((
        PipelineReport {
            averaged: cfg.averaged,
            fock_dim: basis.dim(),
            total_dim: n,
            pair: pair.report.clone(),
            vacuum_block: probes.vacuum_block,
            pairing_spread: probes.pairing_spread,
            commutator: probes.commutator,
            reduced_commutator: probes.reduced_commutator,
        },
        f_red.into_matrix(),
    ))
}

/// Model (b): `H = Σ H_{m,n}[w_{m,n}]` with `w₀₀(r) = r − z₀`, `T = H_f − z₀`,
/// `χ = η(H_f)`.
pub fn pipeline_corollary_b(cfg: &FieldPipelineConfig) -> Result<(PipelineReport, CMat)> {
    let (space, basis) = cfg.field.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let z0 = cfg.z0;
    let mut members = vec![KernelFunction::new(0, 0, move |r, _, _| c(r - z0))];
    for &(m, n) in &cfg.orders {
        if m + n == 0 {
            return Err(Error::Config("the (0,0) member is fixed to r − z₀".into()));
        }
        let w = random_kernel(m, n, MomentumStyle::Polynomial, &mut rng);
        let g = cfg.coupling;
        members.push(
            KernelFunction::new(m, n, move |r, cre, ann| w.eval(r, cre, ann) * g).with_flags(true, true),
        );
    }
    let mut h = CMat::zeros(basis.dim(), basis.dim());
    for w in &members {
        let op = if cfg.averaged {
            crate::kernels::assemble_form(&ProjectedKernel::new(w, &space)? as &dyn KernelSource, &basis)?
        } else {
            crate::kernels::assemble_form(&DiscretizedKernel::new(w, &space) as &dyn KernelSource, &basis)?
        };
        h += op.into_matrix();
    }
    let t = shifted_hf(&basis, z0);
    let chi = make_chi_fock(&cfg.eta, &basis);
    let pair = check_pair(&h, &t, &chi, cfg.sigma_min)?;
    let f = feshbach_map(&pair)?;
    let rotations = sample_rotations(cfg.rotations, &mut rng);
    let probes = probe_fock_operator(&f, &h, &space, &basis, &rotations)?;
    Ok((
        PipelineReport {
            averaged: cfg.averaged,
            fock_dim: basis.dim(),
            total_dim: basis.dim(),
            pair: pair.report.clone(),
            vacuum_block: probes.vacuum_block,
            pairing_spread: probes.pairing_spread,
            commutator: probes.commutator,
            reduced_commutator: probes.reduced_commutator,
        },
        f,
    ))
}

/// `‖F − T‖_max` for model (a) with the coupling switched off, where
/// `F_{z,0} = (E_at − z) + H_f` exactly.
pub fn zero_coupling_residual(cfg: &AtomPipelineConfig) -> Result<f64> {
    let cfg0 = AtomPipelineConfig {
        coupling: 0.0,
        ..cfg.clone()
    };
    let (_, basis) = cfg.field.build()?;
    let atom = toy_atom(&cfg.atom_blocks, cfg.min_gap)?;
    let (_, f) = pipeline_corollary_a(&cfg0)?;
    Ok(max_abs(&(f - shifted_hf(&basis, cfg.z - atom.e_at))))
}
