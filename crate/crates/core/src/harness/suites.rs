//! The verification suites behind each subcommand.

use std::f64::consts::PI;
use std::time::Instant;

use clap::ValueEnum;
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::Config;
use super::report::{Measurement, Report, RunOutput, Table};
use crate::error::Result;
use crate::feshbach::{
    check_pair, compressed_feshbach, cutoff_of, feshbach_map, make_chi, singular_points, toy_atom, ChiPair,
    DEFAULT_SIGMA_MIN,
};
use crate::fock::{annihilate, create, dgamma, gamma, hf, u_fock, FockBasis};
use crate::kernels::{
    apply_support, assemble_form, assemble_ops, proof_pairing, random_kernel, test_function, vanishing_report,
    wmn_norm, DiscretizedKernel, KernelFunction, KernelSequence, MomentumStyle, PairingRules, PairingTerms, RGrid,
    VanishingConfig,
};
use crate::linalg::{c, hermitian_eigenvalues, max_abs, min_singular_value, op_norm, unitary_exp, CMat, CVec, C64};
use crate::pipeline::{
    pipeline_corollary_a, pipeline_corollary_b, zero_coupling_residual, AtomPipelineConfig, FieldPipelineConfig,
    PipelineReport,
};
use crate::so3::{casimir_block_spectrum, generators, verify_lemma1, Rotation};
use crate::transversal::{act_h, kappa, polarization_frame, ModeSpace, MomentumPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    VerifyLemma1,
    VerifySingleParticle,
    VerifyFock,
    VerifyKernels,
    VerifyVanishing,
    VerifyFeshbach,
    RunPipeline,
    RunAll,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::VerifyLemma1,
        Suite::VerifySingleParticle,
        Suite::VerifyFock,
        Suite::VerifyKernels,
        Suite::VerifyVanishing,
        Suite::VerifyFeshbach,
        Suite::RunPipeline,
    ];
}

/// The generator behind every random construction of a run.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `k` derived from the run seed.
fn stream(cfg: &Config, k: u64) -> ChaCha8Rng {
    let mut rng = seeded_rng(cfg.seed);
    rng.set_stream(k);
    rng
}

/// Runs one suite, or all of them in order.
pub fn run(suite: Suite, cfg: &Config) -> Result<RunOutput> {
    cfg.validate()?;
    let mut out = RunOutput::default();
    match suite {
        Suite::RunAll => {
            for s in Suite::ALL {
                out.extend(run(s, cfg)?);
            }
        }
        Suite::VerifyLemma1 => lemma1_suite(cfg, &mut out),
        Suite::VerifySingleParticle => single_particle_suite(cfg, &mut out)?,
        Suite::VerifyFock => fock_suite(cfg, &mut out)?,
        Suite::VerifyKernels => kernel_suite(cfg, &mut out)?,
        Suite::VerifyVanishing => vanishing_suite(cfg, &mut out)?,
        Suite::VerifyFeshbach => feshbach_suite(cfg, &mut out),
        Suite::RunPipeline => pipeline_suite(cfg, &mut out)?,
    }
    Ok(out)
}

/// Times `body` and turns its measurements, or its error, into a report.
fn check(name: &str, params: Value, seed: u64, body: impl FnOnce() -> Result<Vec<Measurement>>) -> Report {
    let start = Instant::now();
    let res = body();
    let runtime = start.elapsed().as_secs_f64();
    match res {
        Ok(m) => Report::new(name, params, m, runtime, seed),
        Err(e) => Report::failed(name, params, &e, runtime, seed),
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| complex_normal(rng))
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    CVec::from_fn(n, |_, _| complex_normal(rng))
}

/// Point of the unit ball away from the origin.
fn random_momentum(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let v = Vector3::from_fn(|_, _| StandardNormal.sample(rng));
    v.normalize() * rng.random_range(0.05..1.0)
}

fn field_space(cfg: &Config) -> Result<ModeSpace> {
    ModeSpace::coefficient(cfg.l_max, cfg.radial_nodes, cfg.angular_degree)
}

fn lemma1_suite(cfg: &Config, out: &mut RunOutput) {
    let tol = &cfg.tolerances;
    let mut table = Table::new("lemma1", &["l_max", "invariant_dim", "transversal_overlap", "restricted_invariant_dim"]);
    for &l in &cfg.lemma1_l_max {
        out.reports.push(check("lemma1", json!({ "l_max": l }), cfg.seed, || {
            let rep = verify_lemma1(l)?;
            table.push(vec![
                l as f64,
                rep.invariant_dim as f64,
                rep.transversal_overlap,
                rep.restricted_invariant_dim as f64,
            ]);
            Ok(vec![
                Measurement::equals("invariant_dim", rep.invariant_dim as f64, 1.0),
                Measurement::at_most("transversal_overlap", rep.transversal_overlap, tol.lemma1_overlap),
                Measurement::equals("restricted_invariant_dim", rep.restricted_invariant_dim as f64, 0.0),
            ])
        }));
    }
    out.tables.push(table);
    out.reports.push(check("clebsch_gordan", json!({ "l": 1, "spin": 1 }), cfg.seed, || {
        let spec = casimir_block_spectrum(&generators(1), 1);
        let mut m = Vec::new();
        for j in 0..=2usize {
            let target = (j * (j + 1)) as f64;
            let mult = spec.iter().filter(|e| (*e - target).abs() <= tol.casimir).count();
            m.push(Measurement::equals(&format!("multiplicity_j{j}"), mult as f64, (2 * j + 1) as f64));
        }
        let residual = spec
            .iter()
            .map(|e| [0.0, 2.0, 6.0].iter().map(|t| (e - t).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        m.push(Measurement::at_most("eigenvalue_residual", residual, tol.casimir));
        Ok(m)
    }));
}

fn single_particle_suite(cfg: &Config, out: &mut RunOutput) -> Result<()> {
    let tol = &cfg.tolerances;
    let samples = cfg.identity_samples;
    out.reports.push(check("polarization_frame", json!({ "samples": samples }), cfg.seed, || {
        let mut rng = stream(cfg, 1);
        let (mut orient, mut complete) = (0.0_f64, 0.0_f64);
        for _ in 0..samples {
            let k = random_momentum(&mut rng);
            let [e1, e2] = polarization_frame(&k)?;
            orient = orient.max((e1.cross(&e2) - k.normalize()).norm());
            let proj = e1 * e1.transpose() + e2 * e2.transpose();
            let expected = Matrix3::identity() - k * k.transpose() / k.norm_squared();
            complete = complete.max((proj - expected).abs().max());
        }
        Ok(vec![
            Measurement::at_most("orientation", orient, tol.frame),
            Measurement::at_most("completeness", complete, tol.frame),
        ])
    }));
    let space = field_space(cfg)?;
    let rotations = cfg.identity_samples.min(10);
    out.reports.push(check(
        "mode_representation",
        json!({ "modes": space.dim(), "rotations": rotations }),
        cfg.seed,
        || {
            let mut rng = stream(cfg, 2);
            let id = CMat::identity(space.dim(), space.dim());
            let (mut law, mut unit) = (0.0_f64, 0.0_f64);
            for _ in 0..rotations {
                let (r1, r2) = (Rotation::random(&mut rng), Rotation::random(&mut rng));
                let u1 = space.rotation_matrix(&r1)?;
                let u12 = space.rotation_matrix(&(r1 * r2))?;
                law = law.max(max_abs(&(&u1 * space.rotation_matrix(&r2)? - u12)));
                unit = unit.max(max_abs(&(&u1 * u1.adjoint() - &id)));
            }
            Ok(vec![
                Measurement::at_most("group_law", law, tol.rotation_rep),
                Measurement::at_most("unitarity", unit, tol.rotation_rep),
            ])
        },
    ));
    out.reports.push(check(
        "kappa_transformation",
        json!({ "samples": samples, "lambda": cfg.lambda }),
        cfg.seed,
        || {
            let mut rng = stream(cfg, 3);
            let mut worst = 0.0_f64;
            for _ in 0..samples {
                let r = Rotation::random(&mut rng);
                let x = random_momentum(&mut rng) * 3.0;
                let p = MomentumPoint::new(random_momentum(&mut rng) * cfg.lambda, rng.random_range(0..2))?;
                let (rx, rinv) = (r.apply(&x), r.inverse());
                for l in 1..=3 {
                    let lhs = act_h(&r, &kappa(l, x, cfg.lambda)?)(&p);
                    let mut rhs = c(0.0);
                    for m in 1..=3 {
                        rhs += kappa(m, rx, cfg.lambda)?(&p) * rinv.matrix()[(l - 1, m - 1)];
                    }
                    worst = worst.max((lhs - rhs).norm());
                }
            }
            Ok(vec![Measurement::at_most("residual", worst, tol.kappa)])
        },
    ));
    Ok(())
}

fn fock_suite(cfg: &Config, out: &mut RunOutput) -> Result<()> {
    let tol = cfg.tolerances.fock_algebra;
    let space = field_space(cfg)?;
    let basis = FockBasis::new(&space, cfg.n_max, Some(cfg.e_max))?;
    let params = json!({ "modes": space.dim(), "n_max": cfg.n_max, "e_max": cfg.e_max, "dim": basis.dim() });
    let d = space.dim();
    out.reports.push(check("fock_adjoint_and_ccr", params.clone(), cfg.seed, || {
        let mut rng = stream(cfg, 10);
        let (f, g) = (random_vector(d, &mut rng), random_vector(d, &mut rng));
        let (af, ag) = (annihilate(&f, &basis)?, create(&g, &basis)?);
        let adjoint = max_abs(&(af.matrix() - create(&f, &basis)?.matrix().adjoint()));
        let comm = af.matrix() * ag.matrix() - ag.matrix() * af.matrix();
        let ip = f.dotc(&g);
        let mut ccr = 0.0_f64;
        for col in (0..basis.dim()).filter(|&i| basis.is_safe(i, 1)) {
            for row in 0..basis.dim() {
                let expected = if row == col { ip } else { c(0.0) };
                ccr = ccr.max((comm[(row, col)] - expected).norm());
            }
        }
        Ok(vec![
            Measurement::equals("adjointness", adjoint, 0.0),
            Measurement::at_most("ccr_safe_sectors", ccr, tol),
        ])
    }));
    out.reports.push(check("second_quantized_rotations", params.clone(), cfg.seed, || {
        let mut rng = stream(cfg, 11);
        let id = CMat::identity(basis.dim(), basis.dim());
        let h = hf(&basis);
        let (mut law, mut unit, mut energy, mut cov) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..3 {
            let (r1, r2) = (Rotation::random(&mut rng), Rotation::random(&mut rng));
            let u1 = u_fock(&r1, &space, &basis)?;
            let u12 = u_fock(&(r1 * r2), &space, &basis)?;
            law = law.max(max_abs(&(u1.matrix() * u_fock(&r2, &space, &basis)?.matrix() - u12.matrix())));
            unit = unit.max(max_abs(&(u1.matrix() * u1.matrix().adjoint() - &id)));
            energy = energy.max(max_abs(&(u1.matrix() * h.matrix() * u1.matrix().adjoint() - h.matrix())));
            let f = random_vector(d, &mut rng);
            let lhs = u1.matrix() * create(&f, &basis)?.matrix() * u1.matrix().adjoint();
            let rhs = create(&(space.rotation_matrix(&r1)? * &f), &basis)?;
            cov = cov.max(max_abs(&(lhs - rhs.matrix())));
        }
        Ok(vec![
            Measurement::at_most("functoriality", law, tol),
            Measurement::at_most("unitarity", unit, tol),
            Measurement::at_most("free_energy_invariance", energy, tol),
            Measurement::at_most("creation_covariance", cov, tol),
        ])
    }));
    out.reports.push(check("free_field_exponential", params.clone(), cfg.seed, || {
        let h = hf(&basis);
        let omega = CMat::from_diagonal(&CVec::from_iterator(d, space.frequencies().into_iter().map(c)));
        let generator = max_abs(&(dgamma(&omega, &basis)?.into_matrix() - h.matrix()));
        let mut expo = 0.0_f64;
        for t in [0.3, 1.0, 2.5] {
            let lhs = unitary_exp(h.matrix(), t);
            let rhs = gamma(&unitary_exp(&omega, t), &basis)?;
            expo = expo.max(max_abs(&(lhs - rhs.matrix())));
        }
        Ok(vec![
            Measurement::at_most("dgamma_of_frequencies", generator, tol),
            Measurement::at_most("exponential_identity", expo, tol),
        ])
    }));
    // Γ of a general matrix needs a space without an energy cap.
    let small = FockBasis::from_frequencies(vec![0.2; d.min(6)], cfg.n_max, None)?;
    out.reports.push(check(
        "gamma_general",
        json!({ "modes": small.modes(), "n_max": cfg.n_max, "dim": small.dim() }),
        cfg.seed,
        || {
            let mut rng = stream(cfg, 12);
            let k = small.modes();
            let (a, b) = (random_matrix(k, &mut rng), random_matrix(k, &mut rng));
            let lhs = gamma(&a, &small)?.into_matrix() * gamma(&b, &small)?.into_matrix();
            let functorial = max_abs(&(lhs - gamma(&(&a * &b), &small)?.matrix()));
            let u = unitary_exp(&(&a + a.adjoint()), 0.7);
            let gu = gamma(&u, &small)?;
            let unit = max_abs(&(gu.matrix() * gu.matrix().adjoint() - CMat::identity(small.dim(), small.dim())));
            Ok(vec![
                Measurement::at_most("functoriality", functorial, tol),
                Measurement::at_most("unitarity", unit, tol),
            ])
        },
    ));
    Ok(())
}

/// Radial profile with a closed-form norm, `w₀₁(k) = cos(4|k|)`.
const SMOOTH_FREQUENCY: f64 = 4.0;

fn smooth_norm() -> f64 {
    let b = SMOOTH_FREQUENCY;
    (8.0 * PI * (0.5 + (2.0 * b).sin() / (4.0 * b))).sqrt()
}

fn kernel_suite(cfg: &Config, out: &mut RunOutput) -> Result<()> {
    let tol = &cfg.tolerances;
    norm_quadrature(cfg, out)?;

    let space = field_space(cfg)?;
    let basis = FockBasis::new(&space, cfg.n_max, Some(cfg.e_max))?;
    let draw = |i: usize, rng: &mut ChaCha8Rng| {
        let (m, n) = cfg.index_set[i % cfg.index_set.len()];
        let style = if (i / cfg.index_set.len()).is_multiple_of(2) {
            MomentumStyle::Polynomial
        } else {
            MomentumStyle::PlaneWave
        };
        random_kernel(m, n, style, rng)
    };

    let mut table = Table::new("assembly", &["sample", "m", "n", "discrepancy"]);
    out.reports.push(check(
        "assembly_cross_check",
        json!({ "samples": cfg.assembly_samples, "fock_dim": basis.dim(), "index_set": cfg.index_set }),
        cfg.seed,
        || {
            let mut rng = stream(cfg, 20);
            let mut worst = 0.0_f64;
            for i in 0..cfg.assembly_samples {
                let w = draw(i, &mut rng);
                let src = DiscretizedKernel::new(&w, &space);
                let gap = max_abs(&(assemble_form(&src, &basis)?.into_matrix() - assemble_ops(&src, &basis)?.into_matrix()));
                table.push(vec![i as f64, w.m as f64, w.n as f64, gap]);
                worst = worst.max(gap);
            }
            Ok(vec![
                Measurement::at_most("max_discrepancy", worst, tol.assembly),
                Measurement::at_most("fock_dim", basis.dim() as f64, 2000.0),
            ])
        },
    ));
    out.tables.push(table);

    let rgrid = RGrid::for_basis(cfg.rgrid_size, &basis)?;
    let mut table = Table::new("norm_bound", &["sample", "m", "n", "op_norm", "kernel_norm"]);
    out.reports.push(check(
        "norm_bound",
        json!({ "samples": cfg.norm_samples, "fock_dim": basis.dim(), "rgrid_points": rgrid.len() }),
        cfg.seed,
        || {
            let mut rng = stream(cfg, 21);
            let (mut violations, mut excess) = (0usize, f64::NEG_INFINITY);
            for i in 0..cfg.norm_samples {
                let w = draw(i, &mut rng);
                let op = op_norm(assemble_form(&DiscretizedKernel::new(&w, &space), &basis)?.matrix());
                let bound = wmn_norm(&w, space.grid(), &rgrid)?;
                table.push(vec![i as f64, w.m as f64, w.n as f64, op, bound]);
                if op > bound + tol.norm_bound {
                    violations += 1;
                }
                excess = excess.max(op - bound);
            }
            Ok(vec![
                Measurement::equals("violations", violations as f64, 0.0),
                Measurement::at_most("max_excess", excess, tol.norm_bound),
            ])
        },
    ));
    out.tables.push(table);
    Ok(())
}

/// Observed order `log₂(e_N / e_{2N})`, or `None` when both errors sit at
/// the round-off floor.
pub fn observed_order(coarse: f64, fine: f64, floor: f64) -> Option<f64> {
    (coarse > floor).then(|| (coarse / fine.max(floor)).log2())
}

fn norm_quadrature(cfg: &Config, out: &mut RunOutput) -> Result<()> {
    let tol = &cfg.tolerances;
    let rgrid = RGrid::uniform(cfg.rgrid_size)?;
    let indicator = apply_support(&KernelFunction::new(0, 1, |_, _, _| c(1.0)));
    let smooth = apply_support(&KernelFunction::new(0, 1, |_, _, a| c((SMOOTH_FREQUENCY * a[0].norm()).cos())));
    let exact = [(8.0 * PI).sqrt(), smooth_norm()];
    let levels: Vec<usize> = (0..3).map(|i| cfg.radial_nodes << i).collect();
    let mut table = Table::new("norm_quadrature", &["radial_nodes", "indicator_error", "smooth_error"]);
    let report = check(
        "norm_quadrature",
        json!({ "radial_nodes": levels, "angular_degree": cfg.angular_degree, "smooth_frequency": SMOOTH_FREQUENCY }),
        cfg.seed,
        || {
            let mut errors = Vec::new();
            for &nr in &levels {
                let grid = crate::transversal::MomentumGrid::new(nr, cfg.angular_degree)?;
                let e = [
                    (wmn_norm(&indicator, &grid, &rgrid)? - exact[0]).abs(),
                    (wmn_norm(&smooth, &grid, &rgrid)? - exact[1]).abs(),
                ];
                table.push(vec![nr as f64, e[0], e[1]]);
                errors.push(e);
            }
            let mut m = vec![Measurement::at_most("indicator_error_default_grid", errors[0][0], tol.norm_quadrature)];
            for (kind, label) in ["indicator", "smooth"].iter().enumerate() {
                for (i, pair) in errors.windows(2).enumerate() {
                    let declared = (2 * levels[i] - 1) as f64;
                    match observed_order(pair[0][kind], pair[1][kind], tol.quadrature_floor) {
                        Some(p) => m.push(Measurement::at_least(&format!("{label}_order_{}", levels[i]), p, declared)),
                        None => m.push(Measurement::at_most(
                            &format!("{label}_error_{}", levels[i + 1]),
                            pair[1][kind],
                            tol.quadrature_floor,
                        )),
                    }
                }
            }
            Ok(m)
        },
    );
    out.reports.push(report);
    out.tables.push(table);
    Ok(())
}

fn vanishing_suite(cfg: &Config, out: &mut RunOutput) -> Result<()> {
    let tol = &cfg.tolerances;
    let (space, basis) = cfg.field(cfg.pipeline_n_max).build()?;
    let mut table = Table::new("haar_shrink", &["seed", "order", "probe_q", "probe_2q", "shrink"]);
    for s in 0..cfg.vanishing_seeds as u64 {
        let vcfg = VanishingConfig {
            haar_order: cfg.haar_order,
            eps: cfg.pairing_eps.clone(),
            rgrid_points: cfg.rgrid_size,
            seed: cfg.seed.wrapping_add(s),
            ..VanishingConfig::default()
        };
        let params = json!({ "sample": s, "haar_order": cfg.haar_order, "fock_dim": basis.dim(), "eps": cfg.pairing_eps });
        out.reports.push(check("vanishing", params, cfg.seed, || {
            let mut rng = stream(cfg, 1000 + s);
            let seq = KernelSequence::new(cfg.xi)?
                .with(random_kernel(0, 1, MomentumStyle::PlaneWave, &mut rng))
                .with(random_kernel(1, 0, MomentumStyle::PlaneWave, &mut rng))
                .with(random_kernel(1, 1, MomentumStyle::Polynomial, &mut rng));
            let rep = vanishing_report(&seq, &space, &basis, &vcfg)?;
            table.push(vec![
                s as f64,
                cfg.haar_order as f64,
                rep.quadrature_q.marginal(),
                rep.quadrature_2q.marginal(),
                rep.shrink,
            ]);
            Ok(vec![
                Measurement::at_most("exact_coefficients", rep.exact_coefficients, tol.exact_coefficients),
                Measurement::at_most("exact_marginal_norm", rep.exact.marginal(), tol.averaged_probe),
                Measurement::at_most("exact_vacuum_block", rep.exact.vacuum_block, tol.averaged_probe),
                Measurement::at_most("exact_max_probe", rep.exact.max_probe(), tol.averaged_probe),
                Measurement::at_least("quadrature_shrink", rep.shrink, tol.design_shrink),
                Measurement::above("control_marginal_norm", rep.control.marginal(), tol.control_probe),
                Measurement::above("control_vacuum_block", rep.control.vacuum_block, tol.control_probe),
                Measurement::above("averaged_w11", rep.averaged_w11.unwrap_or(0.0), 0.0),
            ])
        }));
    }
    out.tables.push(table);

    let mut table = Table::new("pairing", &["eps", "radius", "term45_error", "term456", "term4567"]);
    out.reports.push(check("proof_pairing", json!({ "eps": cfg.pairing_eps }), cfg.seed, || {
        let mut rng = stream(cfg, 40);
        let seq = KernelSequence::new(cfg.xi)?
            .with(random_kernel(0, 1, MomentumStyle::Polynomial, &mut rng))
            .with(random_kernel(1, 2, MomentumStyle::Polynomial, &mut rng));
        let rot = Rotation::random(&mut rng);
        let x = Vector3::from(VanishingConfig::default().x);
        let h = test_function();
        let rules = PairingRules::default();
        let terms: Vec<PairingTerms> = cfg
            .pairing_eps
            .iter()
            .map(|&e| proof_pairing(e, &x, &rot, &h, &seq, &rules))
            .collect::<Result<_>>()?;
        let err45 = |t: &PairingTerms| (t.scaled45() - t.limit).norm();
        let mut bad = [0usize; 3];
        for w in terms.windows(2) {
            bad[0] += usize::from(err45(&w[1]) >= err45(&w[0]));
            bad[1] += usize::from(w[1].term456.norm() >= w[0].term456.norm());
            bad[2] += usize::from(w[1].term4567.norm() >= w[0].term4567.norm());
        }
        for t in &terms {
            table.push(vec![t.eps, t.radius, err45(t), t.term456.norm(), t.term4567.norm()]);
        }
        let warned = terms.iter().filter(|t| t.resolution_warning).count();
        Ok(vec![
            Measurement::equals("term45_error_increases", bad[0] as f64, 0.0),
            Measurement::equals("term456_increases", bad[1] as f64, 0.0),
            Measurement::equals("term4567_increases", bad[2] as f64, 0.0),
            Measurement::equals("resolution_warnings", warned as f64, 0.0),
        ])
    }));
    out.tables.push(table);
    Ok(())
}

fn diagonal(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(values.len(), values.iter().map(|v| c(*v))))
}

fn feshbach_suite(cfg: &Config, out: &mut RunOutput) {
    let tol = &cfg.tolerances;
    out.reports.push(check("feshbach_two_by_two", json!({ "coupling": 0.3 }), cfg.seed, || {
        let g = 0.3;
        let h = CMat::from_row_slice(2, 2, &[c(0.0), c(g), c(g), c(1.0)]);
        let t = diagonal(&[0.0, 1.0]);
        let chi = ChiPair {
            chi: diagonal(&[1.0, 0.0]),
            chi_bar: diagonal(&[0.0, 1.0]),
        };
        let mut zeros = singular_points(&h, &t, &chi, (-2.0, 0.99), 400, DEFAULT_SIGMA_MIN)?;
        zeros.extend(singular_points(&h, &t, &chi, (1.01, 3.0), 400, DEFAULT_SIGMA_MIN)?);
        let closed = [0.5 - (0.25 + g * g).sqrt(), 0.5 + (0.25 + g * g).sqrt()];
        let eig = hermitian_eigenvalues(&h);
        let mut gap = 0.0_f64;
        for ((z, e), cl) in zeros.iter().zip(&eig).zip(closed) {
            gap = gap.max((z - e).abs()).max((z - cl).abs());
        }
        Ok(vec![
            Measurement::equals("zero_count", zeros.len() as f64, 2.0),
            Measurement::at_most("zero_vs_eigenvalue", gap, tol.feshbach_closed_form),
        ])
    }));
    out.reports.push(check("feshbach_isospectral", json!({ "dim": 20, "window": [-0.4, 0.6] }), cfg.seed, || {
        let mut rng = stream(cfg, 50);
        let n = 20;
        let diag: Vec<f64> = (0..n)
            .map(|i| if i < 3 { 0.1 * i as f64 } else { 1.0 + 0.1 * i as f64 })
            .collect();
        let t = diagonal(&diag);
        let v = random_matrix(n, &mut rng);
        let h = &t + (&v + v.adjoint()) * c(0.025);
        let low: Vec<f64> = diag.iter().map(|d| if *d < 0.5 { 1.0 } else { 0.0 }).collect();
        let chi = ChiPair {
            chi: diagonal(&low),
            chi_bar: diagonal(&low.iter().map(|x| 1.0 - x).collect::<Vec<_>>()),
        };
        let window = (-0.4, 0.6);
        let zeros = singular_points(&h, &t, &chi, window, 2000, DEFAULT_SIGMA_MIN)?;
        let eig: Vec<f64> = hermitian_eigenvalues(&h)
            .into_iter()
            .filter(|e| *e > window.0 && *e < window.1)
            .collect();
        let mut gap = if zeros.len() == eig.len() { 0.0_f64 } else { f64::INFINITY };
        let mut sigma = 0.0_f64;
        for (z, e) in zeros.iter().zip(&eig) {
            gap = gap.max((z - e).abs());
            sigma = sigma.max(min_singular_value(&compressed_feshbach(&h, &t, &chi, *z, DEFAULT_SIGMA_MIN)?));
        }
        Ok(vec![
            Measurement::equals("eigenvalues_in_window", eig.len() as f64, zeros.len() as f64),
            Measurement::at_most("zero_vs_eigenvalue", gap, tol.isospectral),
            Measurement::at_most("sigma_min_at_zeros", sigma, tol.isospectral),
        ])
    }));
    out.reports.push(check("feshbach_zero_coupling", json!({ "dim": 5 }), cfg.seed, || {
        let t = diagonal(&(0..5).map(|i| 0.3 * i as f64 + 0.1).collect::<Vec<_>>());
        let chi = cutoff_of(&(&t - CMat::identity(5, 5) * c(0.1)), &cfg.eta);
        let pair = check_pair(&t, &t, &chi, DEFAULT_SIGMA_MIN)?;
        let f = feshbach_map(&pair)?;
        Ok(vec![
            Measurement::equals("pair_valid", f64::from(u8::from(pair.report.valid)), 1.0),
            Measurement::equals("max_deviation", max_abs(&(f - &t)), 0.0),
        ])
    }));
    out.reports.push(check("cutoff_algebra", json!({ "a": cfg.eta.a, "b": cfg.eta.b }), cfg.seed, || {
        let (_, basis) = cfg.field(cfg.pipeline_n_max).build()?;
        let atom = toy_atom(&[(0, 0.0), (1, 1.0)], 0.5)?;
        let chi = make_chi(&atom.p_at, &cfg.eta, &basis);
        Ok(vec![Measurement::at_most("residual", chi.algebra_residual(), tol.feshbach_closed_form)])
    }));
}

fn pipeline_measurements(rep: &PipelineReport, cfg: &Config, reduced: bool) -> Vec<Measurement> {
    let tol = &cfg.tolerances;
    let mut m = vec![
        Measurement::equals("pair_valid", f64::from(u8::from(rep.pair.valid)), 1.0),
        Measurement::at_most("vacuum_block", rep.vacuum_block, tol.pipeline_probe),
        Measurement::at_most("pairing_spread", rep.pairing_spread, tol.pipeline_probe),
        Measurement::at_most("feshbach_commutator", rep.commutator, tol.pipeline_probe),
    ];
    if reduced {
        m.push(Measurement::at_most("reduced_commutator", rep.reduced_commutator, tol.reduced_commutator));
    }
    m
}

fn pipeline_suite(cfg: &Config, out: &mut RunOutput) -> Result<()> {
    let tol = &cfg.tolerances;
    let atom_cfg = AtomPipelineConfig {
        field: cfg.field(cfg.pipeline_n_max),
        eta: cfg.eta,
        rotations: cfg.pipeline_rotations,
        seed: cfg.seed,
        ..AtomPipelineConfig::default()
    };
    let field_cfg = FieldPipelineConfig {
        field: cfg.field(cfg.pipeline_n_max),
        eta: cfg.eta,
        rotations: cfg.pipeline_rotations,
        seed: cfg.seed,
        ..FieldPipelineConfig::default()
    };
    let mut table = Table::new(
        "pipeline",
        &["model", "averaged", "vacuum_block", "pairing_spread", "commutator", "reduced_commutator"],
    );
    let mut row = |model: f64, rep: &PipelineReport| {
        table.push(vec![
            model,
            f64::from(u8::from(rep.averaged)),
            rep.vacuum_block,
            rep.pairing_spread,
            rep.commutator,
            rep.reduced_commutator,
        ])
    };
    let params = serde_json::to_value(&atom_cfg)?;
    out.reports.push(check("pipeline_atom", params.clone(), cfg.seed, || {
        let (rep, _) = pipeline_corollary_a(&atom_cfg)?;
        row(0.0, &rep);
        Ok(pipeline_measurements(&rep, cfg, true))
    }));
    out.reports.push(check("pipeline_atom_control", params.clone(), cfg.seed, || {
        let (rep, _) = pipeline_corollary_a(&AtomPipelineConfig {
            averaged: false,
            ..atom_cfg.clone()
        })?;
        row(0.0, &rep);
        Ok(vec![Measurement::above("vacuum_block", rep.vacuum_block, tol.control_probe)])
    }));
    out.reports.push(check("pipeline_atom_zero_coupling", params, cfg.seed, || {
        Ok(vec![Measurement::equals("max_deviation", zero_coupling_residual(&atom_cfg)?, 0.0)])
    }));
    let params = serde_json::to_value(&field_cfg)?;
    out.reports.push(check("pipeline_field", params.clone(), cfg.seed, || {
        let (rep, _) = pipeline_corollary_b(&field_cfg)?;
        row(1.0, &rep);
        Ok(pipeline_measurements(&rep, cfg, false))
    }));
    out.reports.push(check("pipeline_field_control", params, cfg.seed, || {
        let (rep, _) = pipeline_corollary_b(&FieldPipelineConfig {
            averaged: false,
            ..field_cfg.clone()
        })?;
        row(1.0, &rep);
        Ok(vec![Measurement::above("vacuum_block", rep.vacuum_block, tol.control_probe)])
    }));
    out.tables.push(table);
    Ok(())
}
