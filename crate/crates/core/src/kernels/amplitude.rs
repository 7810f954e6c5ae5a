//! Discretized kernels and the two assembly routes for `H_{m,n}[w]`.

use std::collections::HashMap;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{decode_tuple, in_support, tuple_chunks, wmn_norm, KernelFunction, KernelSequence, RGrid};
use crate::error::{Error, Result};
use crate::fock::{
    distinct_orderings, occupation, ordering_count, state_energy, with_mode,
    without_mode, FockBasis, FockOperator,
};
use crate::linalg::{op_norm, CMat, C64};
use crate::transversal::{ModeSpace, MomentumPoint};

/// `A(r)[α̃₁..α̃_m; β₁..β_n] = ∫ Π conj(e_α̃)|k̃|^{-1/2} w(r; K̃, K) Π e_β |k|^{-1/2}`,
/// stored row-major with slot 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTensor {
    pub m: usize,
    pub n: usize,
    pub dim: usize,
    pub r: f64,
    data: Vec<C64>,
}

impl AmplitudeTensor {
    pub fn from_data(m: usize, n: usize, dim: usize, r: f64, data: Vec<C64>) -> Result<Self> {
        let expected = dim.pow((m + n) as u32);
        if data.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { m, n, dim, r, data })
    }

    pub fn zeros(m: usize, n: usize, dim: usize, r: f64) -> Self {
        Self {
            m,
            n,
            dim,
            r,
            data: vec![C64::new(0.0, 0.0); dim.pow((m + n) as u32)],
        }
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn index(&self, created: &[usize], annihilated: &[usize]) -> usize {
        created
            .iter()
            .chain(annihilated)
            .fold(0, |acc, &a| acc * self.dim + a)
    }

    #[inline]
    pub fn get(&self, created: &[usize], annihilated: &[usize]) -> C64 {
        self.data[self.index(created, annihilated)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == C64::new(0.0, 0.0))
    }
}

/// Anything that yields amplitude tensors at a spectral value `r`.
pub trait KernelSource: Send + Sync {
    fn orders(&self) -> (usize, usize);
    fn dim(&self) -> usize;
    fn amplitudes(&self, r: f64) -> Result<AmplitudeTensor>;
}

/// A closure kernel paired with the mode space it is discretized against.
#[derive(Clone, Debug)]
pub struct DiscretizedKernel {
    pub kernel: KernelFunction,
    pub space: ModeSpace,
}

impl DiscretizedKernel {
    pub fn new(kernel: &KernelFunction, space: &ModeSpace) -> Self {
        Self {
            kernel: kernel.clone(),
            space: space.clone(),
        }
    }
}

impl KernelSource for DiscretizedKernel {
    fn orders(&self) -> (usize, usize) {
        self.kernel.orders()
    }

    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn amplitudes(&self, r: f64) -> Result<AmplitudeTensor> {
        discretize(&self.kernel, &self.space, r)
    }
}

/// Sparse rows of the slot matrices: for each node `q` the pairs
/// `(α, W_q |k_q|^{-1/2} S[q, α])`, conjugated on creation slots.
fn slot_rows(space: &ModeSpace, conjugate: bool) -> Vec<Vec<(usize, C64)>> {
    let grid = space.grid();
    let s = space.synthesis_matrix();
    grid.points()
        .iter()
        .zip(grid.weights())
        .enumerate()
        .map(|(q, (p, w))| {
            let fac = w / p.norm().sqrt();
            (0..space.dim())
                .filter_map(|a| {
                    let v = s[(q, a)];
                    (v != C64::new(0.0, 0.0)).then(|| (a, if conjugate { v.conj() } else { v } * fac))
                })
                .collect()
        })
        .collect()
}

/// Evaluates `w(r; ·)` on every node tuple and contracts each slot with the
/// mode basis.
pub fn discretize(w: &KernelFunction, space: &ModeSpace, r: f64) -> Result<AmplitudeTensor> {
    let (m, n) = w.orders();
    let slots = m + n;
    let pts = space.grid().points();
    let np = pts.len();
    let d = space.dim();
    let (chunks, per_chunk) = tuple_chunks(np, slots);
    let mut nodes = vec![C64::new(0.0, 0.0); chunks * per_chunk];
    nodes
        .par_chunks_mut(per_chunk)
        .enumerate()
        .for_each(|(chunk, out)| {
            let mut idx = vec![0usize; slots];
            let mut buf: Vec<MomentumPoint> = vec![pts[0]; slots];
            for (off, slot) in out.iter_mut().enumerate() {
                decode_tuple(chunk * per_chunk + off, np, &mut idx);
                for (b, &q) in buf.iter_mut().zip(&idx) {
                    *b = pts[q];
                }
                let (cre, ann) = buf.split_at(m);
                if w.supported && !in_support(r, cre, ann) {
                    continue;
                }
                *slot = w.eval(r, cre, ann);
            }
        });
    if let Some(bad) = nodes.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite(format!("kernel value {bad} at r = {r}")));
    }

    let cre_rows = slot_rows(space, true);
    let ann_rows = slot_rows(space, false);
    let mut dims = vec![np; slots];
    let mut tensor = nodes;
    for slot in 0..slots {
        let rows = if slot < m { &cre_rows } else { &ann_rows };
        let pre: usize = dims[..slot].iter().product();
        let post: usize = dims[slot + 1..].iter().product();
        let mut next = vec![C64::new(0.0, 0.0); pre * d * post];
        next.par_chunks_mut(d * post)
            .enumerate()
            .for_each(|(a, out)| {
                for (q, row) in rows.iter().enumerate() {
                    let src = &tensor[(a * np + q) * post..(a * np + q + 1) * post];
                    for &(alpha, v) in row {
                        let dst = &mut out[alpha * post..(alpha + 1) * post];
                        for (o, s) in dst.iter_mut().zip(src) {
                            *o += v * s;
                        }
                    }
                }
            });
        dims[slot] = d;
        tensor = next;
    }
    AmplitudeTensor::from_data(m, n, d, r, tensor)
}

/// Amplitudes at every spectator energy the assembly can reach: energies of
/// basis states with at most `N_max − max(m, n)` particles.
fn spectator_table(src: &dyn KernelSource, basis: &FockBasis) -> Result<HashMap<u64, AmplitudeTensor>> {
    let (m, n) = src.orders();
    let Some(limit) = basis.n_max().checked_sub(m.max(n)) else {
        return Ok(HashMap::new());
    };
    let energies: Vec<f64> = basis
        .states()
        .iter()
        .zip(basis.energies())
        .filter(|(s, _)| s.len() <= limit)
        .map(|(_, e)| *e)
        .sorted_by(|a, b| a.total_cmp(b))
        .dedup_by(|a, b| a.to_bits() == b.to_bits())
        .collect();
    let tensors: Vec<Result<AmplitudeTensor>> = energies.par_iter().map(|&e| src.amplitudes(e)).collect();
    energies
        .iter()
        .zip(tensors)
        .map(|(e, t)| t.map(|t| (e.to_bits(), t)))
        .collect()
}

fn check_dims(src: &dyn KernelSource, basis: &FockBasis) -> Result<()> {
    if src.dim() != basis.modes() {
        return Err(Error::Dimension {
            expected: basis.modes(),
            got: src.dim(),
        });
    }
    Ok(())
}

fn lookup(table: &HashMap<u64, AmplitudeTensor>, e: f64) -> Result<&AmplitudeTensor> {
    table
        .get(&e.to_bits())
        .ok_or_else(|| Error::Domain(format!("no amplitudes tabulated at spectator energy {e}")))
}

fn factorial_ratio(a: usize, b: usize) -> f64 {
    ((b + 1)..=a).map(|k| k as f64).product()
}

/// Multiset difference of sorted slices; `sub` must be contained in `full`.
fn multiset_minus(full: &[usize], sub: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(full.len() - sub.len());
    let mut j = 0;
    for &x in full {
        if j < sub.len() && sub[j] == x {
            j += 1;
        } else {
            out.push(x);
        }
    }
    out
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().merge(b.iter().copied()).collect()
}

fn collect_columns(dim: usize, columns: Vec<Result<Vec<(usize, C64)>>>) -> Result<FockOperator> {
    let mut mat = CMat::zeros(dim, dim);
    for (col, entries) in columns.into_iter().enumerate() {
        for (row, v) in entries? {
            mat[(row, col)] += v;
        }
    }
    Ok(FockOperator::new(mat))
}

/// Matrix of `H_{m,n}` from the quadratic form: for each column `Q`, each
/// spectator sub-multiset `G ⊆ Q` of size `l = q − n`, and each created
/// multiset `Ã`, the element at `P = G ∪ Ã` is
/// `√(q!/l!) √(p!/l!) · ord(G) / (c_P c_Q) · Σ_{orderings} A(E_G)[ã; b]`.
pub fn assemble_form(src: &dyn KernelSource, basis: &FockBasis) -> Result<FockOperator> {
    check_dims(src, basis)?;
    let (m, n) = src.orders();
    let table = spectator_table(src, basis)?;
    let created: Vec<(Vec<usize>, Vec<Vec<usize>>)> = (0..basis.modes())
        .combinations_with_replacement(m)
        .map(|a| {
            let orders = distinct_orderings(&a);
            (a, orders)
        })
        .collect();
    let freqs = basis.frequencies();
    let columns: Vec<Result<Vec<(usize, C64)>>> = (0..basis.dim())
        .into_par_iter()
        .map(|col| {
            let q_state = basis.state(col);
            let q = q_state.len();
            let mut out = Vec::new();
            if q < n || q - n + m > basis.n_max() {
                return Ok(out);
            }
            let l = q - n;
            let p = l + m;
            let ord_q = ordering_count(q_state);
            let mut subs: Vec<Vec<usize>> = q_state.iter().copied().combinations(l).collect();
            subs.sort();
            subs.dedup();
            for g in subs {
                let rest = multiset_minus(q_state, &g);
                let b_orders = distinct_orderings(&rest);
                let amp = lookup(&table, state_energy(freqs, &g))?;
                let ladder = (factorial_ratio(q, l) * factorial_ratio(p, l)).sqrt();
                let ord_g = ordering_count(&g);
                for (a_set, a_orders) in &created {
                    let p_state = merge_sorted(&g, a_set);
                    let Some(row) = basis.index_of(&p_state) else {
                        continue;
                    };
                    let mut s = C64::new(0.0, 0.0);
                    for a in a_orders {
                        for b in &b_orders {
                            s += amp.get(a, b);
                        }
                    }
                    // c_P c_Q as one square root keeps ord(G) / (c_P c_Q) exact when P = Q
                    let norm = (ordering_count(&p_state) * ord_q).sqrt();
                    out.push((row, s * (ladder * ord_g / norm)));
                }
            }
            Ok(out)
        })
        .collect();
    collect_columns(basis.dim(), columns)
}

/// Matrix of `Σ a*_{ã₁}⋯a*_{ã_m} A(H_f)[ã; b] a_{b₁}⋯a_{b_n}`, applying the
/// ladder operators one at a time to each basis state.
pub fn assemble_ops(src: &dyn KernelSource, basis: &FockBasis) -> Result<FockOperator> {
    check_dims(src, basis)?;
    let (m, n) = src.orders();
    let table = spectator_table(src, basis)?;
    let d = basis.modes();
    let created: Vec<Vec<usize>> = (0..m).map(|_| 0..d).multi_cartesian_product().collect();
    let created = if m == 0 { vec![Vec::new()] } else { created };
    let freqs = basis.frequencies();
    let columns: Vec<Result<Vec<(usize, C64)>>> = (0..basis.dim())
        .into_par_iter()
        .map(|col| {
            let q_state = basis.state(col);
            let mut out = Vec::new();
            if q_state.len() < n || q_state.len() - n + m > basis.n_max() {
                return Ok(out);
            }
            let mut subs: Vec<Vec<usize>> = q_state.iter().copied().combinations(n).collect();
            subs.sort();
            subs.dedup();
            let annihilated: Vec<Vec<usize>> = subs.iter().flat_map(|s| distinct_orderings(s)).collect();
            for b in &annihilated {
                let mut state = q_state.to_vec();
                let mut coef = 1.0;
                for &beta in b.iter().rev() {
                    coef *= (occupation(&state, beta) as f64).sqrt();
                    state = without_mode(&state, beta).expect("sub-multiset");
                }
                let amp = lookup(&table, state_energy(freqs, &state))?;
                for a in &created {
                    let v = amp.get(a, b);
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut target = state.clone();
                    let mut c2 = coef;
                    for &alpha in a.iter().rev() {
                        c2 *= (occupation(&target, alpha) as f64 + 1.0).sqrt();
                        target = with_mode(&target, alpha);
                    }
                    if let Some(row) = basis.index_of(&target) {
                        out.push((row, v * c2));
                    }
                }
            }
            Ok(out)
        })
        .collect();
    collect_columns(basis.dim(), columns)
}

/// `Σ H_{m,n}` over the given sources; the empty sum is the zero operator.
pub fn assemble_sources(sources: &[&dyn KernelSource], basis: &FockBasis) -> Result<FockOperator> {
    let mut total = CMat::zeros(basis.dim(), basis.dim());
    for src in sources {
        total += assemble_form(*src, basis)?.into_matrix();
    }
    Ok(FockOperator::new(total))
}

/// `H[w̲] = Σ H_{m,n}[w_{m,n}]` for a closure-backed sequence.
pub fn assemble_sum(seq: &KernelSequence, space: &ModeSpace, basis: &FockBasis) -> Result<FockOperator> {
    let sources: Vec<DiscretizedKernel> = seq.iter().map(|w| DiscretizedKernel::new(w, space)).collect();
    let refs: Vec<&dyn KernelSource> = sources.iter().map(|s| s as &dyn KernelSource).collect();
    assemble_sources(&refs, basis)
}

/// Assembles a single closure kernel by the form route.
pub fn assemble_kernel(w: &KernelFunction, space: &ModeSpace, basis: &FockBasis) -> Result<FockOperator> {
    assemble_form(&DiscretizedKernel::new(w, space), basis)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBoundReport {
    pub m: usize,
    pub n: usize,
    pub op_norm: f64,
    pub kernel_norm: f64,
    pub pass: bool,
}

/// Compares the largest singular value of the assembled operator with the
/// discrete kernel norm.
pub fn norm_bound_report(
    w: &KernelFunction,
    space: &ModeSpace,
    basis: &FockBasis,
    rgrid: &RGrid,
) -> Result<NormBoundReport> {
    let op = assemble_form(&DiscretizedKernel::new(w, space), basis)?;
    let op_norm = op_norm(op.matrix());
    let kernel_norm = wmn_norm(w, space.grid(), rgrid)?;
    Ok(NormBoundReport {
        m: w.m,
        n: w.n,
        op_norm,
        kernel_norm,
        pass: op_norm <= kernel_norm + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilate, create, hf};
    use crate::kernels::{apply_support, random_kernel, MomentumStyle};
    use crate::linalg::{c, max_abs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup(n_max: usize) -> (ModeSpace, FockBasis) {
        let space = ModeSpace::coefficient(1, 3, 4).unwrap();
        let basis = FockBasis::new(&space, n_max, Some(1.0)).unwrap();
        (space, basis)
    }

    #[test]
    fn h00_is_function_of_hf() {
        let (space, basis) = setup(3);
        let w = KernelFunction::new(0, 0, |r, _, _| c(r));
        let h = assemble_kernel(&w, &space, &basis).unwrap();
        assert_eq!(max_abs(&(h.matrix() - hf(&basis).matrix())), 0.0);
        let w2 = KernelFunction::new(0, 0, |r, _, _| c(0.3 - r * r));
        let h2 = assemble_kernel(&w2, &space, &basis).unwrap();
        assert!((h2[(0, 0)] - c(0.3)).norm() == 0.0);
    }

    #[test]
    fn single_slot_kernels_match_ladder_operators() {
        let (space, basis) = setup(2);
        let f: crate::transversal::HClosure = Arc::new(|p: &MomentumPoint| {
            C64::new(p.k.x + 0.3 * p.k.z, p.k.y - 0.1) * (p.lambda as f64 + 0.5)
        });
        let coeffs = space.project(&f);
        let fa = f.clone();
        let w01 = apply_support(&KernelFunction::new(0, 1, move |_, _, ann| {
            fa(&ann[0]).conj() * ann[0].norm().sqrt()
        }));
        let fc = f.clone();
        let w10 = apply_support(&KernelFunction::new(1, 0, move |_, cre, _| {
            fc(&cre[0]) * cre[0].norm().sqrt()
        }));
        let a = assemble_kernel(&w01, &space, &basis).unwrap();
        let astar = assemble_kernel(&w10, &space, &basis).unwrap();
        let a_ref = annihilate(&coeffs, &basis).unwrap();
        let c_ref = create(&coeffs, &basis).unwrap();
        for col in 0..basis.dim() {
            if !basis.is_safe(col, 1) {
                continue;
            }
            for row in 0..basis.dim() {
                assert!((a[(row, col)] - a_ref[(row, col)]).norm() < 1e-11);
                assert!((astar[(row, col)] - c_ref[(row, col)]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn form_and_ops_agree_and_blocks_vanish() {
        let (space, basis) = setup(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (m, n) in [(0, 1), (1, 1), (2, 0), (0, 2), (1, 2), (2, 1)] {
            let w = random_kernel(m, n, MomentumStyle::Polynomial, &mut rng);
            let src = DiscretizedKernel::new(&w, &space);
            let a = assemble_form(&src, &basis).unwrap();
            let b = assemble_ops(&src, &basis).unwrap();
            assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-10, "({m},{n})");
            assert!(max_abs(a.matrix()) > 1e-6);
            for col in 0..basis.dim() {
                for row in 0..basis.dim() {
                    let (p, q) = (basis.state(row).len(), basis.state(col).len());
                    if p as i64 - m as i64 != q as i64 - n as i64 {
                        assert_eq!(a[(row, col)], C64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn norm_bound_holds_for_random_kernels() {
        let (space, basis) = setup(2);
        let rgrid = RGrid::for_basis(17, &basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (m, n) in [(0, 0), (0, 1), (1, 1), (0, 2), (2, 0)] {
            let w = random_kernel(m, n, MomentumStyle::Polynomial, &mut rng);
            let rep = norm_bound_report(&w, &space, &basis, &rgrid).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        let zero = norm_bound_report(&KernelFunction::zero(1, 1), &space, &basis, &rgrid).unwrap();
        assert_eq!((zero.op_norm, zero.kernel_norm), (0.0, 0.0));
    }

    #[test]
    fn empty_sum_is_zero() {
        let (space, basis) = setup(2);
        let seq = KernelSequence::new(0.5).unwrap();
        let h = assemble_sum(&seq, &space, &basis).unwrap();
        assert_eq!(max_abs(h.matrix()), 0.0);
    }
}
