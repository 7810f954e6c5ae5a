//! Rotation of kernels and their average over SO(3).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use itertools::Itertools;

use super::amplitude::{AmplitudeTensor, DiscretizedKernel, KernelSource};
use super::{apply_support, KernelFunction, KernelSequence};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMat, C64};
use crate::so3::{invariant_subspace_of, spin_matrices, HaarQuadrature, Rotation};
use crate::transversal::{mixing_row, ModeSpace, MomentumPoint, Picture};

/// `w_R(r; K̃, K) = w(r; R⁻¹K̃, R⁻¹K)` with every slot mixed by
/// `M(R, k)`, so that `H[w_R] = 𝒰_ℱ(R) H[w] 𝒰_ℱ(R)†`.
pub fn rotate_kernel(rot: &Rotation, w: &KernelFunction) -> KernelFunction {
    let inner = w.clone();
    let rot = *rot;
    let m = w.m;
    KernelFunction::new(w.m, w.n, move |r, cre, ann| {
        let rows: Vec<[(MomentumPoint, f64); 2]> =
            cre.iter().chain(ann).map(|p| mixing_row(&rot, p)).collect();
        let slots = rows.len();
        let mut buf: Vec<MomentumPoint> = rows.iter().map(|row| row[0].0).collect();
        let mut acc = C64::new(0.0, 0.0);
        for mask in 0..(1usize << slots) {
            let mut coeff = 1.0;
            for (s, row) in rows.iter().enumerate() {
                let (q, c) = row[(mask >> s) & 1];
                buf[s] = q;
                coeff *= c;
            }
            if coeff == 0.0 {
                continue;
            }
            let (c2, a2) = buf.split_at(m);
            acc += inner.eval(r, c2, a2) * coeff;
        }
        acc
    })
    .with_flags(w.symmetric, w.supported)
}

/// `Σ_R w_R · rotate_kernel(R, w)`, summed in node order.
pub fn haar_average_kernel(w: &KernelFunction, quad: &HaarQuadrature) -> KernelFunction {
    let rotated: Vec<(KernelFunction, f64)> = quad
        .nodes
        .iter()
        .map(|(rot, wt)| (rotate_kernel(rot, w), *wt))
        .collect();
    KernelFunction::new(w.m, w.n, move |r, cre, ann| {
        rotated
            .iter()
            .map(|(k, wt)| k.eval(r, cre, ann) * *wt)
            .fold(C64::new(0.0, 0.0), |a, b| a + b)
    })
    .with_flags(w.symmetric, w.supported)
}

pub fn haar_average_sequence(seq: &KernelSequence, quad: &HaarQuadrature) -> KernelSequence {
    let mut out = KernelSequence::new(seq.xi).expect("ξ already validated");
    for w in seq.iter() {
        out.insert(haar_average_kernel(w, quad));
    }
    out
}

/// Generators of `⊗U` on creation slots and `⊗conj(U)` on annihilation
/// slots for the given block degrees.
fn total_generators(degrees: &[usize], m: usize) -> [CMat; 3] {
    let sizes: Vec<usize> = degrees.iter().map(|l| 2 * l + 1).collect();
    let total: usize = sizes.iter().product();
    let mut out = [CMat::zeros(total, total), CMat::zeros(total, total), CMat::zeros(total, total)];
    for (s, &l) in degrees.iter().enumerate() {
        let j = spin_matrices(l);
        let left = CMat::identity(sizes[..s].iter().product(), sizes[..s].iter().product());
        let right = CMat::identity(sizes[s + 1..].iter().product(), sizes[s + 1..].iter().product());
        for a in 0..3 {
            let g = if s < m { j[a].clone() } else { -j[a].conjugate() };
            out[a] += kron(&kron(&left, &g), &right);
        }
    }
    out
}

/// Orthogonal projection of the amplitudes onto the invariant subspace of
/// `𝒰(R)^{⊗m} ⊗ conj(𝒰(R))^{⊗n}`, the exact Haar average.
pub fn project_invariant(space: &ModeSpace, amp: &AmplitudeTensor) -> Result<AmplitudeTensor> {
    if space.picture() != Picture::Coefficient {
        return Err(Error::UnsupportedPicture {
            required: "coefficient",
        });
    }
    if amp.dim != space.dim() {
        return Err(Error::Dimension {
            expected: space.dim(),
            got: amp.dim,
        });
    }
    let slots = amp.m + amp.n;
    if slots == 0 {
        return Ok(amp.clone());
    }
    let blocks = space.blocks();
    let mut out = AmplitudeTensor::zeros(amp.m, amp.n, amp.dim, amp.r);
    let mut cache: HashMap<Vec<usize>, CMat> = HashMap::new();
    let mut modes = vec![0usize; slots];
    for outer in (0..slots).map(|_| 0..blocks.len()).multi_cartesian_product() {
        let degrees: Vec<usize> = outer.iter().map(|&b| blocks[b].1).collect();
        let basis = cache
            .entry(degrees.clone())
            .or_insert_with(|| invariant_subspace_of(&total_generators(&degrees, amp.m)));
        if basis.ncols() == 0 {
            continue;
        }
        let sizes: Vec<usize> = degrees.iter().map(|l| 2 * l + 1).collect();
        let inner: usize = sizes.iter().product();
        let flat = |t: usize, modes: &mut [usize]| {
            let mut t = t;
            for s in (0..slots).rev() {
                modes[s] = blocks[outer[s]].0 + t % sizes[s];
                t /= sizes[s];
            }
        };
        let mut v = crate::linalg::CVec::zeros(inner);
        for t in 0..inner {
            flat(t, &mut modes);
            v[t] = amp.get(&modes[..amp.m], &modes[amp.m..]);
        }
        let pv = &*basis * (basis.adjoint() * v);
        for t in 0..inner {
            flat(t, &mut modes);
            let idx = out.index(&modes[..amp.m], &modes[amp.m..]);
            out.data_mut()[idx] = pv[t];
        }
    }
    Ok(out)
}

/// Exact average of a closure kernel at the amplitude level.
#[derive(Clone, Debug)]
pub struct ProjectedKernel {
    inner: DiscretizedKernel,
}

impl ProjectedKernel {
    pub fn new(w: &KernelFunction, space: &ModeSpace) -> Result<Self> {
        if space.picture() != Picture::Coefficient {
            return Err(Error::UnsupportedPicture {
                required: "coefficient",
            });
        }
        Ok(Self {
            inner: DiscretizedKernel::new(w, space),
        })
    }
}

impl KernelSource for ProjectedKernel {
    fn orders(&self) -> (usize, usize) {
        self.inner.orders()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn amplitudes(&self, r: f64) -> Result<AmplitudeTensor> {
        project_invariant(&self.inner.space, &self.inner.amplitudes(r)?)
    }
}

/// The closure `Σ A(r)[α̃; β] Π e_α̃(k̃)|k̃|^{1/2} Π conj(e_β(k))|k|^{1/2}`,
/// whose discretization returns `A(r)` on the grid. Amplitudes are cached
/// per `r`; a failing source evaluates to NaN.
pub fn synthesize(source: Arc<dyn KernelSource>, space: &ModeSpace) -> Result<KernelFunction> {
    if space.picture() != Picture::Coefficient {
        return Err(Error::UnsupportedPicture {
            required: "coefficient",
        });
    }
    let (m, n) = source.orders();
    let space = space.clone();
    let cache: Mutex<HashMap<u64, Option<Arc<AmplitudeTensor>>>> = Mutex::new(HashMap::new());
    Ok(KernelFunction::new(m, n, move |r, cre, ann| {
        let amp = {
            let mut guard = cache.lock().expect("cache lock");
            guard
                .entry(r.to_bits())
                .or_insert_with(|| source.amplitudes(r).ok().map(Arc::new))
                .clone()
        };
        let Some(amp) = amp else {
            return C64::new(f64::NAN, 0.0);
        };
        if amp.is_zero() {
            return C64::new(0.0, 0.0);
        }
        let values: Vec<Vec<C64>> = cre
            .iter()
            .map(|p| {
                let v = space.mode_values(p).expect("coefficient picture");
                v.iter().map(|x| x * p.norm().sqrt()).collect()
            })
            .chain(ann.iter().map(|p| {
                let v = space.mode_values(p).expect("coefficient picture");
                v.iter().map(|x| x.conj() * p.norm().sqrt()).collect()
            }))
            .collect();
        let d = amp.dim;
        let mut acc = C64::new(0.0, 0.0);
        for (idx, a) in amp.data().iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            let mut t = idx;
            let mut prod = *a;
            for slot in values.iter().rev() {
                prod *= slot[t % d];
                t /= d;
            }
            acc += prod;
        }
        acc
    }))
}

/// Exact SO(3) average of a closure kernel: amplitude projection, then
/// synthesis, then the support cut.
pub fn exact_average_kernel(w: &KernelFunction, space: &ModeSpace) -> Result<KernelFunction> {
    let source = Arc::new(ProjectedKernel::new(w, space)?);
    let synth = synthesize(source, space)?.with_flags(w.symmetric, false);
    Ok(apply_support(&synth))
}

pub fn exact_average_sequence(seq: &KernelSequence, space: &ModeSpace) -> Result<KernelSequence> {
    let mut out = KernelSequence::new(seq.xi)?;
    for w in seq.iter() {
        out.insert(exact_average_kernel(w, space)?);
    }
    Ok(out)
}
