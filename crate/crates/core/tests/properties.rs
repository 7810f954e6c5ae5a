use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fock_vanishing::feshbach::CutoffFunction;
use fock_vanishing::fock::{distinct_orderings, ordering_count, FockBasis};
use fock_vanishing::kernels::{assemble_kernel, hermitian_partner, random_kernel, MomentumStyle};
use fock_vanishing::linalg::max_abs;
use fock_vanishing::pipeline::FieldConfig;
use fock_vanishing::so3::{wigner_d, Rotation};
use fock_vanishing::transversal::MomentumPoint;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uncapped_fock_dimension_counts_multisets(modes in 1usize..7, n_max in 0usize..4) {
        let b = FockBasis::from_frequencies(vec![0.1; modes], n_max, None).unwrap();
        let expected: usize = (0..=n_max).map(|n| binomial(modes + n - 1, n)).sum();
        prop_assert_eq!(b.dim(), expected);
    }

    #[test]
    fn orderings_match_the_multinomial(mut state in prop::collection::vec(0usize..4, 0..6)) {
        state.sort();
        let mut occ = [0usize; 4];
        for &a in &state {
            occ[a] += 1;
        }
        let multinomial = factorial(state.len()) / occ.iter().map(|&k| factorial(k)).product::<f64>();
        prop_assert_eq!(ordering_count(&state), multinomial);
        prop_assert_eq!(distinct_orderings(&state).len() as f64, multinomial);
    }

    #[test]
    fn cutoff_pair_is_a_partition_of_unity(a in 0.05f64..0.5, width in 0.01f64..0.45, t in -0.5f64..1.5) {
        let eta = CutoffFunction::new(a, a + width).unwrap();
        let (e, eb) = (eta.eta(t), eta.eta_bar(t));
        prop_assert!((e * e + eb * eb - 1.0).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&e) && (0.0..=1.0).contains(&eb));
    }

    #[test]
    fn wigner_matrices_compose(s1 in any::<u64>(), s2 in any::<u64>(), j in 0usize..4) {
        let r1 = Rotation::random(&mut ChaCha8Rng::seed_from_u64(s1));
        let r2 = Rotation::random(&mut ChaCha8Rng::seed_from_u64(s2));
        let lhs = wigner_d(j, &r1) * wigner_d(j, &r2);
        prop_assert!(max_abs(&(lhs - wigner_d(j, &(r1 * r2)))) < 1e-12);
    }

    #[test]
    fn rotations_about_one_axis_add(theta1 in -3.0f64..3.0, theta2 in -3.0f64..3.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let axis = Vector3::new(x, y, 0.7).normalize();
        let r1 = Rotation::from_axis_angle(&axis, theta1).unwrap();
        let r2 = Rotation::from_axis_angle(&axis, theta2).unwrap();
        let r12 = Rotation::from_axis_angle(&axis, theta1 + theta2).unwrap();
        prop_assert!(((r1 * r2).matrix() - r12.matrix()).abs().max() < 1e-13);
    }

    #[test]
    fn symmetrized_kernels_ignore_slot_order(seed in any::<u64>(), k in prop::array::uniform3(-0.5f64..0.5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_kernel(0, 2, MomentumStyle::PlaneWave, &mut rng);
        let p = MomentumPoint::new(Vector3::from(k), 0).unwrap();
        let q = MomentumPoint::new(Vector3::new(0.1, -0.2, 0.15), 1).unwrap();
        let (a, b) = (w.eval(0.05, &[], &[p, q]), w.eval(0.05, &[], &[q, p]));
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hermitian_partner_assembles_the_adjoint(seed in any::<u64>(), order in 0usize..4) {
        let (space, basis) = FieldConfig::default().build().unwrap();
        let (m, n) = [(0, 1), (1, 1), (0, 2), (1, 2)][order];
        let w = random_kernel(m, n, MomentumStyle::Polynomial, &mut ChaCha8Rng::seed_from_u64(seed));
        let h = assemble_kernel(&w, &space, &basis).unwrap();
        let h_partner = assemble_kernel(&hermitian_partner(&w), &space, &basis).unwrap();
        prop_assert!(max_abs(&(h_partner.matrix() - h.matrix().adjoint())) < 1e-12);
    }
}
