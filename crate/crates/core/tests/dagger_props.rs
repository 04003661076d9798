use krn_core::laws::{adjointness_sweep, ae_defect};
use krn_core::measure::{adjointness_defect, KernelMorphism, MeasuredSpace};
use krn_core::random;
use proptest::prelude::*;

fn instance(seed: u64, n: usize, m: usize) -> (MeasuredSpace, KernelMorphism) {
    let mut rng = random::rng(seed);
    let x = random::space(&mut rng, n);
    let f = random::kernel(&mut rng, &x, m);
    (x, f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn involution(seed: u64, n in 1usize..=8, m in 1usize..=8) {
        let (_, f) = instance(seed, n, m);
        prop_assert!(f.dagger().dagger().equal_ae(&f, 1e-9).unwrap());
    }

    #[test]
    fn contravariance(seed: u64, n in 1usize..=8, m in 1usize..=8, r in 1usize..=8) {
        let (_, f) = instance(seed, n, m);
        let mut rng = random::rng(seed ^ 0x5eed);
        let g = random::kernel_with_labels(&mut rng, f.target(), "z", r);
        let lhs = f.compose(&g).unwrap().dagger();
        let rhs = g.dagger().compose(&f.dagger()).unwrap();
        prop_assert!(ae_defect(&lhs, &rhs).unwrap() <= 1e-9);
    }

    #[test]
    fn tensor_exchange(seed: u64, n in 1usize..=4, m in 1usize..=4, a in 1usize..=4, b in 1usize..=4) {
        let (_, f) = instance(seed, n, m);
        let (_, g) = instance(seed.wrapping_add(1), a, b);
        let lhs = f.tensor(&g).dagger();
        let rhs = f.dagger().tensor(&g.dagger());
        prop_assert!(ae_defect(&lhs, &rhs).unwrap() <= 1e-9);
    }

    #[test]
    fn adjointness_on_all_cell_sets(seed: u64, n in 1usize..=4, m in 1usize..=4) {
        let (_, f) = instance(seed, n, m);
        let fd = f.dagger();
        let mut rng = random::rng(seed);
        prop_assert!(adjointness_sweep(&mut rng, &f, &fd) <= 1e-12);
    }

    #[test]
    fn coupling_has_the_right_marginals(seed: u64, n in 1usize..=8, m in 1usize..=8) {
        let (x, f) = instance(seed, n, m);
        let gamma = f.coupling_matrix();
        for k in 0..n {
            prop_assert!((gamma.row(k).sum() - x.mass(k)).abs() <= 1e-12);
        }
        for l in 0..m {
            prop_assert!((gamma.column(l).sum() - f.target().mass(l)).abs() <= 1e-12);
        }
        let flat = f.coupling();
        prop_assert!((flat.total_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn null_cells_keep_involution_almost_everywhere(seed: u64, n in 1usize..=8, m in 1usize..=8) {
        let mut rng = random::rng(seed);
        let x = MeasuredSpace::from_weights(random::sparse_probability_vector(&mut rng, n, 0.4)).unwrap();
        let f = random::sparse_kernel(&mut rng, &x, m, 0.5);
        let fdd = f.dagger().dagger();
        prop_assert!(fdd.equal_ae(&f, 1e-9).unwrap());
        prop_assert!(f.dagger().stochasticity_defect() <= 1e-12);
    }
}

#[test]
fn identity_is_self_adjoint() {
    let x = MeasuredSpace::from_weights(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let id = KernelMorphism::identity(&x);
    assert_eq!(id.dagger().matrix(), id.matrix());
}

#[test]
fn adjointness_defect_of_a_wrong_inverse_is_visible() {
    let (_, f) = instance(11, 3, 3);
    let wrong = KernelMorphism::identity(f.target());
    let relabelled =
        KernelMorphism::new(f.target().clone(), f.source().labels().to_vec(), wrong.matrix().clone()).unwrap();
    let worst = (0..8u64)
        .flat_map(|a| (0..8u64).map(move |b| (a, b)))
        .map(|(a, b)| adjointness_defect(&f, &relabelled, a, b))
        .fold(0.0, f64::max);
    assert!(worst > 1e-3);
}
