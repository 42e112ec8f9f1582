use std::collections::BTreeSet;

use catlocc::qstate::{
    conjugate, entanglement_entropy, local_operator, partial_trace, partial_transpose, partial_transpose_operator,
    projector, random_unitary, uniform_mix,
};
use catlocc::tensorlab::{hermitian_eigen, trace_norm};
use catlocc::{negativity, Bipartition, CMatrix, PureState, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let data = (0..dim * dim).map(|_| gaussian(rng)).collect();
    CMatrix::new(dim, dim, data).unwrap()
}

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = random_matrix(dim, rng);
    g.add(&g.adjoint()).unwrap().scaled(C64::new(0.5, 0.0))
}

fn random_product(n: usize, rng: &mut ChaCha8Rng) -> PureState {
    let mut psi = PureState::random(1, rng);
    for _ in 1..n {
        psi = psi.tensor(&PureState::random(1, rng));
    }
    psi
}

fn random_cut(n: usize, rng: &mut ChaCha8Rng) -> Bipartition {
    let all = Bipartition::all(n);
    all[rng.random_range(0..all.len())].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigen_residuals_and_trace(seed in any::<u64>(), log_dim in 0usize..=6) {
        let dim = 1 << log_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(dim, &mut rng);
        let eig = hermitian_eigen(&h).unwrap();
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-9);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        for k in 0..dim {
            let v = eig.vector(k);
            let hv = h.mul_vec(&v).unwrap();
            let resid: f64 = hv
                .entries()
                .iter()
                .zip(v.entries())
                .map(|(a, b)| (a - b * eig.values[k]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            prop_assert!(resid < 1e-8, "residual {} at k={}", resid, k);
        }
    }

    #[test]
    fn trace_norm_dominates_trace(seed in any::<u64>(), dim in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(dim, &mut rng);
        prop_assert!(trace_norm(&m).unwrap() >= m.trace().norm() - 1e-9);
    }

    #[test]
    fn trace_norm_unitary_invariance(seed in any::<u64>(), dim in 1usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(dim, &mut rng);
        let u = random_unitary(dim, &mut rng);
        let v = random_unitary(dim, &mut rng);
        let umv = u.matmul(&m).unwrap().matmul(&v).unwrap();
        prop_assert!((trace_norm(&umv).unwrap() - trace_norm(&m).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = uniform_mix(&[PureState::random(n, &mut rng), PureState::random(n, &mut rng)]).unwrap();
        let cut = random_cut(n, &mut rng);
        let once = partial_transpose(&rho, &cut).unwrap();
        let back = partial_transpose_operator(&once, &cut).unwrap();
        prop_assert!(back.max_abs_diff(rho.matrix()) <= 1e-15);
    }

    #[test]
    fn product_states_have_zero_negativity(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = projector(&random_product(n, &mut rng)).unwrap();
        for cut in Bipartition::all(n) {
            prop_assert!(negativity(&rho, &cut).unwrap().abs() < 1e-9, "{}", cut);
        }
    }

    #[test]
    fn negativity_is_local_unitary_invariant(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = uniform_mix(&[PureState::random(n, &mut rng), PureState::random(n, &mut rng)]).unwrap();
        let cut = random_cut(n, &mut rng);
        let ua = random_unitary(1 << cut.side_a().len(), &mut rng);
        let ub = random_unitary(1 << cut.side_b().len(), &mut rng);
        let rotated = conjugate(&rho, &local_operator(&cut, &ua, &ub).unwrap()).unwrap();
        let before = negativity(&rho, &cut).unwrap();
        let after = negativity(&rotated, &cut).unwrap();
        prop_assert!((before - after).abs() < 1e-8, "{} vs {}", before, after);
    }

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = projector(&PureState::random(3, &mut rng)).unwrap();
        let keep: BTreeSet<usize> = [1, 3].into();
        let reduced = partial_trace(&rho, &keep).unwrap();
        prop_assert_eq!(reduced.n_qubits(), 2);
        prop_assert!((reduced.trace().re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn three_qubit_entropy_is_at_most_one_ebit() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let psi = PureState::random(3, &mut rng);
        for q in 1..=3 {
            let e = entanglement_entropy(&psi, &Bipartition::new(3, [q]).unwrap()).unwrap();
            worst = worst.max(e);
        }
    }
    assert!(worst <= 1.0 + 1e-9, "max entropy {worst}");
    assert!(worst > 0.9);
}
