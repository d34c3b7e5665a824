use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thermoqfi::bounds::within;
use thermoqfi::operator::{commutator_i, seminorm, variance};
use thermoqfi::scenario::{random_hermitian, random_unitary};
use thermoqfi::{
    gibbs_state, qfi_general, qfi_report, Axis, EncodingScheme, Hermitian, LinearModel, Scenario,
    Spin,
};

fn pair(seed: u64, dim: usize) -> (Hermitian, Hermitian) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        random_hermitian(&mut rng, dim),
        random_hermitian(&mut rng, dim),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), dim in 1usize..12) {
        let (a, _) = pair(seed, dim);
        let s = a.eigendecompose().unwrap();
        prop_assert!(s.orthonormality_error() <= 1e-10);
        prop_assert!(s.reconstruction_error(&a) <= 1e-10 * s.width().max(1.0));
        prop_assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn seminorm_is_unitarily_invariant(seed in any::<u64>(), dim in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_hermitian(&mut rng, dim);
        let u = random_unitary(&mut rng, dim);
        let b = a.conjugated_by(u.matrix()).unwrap();
        let (sa, sb) = (seminorm(&a).unwrap(), seminorm(&b).unwrap());
        prop_assert!((sa - sb).abs() <= 1e-10 * sa.max(1.0));
    }

    #[test]
    fn seminorm_ignores_identity_shift(seed in any::<u64>(), dim in 1usize..10, c in -50.0f64..50.0) {
        let (a, _) = pair(seed, dim);
        let shifted = a.add(&Hermitian::identity(dim).scaled(c)).unwrap();
        let (sa, sb) = (seminorm(&a).unwrap(), seminorm(&shifted).unwrap());
        prop_assert!((sa - sb).abs() <= 1e-10 * (sa + c.abs()).max(1.0));
    }

    #[test]
    fn commutator_is_antisymmetric(seed in any::<u64>(), dim in 1usize..10) {
        let (a, b) = pair(seed, dim);
        let ab = commutator_i(&a, &b).unwrap();
        let ba = commutator_i(&b, &a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().max_abs() <= 1e-12 * ab.max_abs().max(1.0));
        prop_assert!(commutator_i(&a, &a).unwrap().max_abs() <= 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn variance_is_at_most_quarter_seminorm_squared(
        seed in any::<u64>(),
        dim in 1usize..10,
        beta in 0.0f64..20.0,
    ) {
        let (h, a) = pair(seed, dim);
        let state = gibbs_state(&h, beta).unwrap();
        let var = state.variance(&a).unwrap();
        let s = seminorm(&a).unwrap();
        prop_assert!(var >= 0.0);
        prop_assert!(within(var, s * s / 4.0));
        let dense = variance(&a, &state.density_matrix()).unwrap();
        prop_assert!((var - dense).abs() <= 1e-9 * s.max(1.0).powi(2));
    }

    #[test]
    fn gibbs_weights_are_normalized_and_ordered(seed in any::<u64>(), dim in 1usize..12, beta in 0.0f64..500.0) {
        let (h, _) = pair(seed, dim);
        let state = gibbs_state(&h, beta).unwrap();
        let p = state.probabilities();
        let total: f64 = p.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(p.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn qfi_routes_agree_and_respect_bounds(
        seed in any::<u64>(),
        dim in 2usize..9,
        beta in 0.01f64..15.0,
        t in 0.0f64..4.0,
    ) {
        let (h, a) = pair(seed, dim);
        let e = Scenario::new(h, beta, EncodingScheme::explicit(a, t).unwrap()).evaluate().unwrap();
        prop_assert!(e.qfi.agrees(), "{:?}", e.qfi);
        prop_assert!(e.bounds.ordering_ok, "{:?}", e.bounds.failed_checks());
    }

    #[test]
    fn qfi_is_unitarily_covariant(seed in any::<u64>(), dim in 2usize..8, beta in 0.05f64..8.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, dim);
        let g = random_hermitian(&mut rng, dim);
        let u = random_unitary(&mut rng, dim);
        let f = qfi_general(&gibbs_state(&h, beta).unwrap(), &g).unwrap();
        let rotated = gibbs_state(&h.conjugated_by(u.matrix()).unwrap(), beta).unwrap();
        let f_rot = qfi_general(&rotated, &g.conjugated_by(u.matrix()).unwrap()).unwrap();
        prop_assert!((f - f_rot).abs() <= 1e-8 * f.max(1.0));
    }

    #[test]
    fn qfi_ignores_energy_offset(seed in any::<u64>(), dim in 2usize..8, beta in 0.05f64..8.0, c in -100.0f64..100.0) {
        let (h, g) = pair(seed, dim);
        let shifted = h.add(&Hermitian::identity(dim).scaled(c)).unwrap();
        let a = qfi_report(&gibbs_state(&h, beta).unwrap(), &g).unwrap();
        let b = qfi_report(&gibbs_state(&shifted, beta).unwrap(), &g).unwrap();
        prop_assert!((a.f_general - b.f_general).abs() <= 1e-8 * a.f_general.max(1.0));
    }

    #[test]
    fn linear_closed_form_matches_pipeline(twice_j in 1u32..30, beta in 0.01f64..25.0, t in 0.0f64..5.0) {
        let m = LinearModel::new(Spin::from_twice_j(twice_j).unwrap(), beta, t, Axis::X).unwrap();
        let f = m.scenario().unwrap().evaluate().unwrap().qfi.f_general;
        let closed = m.qfi_closed();
        prop_assert!((closed - f).abs() <= 1e-8 * f.max(1e-300) + 1e-14, "{closed} vs {f}");
        prop_assert!(within(closed, m.seminorm_bound_closed()));
    }
}
