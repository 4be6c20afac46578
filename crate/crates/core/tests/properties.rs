use proptest::prelude::*;
use quartic_core::convex::{majorization_slack, perm_contains};
use quartic_core::hermitian::{hs_inner, spectrum, von_neumann_entropy};
use quartic_core::maps::{classical_reduction, classify, jamiolkowski_state, map_from_state, random_bistochastic, random_cptp};
use quartic_core::random::{random_density, random_unitary};
use quartic_core::states::{
    certify_state, extend_product, extended_pure, gauged_entropy, is_extended_state, is_xpovm_element, reduce_state,
    sample_extended_state, sample_extended_state_k, sample_xpovm_element, xpovm_probability, TheoryOrder,
};
use quartic_core::supermaps::{
    apply_supermap, check_admissible, compose_states, random_bistochastic_supermap, random_cptp_supermap,
    reduce_supermap, SuperMap,
};
use quartic_core::{HermitianOperator, Spectrum};

fn order() -> impl Strategy<Value = TheoryOrder> {
    prop_oneof![Just((2, 1)), Just((3, 1)), Just((2, 2)), Just((2, 0)), Just((3, 0))]
        .prop_map(|(n, m)| TheoryOrder::new(n, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sampled_states_are_extended_states(o in order(), seed in any::<u64>()) {
        let sigma = sample_extended_state(&o, seed);
        let c = certify_state(sigma.operator(), &o, false).unwrap();
        prop_assert!(c.is_extended_state);
        prop_assert!(c.majorization_slack >= -1e-9);
        prop_assert!((c.trace - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reduction_lands_in_quantum_states(o in order(), seed in any::<u64>()) {
        let rho = reduce_state(&sample_extended_state(&o, seed));
        let s = spectrum(&rho).unwrap();
        prop_assert!(s.values().iter().all(|&x| x >= -1e-9));
        prop_assert!((rho.trace() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_extension_round_trips(o in order(), seed in any::<u64>()) {
        let rho = random_density(o.n(), seed).unwrap();
        let sigma = extend_product(&rho, &o).unwrap();
        let back = reduce_state(&sigma);
        prop_assert!(rho.matrix().max_abs_diff(back.matrix()) < 1e-12);
    }

    #[test]
    fn entropy_bounds_and_extremal_gauge(o in order(), seed in any::<u64>()) {
        let ln_n = (o.n() as f64).ln();
        let m = o.m() as f64;
        let s = von_neumann_entropy(sample_extended_state(&o, seed).operator()).unwrap();
        prop_assert!(s >= m * ln_n - 1e-9 && s <= (m + 1.0) * ln_n + 1e-9);
        let g = gauged_entropy(&sample_extended_state_k(&o, 1, seed)).unwrap();
        prop_assert!(g.abs() < 1e-9);
    }

    #[test]
    fn unitary_orbit_of_pure_extension_is_extremal(n in 2usize..4, seed in any::<u64>()) {
        let o = TheoryOrder::quartic(n).unwrap();
        let phi = quartic_core::hermitian::uniform_superposition(n);
        let u = random_unitary(n * n, seed).unwrap();
        let sigma = extended_pure(&phi, &u, &o).unwrap();
        prop_assert!(gauged_entropy(&sigma).unwrap().abs() < 1e-9);
    }

    #[test]
    fn xpovm_pairing_is_nonnegative(o in order(), a in any::<u64>(), b in any::<u64>()) {
        let sigma = sample_extended_state(&o, a);
        let e = sample_xpovm_element(&o, b);
        prop_assert!(is_xpovm_element(e.operator(), &o).unwrap());
        prop_assert!(hs_inner(sigma.operator(), e.operator()).unwrap() >= -1e-9);
        let p = xpovm_probability(&sigma, &e).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn cptp_maps_have_stochastic_reductions(n in 2usize..4, seed in any::<u64>()) {
        let m = random_cptp(n, seed);
        let c = classify(&m);
        prop_assert!(c.cp && c.trace_preserving);
        let t = classical_reduction(&m);
        for j in 0..n {
            prop_assert!((t.column(j).sum() - 1.0).abs() < 1e-9);
        }
        prop_assert!(t.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn bistochastic_maps_contract_spectra(n in 2usize..4, seed in any::<u64>()) {
        let m = random_bistochastic(n, seed);
        let rho = random_density(n, seed ^ 0xabcd).unwrap();
        let out = m.apply(&rho).unwrap();
        let slack = majorization_slack(&spectrum(&out).unwrap(), &spectrum(&rho).unwrap()).unwrap();
        prop_assert!(slack >= -1e-10);
    }

    #[test]
    fn jamiolkowski_is_an_involution_pair(n in 2usize..4, seed in any::<u64>()) {
        let m = random_cptp(n, seed);
        let back = map_from_state(&jamiolkowski_state(&m)).unwrap();
        prop_assert!(m.choi().matrix().max_abs_diff(back.choi().matrix()) < 1e-12);
    }

    #[test]
    fn maximally_entangled_state_is_a_two_sided_unit(seed in any::<u64>()) {
        let sigma = sample_extended_state(&TheoryOrder::quartic(2).unwrap(), seed);
        let id = HermitianOperator::projector(&quartic_core::hermitian::max_entangled(2));
        for out in [compose_states(sigma.operator(), &id).unwrap(), compose_states(&id, sigma.operator()).unwrap()] {
            prop_assert!(out.matrix().max_abs_diff(sigma.operator().matrix()) < 1e-9);
        }
    }

    #[test]
    fn reduced_supermaps_inherit_structure(seed in any::<u64>()) {
        let g = random_cptp_supermap(2, seed);
        let c = classify(&reduce_supermap(&g));
        prop_assert!(c.cp && c.trace_preserving);
        let b = random_bistochastic_supermap(2, seed);
        prop_assert!(classify(&reduce_supermap(&b)).bistochastic);
    }

    #[test]
    fn bistochastic_supermaps_preserve_sampled_states(seed in any::<u64>()) {
        let g = random_bistochastic_supermap(2, seed);
        let o = TheoryOrder::quartic(2).unwrap();
        let out = apply_supermap(&g, &sample_extended_state(&o, seed ^ 1)).unwrap();
        prop_assert!(is_extended_state(&out, &o, false).unwrap());
    }

    #[test]
    fn quantum_specialization_matches_positivity(n in 2usize..5, seed in any::<u64>()) {
        let rho = random_density(n, seed).unwrap();
        let o = TheoryOrder::quantum(n).unwrap();
        prop_assert!(is_extended_state(&rho, &o, false).unwrap());
        prop_assert!(perm_contains(&o.permutohedron(), &spectrum(&rho).unwrap(), false).unwrap());
        let shifted = Spectrum::new(vec![1.5, -0.5]).unwrap();
        prop_assert!(!perm_contains(&TheoryOrder::quantum(2).unwrap().permutohedron(), &shifted, false).unwrap());
    }
}

#[test]
fn identity_supermap_is_admissible() {
    let r = check_admissible(&SuperMap::identity(2), 200, 11);
    assert!(r.preserves_sampled && r.reduced_cp);
    assert!(r.first_violation.is_none());
}
