use lazymc::chain::{self, examples, Distribution};
use lazymc::estimators;
use lazymc::harness::{generate_chain, ChainFamilySpec, FamilyKind, FamilyParams};
use lazymc::lazy;

fn occupation(path: &[usize], d: usize) -> Vec<f64> {
    let mut f = vec![0.0; d];
    for &s in path {
        f[s] += 1.0 / path.len() as f64;
    }
    f
}

#[test]
fn occupation_frequencies_approach_the_stationary_law() {
    let m = examples::m2();
    let pi = chain::stationary(&m).unwrap();
    let path = lazy::simulate(&m, &Distribution::uniform(3), 400_000, 1).unwrap();
    let f = occupation(&path, 3);
    for i in 0..3 {
        assert!(
            (f[i] - pi[i]).abs() < 5e-3,
            "state {i}: {} vs {}",
            f[i],
            pi[i]
        );
    }
}

#[test]
fn lazy_paths_of_a_periodic_chain_visit_the_stationary_law() {
    let m = examples::m1();
    let t = lazy::simulate_lazy(&m, &Distribution::point_mass(3, 0), 0.5, 400_000, 2).unwrap();
    let f = occupation(&t.states, 3);
    for (i, want) in [0.25, 0.5, 0.25].into_iter().enumerate() {
        assert!((f[i] - want).abs() < 5e-3, "state {i}: {}", f[i]);
    }
    // Binomial(m − 1, 1/2) has standard deviation ≈ 316 here.
    assert!((t.m_act as f64 - 0.5 * 399_999.0).abs() < 5.0 * 316.3);
}

#[test]
fn transition_frequencies_approach_the_lazy_matrix() {
    let spec = ChainFamilySpec {
        kind: FamilyKind::DirichletErgodic,
        d: 4,
        params: FamilyParams::default(),
        seed: 3,
    };
    let m = generate_chain(&spec).unwrap();
    let alpha = 0.3;
    let t = lazy::simulate_lazy(&m, &Distribution::uniform(4), alpha, 500_000, 4).unwrap();
    let est = estimators::learn_matrix_direct(&t.states, 4).unwrap();
    let target = lazy::lazy(&m, alpha).unwrap();
    let err = lazymc::matrix::inf_norm_distance(est.matrix(), target.matrix()).unwrap();
    assert!(err < 0.03, "error {err}");
}

#[test]
fn extended_learner_recovers_the_base_chain() {
    let r = estimators::learn_matrix_extended(
        &examples::m1(),
        &Distribution::uniform(3),
        0.5,
        200_000,
        5,
    )
    .unwrap();
    let err =
        lazymc::matrix::inf_norm_distance(r.estimate.matrix(), examples::m1().matrix()).unwrap();
    assert!(err < 0.05, "error {err}");
    assert!(r.m_act.unwrap() > 90_000);
}

#[test]
fn seeded_runs_are_bit_identical() {
    let m = examples::m2();
    let mu = Distribution::uniform(3);
    let a = lazy::simulate_lazy(&m, &mu, 0.4, 1000, 99).unwrap();
    let b = lazy::simulate_lazy(&m, &mu, 0.4, 1000, 99).unwrap();
    assert_eq!(a, b);
    let c = lazy::simulate_lazy(&m, &mu, 0.4, 1000, 100).unwrap();
    assert_ne!(a.states, c.states);
}

#[test]
fn identity_tester_separates_far_chains() {
    let mu = Distribution::uniform(3);
    let m1 = examples::m1();
    let accept = estimators::identity_test_extended(&m1, &mu, &m1, 0.5, 0.2, 100_000, 6).unwrap();
    assert!(!accept.reject, "{accept:?}");
    let reject =
        estimators::identity_test_extended(&m1, &mu, &examples::m2(), 0.5, 0.2, 100_000, 6)
            .unwrap();
    assert!(reject.reject, "{reject:?}");
}
