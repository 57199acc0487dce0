//! Engine results against exact diagonalisation of small chains.

use fermichain::oracle::validation::validate;
use fermichain::oracle::{oracle_ground_state, oracle_mi, oracle_reduced_entropy, quadratic_ground_energy};
use fermichain::{
    correlation_matrix, density_covariance, ground_state, mutual_information, subsystem_entropy,
    ModelSpec, Partition,
};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn engine_entropy(spec: &ModelSpec, sites: &[usize]) -> f64 {
    let state = ground_state(spec).unwrap();
    subsystem_entropy(&correlation_matrix(&state, sites).unwrap()).unwrap().entropy
}

#[test]
fn kitaev_correlators_match_fock_space() {
    let spec = ModelSpec::kitaev(8, 1.5, 0.7).unwrap();
    let fock = oracle_ground_state(&spec).unwrap();
    let corr = correlation_matrix(&ground_state(&spec).unwrap(), &[1, 2]).unwrap();
    let f = corr.f.as_ref().expect("pairing model carries F");
    for (a, &i) in [1usize, 2].iter().enumerate() {
        for (b, &j) in [1usize, 2].iter().enumerate() {
            assert!((corr.c[(a, b)] - fock.hopping_correlator(i, j)).norm() < TOL);
            assert!((f[(a, b)] - fock.anomalous_correlator(i, j)).norm() < TOL);
        }
    }
    // Pairing actually present, so the F comparison is not vacuous.
    assert!(fock.anomalous_correlator(1, 2).norm() > 1e-2);
}

#[test]
fn kitaev_block_entropies_match_fock_space() {
    let spec = ModelSpec::kitaev(8, 0.8, 0.4).unwrap();
    let fock = oracle_ground_state(&spec).unwrap();
    for sites in [vec![1, 2], vec![1, 2, 3], vec![3, 4, 5], vec![1, 5]] {
        let exact = oracle_reduced_entropy(&fock, &sites).unwrap();
        assert!((engine_entropy(&spec, &sites) - exact).abs() < TOL, "{sites:?}");
    }
}

#[test]
fn tight_binding_mutual_information_matches_fock_space() {
    let spec = ModelSpec::tight_binding(10, 0.3).unwrap();
    let fock = oracle_ground_state(&spec).unwrap();
    let p = Partition::new(2, 1);
    let engine = mutual_information(&ground_state(&spec).unwrap(), p).unwrap().mi;
    let exact = oracle_mi(&fock, p).unwrap();
    assert!(exact > 1e-3);
    assert!((engine - exact).abs() < TOL);
}

#[test]
fn antipodal_blocks_share_no_information() {
    let spec = ModelSpec::antipodal(8, 0, 0.5).unwrap();
    let fock = oracle_ground_state(&spec).unwrap();
    let state = ground_state(&spec).unwrap();
    // Blocks of one site away from each other's antipode.
    for gap in 0..=1 {
        let p = Partition::new(1, gap);
        assert!(oracle_mi(&fock, p).unwrap().abs() < TOL);
        assert!(mutual_information(&state, p).unwrap().mi.abs() < TOL);
    }
}

#[test]
fn wick_density_covariance_matches_fock_space() {
    for spec in [
        ModelSpec::kitaev(8, 1.2, 0.3).unwrap(),
        ModelSpec::power_law(8, 1.0, 1.0, 0.375).unwrap(),
    ] {
        let fock = oracle_ground_state(&spec).unwrap();
        let state = ground_state(&spec).unwrap();
        for (i, j) in [(1, 2), (1, 4), (2, 7)] {
            let engine = density_covariance(&state, i, j).unwrap();
            assert!((engine - fock.density_covariance(i, j)).abs() < TOL);
        }
    }
}

#[test]
fn catalog_validation_passes() {
    let report = validate(10, false).unwrap();
    assert!(report.all_passed(), "{report}");
}

#[test]
fn flipped_anomalous_sign_is_detected_on_kitaev_entries() {
    let report = validate(6, true).unwrap();
    let failures: Vec<_> = report.failures().collect();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|r| r.case.starts_with("kitaev") && r.check == "F entries"));
}

#[test]
fn smallest_catalog_covers_both_entropy_paths() {
    let report = validate(4, false).unwrap();
    assert!(report.all_passed());
    let cases: Vec<&str> = report.rows.iter().map(|r| r.case.as_str()).collect();
    assert!(cases.iter().any(|c| c.starts_with("kitaev")));
    assert!(cases.iter().any(|c| c.starts_with("tight-binding")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_kitaev_chains_agree(alpha in 0.2f64..6.0, mu in -2.5f64..2.5, n in prop::sample::select(vec![4usize, 6, 8])) {
        let spec = ModelSpec::kitaev(n, alpha, mu).unwrap();
        let Ok(fock) = oracle_ground_state(&spec) else { return Ok(()) };
        prop_assert!((fock.energy - quadratic_ground_energy(&spec).unwrap()).abs() < 1e-9);
        let state = ground_state(&spec).unwrap();
        for l in 1..=n / 2 - 1 {
            let p = Partition::new(l, 1);
            let engine = mutual_information(&state, p).unwrap().mi;
            prop_assert!((engine - oracle_mi(&fock, p).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn random_power_law_chains_agree(alpha in 0.3f64..5.0, n in prop::sample::select(vec![6usize, 8, 10])) {
        // One particle sits in the non-degenerate k = 0 mode at the band bottom.
        let spec = ModelSpec::power_law(n, alpha, 1.0, 1.0 / n as f64).unwrap();
        let Ok(fock) = oracle_ground_state(&spec) else { return Ok(()) };
        prop_assert!((fock.energy - quadratic_ground_energy(&spec).unwrap()).abs() < 1e-9);
        let sites: Vec<usize> = (1..=n / 2).collect();
        let exact = oracle_reduced_entropy(&fock, &sites).unwrap();
        prop_assert!((engine_entropy(&spec, &sites) - exact).abs() < 1e-9);
    }
}
