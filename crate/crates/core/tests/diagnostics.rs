use proptest::prelude::*;
use ttedopa::chainmap::{recurrence_coefficients, MeasureDescriptor};
use ttedopa::diagnostics::{
    estimate_chain_length, local_dimension_schedule, schedule_entry, thermal_occupation, walk_profile,
    ChainLengthOptions,
};
use ttedopa::linalg::{expm, solve, Matrix};
use ttedopa::units::inverse_temperature;
use ttedopa::{ChainCoefficients, Error, SpectralDensity};

fn homogeneous(kappa: f64, n: usize) -> ChainCoefficients {
    ChainCoefficients {
        omegas: vec![0.0; n],
        kappas: vec![kappa; n],
        measure: MeasureDescriptor::Uniform {
            lo: -2.0 * kappa,
            hi: 2.0 * kappa,
        },
    }
}

/// `diag((e^{βA} − 1)^{-1})` without an eigendecomposition.
fn gaussian_occupations(c: &ChainCoefficients, kelvin: f64) -> Vec<f64> {
    let n = c.len();
    let beta = inverse_temperature(kelvin);
    let a = c.jacobi_matrix(n).scale(beta);
    let m = expm(&a).add(&Matrix::identity(n).scale(-1.0));
    let inv = solve(&m, &Matrix::identity(n)).unwrap();
    (0..n).map(|i| inv.get(i, i)).collect()
}

#[test]
fn occupations_match_gaussian_construction() {
    let sd = SpectralDensity::wscp();
    for n in 1..=6 {
        let c = recurrence_coefficients(&sd, n).unwrap();
        for kelvin in [77.0, 150.0, 300.0] {
            let p = thermal_occupation(&c, kelvin, n).unwrap();
            let q = gaussian_occupations(&c, kelvin);
            for (k, (a, b)) in p.occupations.iter().zip(&q).enumerate() {
                assert!((a - b).abs() < 1e-10, "N={n} T={kelvin} site {k}");
            }
        }
    }
}

#[test]
fn single_mode_is_bose_einstein() {
    let c = ChainCoefficients {
        omegas: vec![200.0],
        kappas: vec![1.0],
        measure: MeasureDescriptor::Discrete { atoms: 1 },
    };
    let p = thermal_occupation(&c, 300.0, 1).unwrap();
    assert!((p.occupations[0] - 0.621_284_822_872_550_9).abs() < 1e-13);
}

#[test]
fn occupation_profiles_order_with_temperature() {
    let c = recurrence_coefficients(&SpectralDensity::wscp(), 50).unwrap();
    let zero = thermal_occupation(&c, 0.0, 50).unwrap();
    let mid = thermal_occupation(&c, 77.0, 50).unwrap();
    let hot = thermal_occupation(&c, 300.0, 50).unwrap();
    assert!(zero.occupations.iter().all(|&x| x == 0.0));
    assert!(hot.max() > mid.max() && mid.max() > zero.max());
    let peak = hot.argmax();
    assert!((10..40).contains(&peak), "maximum at site {peak}");
    assert!(hot.occupations[peak] > 1.5 * hot.occupations[0]);
    assert!(hot.occupations[peak] > 1.5 * hot.occupations[49]);
}

#[test]
fn walk_keeps_its_norm() {
    let c = thermalize_wscp(300.0, 80);
    let times: Vec<f64> = (0..=100).map(|k| 0.02 * k as f64).collect();
    let w = walk_profile(&c, 80, &times).unwrap();
    for n in w.norms() {
        assert!((n - 1.0).abs() < 1e-8);
    }
}

fn thermalize_wscp(kelvin: f64, n: usize) -> ChainCoefficients {
    let th = ttedopa::spectral::thermalize(&SpectralDensity::wscp(), kelvin).unwrap();
    recurrence_coefficients(&th, n).unwrap()
}

#[test]
fn homogeneous_chain_length_is_ballistic() {
    let opts = ChainLengthOptions::default();
    let n = |kappa: f64, t: f64| estimate_chain_length(&homogeneous(kappa, 2000), t, opts).unwrap();
    // Only κ·t enters when every ω_n vanishes.
    assert_eq!(n(200.0, 0.5), n(100.0, 1.0));
    assert_eq!(n(300.0, 1.0), n(100.0, 3.0));
    // A reflection off site M returns after a round trip at group velocity
    // 2κ, so M grows by κ·Δt per unit time.
    let lengths: Vec<f64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&t| n(100.0, t) as f64).collect();
    let expected = 100.0 * ttedopa::units::RAD_PER_PS_PER_CM;
    for w in lengths.windows(2) {
        let step = w[1] - w[0];
        assert!((step - expected).abs() < 0.15 * expected, "{lengths:?}");
    }
}

#[test]
fn zero_horizon_gives_the_floor() {
    let c = thermalize_wscp(300.0, 10);
    assert_eq!(estimate_chain_length(&c, 0.0, ChainLengthOptions::default()).unwrap(), 2);
}

#[test]
fn exhausted_cap_reports_last_length() {
    let opts = ChainLengthOptions {
        cap: 8,
        ..ChainLengthOptions::default()
    };
    match estimate_chain_length(&homogeneous(100.0, 100), 1.0, opts) {
        Err(Error::ChainLengthNotConverged { last_tested }) => assert_eq!(last_tested, 8),
        other => panic!("{other:?}"),
    }
}

#[test]
fn schedule_examples() {
    assert_eq!(schedule_entry(12, 60, 30), 7);
    assert_eq!(schedule_entry(12, 60, 0), 12);
    assert_eq!(schedule_entry(12, 60, 60), 2);
    let s = local_dimension_schedule(12, 60).unwrap();
    assert_eq!(s.len(), 60);
    assert!(s.windows(2).all(|w| w[1] <= w[0]));
    assert!(local_dimension_schedule(1, 5).is_err());
    assert!(local_dimension_schedule(4, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimate_grows_with_horizon(t in 0.0f64..0.6, dt in 0.0f64..0.3) {
        let c = thermalize_wscp(300.0, 200);
        let opts = ChainLengthOptions::default();
        let a = estimate_chain_length(&c, t, opts).unwrap();
        let b = estimate_chain_length(&c, t + dt, opts).unwrap();
        prop_assert!(b >= a, "{a} at {t}, {b} at {}", t + dt);
    }

    #[test]
    fn schedule_is_bounded_and_non_increasing(d_max in 2usize..30, n in 1usize..200) {
        let s = local_dimension_schedule(d_max, n).unwrap();
        prop_assert_eq!(s[0], d_max);
        prop_assert!(s.iter().all(|&d| (2..=d_max).contains(&d)));
        prop_assert!(s.windows(2).all(|w| w[1] <= w[0]));
    }
}
