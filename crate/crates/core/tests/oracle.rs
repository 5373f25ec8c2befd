use proptest::prelude::*;
use ttedopa::chainmap::recurrence_coefficients;
use ttedopa::model::WSCP_CROSS_COUPLING;
use ttedopa::oracle::{dephasing_coherence, dephasing_coherence_with, ed_evolve, ExactPropagator};
use ttedopa::quadrature::Tolerance;
use ttedopa::spectral::thermalize;
use ttedopa::tebd::ObservableSpec;
use ttedopa::{ChainCoefficients, Error, EvolutionConfig, ModelSpec, SpectralDensity};

fn coefficients(kelvin: f64, n: usize) -> ChainCoefficients {
    recurrence_coefficients(&thermalize(&SpectralDensity::wscp(), kelvin).unwrap(), n).unwrap()
}

#[test]
fn decoherence_reference_value() {
    // 40-digit quadrature of the same integrand
    let reference = 2.986_857_187_699_695_5;
    let c = dephasing_coherence(&SpectralDensity::wscp(), 300.0, &[0.1]).unwrap();
    assert!(((c.gamma[0] - reference) / reference).abs() < 1e-10, "{}", c.gamma[0]);
    assert!((c.theta[0] - (-reference).exp() / 2.0).abs() < 1e-12);
}

#[test]
fn coherence_starts_at_one_half() {
    for kelvin in [0.0, 77.0, 300.0] {
        let c = dephasing_coherence(&SpectralDensity::wscp(), kelvin, &[0.0]).unwrap();
        assert_eq!(c.gamma[0], 0.0);
        assert_eq!(c.theta[0], 0.5);
    }
}

#[test]
fn zero_temperature_is_the_cold_limit() {
    let sd = SpectralDensity::wscp();
    let times: Vec<f64> = (0..=14).map(|k| 0.1 * k as f64).collect();
    let a = dephasing_coherence(&sd, 0.0, &times).unwrap();
    let b = dephasing_coherence(&sd, 1e-6, &times).unwrap();
    for (k, t) in times.iter().enumerate() {
        assert!((a.gamma[k] - b.gamma[k]).abs() < 1e-8, "t={t}");
    }
}

#[test]
fn tighter_tolerance_agrees() {
    let sd = SpectralDensity::wscp();
    let times = [0.05, 0.3, 0.9, 1.4];
    let loose = dephasing_coherence_with(&sd, 300.0, &times, Tolerance::new(1e-8, 1e-8)).unwrap();
    let tight = dephasing_coherence_with(&sd, 300.0, &times, Tolerance::new(1e-13, 1e-13)).unwrap();
    for k in 0..times.len() {
        assert!((loose.gamma[k] - tight.gamma[k]).abs() < 1e-8 * (1.0 + tight.gamma[k]));
        assert!(tight.error[k] <= 1e-13 * (1.0 + tight.gamma[k].abs()));
    }
}

#[test]
fn decoherence_grows_with_temperature() {
    let sd = SpectralDensity::wscp();
    let times = [0.02, 0.1, 0.5];
    let g: Vec<Vec<f64>> = [0.0, 77.0, 300.0]
        .iter()
        .map(|&k| dephasing_coherence(&sd, k, &times).unwrap().gamma)
        .collect();
    for k in 0..times.len() {
        assert!(g[0][k] < g[1][k] && g[1][k] < g[2][k], "t={}", times[k]);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let sd = SpectralDensity::wscp();
    assert!(matches!(dephasing_coherence(&sd, -1.0, &[0.1]), Err(Error::Domain(_))));
    assert!(matches!(dephasing_coherence(&sd, 300.0, &[f64::NAN]), Err(Error::Domain(_))));
}

#[test]
fn exact_evolution_conserves_norm_and_energy() {
    let model = ModelSpec::dephasing(SpectralDensity::wscp(), 300.0);
    let p = ExactPropagator::new(&model, &[coefficients(300.0, 3)], &[5, 4, 3]).unwrap();
    assert_eq!(p.dimension(), 2 * 5 * 4 * 3);
    let e = p.energy();
    let scale = p.hamiltonian.norm();
    for k in 0..=10 {
        let psi = p.state_at(0.03 * k as f64);
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!((p.energy_of(&psi) - e).abs() < 1e-10 * scale);
    }
}

#[test]
fn system_without_bath_keeps_its_coherence() {
    let model = ModelSpec::dephasing(SpectralDensity::wscp(), 300.0);
    let cfg = EvolutionConfig::new(1e-3, 0.2, 1, vec![ObservableSpec::Coherence { system: 0 }]);
    let ts = ed_evolve(&model, &[coefficients(300.0, 1)], &[], &cfg).unwrap();
    assert!(ts.values.iter().all(|r| (r[0] - 0.5).abs() < 1e-12));
}

#[test]
fn decoupled_chain_stays_in_vacuum() {
    let model = ModelSpec::dephasing(SpectralDensity::wscp(), 300.0);
    let c = coefficients(300.0, 3).with_system_coupling(0.0);
    let obs = vec![
        ObservableSpec::Coherence { system: 0 },
        ObservableSpec::Occupation { bath: 0, n: 0 },
        ObservableSpec::Occupation { bath: 0, n: 2 },
    ];
    let cfg = EvolutionConfig::new(1e-3, 0.2, 1, obs);
    let ts = ed_evolve(&model, &[c], &[4, 4, 4], &cfg).unwrap();
    for r in &ts.values {
        assert!((r[0] - 0.5).abs() < 1e-12);
        assert!(r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
    }
}

#[test]
fn decoupled_dimer_stays_in_plus_state() {
    let model = ModelSpec::dimer(SpectralDensity::wscp(), 300.0, WSCP_CROSS_COUPLING);
    let c = coefficients(300.0, 2).with_system_coupling(0.0);
    let cfg = EvolutionConfig::new(1e-3, 0.2, 1, vec![ObservableSpec::PPlus]);
    let ts = ed_evolve(&model, &[c.clone(), c], &[3, 3], &cfg).unwrap();
    assert!(ts.values.iter().all(|r| (r[0] - 1.0).abs() < 1e-10));
}

#[test]
fn coupled_dimer_leaves_plus_state() {
    let model = ModelSpec::dimer(SpectralDensity::wscp(), 300.0, WSCP_CROSS_COUPLING);
    let c = coefficients(300.0, 2);
    let cfg = EvolutionConfig::new(1e-3, 0.05, 1, vec![ObservableSpec::PPlus]);
    let ts = ed_evolve(&model, &[c.clone(), c], &[3, 3], &cfg).unwrap();
    assert_eq!(ts.values[0][0], 1.0);
    assert!(ts.values.last().unwrap()[0] < 1.0 - 1e-4);
}

#[test]
fn dimension_cap_is_enforced() {
    let model = ModelSpec::dephasing(SpectralDensity::wscp(), 0.0);
    match ExactPropagator::new(&model, &[coefficients(0.0, 3)], &[16, 16, 16]) {
        Err(Error::DimensionCap { dimension, cap }) => {
            assert_eq!(dimension, 8192);
            assert_eq!(cap, ttedopa::oracle::ED_DIMENSION_CAP);
        }
        other => panic!("{:?}", other.map(|p| p.dimension())),
    }
}

#[test]
fn short_chain_tracks_exact_decoherence_briefly() {
    // before the first reflection a few sites carry the whole bath
    let sd = SpectralDensity::wscp();
    let model = ModelSpec::dephasing(sd.clone(), 0.0);
    let cfg = EvolutionConfig::new(1e-3, 0.01, 1, vec![ObservableSpec::Coherence { system: 0 }]);
    let ts = ed_evolve(&model, &[coefficients(0.0, 3)], &[8, 5, 3], &cfg).unwrap();
    let exact = dephasing_coherence(&sd, 0.0, &ts.times).unwrap();
    for (r, th) in ts.values.iter().zip(&exact.theta) {
        assert!((r[0] - th).abs() < 1e-4, "{} vs {th}", r[0]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coherence_is_bounded(t in 0.0f64..1.4, kelvin in 0.0f64..400.0) {
        let c = dephasing_coherence(&SpectralDensity::wscp(), kelvin, &[t]).unwrap();
        prop_assert!(c.gamma[0] >= 0.0);
        prop_assert!(c.theta[0] > 0.0 && c.theta[0] <= 0.5);
    }
}
