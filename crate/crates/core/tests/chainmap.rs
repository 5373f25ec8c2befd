use proptest::prelude::*;
use ttedopa::chainmap::{
    recurrence_coefficients, recurrence_coefficients_with, Discrete, Discretization, Measure, Uniform,
};
use ttedopa::quadrature::Integrator;
use ttedopa::spectral::thermalize;
use ttedopa::{ChainCoefficients, Error, SpectralDensity};

/// `⟨e_0|T^k|e_0⟩ κ_0²` for `k = 0..=kmax`.
fn jacobi_moments(c: &ChainCoefficients, kmax: usize) -> Vec<f64> {
    let t = c.jacobi_matrix(c.len());
    let mut v = vec![0.0; c.len()];
    v[0] = 1.0;
    let mut out = Vec::new();
    for _ in 0..=kmax {
        out.push(v[0] * c.kappas[0] * c.kappas[0]);
        v = t.matvec(&v);
    }
    out
}

fn quadrature_moments<M: Measure<f64>>(m: &M, kmax: usize) -> Vec<f64> {
    let q = Integrator::default();
    (0..=kmax)
        .map(|k| {
            q.integrate(|w: f64| m.density(w) * w.powi(k as i32), &m.breakpoints())
                .unwrap()
                .value
        })
        .collect()
}

#[test]
fn legendre_recurrence_to_fifty() {
    let c = recurrence_coefficients(&Uniform { lo: -1.0, hi: 1.0 }, 51).unwrap();
    assert!((c.kappas[0] - 2f64.sqrt()).abs() < 1e-12);
    assert!((c.kappas[1] - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert!((c.kappas[2] - (4.0f64 / 15.0).sqrt()).abs() < 1e-12);
    for n in 1..=50 {
        let nf = n as f64;
        let exact = nf * nf / (4.0 * nf * nf - 1.0);
        assert!((c.kappas[n] * c.kappas[n] - exact).abs() < 1e-10, "n={n}");
        assert!(c.omegas[n].abs() < 1e-10, "n={n}");
    }
}

#[test]
fn moments_are_reproduced() {
    let sd = SpectralDensity::wscp();
    for kelvin in [0.0, 77.0, 300.0] {
        let th = thermalize(&sd, kelvin).unwrap();
        let c = recurrence_coefficients(&th, 12).unwrap();
        let a = jacobi_moments(&c, 20);
        let b = quadrature_moments(&th, 20);
        for k in 0..=20 {
            let rel = (a[k] - b[k]).abs() / b[k].abs();
            assert!(rel < 1e-8, "T={kelvin} k={k}: {} vs {} ({rel:e})", a[k], b[k]);
        }
    }
}

#[test]
fn system_coupling_is_root_of_mass() {
    let sd = SpectralDensity::wscp();
    for kelvin in [0.0, 300.0] {
        let th = thermalize(&sd, kelvin).unwrap();
        let c = recurrence_coefficients(&th, 3).unwrap();
        let mass = th.total_weight().unwrap();
        assert!((c.kappas[0] - mass.sqrt()).abs() < 1e-10 * mass.sqrt());
    }
}

#[test]
fn doubling_nodes_leaves_coefficients_unchanged() {
    let th = thermalize(&SpectralDensity::wscp(), 300.0).unwrap();
    let a = recurrence_coefficients(&th, 120).unwrap();
    let b = recurrence_coefficients_with(&th, 120, Discretization::default().refined()).unwrap();
    for n in 0..120 {
        assert!(((a.omegas[n] - b.omegas[n]) / a.kappas[n]).abs() < 1e-9, "omega {n}");
        assert!(((a.kappas[n] - b.kappas[n]) / a.kappas[n]).abs() < 1e-9, "kappa {n}");
    }
}

#[test]
fn zero_temperature_matches_direct_mapping() {
    let sd = SpectralDensity::wscp();
    let a = recurrence_coefficients(&sd, 80).unwrap();
    let b = recurrence_coefficients(&thermalize(&sd, 0.0).unwrap(), 80).unwrap();
    for n in 0..80 {
        assert!((a.omegas[n] - b.omegas[n]).abs() < 1e-9);
        assert!((a.kappas[n] - b.kappas[n]).abs() < 1e-9);
    }
}

#[test]
fn system_coupling_grows_with_temperature() {
    let sd = SpectralDensity::wscp();
    let k: Vec<f64> = [0.0, 77.0, 150.0, 300.0]
        .iter()
        .map(|&t| recurrence_coefficients(&thermalize(&sd, t).unwrap(), 1).unwrap().kappas[0])
        .collect();
    assert!(k.windows(2).all(|w| w[1] >= w[0]), "{k:?}");
}

#[test]
fn couplings_stay_positive() {
    let th = thermalize(&SpectralDensity::wscp(), 77.0).unwrap();
    let c = recurrence_coefficients(&th, 200).unwrap();
    c.validate().unwrap();
    assert!(c.kappas.iter().all(|&k| k > 0.0));
}

#[test]
fn discrete_measure_breaks_down_past_its_atoms() {
    let m = Discrete {
        nodes: vec![-1.0, 0.5, 2.0],
        weights: vec![0.2, 0.3, 0.5],
    };
    let c: ChainCoefficients = recurrence_coefficients(&m, 3).unwrap();
    assert!((c.kappas[0] - 1.0).abs() < 1e-14);
    assert!((c.omegas[0] - (-0.2 + 0.15 + 1.0)).abs() < 1e-14);
    match recurrence_coefficients(&m, 4) {
        Err(Error::RecurrenceBreakdown { index, .. }) => assert_eq!(index, 3),
        other => panic!("expected breakdown, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uniform_measure_scales_affinely(lo in -50.0f64..50.0, width in 0.5f64..100.0) {
        let hi = lo + width;
        let c = recurrence_coefficients(&Uniform { lo, hi }, 20).unwrap();
        let half = width / 2.0;
        prop_assert!((c.kappas[0] - width.sqrt()).abs() < 1e-10 * width.sqrt());
        for n in 1..20 {
            let nf = n as f64;
            let exact = half * (nf * nf / (4.0 * nf * nf - 1.0)).sqrt();
            prop_assert!((c.kappas[n] - exact).abs() < 1e-9 * half);
            prop_assert!((c.omegas[n] - (lo + half)).abs() < 1e-9 * (half + lo.abs()));
        }
    }
}
