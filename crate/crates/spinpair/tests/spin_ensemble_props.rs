use proptest::prelude::*;
use spinpair::entanglement::concurrence;
use spinpair::quantum_state::Evolve;
use spinpair::sdc::u_ent;
use spinpair::spin_ensemble::{
    entanglement_margin, product_state, threshold_temperature, transfer_sequence, PolarizationPair,
};

proptest! {
    #[test]
    fn thermal_populations_factorise(es in 0.0f64..1.0, ei in 0.0f64..1.0) {
        let p = product_state(&[es, ei]).unwrap().populations();
        prop_assert!((p[0] * p[3] - p[1] * p[2]).abs() <= 1e-12);
    }

    #[test]
    fn transfer_conserves_population(eps in 0.0f64..0.999) {
        let trace = transfer_sequence(eps).unwrap();
        for step in &trace.steps {
            prop_assert!((step.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        let r = trace.result;
        prop_assert!((r.epsilon_s - 2.0 * eps / (2.0 - eps)).abs() <= 1e-12);
        prop_assert!((r.epsilon_i - 2.0 * eps * (1.0 - eps) / (2.0 - eps)).abs() <= 1e-12);
    }
}

#[test]
fn margin_sign_matches_concurrence() {
    let mut checked = 0;
    for i in 0..21 {
        for j in 0..21 {
            let (ei, es) = (i as f64 / 21.0, j as f64 / 21.0);
            let m = entanglement_margin(PolarizationPair { epsilon_s: es, epsilon_i: ei });
            if m.abs() < 1e-6 {
                continue;
            }
            let rho = product_state(&[ei, es]).unwrap().conjugate_by(&u_ent());
            assert_eq!(m > 0.0, concurrence(&rho).unwrap() > 1e-12, "ε_I={ei} ε_S={es}");
            checked += 1;
        }
    }
    assert!(checked > 400);
}

#[test]
fn threshold_grows_with_frequency() {
    let t: Vec<f64> = [9.5e9, 35e9, 95e9].iter().map(|&f| threshold_temperature(f, 1e6, true).unwrap()).collect();
    assert!(t[0] < t[1] && t[1] < t[2], "{t:?}");
}
