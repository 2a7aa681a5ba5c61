use proptest::prelude::*;
use spinpair::endor_spect::{
    endor_lines, energy_levels, epr_lines, tppi_classify, tppi_simulate, tppi_simulate_state, Interferogram,
    SpinHamiltonianParams, TppiClass, TppiConfig,
};
use spinpair::pulse_engine::{bell_prepare, dephase, Transition};

fn rows() -> Vec<(usize, Transition, Transition)> {
    vec![
        (3, Transition::W34, Transition::W24),
        (1, Transition::W12, Transition::W24),
        (3, Transition::W34, Transition::W13),
        (1, Transition::W12, Transition::W13),
        (4, Transition::W34, Transition::W24),
        (2, Transition::W12, Transition::W13),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn level_differences_give_lines(nu_e in 100.0f64..1e5, nu_n in 0.1f64..60.0, a in -200.0f64..200.0) {
        let p = SpinHamiltonianParams::new(nu_e, nu_n, a).unwrap();
        let e = energy_levels(&p).map(|l| l.energy_mhz);
        let mut epr = [e[0] - e[2], e[1] - e[3]];
        epr.sort_by(f64::total_cmp);
        let mut endor = [(e[0] - e[1]).abs(), (e[2] - e[3]).abs()];
        endor.sort_by(f64::total_cmp);
        let tol = 1e-12 * nu_e;
        prop_assert!((epr[0] - epr_lines(&p)[0]).abs() <= tol && (epr[1] - epr_lines(&p)[1]).abs() <= tol);
        let l = endor_lines(&p).lines;
        prop_assert!((endor[0] - l[0]).abs() <= tol && (endor[1] - l[1]).abs() <= tol);
    }

    #[test]
    fn bell_states_show_combination_lines(row in prop::sample::select(rows()), nu1 in 0.3e6f64..2.0e6, nu2 in 3.0e6f64..7.0e6) {
        let (init, rf, mw) = row;
        let mut cfg = TppiConfig::new(init, rf, mw, rf);
        cfg.nu1 = nu1;
        cfg.nu2 = nu2;
        let c = tppi_classify(&tppi_simulate(&cfg).unwrap(), nu1, nu2).unwrap();
        prop_assert!(matches!(c.class, TppiClass::Sum | TppiClass::Difference));
        let mixed = dephase(&bell_prepare(init, rf, mw).unwrap().to_density());
        let d = tppi_classify(&tppi_simulate_state(&cfg, &mixed).unwrap(), nu1, nu2).unwrap();
        prop_assert_eq!(d.class, TppiClass::SingleFrequencies);
    }

    #[test]
    fn classification_symmetric_in_frequencies(f in 0.5e6f64..8.0e6, nu1 in 0.3e6f64..2.0e6, nu2 in 3.0e6f64..7.0e6) {
        let dt = 25e-9;
        let times: Vec<f64> = (0..512).map(|k| k as f64 * dt).collect();
        let signal = times.iter().map(|t| (2.0 * std::f64::consts::PI * f * t).cos()).collect();
        let ig = Interferogram { times, signal };
        let a = tppi_classify(&ig, nu1, nu2).unwrap();
        let b = tppi_classify(&ig, nu2, nu1).unwrap();
        prop_assert_eq!(a.class, b.class);
    }
}
