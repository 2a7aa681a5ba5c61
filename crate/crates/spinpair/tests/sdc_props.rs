use proptest::prelude::*;
use spinpair::entanglement::{concurrence, is_ppt};
use spinpair::sdc::{
    conventional_witness, decomposition_residual, evaluate_w1_w2, log10_error_probability, mixed_sdc_states,
    signal_stats, witness_f, SdcMessage,
};

fn messages() -> impl Strategy<Value = SdcMessage> {
    prop::sample::select(SdcMessage::all().to_vec())
}

proptest! {
    #[test]
    fn witness_value_is_half_minus_product(p_i in 0.5f64..1.0, p_s in 0.5f64..1.0, m in messages()) {
        let rho2 = mixed_sdc_states(p_i, p_s, m).unwrap().rho2;
        let w = conventional_witness(m);
        prop_assert!((rho2.expectation(w.matrix()) - (0.5 - p_i * p_s)).abs() <= 1e-12);
    }

    #[test]
    fn decoded_state_is_diagonal(p_i in 0.5f64..1.0, p_s in 0.5f64..1.0, m in messages()) {
        let rho3 = mixed_sdc_states(p_i, p_s, m).unwrap().rho3;
        let off: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|(i, j)| i != j)
            .map(|(i, j)| rho3.matrix()[(i, j)].norm()).fold(0.0, f64::max);
        prop_assert!(off <= 1e-12);
        // the most probable outcome is the message
        let p = rho3.populations();
        let best = (0..4).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        prop_assert_eq!(best, 2 * m.z as usize + m.x as usize);
    }
}

#[test]
fn witness_sign_on_grid() {
    for i in 0..=10 {
        for j in 0..=10 {
            let (p_i, p_s) = (0.5 + 0.05 * i as f64, 0.5 + 0.05 * j as f64);
            if (p_i * p_s - 0.5).abs() < 1e-6 {
                continue;
            }
            for m in SdcMessage::all() {
                let rho2 = mixed_sdc_states(p_i, p_s, m).unwrap().rho2;
                let (w1, w2) = evaluate_w1_w2(&rho2).unwrap();
                let f = witness_f(w1, w2).unwrap();
                assert_eq!(f < 0.0, p_i * p_s > 0.5);
                assert_eq!(f < 0.0, concurrence(&rho2).unwrap() > 1e-12);
                assert_eq!(f < 0.0, !is_ppt(&rho2, (2, 2)).unwrap().0);
            }
        }
    }
}

#[test]
fn decomposition_on_fine_grid() {
    for m in SdcMessage::all() {
        assert!(decomposition_residual(m, 101).unwrap() <= 1e-10);
    }
}

/// Exact P(sum < 0) + ½P(sum = 0) for n spins of polarisation ε, with the
/// per-count multiplicities from enumerating all 2ⁿ outcomes.
fn exact_error(n: u32, eps: f64) -> (f64, f64, f64) {
    let mut counts = vec![0u64; n as usize + 1];
    for mask in 0u64..(1 << n) {
        counts[mask.count_ones() as usize] += 1;
    }
    let (p, q) = ((1.0 + eps) / 2.0, (1.0 - eps) / 2.0);
    let (mut m1, mut m2, mut err) = (0.0, 0.0, 0.0);
    for (k, &c) in counts.iter().enumerate() {
        let w = c as f64 * p.powi(k as i32) * q.powi(n as i32 - k as i32);
        let s = 2.0 * k as f64 - n as f64;
        m1 += w * s;
        m2 += w * s * s;
        if s < 0.0 {
            err += w;
        } else if s == 0.0 {
            err += 0.5 * w;
        }
    }
    (m1, m2 - m1 * m1, err)
}

#[test]
fn moments_and_tail_against_enumeration() {
    for n in [4u32, 9, 16, 20] {
        for eps in [0.05, 0.2, 0.4] {
            let (mean, var, err) = exact_error(n, eps);
            let s = signal_stats(n as f64, eps, eps, SdcMessage { z: 0, x: 0 }).unwrap();
            assert!((s.mu_i - mean).abs() <= 1e-12 && (s.sigma_i.powi(2) - var).abs() <= 1e-12);
            // the Gaussian tail formula tracks the exact error within a factor
            // of 4 on these small ensembles
            let approx = 10f64.powf(log10_error_probability(n as f64, eps));
            let ratio = approx / err;
            assert!((0.25..4.0).contains(&ratio), "n={n} ε={eps}: exact {err:e} vs {approx:e}");
        }
    }
}
