use green_imcf::constants::{
    c_harnack, c_unstable, cbar, chat, geometric_closed_form, harnack_chain_log_constant, iterate, nogo_certificate,
    nogo_grid, nogo_threshold, optimal_log_product, optimal_schedule, random_schedule, truncated_optimal_schedule,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn explicit_values() {
    assert_eq!(cbar(2.0, 3.0), 72.0);
    assert_eq!(c_harnack(2.0, 4.0), 2304.0);
    assert_eq!(chat(2.0, 4.0, 1.0), 256.0);
    assert!((optimal_log_product(1.0, 2.0).exp() - 0.0625).abs() < 1e-15);
}

#[test]
fn nogo_margins_on_the_parameter_cube() {
    for a in [1.0, 2.0] {
        for b in [1.0, 2.0] {
            for t0 in [1.0, 2.0] {
                let (p0, ..) = nogo_threshold(a, b, t0).unwrap();
                assert!(p0 > 1.0);
                let rep = nogo_certificate(a, b, t0, &nogo_grid(p0, 6)).unwrap();
                assert!(rep.all_positive(), "A = {a}, B = {b}, t0 = {t0}: {rep:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geometric_iteration_matches_closed_form(p in 1.1f64..2.0, nu in 2.5f64..4.0, s in 0.1f64..10.0) {
        prop_assume!(nu > p);
        let k = (40.0 / p.log10()).ceil() as usize;
        let c = chat(p, nu, s);
        let it = iterate(&optimal_schedule(1.0, p, k).unwrap(), c, p, nu, 1.0).unwrap();
        let cf = geometric_closed_form(c, p, nu, 1.0);
        prop_assert!((it - cf).abs() <= 1e-10 * cf.abs().max(1.0));
    }

    #[test]
    fn stationary_schedule_dominates_random_ones(p in 1.05f64..2.0, t0 in 0.5f64..3.0, seed in 0u64..1000) {
        let k = 48;
        let best = truncated_optimal_schedule(t0, p, k).unwrap().log_product(p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let s = random_schedule(&mut rng, t0, k);
            prop_assert!(s.log_product(p) < best);
        }
    }

    #[test]
    fn constants_grow_with_the_sobolev_constant(p in 1.05f64..2.5, nu in 2.6f64..6.0, s in 0.1f64..10.0, f in 1.01f64..3.0) {
        prop_assume!(nu > p);
        prop_assert!(chat(p, nu, s * f) > chat(p, nu, s));
        prop_assert!(c_unstable(p, nu, s * f) > c_unstable(p, nu, s));
        let h = |sob: f64| harnack_chain_log_constant(p, nu, sob, 1.0, 1.0, 2.0);
        prop_assert!(h(s * f) >= h(s));
    }
}
