use green_imcf::green::core_limit;
use green_imcf::imcf::{
    find_c, gradient_bound_check, imcf_core_derivative, imcf_core_model, lower_barrier_derivative, p_supersolution_margin,
    subsolution_margin, upper_barrier_derivative, BARRIER_RHO0,
};
use green_imcf::model::{log_grid, ModelManifold};
use proptest::prelude::*;

fn model(which: usize, kappa: f64, n: usize) -> ModelManifold {
    match which {
        0 => ModelManifold::euclidean(n),
        1 => ModelManifold::hyperbolic(n, kappa).unwrap(),
        2 => ModelManifold::spherical(n, kappa, 1.5 / kappa).unwrap(),
        _ => ModelManifold::power_tail(n, 0.3 + 0.6 * kappa, 1.0).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn core_solves_smooth_imcf(which in 0usize..4, kappa in 0.1f64..1.0, n in 2usize..5, t in 0.01f64..0.99) {
        let m = model(which, kappa, n);
        let r = t * m.r_max().min(5.0);
        let h = m.mean_curvature_sphere(r).unwrap();
        let du = imcf_core_derivative(&m, r).unwrap();
        prop_assert!((h - du).abs() <= 1e-10 * h.abs().max(1.0));
        // The profile itself, differentiated numerically.
        let d = 1e-4 * r;
        let u = |x: f64| imcf_core_model(&m, x).unwrap();
        let fd = (u(r - 2.0 * d) - 8.0 * u(r - d) + 8.0 * u(r + d) - u(r + 2.0 * d)) / (12.0 * d);
        prop_assert!((fd - h).abs() <= 1e-6 * h.abs().max(1.0), "fd {fd} vs H {h}");
    }

    #[test]
    fn core_identity_with_kernel_limit(which in 0usize..4, kappa in 0.1f64..1.0, n in 2usize..5, t in 0.01f64..0.99) {
        let m = model(which, kappa, n);
        let r = t * m.r_max().min(5.0);
        let d = core_limit(&m, r).unwrap() - imcf_core_model(&m, r).unwrap() - m.omega().ln();
        prop_assert!(d.abs() < 1e-10);
    }

    #[test]
    fn gradient_margin_sign_follows_warping_slope(which in 0usize..4, kappa in 0.1f64..1.0, n in 2usize..5) {
        let m = model(which, kappa, n);
        let radii = log_grid(1e-2, m.r_max().min(20.0) * 0.99, 25);
        let rep = gradient_bound_check(&m, &radii).unwrap();
        for row in &rep.rows {
            let slope = m.warping_derivative(row.r).unwrap();
            if slope <= 1.0 {
                prop_assert!(row.margin >= -1e-12, "r = {}", row.r);
            } else {
                prop_assert!(row.margin < 0.0, "r = {}", row.r);
            }
        }
    }

    #[test]
    fn barriers_near_the_pole(hyperbolic in any::<bool>(), kappa in 0.05f64..1.0, n in 2usize..4) {
        let m = if hyperbolic { ModelManifold::hyperbolic(n, kappa).unwrap() } else { ModelManifold::euclidean(n) };
        let radii = log_grid(1e-8, 0.5 * BARRIER_RHO0, 60);
        let lower = subsolution_margin(&m, lower_barrier_derivative(n), &radii).unwrap();
        let upper = subsolution_margin(&m, upper_barrier_derivative(n, BARRIER_RHO0), &radii).unwrap();
        prop_assert!(lower.min_margin() > 0.0);
        prop_assert!(upper.max_margin() < 0.0);
    }

    #[test]
    fn certified_c_is_a_supersolution(p in 1.01f64..1.2) {
        let m = ModelManifold::euclidean(3);
        let cert = find_c(&m, p, 1e-6, 1.0, 60).unwrap();
        prop_assert!(cert.report.max_margin() <= 0.0);
        // Re-evaluating on a finer grid of the certified range keeps the sign.
        let top = (0.5 / cert.c as f64).min(1.0);
        let fine = p_supersolution_margin(&m, p, cert.c as f64, &log_grid(1e-6, top, 400)).unwrap();
        prop_assert!(fine.max_margin() <= 0.0);
    }
}
