use proptest::prelude::*;
use sram6t::variability::{gaussian_fail_prob, monte_carlo, perturb, trial_rng, McConfig, Metric, PelgromModel};
use sram6t::{make_cell, Technology};

#[test]
fn gaussian_tails_match_tabulated_values() {
    // (mean, std, threshold, expected)
    let cases = [
        (0.0, 1.0, -6.0, 9.865876450377e-10),
        (0.0, 1.0, -3.0, 1.349898031630e-3),
        (0.5, 0.1, 0.0, 2.866515718791e-7),
        (0.0, 1.0, -9.5, 1.049451507536e-21),
    ];
    for (m, s, t, want) in cases {
        let got = gaussian_fail_prob(m, s, t);
        assert!((got / want - 1.0).abs() < 1e-9, "{m} {s} {t}: {got} vs {want}");
    }
}

/// Composite Simpson rule for the standard normal density on `[a, b]`.
fn simpson(a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for k in 1..n {
        s += pdf(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn tail_agrees_with_quadrature() {
    for k in 0..=24 {
        let z = 0.5 * k as f64;
        // Upper tail integrated out to z + 15, far beyond double precision.
        let quad = simpson(z, z + 15.0, 20_000);
        let got = gaussian_fail_prob(0.0, 1.0, -z);
        assert!((got / quad - 1.0).abs() < 5e-4, "z {z}: {got} vs {quad}");
    }
}

proptest! {
    #[test]
    fn tails_are_symmetric(m in -1.0f64..1.0, s in 0.01f64..0.5, d in 0.0f64..3.0) {
        let lo = gaussian_fail_prob(m, s, m - d);
        let hi = 1.0 - gaussian_fail_prob(m, s, m + d);
        prop_assert!((lo - hi).abs() < 1e-12);
    }

    #[test]
    fn probability_increases_with_threshold(m in -1.0f64..1.0, s in 0.01f64..0.5, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(gaussian_fail_prob(m, s, a) <= gaussian_fail_prob(m, s, b));
    }
}

#[test]
fn perturbation_is_a_pure_function_of_seed_and_trial() {
    let t = Technology::default();
    let d = make_cell(1.0, 1.0, t.wmin_um, &t).unwrap();
    let m = PelgromModel::new(t.a_vt_mv_um);
    let a = perturb(&d, &m, &mut trial_rng(99, 17));
    let b = perturb(&d, &m, &mut trial_rng(99, 17));
    let c = perturb(&d, &m, &mut trial_rng(99, 18));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let t = Technology::default();
    let d = make_cell(1.0, 1.0, t.wmin_um, &t).unwrap();
    let m = PelgromModel::new(t.a_vt_mv_um);
    let run = |threads| {
        let cfg = McConfig {
            threads,
            ..McConfig::new(400, 5)
        };
        monte_carlo(&d, &m, &cfg, Metric::VTrip)
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.samples, four.samples);
    assert_eq!(one.censored, four.censored);
    assert_eq!(one.histogram.counts, four.histogram.counts);
    assert_eq!(one.mean.to_bits(), four.mean.to_bits());
    assert_eq!(one.std.to_bits(), four.std.to_bits());
}

#[test]
fn spread_shrinks_with_device_area() {
    let t = Technology::default();
    let m = PelgromModel::new(t.a_vt_mv_um);
    let cfg = McConfig::new(2000, 3);
    let small = make_cell(1.0, 1.0, t.wmin_um, &t).unwrap();
    let large = make_cell(1.0, 1.0, 4.0 * t.wmin_um, &t).unwrap();
    let s1 = monte_carlo(&small, &m, &cfg, Metric::VTrip).std;
    let s4 = monte_carlo(&large, &m, &cfg, Metric::VTrip).std;
    // Every width quadruples, so each threshold sigma halves.
    assert!((s1 / s4 - 2.0).abs() < 0.2, "{s1} vs {s4}");
}
