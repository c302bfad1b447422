use proptest::prelude::*;
use sram6t::device::{drain_current, subthreshold_current, BiasPoint, MosParams, Polarity};
use sram6t::Technology;

fn device(polarity: Polarity, w: f64) -> MosParams {
    let t = Technology::default();
    let card = match polarity {
        Polarity::Nmos => t.nmos,
        Polarity::Pmos => t.pmos,
    };
    MosParams::new(polarity, w, t.l_um, t.temperature, card)
}

fn polarity() -> impl Strategy<Value = Polarity> {
    prop_oneof![Just(Polarity::Nmos), Just(Polarity::Pmos)]
}

proptest! {
    #[test]
    fn no_current_without_drain_bias(p in polarity(), w in 0.05f64..5.0, vgs in -1.5f64..2.0) {
        let d = device(p, w);
        prop_assert_eq!(drain_current(&d, BiasPoint::new(vgs, 0.0)), 0.0);
        prop_assert_eq!(subthreshold_current(&d, BiasPoint::new(vgs, 0.0)), 0.0);
    }

    #[test]
    fn current_is_linear_in_width(
        p in polarity(),
        w in 0.05f64..2.0,
        k in 0.1f64..10.0,
        vgs in -0.5f64..1.5,
        vds in -1.5f64..1.5,
    ) {
        let b = BiasPoint::new(vgs, vds);
        let i1 = drain_current(&device(p, w), b);
        let ik = drain_current(&device(p, k * w), b);
        prop_assert!((ik - k * i1).abs() <= 1e-12 * ik.abs().max(1e-30), "{ik} vs {}", k * i1);
    }

    #[test]
    fn odd_in_drain_bias_about_the_channel_midpoint(p in polarity(), vg in -0.5f64..1.5, vds in 0.0f64..1.5) {
        // Swapping drain and source: I(vgs, -vds) = -I(vgs + vds, vds).
        let d = device(p, 0.12);
        let fwd = drain_current(&d, BiasPoint::new(vg + vds, vds));
        let rev = drain_current(&d, BiasPoint::new(vg, -vds));
        prop_assert!((fwd + rev).abs() <= 1e-12 * fwd.abs().max(1e-30));
    }

    #[test]
    fn equals_subthreshold_expression_below_threshold(p in polarity(), below in 0.0f64..0.6, vds in 0.0f64..1.2) {
        let d = device(p, 0.12);
        let vgs = d.card.vt0 - d.card.eta_dibl * vds - below;
        let b = BiasPoint::new(vgs, vds);
        let (i, s) = (drain_current(&d, b), subthreshold_current(&d, b));
        prop_assert!((i - s).abs() <= 1e-12 * s.abs().max(1e-30));
    }
}

#[test]
fn monotone_in_gate_bias_on_a_grid() {
    const N: usize = 50;
    for p in [Polarity::Nmos, Polarity::Pmos] {
        let d = device(p, 0.12);
        for j in 0..N {
            let vds = 1.2 * j as f64 / (N - 1) as f64;
            let mut prev = drain_current(&d, BiasPoint::new(0.0, vds));
            for k in 1..N {
                let vgs = 1.2 * k as f64 / (N - 1) as f64;
                let i = drain_current(&d, BiasPoint::new(vgs, vds));
                assert!(i - prev >= -1e-12, "{p:?} vds {vds} vgs {vgs}: {prev} -> {i}");
                prev = i;
            }
        }
    }
}

#[test]
fn strictly_increasing_along_the_full_gate_sweep() {
    let d = device(Polarity::Nmos, 0.12);
    let mut prev = -1.0;
    for k in 0..=1200 {
        let i = drain_current(&d, BiasPoint::new(k as f64 * 1e-3, 1.2));
        assert!(i > prev, "vgs {} mV", k);
        prev = i;
    }
}

#[test]
fn subthreshold_slope_matches_ideality() {
    for p in [Polarity::Nmos, Polarity::Pmos] {
        let d = device(p, 0.12);
        let vt = d.thermal_voltage();
        let expected = 1.0 / (d.card.n_slope * vt * std::f64::consts::LN_10);
        for vds in [0.1, 0.6, 1.2] {
            let vgs = d.card.vt0 - 0.3;
            let h = 1e-3;
            let lo = drain_current(&d, BiasPoint::new(vgs - h, vds)).log10();
            let hi = drain_current(&d, BiasPoint::new(vgs + h, vds)).log10();
            let slope = (hi - lo) / (2.0 * h);
            assert!(
                (slope / expected - 1.0).abs() < 0.02,
                "{p:?} vds {vds}: {slope} vs {expected}"
            );
        }
    }
}

#[test]
fn continuous_across_the_stitch() {
    let delta = 1e-6;
    for p in [Polarity::Nmos, Polarity::Pmos] {
        let d = device(p, 0.12);
        for k in 0..=24 {
            let vds = 0.05 * k as f64;
            let at = d.card.vt0 - d.card.eta_dibl * vds;
            let k_bound = d.stitch_bound(vds, delta);
            let below = drain_current(&d, BiasPoint::new(at - delta, vds));
            let mid = drain_current(&d, BiasPoint::new(at, vds));
            let above = drain_current(&d, BiasPoint::new(at + delta, vds));
            assert!((mid - below).abs() <= k_bound * delta * (1.0 + 1e-6), "{p:?} vds {vds}");
            assert!((above - mid).abs() <= k_bound * delta * (1.0 + 1e-6), "{p:?} vds {vds}");
        }
    }
}
