//! Soft-error model against a direct evaluation written from the raw
//! table constants in SI units.

use proptest::prelude::*;
use sram6t::ser::{qcrit_linear, ser_for_widths, ser_sweep, SerParams};

/// Rate for widths in µm, with charges converted to coulombs up front.
fn reference_rate(wn: f64, wp: f64, flux: f64) -> f64 {
    let qe = (0.45 + 3.6 * wn + 6.5 * wp) * 1e-15;
    let qh = (0.53 + 11.3 * wn + 2.67 * wp) * 1e-15;
    let l_drain = 0.2;
    flux * (wn * l_drain * (-4.95e14 * qe).exp() + wp * l_drain * (-1.26e15 * qh).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_direct_evaluation(wn in 0.05f64..2.0, wp in 0.05f64..2.0, flux in 0.0f64..10.0) {
        let p = SerParams { flux, ..SerParams::default() };
        let got = ser_for_widths(wn, wp, &p);
        let want = reference_rate(wn, wp, flux);
        prop_assert!((got.ser - want).abs() <= 1e-12 * want.abs().max(1e-300));
        prop_assert!(got.electron_term >= 0.0 && got.hole_term >= 0.0);
        prop_assert!((got.electron_term + got.hole_term - got.ser).abs() <= 1e-15 * got.ser);
    }

    #[test]
    fn monotone_in_each_input(wn in 0.05f64..2.0, wp in 0.05f64..2.0) {
        let base = SerParams::default();
        let r = |p: &SerParams| ser_for_widths(wn, wp, p).ser;
        let r0 = r(&base);
        let more_flux = SerParams { flux: 2.0, ..base };
        let longer_drain = SerParams { l_drain_um: 0.3, ..base };
        let harder_e = SerParams { a_e_fc: base.a_e_fc + 0.1, ..base };
        let harder_h = SerParams { a_h_fc: base.a_h_fc + 0.1, ..base };
        prop_assert!(r(&more_flux) > r0);
        prop_assert!(r(&longer_drain) > r0);
        prop_assert!(r(&harder_e) < r0);
        prop_assert!(r(&harder_h) < r0);
    }

    #[test]
    fn width_independent_charges_reduce_to_closed_form(wn in 0.05f64..2.0, wp in 0.05f64..2.0) {
        let p = SerParams {
            b_e_fc_per_um: 0.0,
            c_e_fc_per_um: 0.0,
            b_h_fc_per_um: 0.0,
            c_h_fc_per_um: 0.0,
            ..SerParams::default()
        };
        let want = p.flux * p.l_drain_um
            * (wn * (-p.beta_e * p.a_e_fc * 1e-15).exp() + wp * (-p.beta_h * p.a_h_fc * 1e-15).exp());
        let got = ser_for_widths(wn, wp, &p).ser;
        prop_assert!((got - want).abs() <= 1e-14 * want);
    }
}

#[test]
fn minimum_and_conventional_critical_charges() {
    let p = SerParams::default();
    assert!((qcrit_linear(0.12, 0.12, &p).0 / 1.662 - 1.0).abs() < 1e-12);
    assert!((qcrit_linear(0.24, 0.12, &p).0 / 2.094 - 1.0).abs() < 1e-12);
}

#[test]
fn conventional_cell_is_about_forty_percent_worse() {
    let p = SerParams::default();
    let ratio = ser_for_widths(0.24, 0.12, &p).ser / ser_for_widths(0.12, 0.12, &p).ser;
    let want = reference_rate(0.24, 0.12, 1.0) / reference_rate(0.12, 0.12, 1.0);
    assert!((ratio - want).abs() < 1e-12);
    assert!((1.35..=1.50).contains(&ratio), "{ratio}");
}

#[test]
fn sweep_columns_increase_with_cell_ratio() {
    let rows = ser_sweep(&[1.0, 1.5, 2.0, 2.5], 0.12, &SerParams::default());
    for w in rows.windows(2) {
        assert!(w[1].ser_norm > w[0].ser_norm);
        assert!(w[1].q_crit_e_fc > w[0].q_crit_e_fc);
    }
}
