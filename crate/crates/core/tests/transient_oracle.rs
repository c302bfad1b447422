//! Integrator convergence and the transient protocols against DC results
//! and exhaustive charge sweeps.

mod common;

use sram6t::dc;
use sram6t::transient::{read_delay, read_disturb, write_delay, write_energy, TransientConfig};
use sram6t::{make_cell, BiasCondition, CellDesign, Technology};

fn cell(cr: f64) -> CellDesign {
    let t = Technology::default();
    make_cell(cr, 1.0, t.wmin_um, &t).unwrap()
}

fn halved(cfg: &TransientConfig) -> TransientConfig {
    TransientConfig {
        step: 0.5 * cfg.step,
        ..*cfg
    }
}

#[test]
fn delays_are_converged_in_the_time_step() {
    let cfg = TransientConfig::default();
    for cr in [1.0, 2.0] {
        let d = cell(cr);
        let r = read_delay(&d, d.vdd, 0.1, &cfg).unwrap();
        let r2 = read_delay(&d, d.vdd, 0.1, &halved(&cfg)).unwrap();
        assert!((r2 / r - 1.0).abs() < 5e-3, "read cr {cr}: {r} vs {r2}");
        let w = write_delay(&d, &cfg).unwrap();
        let w2 = write_delay(&d, &halved(&cfg)).unwrap();
        assert!((w2 / w - 1.0).abs() < 5e-3, "write cr {cr}: {w} vs {w2}");
    }
}

#[test]
fn read_disturb_settles_at_the_dc_read_level() {
    let cfg = TransientConfig::default();
    for cr in [1.0, 1.5, 2.0, 2.5] {
        let d = cell(cr);
        for vwl in [1.0, d.vdd] {
            let rd = read_disturb(&d, vwl, &cfg).unwrap();
            let dc = dc::v_read(&d, &BiasCondition::read(d.vdd, vwl)).unwrap();
            assert!(
                (rd.settled - dc).abs() < 2e-3,
                "cr {cr} vwl {vwl}: {} vs {dc}",
                rd.settled
            );
            assert!(!rd.destructive);
        }
    }
}

#[test]
fn write_energy_grows_with_cell_ratio() {
    let cfg = TransientConfig::default();
    let e1 = write_energy(&cell(1.0), &cfg).unwrap();
    let e2 = write_energy(&cell(2.0), &cfg).unwrap();
    assert!(e1 > 0.0 && e1 < e2, "{e1} vs {e2}");
}

#[test]
fn critical_charge_bisection_matches_linear_sweep() {
    common::qcrit_suite(10).unwrap();
}

#[test]
fn integrator_matches_rc_discharge() {
    common::rc_suite().unwrap();
}
