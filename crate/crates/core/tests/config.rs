use std::path::Path;

use sram6t::config::RunConfig;

/// Walks two TOML trees and checks they share keys, with floats equal to a
/// relative tolerance and everything else equal exactly.
fn close(a: &toml::Value, b: &toml::Value, path: &str) -> Result<(), String> {
    use toml::Value::*;
    match (a, b) {
        (Table(x), Table(y)) => {
            let kx: Vec<_> = x.keys().collect();
            let ky: Vec<_> = y.keys().collect();
            if kx != ky {
                return Err(format!("{path}: keys {kx:?} vs {ky:?}"));
            }
            x.iter().try_for_each(|(k, v)| close(v, &y[k], &format!("{path}.{k}")))
        }
        (Array(x), Array(y)) if x.len() == y.len() => x
            .iter()
            .zip(y)
            .enumerate()
            .try_for_each(|(i, (u, v))| close(u, v, &format!("{path}[{i}]"))),
        (Float(x), Float(y)) if (x - y).abs() <= 1e-9 * x.abs().max(y.abs()) => Ok(()),
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs {b}")),
    }
}

#[test]
fn shipped_defaults_file_matches_the_built_in_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/default.toml");
    let shipped = RunConfig::load(&path).unwrap();
    shipped.validate().unwrap();
    let a: toml::Value = toml::from_str(&shipped.to_toml()).unwrap();
    let b: toml::Value = toml::from_str(&RunConfig::default().to_toml()).unwrap();
    close(&a, &b, "").unwrap();
}

#[test]
fn defaults_survive_a_round_trip() {
    let d = RunConfig::default();
    assert_eq!(RunConfig::from_toml(&d.to_toml()).unwrap(), d);
}

#[test]
fn empty_file_means_defaults() {
    assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
}

#[test]
fn partial_tables_fill_in_the_rest() {
    let c = RunConfig::from_toml("[cell]\ncr = 2.0\n[sweep]\ntiming = false\n").unwrap();
    let d = RunConfig::default();
    assert_eq!(c.cell.cr, 2.0);
    assert_eq!(c.cell.pr, d.cell.pr);
    assert!(!c.sweep.timing);
    assert_eq!(c.sweep.cr_grid, d.sweep.cr_grid);
}

#[test]
fn incomplete_model_card_is_rejected() {
    let e = RunConfig::from_toml("[technology.pmos]\nvt0 = 0.4\n").unwrap_err();
    assert!(e.to_string().contains("mu_csth"), "{e}");
}
