//! Closed-form alpha-particle soft-error-rate model.
//!
//! ```text
//! SER      = Φ · (A_n · exp(−β_e·Q_e) + A_p · exp(−β_h·Q_h))
//! Q_e      = a_e + b_e·Wn + c_e·Wp
//! Q_h      = a_h + b_h·Wn + c_h·Wp
//! ```
//!
//! Charges are carried in fC and the collection slopes β in 1/C; the single
//! conversion between the two happens in [`collection_exponent`].

use serde::{Deserialize, Serialize};

use crate::cell::CellDesign;

/// Femtocoulomb in coulombs.
pub const FEMTO: f64 = 1e-15;

/// Fitted 65 nm alpha-particle parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SerParams {
    /// Particle flux, normalized units.
    pub flux: f64,
    /// Electron collection slope, 1/C.
    pub beta_e: f64,
    /// Hole collection slope, 1/C.
    pub beta_h: f64,
    pub a_e_fc: f64,
    pub b_e_fc_per_um: f64,
    pub c_e_fc_per_um: f64,
    pub a_h_fc: f64,
    pub b_h_fc_per_um: f64,
    pub c_h_fc_per_um: f64,
    /// Drain extension length used for the sensitive diffusion area, µm.
    pub l_drain_um: f64,
}

impl Default for SerParams {
    fn default() -> Self {
        Self {
            flux: 1.0,
            beta_e: 4.95e14,
            beta_h: 1.26e15,
            a_e_fc: 0.45,
            b_e_fc_per_um: 3.6,
            c_e_fc_per_um: 6.5,
            a_h_fc: 0.53,
            b_h_fc_per_um: 11.3,
            c_h_fc_per_um: 2.67,
            l_drain_um: 0.2,
        }
    }
}

/// `β·Q` with `β` in 1/C and `Q` in fC.
pub fn collection_exponent(beta_per_coulomb: f64, q_fc: f64) -> f64 {
    beta_per_coulomb * q_fc * FEMTO
}

/// Critical charges `(Q_e, Q_h)` in fC from the linear width fit.
pub fn qcrit_linear(wn: f64, wp: f64, p: &SerParams) -> (f64, f64) {
    let qe = p.a_e_fc + p.b_e_fc_per_um * wn + p.c_e_fc_per_um * wp;
    let qh = p.a_h_fc + p.b_h_fc_per_um * wn + p.c_h_fc_per_um * wp;
    (qe, qh)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerReport {
    pub q_crit_e_fc: f64,
    pub q_crit_h_fc: f64,
    /// Electron (nMOS drain) contribution.
    pub electron_term: f64,
    /// Hole (pMOS drain) contribution.
    pub hole_term: f64,
    pub ser: f64,
}

/// Soft-error rate from explicit widths, µm.
pub fn ser_for_widths(wn: f64, wp: f64, p: &SerParams) -> SerReport {
    let (qe, qh) = qcrit_linear(wn, wp, p);
    let area_n = wn * p.l_drain_um;
    let area_p = wp * p.l_drain_um;
    let electron_term = p.flux * area_n * (-collection_exponent(p.beta_e, qe)).exp();
    let hole_term = p.flux * area_p * (-collection_exponent(p.beta_h, qh)).exp();
    SerReport {
        q_crit_e_fc: qe,
        q_crit_h_fc: qh,
        electron_term,
        hole_term,
        ser: electron_term + hole_term,
    }
}

pub fn ser(d: &CellDesign, p: &SerParams) -> SerReport {
    ser_for_widths(d.wn, d.wp, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerSweepRow {
    pub cr: f64,
    pub q_crit_e_fc: f64,
    pub q_crit_h_fc: f64,
    pub ser_norm: f64,
}

/// SER over a CR grid at PR = 1, normalized to the CR = 1 cell.
pub fn ser_sweep(cr_grid: &[f64], wmin: f64, p: &SerParams) -> Vec<SerSweepRow> {
    let reference = ser_for_widths(wmin, wmin, p).ser;
    cr_grid
        .iter()
        .map(|&cr| {
            let r = ser_for_widths(cr * wmin, wmin, p);
            SerSweepRow {
                cr,
                q_crit_e_fc: r.q_crit_e_fc,
                q_crit_h_fc: r.q_crit_h_fc,
                ser_norm: if reference > 0.0 { r.ser / reference } else { 0.0 },
            }
        })
        .collect()
}
