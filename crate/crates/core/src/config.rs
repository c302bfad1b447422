//! Run configuration: a strict TOML document.
//!
//! Every table rejects unknown keys. Missing tables fall back to the shipped
//! defaults, so a file containing only `[cell]` is a complete configuration.
//! The schema is documented in `docs/config.md`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cell::{make_cell, CellDesign, Technology, Transistor};
use crate::error::ConfigError;
use crate::transient::{self, TransientConfig};
use crate::variability::Metric;

/// Adjustments applied to one transistor after sizing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceOverride {
    /// Threshold shift, V.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vt_shift_v: Option<f64>,
    /// Width replacing the sized value, µm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_um: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellBlock {
    pub cr: f64,
    pub pr: f64,
    /// Overrides the technology minimum width, µm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wmin_um: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<Transistor, DeviceOverride>,
}

impl Default for CellBlock {
    fn default() -> Self {
        Self {
            cr: 1.0,
            pr: 1.0,
            wmin_um: None,
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    /// Cell ratios visited by `sweep-cr`.
    pub cr_grid: Vec<f64>,
    /// Word-line levels visited by `sweep-vwl`, V.
    pub vwl_grid: Vec<f64>,
    /// Cell ratio of the full-word-line reference in `sweep-vwl`.
    pub reference_cr: f64,
    /// Reduced word-line level of the read-assist delay, V.
    pub assist_vwl_v: f64,
    /// Include transient timing and critical charge in sweeps.
    pub timing: bool,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            cr_grid: vec![1.0, 1.5, 2.0, 2.5],
            vwl_grid: (0..=24).map(|k| f64::from(k * 5) / 100.0).collect(),
            reference_cr: 2.0,
            assist_vwl_v: 1.0,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransientBlock {
    pub step_s: f64,
    /// Bit-line droop detected by the sense amplifier, V.
    pub sense_dv_v: f64,
    pub wl_slew_s: f64,
    pub tau_r_s: f64,
    pub tau_f_s: f64,
}

impl Default for TransientBlock {
    fn default() -> Self {
        let t = TransientConfig::default();
        Self {
            step_s: t.step,
            sense_dv_v: transient::SENSE_DV,
            wl_slew_s: t.wl_slew,
            tau_r_s: transient::TAU_R,
            tau_f_s: transient::TAU_F,
        }
    }
}

impl TransientBlock {
    pub fn config(&self) -> TransientConfig {
        TransientConfig {
            step: self.step_s,
            wl_slew: self.wl_slew_s,
            ..TransientConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloBlock {
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub metrics: Vec<Metric>,
    pub bins: usize,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    /// Metrics whose Gaussian failure probability `P(X < 0)` is reported
    /// also for a cell supply lowered by this fraction of Vdd.
    pub vcell_drop_fraction: f64,
}

impl Default for MonteCarloBlock {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: None,
            metrics: vec![Metric::VTrip, Metric::VRead, Metric::Wlvm, Metric::Srrv],
            bins: 40,
            threads: 0,
            vcell_drop_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub technology: Technology,
    pub cell: CellBlock,
    pub sweep: SweepBlock,
    pub transient: TransientBlock,
    pub montecarlo: MonteCarloBlock,
    pub output: OutputBlock,
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a positive number, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a non-negative number, got {v}")))
    }
}

fn check_card(prefix: &str, c: &crate::device::ModelCard) -> Result<(), ConfigError> {
    let k = |f: &str| format!("{prefix}.{f}");
    positive(&k("vt0"), c.vt0)?;
    positive(&k("mu_csth"), c.mu_csth)?;
    if !(c.n_slope >= 1.0) {
        return Err(invalid(&k("n_slope"), "must be >= 1"));
    }
    non_negative(&k("eta_dibl"), c.eta_dibl)?;
    positive(&k("k_sat"), c.k_sat)?;
    if !(c.alpha >= 1.0 && c.alpha <= 2.0) {
        return Err(invalid(&k("alpha"), "must lie in [1, 2]"));
    }
    positive(&k("vdsat_coeff"), c.vdsat_coeff)?;
    non_negative(&k("lambda"), c.lambda)
}

impl RunConfig {
    /// Parse and validate a TOML document.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.technology;
        positive("technology.vdd", t.vdd)?;
        positive("technology.temperature", t.temperature)?;
        positive("technology.wmin_um", t.wmin_um)?;
        positive("technology.l_um", t.l_um)?;
        non_negative("technology.a_vt_mv_um", t.a_vt_mv_um)?;
        check_card("technology.nmos", &t.nmos)?;
        check_card("technology.pmos", &t.pmos)?;
        non_negative("technology.caps.cj_f_per_um", t.caps.cj_f_per_um)?;
        non_negative("technology.caps.c_wire_node_f", t.caps.c_wire_node_f)?;
        non_negative("technology.caps.c_bitline_wire_f", t.caps.c_bitline_wire_f)?;
        if t.caps.cells_per_bitline == 0 {
            return Err(invalid("technology.caps.cells_per_bitline", "must be at least 1"));
        }
        let s = &t.ser;
        non_negative("technology.ser.flux", s.flux)?;
        for (k, v) in [
            ("beta_e", s.beta_e),
            ("beta_h", s.beta_h),
            ("a_e_fc", s.a_e_fc),
            ("b_e_fc_per_um", s.b_e_fc_per_um),
            ("c_e_fc_per_um", s.c_e_fc_per_um),
            ("a_h_fc", s.a_h_fc),
            ("b_h_fc_per_um", s.b_h_fc_per_um),
            ("c_h_fc_per_um", s.c_h_fc_per_um),
            ("l_drain_um", s.l_drain_um),
        ] {
            positive(&format!("technology.ser.{k}"), v)?;
        }

        let c = &self.cell;
        if !(c.cr >= 1.0 && c.cr.is_finite()) {
            return Err(invalid("cell.cr", format!("must be >= 1, got {}", c.cr)));
        }
        if !(c.pr >= 1.0 && c.pr.is_finite()) {
            return Err(invalid("cell.pr", format!("must be >= 1, got {}", c.pr)));
        }
        if let Some(w) = c.wmin_um {
            positive("cell.wmin_um", w)?;
        }
        for (t, o) in &c.overrides {
            if let Some(w) = o.w_um {
                positive(&format!("cell.overrides.{}.w_um", t.name()), w)?;
            }
            if let Some(v) = o.vt_shift_v {
                if !v.is_finite() {
                    return Err(invalid(
                        &format!("cell.overrides.{}.vt_shift_v", t.name()),
                        "must be finite",
                    ));
                }
            }
        }

        let sw = &self.sweep;
        if sw.cr_grid.is_empty() {
            return Err(invalid("sweep.cr_grid", "must not be empty"));
        }
        if sw.cr_grid.iter().any(|&x| !(1.0..=2.5).contains(&x)) {
            return Err(invalid("sweep.cr_grid", "values must lie in [1, 2.5]"));
        }
        if sw.vwl_grid.is_empty() {
            return Err(invalid("sweep.vwl_grid", "must not be empty"));
        }
        if sw.vwl_grid.iter().any(|&x| !(x >= 0.0 && x <= t.vdd)) {
            return Err(invalid("sweep.vwl_grid", "values must lie in [0, vdd]"));
        }
        if !(sw.reference_cr >= 1.0 && sw.reference_cr <= 2.5) {
            return Err(invalid("sweep.reference_cr", "must lie in [1, 2.5]"));
        }
        if !(sw.assist_vwl_v > 0.0 && sw.assist_vwl_v <= t.vdd) {
            return Err(invalid("sweep.assist_vwl_v", "must lie in (0, vdd]"));
        }

        let tr = &self.transient;
        positive("transient.step_s", tr.step_s)?;
        positive("transient.sense_dv_v", tr.sense_dv_v)?;
        positive("transient.wl_slew_s", tr.wl_slew_s)?;
        positive("transient.tau_r_s", tr.tau_r_s)?;
        if !(tr.tau_f_s > tr.tau_r_s) {
            return Err(invalid("transient.tau_f_s", "must exceed tau_r_s"));
        }

        let mc = &self.montecarlo;
        if mc.trials == 0 {
            return Err(invalid("montecarlo.trials", "must be at least 1"));
        }
        if mc.metrics.is_empty() {
            return Err(invalid("montecarlo.metrics", "must name at least one metric"));
        }
        if mc.bins == 0 {
            return Err(invalid("montecarlo.bins", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&mc.vcell_drop_fraction) {
            return Err(invalid("montecarlo.vcell_drop_fraction", "must lie in [0, 1)"));
        }
        if self.output.dir.as_os_str().is_empty() {
            return Err(invalid("output.dir", "must not be empty"));
        }
        Ok(())
    }

    fn wmin(&self) -> f64 {
        self.cell.wmin_um.unwrap_or(self.technology.wmin_um)
    }

    /// Cell at the given ratios with this configuration's overrides applied.
    pub fn design_at(&self, cr: f64, pr: f64) -> Result<CellDesign, ConfigError> {
        let mut d = make_cell(cr, pr, self.wmin(), &self.technology).map_err(|e| invalid("cell", e.to_string()))?;
        for (t, o) in &self.cell.overrides {
            let dev = d.device_mut(*t);
            if let Some(w) = o.w_um {
                dev.w = w;
            }
            if let Some(v) = o.vt_shift_v {
                *dev = dev.with_vt_shift(v);
            }
        }
        Ok(d)
    }

    /// The configured cell.
    pub fn design(&self) -> Result<CellDesign, ConfigError> {
        self.design_at(self.cell.cr, self.cell.pr)
    }
}
