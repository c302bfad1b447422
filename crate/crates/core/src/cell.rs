//! 6T cell description: sizing from (CR, PR), node capacitances, relative
//! area and the named bias conditions.
//!
//! Transistor naming follows the usual schematic: `N_A`/`N_B` pull-downs,
//! `P_A`/`P_B` pull-ups, `NA_A`/`NA_B` access devices. Inverter A drives node
//! A (gates tied to node B), inverter B drives node B.

use serde::{Deserialize, Serialize};

use crate::device::{ModelCard, MosParams, Polarity};
use crate::error::SizingError;
use crate::ser::SerParams;

/// Capacitance coefficients of the linear node/bit-line model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapModel {
    /// Junction (plus overlap) capacitance per µm of drain width, F/µm.
    pub cj_f_per_um: f64,
    /// Fixed wiring capacitance per storage node, F.
    pub c_wire_node_f: f64,
    /// Bit-line wire capacitance, F.
    pub c_bitline_wire_f: f64,
    /// Cells sharing one bit-line.
    pub cells_per_bitline: u32,
}

/// Technology-level parameters shared by every cell built from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Technology {
    /// Nominal supply, V.
    pub vdd: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Minimum drawn width, µm.
    pub wmin_um: f64,
    /// Drawn channel length, µm.
    pub l_um: f64,
    pub nmos: ModelCard,
    pub pmos: ModelCard,
    pub caps: CapModel,
    /// Pelgrom coefficient for local Vt mismatch, mV·µm.
    pub a_vt_mv_um: f64,
    pub ser: SerParams,
}

impl Default for CapModel {
    fn default() -> Self {
        crate::calibration::shipped_technology().caps
    }
}

impl Default for Technology {
    fn default() -> Self {
        crate::calibration::shipped_technology()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Transistor {
    #[serde(rename = "N_A")]
    PullDownA,
    #[serde(rename = "N_B")]
    PullDownB,
    #[serde(rename = "P_A")]
    PullUpA,
    #[serde(rename = "P_B")]
    PullUpB,
    #[serde(rename = "NA_A")]
    AccessA,
    #[serde(rename = "NA_B")]
    AccessB,
}

impl Transistor {
    pub const ALL: [Transistor; 6] = [
        Transistor::PullDownA,
        Transistor::PullDownB,
        Transistor::PullUpA,
        Transistor::PullUpB,
        Transistor::AccessA,
        Transistor::AccessB,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Transistor::PullDownA => "N_A",
            Transistor::PullDownB => "N_B",
            Transistor::PullUpA => "P_A",
            Transistor::PullUpB => "P_B",
            Transistor::AccessA => "NA_A",
            Transistor::AccessB => "NA_B",
        }
    }
}

/// Storage node (equivalently, the inverter driving it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    A,
    B,
}

impl Node {
    pub fn other(self) -> Node {
        match self {
            Node::A => Node::B,
            Node::B => Node::A,
        }
    }

    pub fn pull_down(self) -> Transistor {
        match self {
            Node::A => Transistor::PullDownA,
            Node::B => Transistor::PullDownB,
        }
    }

    pub fn pull_up(self) -> Transistor {
        match self {
            Node::A => Transistor::PullUpA,
            Node::B => Transistor::PullUpB,
        }
    }

    pub fn access(self) -> Transistor {
        match self {
            Node::A => Transistor::AccessA,
            Node::B => Transistor::AccessB,
        }
    }
}

/// Logical content of the cell. `S1` means node A high, node B low.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    S0,
    S1,
}

impl CellState {
    pub fn complement(self) -> CellState {
        match self {
            CellState::S0 => CellState::S1,
            CellState::S1 => CellState::S0,
        }
    }

    /// Ideal node voltages `(V_A, V_B)` for this state.
    pub fn node_voltages(self, vcell: f64) -> (f64, f64) {
        match self {
            CellState::S1 => (vcell, 0.0),
            CellState::S0 => (0.0, vcell),
        }
    }

    /// Node holding the logic '1'.
    pub fn high_node(self) -> Node {
        match self {
            CellState::S1 => Node::A,
            CellState::S0 => Node::B,
        }
    }

    pub fn low_node(self) -> Node {
        self.high_node().other()
    }

    /// State whose high node is `node`.
    pub fn with_high(node: Node) -> CellState {
        match node {
            Node::A => CellState::S1,
            Node::B => CellState::S0,
        }
    }
}

/// Terminal voltages applied to the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasCondition {
    pub vdd: f64,
    pub vcell: f64,
    pub vwl: f64,
    pub vbl_a: f64,
    pub vbl_b: f64,
}

impl BiasCondition {
    /// Standby: word-line off, both bit-lines precharged.
    pub fn hold(vdd: f64) -> Self {
        Self::read(vdd, 0.0)
    }

    /// Read access with both bit-lines precharged to `vdd`.
    pub fn read(vdd: f64, vwl: f64) -> Self {
        Self {
            vdd,
            vcell: vdd,
            vwl,
            vbl_a: vdd,
            vbl_b: vdd,
        }
    }

    /// Write of S0 into a cell: BL_A driven low, BL_B high.
    pub fn write_s0(vdd: f64, vwl: f64) -> Self {
        Self {
            vdd,
            vcell: vdd,
            vwl,
            vbl_a: 0.0,
            vbl_b: vdd,
        }
    }

    pub fn write_s1(vdd: f64, vwl: f64) -> Self {
        Self {
            vdd,
            vcell: vdd,
            vwl,
            vbl_a: vdd,
            vbl_b: 0.0,
        }
    }

    /// Write bias that drives the cell towards `target`.
    pub fn write(vdd: f64, vwl: f64, target: CellState) -> Self {
        match target {
            CellState::S0 => Self::write_s0(vdd, vwl),
            CellState::S1 => Self::write_s1(vdd, vwl),
        }
    }

    pub fn with_vcell(mut self, vcell: f64) -> Self {
        self.vcell = vcell;
        self
    }

    pub fn bitline(&self, node: Node) -> f64 {
        match node {
            Node::A => self.vbl_a,
            Node::B => self.vbl_b,
        }
    }

    /// Highest voltage present on any terminal of the cell core.
    pub fn top_rail(&self) -> f64 {
        self.vcell.max(self.vbl_a).max(self.vbl_b)
    }

    pub fn is_valid(&self) -> bool {
        [self.vdd, self.vcell, self.vwl, self.vbl_a, self.vbl_b]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// A sized 6T cell with per-transistor device parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDesign {
    /// Pull-down width, µm.
    pub wn: f64,
    /// Pull-up width, µm.
    pub wp: f64,
    /// Access width, µm.
    pub wacc: f64,
    /// Channel length, µm.
    pub l: f64,
    pub vdd: f64,
    pub caps: CapModel,
    devices: [MosParams; 6],
}

/// Build a symmetric cell from cell ratio and pull-up ratio.
///
/// The access device is always minimum width; `Wn = CR·Wacc`,
/// `Wp = PR·Wacc`.
pub fn make_cell(cr: f64, pr: f64, wmin: f64, tech: &Technology) -> Result<CellDesign, SizingError> {
    if !(cr >= 1.0) || !cr.is_finite() {
        return Err(SizingError::CellRatio(cr));
    }
    if !(pr >= 1.0) || !pr.is_finite() {
        return Err(SizingError::PullUpRatio(pr));
    }
    if !(wmin > 0.0) || !wmin.is_finite() {
        return Err(SizingError::MinWidth(wmin));
    }
    let wacc = wmin;
    let wn = cr * wacc;
    let wp = pr * wacc;
    let t = tech.temperature;
    let l = tech.l_um;
    let n = |w| MosParams::new(Polarity::Nmos, w, l, t, tech.nmos);
    let p = |w| MosParams::new(Polarity::Pmos, w, l, t, tech.pmos);
    let devices = [n(wn), n(wn), p(wp), p(wp), n(wacc), n(wacc)];
    for d in &devices {
        d.validate()?;
    }
    Ok(CellDesign {
        wn,
        wp,
        wacc,
        l,
        vdd: tech.vdd,
        caps: tech.caps,
        devices,
    })
}

impl CellDesign {
    pub fn cr(&self) -> f64 {
        self.wn / self.wacc
    }

    pub fn pr(&self) -> f64 {
        self.wp / self.wacc
    }

    pub fn device(&self, t: Transistor) -> &MosParams {
        &self.devices[t.index()]
    }

    pub fn device_mut(&mut self, t: Transistor) -> &mut MosParams {
        &mut self.devices[t.index()]
    }

    pub fn devices(&self) -> &[MosParams; 6] {
        &self.devices
    }

    /// Copy with one transistor's threshold shifted by `dvt` volts.
    pub fn with_vt_shift(&self, t: Transistor, dvt: f64) -> CellDesign {
        let mut d = self.clone();
        let dev = d.device_mut(t);
        *dev = dev.with_vt_shift(dvt);
        d
    }

    /// Copy with every device at a new temperature.
    pub fn at_temperature(&self, temperature: f64) -> CellDesign {
        let mut d = self.clone();
        for dev in d.devices.iter_mut() {
            dev.temperature = temperature;
        }
        d
    }

    /// Storage-node capacitance: junctions of the three drains on the node
    /// plus fixed wiring.
    pub fn node_capacitance(&self, node: Node) -> f64 {
        let w = self.device(node.pull_down()).w + self.device(node.pull_up()).w + self.device(node.access()).w;
        self.caps.cj_f_per_um * w + self.caps.c_wire_node_f
    }

    /// Lumped bit-line capacitance on the given side.
    pub fn bitline_capacitance(&self, node: Node) -> f64 {
        f64::from(self.caps.cells_per_bitline) * self.caps.cj_f_per_um * self.device(node.access()).w
            + self.caps.c_bitline_wire_f
    }
}

pub fn node_capacitance(d: &CellDesign, node: Node) -> f64 {
    d.node_capacitance(node)
}

/// Cell area relative to the minimum-size cell, for PR = 1.
///
/// Affine in CR through (1, 1) and (2, 4/3): the CR = 1 cell is 25% smaller
/// than the CR = 2 cell.
pub fn relative_area(d: &CellDesign) -> Result<f64, SizingError> {
    let pr = d.pr();
    if (pr - 1.0).abs() > 1e-12 {
        return Err(SizingError::AreaNeedsUnitPullUp(pr));
    }
    Ok(relative_area_for_cr(d.cr()))
}

pub fn relative_area_for_cr(cr: f64) -> f64 {
    1.0 + (cr - 1.0) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tech() -> Technology {
        Technology::default()
    }

    #[test]
    fn minimum_size_cell_has_equal_widths() {
        let d = make_cell(1.0, 1.0, 0.12, &tech()).unwrap();
        assert_eq!((d.wn, d.wp, d.wacc), (0.12, 0.12, 0.12));
        assert_eq!(d.cr(), 1.0);
        assert_eq!(d.pr(), 1.0);
    }

    #[test]
    fn conventional_cell_widths() {
        let d = make_cell(2.0, 1.0, 0.12, &tech()).unwrap();
        assert!((d.wn - 0.24).abs() < 1e-15);
        assert_eq!(d.wp, 0.12);
        assert_eq!(d.wacc, 0.12);
        assert_eq!(d.device(Transistor::PullDownA), d.device(Transistor::PullDownB));
        assert_eq!(d.device(Transistor::AccessA), d.device(Transistor::AccessB));
    }

    #[test]
    fn rejects_undersized_ratios() {
        assert_eq!(make_cell(0.5, 1.0, 0.12, &tech()), Err(SizingError::CellRatio(0.5)));
        assert_eq!(make_cell(1.0, 0.9, 0.12, &tech()), Err(SizingError::PullUpRatio(0.9)));
        assert!(make_cell(1.0, 1.0, 0.0, &tech()).is_err());
        assert!(make_cell(f64::NAN, 1.0, 0.12, &tech()).is_err());
    }

    #[test]
    fn node_capacitance_ratio_without_wiring() {
        let mut t = tech();
        t.caps.c_wire_node_f = 0.0;
        let c1 = make_cell(1.0, 1.0, 0.12, &t).unwrap();
        let c2 = make_cell(2.0, 1.0, 0.12, &t).unwrap();
        let ratio = c2.node_capacitance(Node::A) / c1.node_capacitance(Node::A);
        assert!((ratio - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(c1.node_capacitance(Node::A), c1.node_capacitance(Node::B));

        let t = tech();
        let c1 = make_cell(1.0, 1.0, 0.12, &t).unwrap();
        let c2 = make_cell(2.0, 1.0, 0.12, &t).unwrap();
        let ratio = c2.node_capacitance(Node::A) / c1.node_capacitance(Node::A);
        assert!(ratio > 1.0 && ratio <= 4.0 / 3.0);
    }

    #[test]
    fn relative_area_anchors() {
        let t = tech();
        let area = |cr| relative_area(&make_cell(cr, 1.0, 0.12, &t).unwrap()).unwrap();
        assert_eq!(area(1.0), 1.0);
        assert!((area(2.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((area(2.5) - 1.5).abs() < 1e-15);
        assert!(relative_area(&make_cell(1.0, 2.0, 0.12, &t).unwrap()).is_err());
    }

    #[test]
    fn state_helpers() {
        assert_eq!(CellState::S1.complement(), CellState::S0);
        assert_eq!(CellState::S1.node_voltages(1.2), (1.2, 0.0));
        assert_eq!(CellState::S0.high_node(), Node::B);
        assert_eq!(CellState::with_high(Node::A), CellState::S1);
    }

    #[test]
    fn named_biases() {
        let h = BiasCondition::hold(1.2);
        assert_eq!(h.vwl, 0.0);
        assert_eq!((h.vbl_a, h.vbl_b), (1.2, 1.2));
        assert_eq!(BiasCondition::read(1.2, 0.0), h);
        let w = BiasCondition::write_s0(1.2, 1.2);
        assert_eq!((w.vbl_a, w.vbl_b, w.vwl), (0.0, 1.2, 1.2));
    }
}
