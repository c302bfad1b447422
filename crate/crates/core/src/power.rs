//! Hold-mode leakage decomposition.
//!
//! In hold with the cell storing a value, three devices are off with the
//! full supply across them: the pull-down on the '1' side (`I_S1`), the
//! pull-up on the '0' side (`I_S2`) and the access device on the '0' side,
//! which leaks from the precharged bit-line (`I_S3`). The access device on
//! the '1' side has no drain-source voltage and is ignored.

use crate::cell::{CellDesign, CellState};
use crate::device::{subthreshold_current, BiasPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageReport {
    /// Off pull-down on the '1' node, A.
    pub i_s1: f64,
    /// Off pull-up on the '0' node, A.
    pub i_s2: f64,
    /// Off access device into the '0' node, A.
    pub i_s3: f64,
}

impl LeakageReport {
    /// Leakage drawn from the cell supply, A.
    pub fn supply_total(&self) -> f64 {
        self.i_s1 + self.i_s2
    }

    /// Leakage drawn from the bit-line, A.
    pub fn bitline_total(&self) -> f64 {
        self.i_s3
    }

    pub fn total(&self) -> f64 {
        self.supply_total() + self.bitline_total()
    }
}

/// Leakage of a cell in hold at supply `vdd` (word-line at 0, bit-lines at
/// `vdd`). Each off device sees `Vgs = 0`, `|Vds| = vdd`.
pub fn leakage(d: &CellDesign, state: CellState, vdd: f64) -> LeakageReport {
    let high = state.high_node();
    let low = state.low_node();
    let off = BiasPoint::new(0.0, vdd);
    LeakageReport {
        i_s1: subthreshold_current(d.device(high.pull_down()), off),
        i_s2: subthreshold_current(d.device(low.pull_up()), off),
        i_s3: subthreshold_current(d.device(low.access()), off),
    }
}

/// Relative supply-leakage saving of `small` with respect to `large`.
pub fn supply_reduction(small: &LeakageReport, large: &LeakageReport) -> f64 {
    (large.supply_total() - small.supply_total()) / large.supply_total()
}
