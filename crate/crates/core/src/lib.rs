//! 6T SRAM bit-cell characterization.
//!
//! Starting from a compact transistor model and a cell sizing (cell ratio CR,
//! pull-up ratio PR) the crate computes static stability metrics (RSNM, hold
//! SNM, WNM, WLVM, SRRV), intrinsic read/write timing, hold leakage and write
//! energy, critical charge and alpha-particle soft-error rate, and Monte
//! Carlo distributions under local threshold-voltage mismatch.

// Range checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cell;
pub mod config;
pub mod dc;
pub mod device;
pub mod error;
pub mod power;
pub mod report;
pub mod ser;
pub mod transient;
pub mod variability;

pub use cell::{make_cell, BiasCondition, CellDesign, CellState, Node, Technology, Transistor};
pub use error::{ConfigError, ModelError, SizingError, SolverError, TransientError};
