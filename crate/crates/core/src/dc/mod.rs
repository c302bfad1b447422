//! Static analysis of the cross-coupled latch.
//!
//! Transfer curves, butterfly construction, read/hold/write noise margins,
//! trip point, read disturb level and the two bisected margins (word-line
//! voltage margin and supply read retention voltage).

pub mod snm;
pub mod solve;

use crate::cell::{BiasCondition, CellDesign, CellState, Node};
use crate::error::SolverError;

pub use snm::{LobeSquares, Profile, Sampled};
pub use solve::{equilibria, node_inflow, solve_node, solve_output, stable_states, Equilibrium, Forced, NodeVoltages};

/// Default VTC grid step, V.
pub const VTC_STEP: f64 = 1e-3;
/// Step of the local refinement around square extrema, V.
pub const REFINE_STEP: f64 = 1e-4;
const REFINE_HALF_WIDTH: f64 = 5e-3;
/// Resolution of the bisected margins, V.
pub const MARGIN_STEP: f64 = 1e-3;

/// Loading applied to the swept inverter's output node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// Word-line off.
    Hold,
    /// Word-line on, both bit-lines high.
    Read,
    /// Word-line on, bit-lines driven differentially.
    Write,
}

impl LoadMode {
    pub fn of(bias: &BiasCondition) -> LoadMode {
        if bias.vwl == 0.0 {
            LoadMode::Hold
        } else if bias.vbl_a == bias.vbl_b {
            LoadMode::Read
        } else {
            LoadMode::Write
        }
    }
}

/// Voltage transfer characteristic of one inverter.
#[derive(Debug, Clone, PartialEq)]
pub struct Vtc {
    /// Node driven by the inverter (its input is the opposite node).
    pub inverter: Node,
    pub bias: BiasCondition,
    pub mode: LoadMode,
    pub vin: Vec<f64>,
    pub vout: Vec<f64>,
}

impl Sampled for Vtc {
    fn inputs(&self) -> &[f64] {
        &self.vin
    }
    fn outputs(&self) -> &[f64] {
        &self.vout
    }
}

fn linear_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round().max(1.0) as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

fn sweep(d: &CellDesign, bias: &BiasCondition, inverter: Node, vin: Vec<f64>) -> Result<Vtc, SolverError> {
    let mut vout = Vec::with_capacity(vin.len());
    let mut guess = bias.vcell;
    for &x in &vin {
        let y = solve_output(d, bias, inverter, x, guess)?;
        vout.push(y);
        guess = y;
    }
    Ok(Vtc {
        inverter,
        bias: *bias,
        mode: LoadMode::of(bias),
        vin,
        vout,
    })
}

/// Transfer curve of the inverter driving `inverter`, input swept over
/// `[0, Vcell]` at [`VTC_STEP`].
pub fn vtc(d: &CellDesign, bias: &BiasCondition, inverter: Node) -> Result<Vtc, SolverError> {
    sweep(d, bias, inverter, linear_grid(0.0, bias.vcell, VTC_STEP))
}

/// The two characteristics of a butterfly plot.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyCurve {
    /// `V_A = f_A(V_B)`.
    pub inv_a: Vtc,
    /// `V_B = f_B(V_A)`, drawn transposed.
    pub inv_b: Vtc,
}

impl ButterflyCurve {
    pub fn profile(&self) -> Profile {
        snm::profile(&self.inv_a, &self.inv_b)
    }
}

pub fn butterfly(d: &CellDesign, bias: &BiasCondition) -> Result<ButterflyCurve, SolverError> {
    Ok(ButterflyCurve {
        inv_a: vtc(d, bias, Node::A)?,
        inv_b: vtc(d, bias, Node::B)?,
    })
}

/// Interpolated point of a sampled curve at rotated coordinate `v`.
/// `transposed` selects curve 2 (`x = f(y)`).
fn point_at_v(c: &Vtc, v: f64, transposed: bool) -> Option<f64> {
    // Returns the input-axis coordinate of the point on the curve at v.
    let w = |i: usize| {
        let (x, y) = if transposed {
            (c.vout[i], c.vin[i])
        } else {
            (c.vin[i], c.vout[i])
        };
        (y - x) / std::f64::consts::SQRT_2
    };
    for i in 1..c.vin.len() {
        let (w0, w1) = (w(i - 1), w(i));
        if (w0 - v) * (w1 - v) <= 0.0 && w0 != w1 {
            let t = (v - w0) / (w1 - w0);
            return Some(c.vin[i - 1] + t * (c.vin[i] - c.vin[i - 1]));
        }
    }
    None
}

/// Resample both curves at [`REFINE_STEP`] around the square sitting at
/// rotated coordinate `v`, and rebuild the local profile.
fn local_profile(d: &CellDesign, bf: &ButterflyCurve, v: f64) -> Result<Option<Profile>, SolverError> {
    let (Some(xa), Some(yb)) = (point_at_v(&bf.inv_a, v, false), point_at_v(&bf.inv_b, v, true)) else {
        return Ok(None);
    };
    let window = |c: f64, top: f64| {
        let lo = (c - REFINE_HALF_WIDTH).max(0.0);
        let hi = (c + REFINE_HALF_WIDTH).min(top);
        linear_grid(lo, hi, REFINE_STEP)
    };
    let a = sweep(d, &bf.inv_a.bias, Node::A, window(xa, bf.inv_a.bias.vcell))?;
    let b = sweep(d, &bf.inv_b.bias, Node::B, window(yb, bf.inv_b.bias.vcell))?;
    Ok(Some(snm::profile(&a, &b)))
}

fn max_in(p: &Profile, positive: bool) -> f64 {
    p.d.iter().map(|&x| if positive { x } else { -x }).fold(0.0, f64::max) / std::f64::consts::SQRT_2
}

/// Lobe squares of a butterfly, refined to [`REFINE_STEP`] around each
/// coarse maximum.
pub fn butterfly_squares(d: &CellDesign, bf: &ButterflyCurve) -> Result<LobeSquares, SolverError> {
    let coarse = snm::lobe_squares(&bf.profile());
    let mut sq = coarse;
    if coarse.s1 > 0.0 {
        if let Some(p) = local_profile(d, bf, coarse.s1_at)? {
            sq.s1 = max_in(&p, true);
        }
    }
    if coarse.s0 > 0.0 {
        if let Some(p) = local_profile(d, bf, coarse.s0_at)? {
            sq.s0 = max_in(&p, false);
        }
    }
    Ok(sq)
}

/// Outcome flag attached to a margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginStatus {
    Ok,
    /// Butterfly is monostable under read bias.
    ReadUnstable,
    /// Write curves cross more than once or the cell cannot be written.
    WriteFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    /// Margin in volts; 0 when the status is a failure.
    pub value: f64,
    pub status: MarginStatus,
}

impl Margin {
    fn ok(value: f64) -> Self {
        Self {
            value,
            status: MarginStatus::Ok,
        }
    }

    fn failed(status: MarginStatus) -> Self {
        Self { value: 0.0, status }
    }
}

/// Static noise margin under an arbitrary bias: the smaller lobe square.
pub fn snm(d: &CellDesign, bias: &BiasCondition) -> Result<Margin, SolverError> {
    let bf = butterfly(d, bias)?;
    let sq = butterfly_squares(d, &bf)?;
    let m = sq.margin();
    Ok(if m > 0.0 {
        Margin::ok(m)
    } else {
        Margin::failed(MarginStatus::ReadUnstable)
    })
}

/// Read static noise margin. `bias` is normally [`BiasCondition::read`].
pub fn rsnm(d: &CellDesign, bias: &BiasCondition) -> Result<Margin, SolverError> {
    snm(d, bias)
}

/// Hold static noise margin: the read computation at word-line 0.
pub fn hold_snm(d: &CellDesign, vdd: f64) -> Result<Margin, SolverError> {
    snm(d, &BiasCondition::hold(vdd))
}

/// Write noise margin for writing `target` with word-line at `vwl`.
pub fn wnm_with(d: &CellDesign, vdd: f64, vwl: f64, target: CellState) -> Result<Margin, SolverError> {
    let bias = BiasCondition::write(vdd, vwl, target);
    let bf = butterfly(d, &bias)?;
    let Some((coarse, at)) = snm::write_gap(&bf.profile(), target) else {
        return Ok(Margin::failed(MarginStatus::WriteFailure));
    };
    let mut value = coarse;
    if let Some(p) = local_profile(d, &bf, at)? {
        if p.crossings().is_empty() && !p.d.is_empty() {
            value = p.d.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min) / std::f64::consts::SQRT_2;
        }
    }
    Ok(Margin::ok(value))
}

/// Write noise margin at full word-line, writing S0 into a cell holding S1.
pub fn wnm(d: &CellDesign, vdd: f64) -> Result<Margin, SolverError> {
    wnm_with(d, vdd, vdd, CellState::S0)
}

/// True when the cell under write bias has a single stable state and it is
/// `target`.
pub fn write_succeeds(d: &CellDesign, vdd: f64, vwl: f64, target: CellState) -> Result<bool, SolverError> {
    let st = stable_states(d, &BiasCondition::write(vdd, vwl, target))?;
    Ok(st.len() == 1 && st[0].voltages.state() == target)
}

/// True when both states survive a read access at the given word-line and
/// cell supply (bit-lines at `vdd`): there is a stable point on each side of
/// the `V_A = V_B` diagonal. Two stable points on the same side do not count.
pub fn retains_in_read(d: &CellDesign, vdd: f64, vwl: f64, vcell: f64) -> Result<bool, SolverError> {
    let bias = BiasCondition::read(vdd, vwl).with_vcell(vcell);
    let st = stable_states(d, &bias)?;
    let holds = |s: CellState| st.iter().any(|e| e.voltages.state() == s);
    Ok(holds(CellState::S0) && holds(CellState::S1))
}

/// Number of [`MARGIN_STEP`] cells in `[0, vdd]`.
pub fn margin_steps(vdd: f64) -> usize {
    (vdd / MARGIN_STEP).round() as usize
}

/// Largest `k` in `[0, n]` with `ok(k)`, for a predicate that holds on a
/// prefix `0..=k*` of the grid. Requires `ok(0)`.
fn last_true(n: usize, mut ok: impl FnMut(usize) -> Result<bool, SolverError>) -> Result<usize, SolverError> {
    if ok(n)? {
        return Ok(n);
    }
    let (mut lo, mut hi) = (0, n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Word-line voltage margin: largest word-line droop below `vdd` at which
/// writing S0 into S1 still succeeds, bisected on a 1 mV grid.
pub fn wlvm(d: &CellDesign, vdd: f64) -> Result<Margin, SolverError> {
    let n = margin_steps(vdd);
    let vwl = |k: usize| vdd - k as f64 * MARGIN_STEP;
    if !write_succeeds(d, vdd, vdd, CellState::S0)? {
        return Ok(Margin::failed(MarginStatus::WriteFailure));
    }
    let k = last_true(n, |k| write_succeeds(d, vdd, vwl(k), CellState::S0))?;
    Ok(Margin::ok(k as f64 * MARGIN_STEP))
}

/// Supply read retention voltage: `vdd` minus the lowest cell supply at
/// which both states survive a read with word-line at `vwl`, on a 1 mV grid.
pub fn srrv(d: &CellDesign, vdd: f64, vwl: f64) -> Result<Margin, SolverError> {
    let n = margin_steps(vdd);
    let vcell = |k: usize| vdd - k as f64 * MARGIN_STEP;
    if !retains_in_read(d, vdd, vwl, vdd)? {
        return Ok(Margin::failed(MarginStatus::ReadUnstable));
    }
    let k = last_true(n, |k| retains_in_read(d, vdd, vwl, vcell(k)))?;
    Ok(Margin::ok(k as f64 * MARGIN_STEP))
}

/// Switching voltage of an inverter in hold: the input at which its output
/// equals its input.
pub fn trip_point_of(d: &CellDesign, vdd: f64, inverter: Node) -> Result<f64, SolverError> {
    let bias = BiasCondition::hold(vdd);
    let (mut lo, mut hi) = (0.0, vdd);
    let mut guess = 0.5 * vdd;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        let out = solve_output(d, &bias, inverter, mid, guess)?;
        guess = out;
        if out > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Trip point of inverter A, the one whose input is disturbed when reading S1.
pub fn trip_point(d: &CellDesign, vdd: f64) -> Result<f64, SolverError> {
    trip_point_of(d, vdd, Node::A)
}

/// DC level of the '0' node of `state` under `bias`, with the '1' node
/// clamped at the cell supply.
pub fn v_read_of(d: &CellDesign, bias: &BiasCondition, state: CellState) -> Result<f64, SolverError> {
    let low = state.low_node();
    solve_output(d, bias, low, bias.vcell, 0.0)
}

/// Read-disturb level of node B for a cell holding S1.
pub fn v_read(d: &CellDesign, bias: &BiasCondition) -> Result<f64, SolverError> {
    v_read_of(d, bias, CellState::S1)
}

/// The four static margins plus trip and read-disturb levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub rsnm: f64,
    pub hold_snm: f64,
    pub wnm: f64,
    pub wlvm: f64,
    pub srrv: f64,
    pub v_trip: f64,
    pub v_read: f64,
    /// Failure flags raised by any of the margins.
    pub read_unstable: bool,
    pub write_failure: bool,
}

/// Full static characterization at nominal supply and full word-line.
pub fn stability_report(d: &CellDesign, vdd: f64) -> Result<StabilityReport, SolverError> {
    let read = BiasCondition::read(vdd, vdd);
    let rsnm = rsnm(d, &read)?;
    let hold = hold_snm(d, vdd)?;
    let wnm = wnm(d, vdd)?;
    let wlvm = wlvm(d, vdd)?;
    let srrv = srrv(d, vdd, vdd)?;
    let all = [rsnm, hold, wnm, wlvm, srrv];
    Ok(StabilityReport {
        rsnm: rsnm.value,
        hold_snm: hold.value,
        wnm: wnm.value,
        wlvm: wlvm.value,
        srrv: srrv.value,
        v_trip: trip_point(d, vdd)?,
        v_read: v_read(d, &read)?,
        read_unstable: all.iter().any(|m| m.status == MarginStatus::ReadUnstable),
        write_failure: all.iter().any(|m| m.status == MarginStatus::WriteFailure),
    })
}
