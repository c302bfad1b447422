//! Time-domain simulation of the storage nodes and (optionally) floating
//! bit-lines.
//!
//! The integrator is implicit trapezoidal on a fixed step with a Newton solve
//! per step; a step whose Newton iteration fails is retried once with
//! backward Euler. Everything is deterministic for fixed inputs.

use crate::cell::{BiasCondition, CellDesign, CellState, Node, Transistor};
use crate::dc::{solve_node, Forced};
use crate::device::channel_current;
use crate::error::TransientError;
use crate::power;
use crate::ser::FEMTO;

/// Largest system the integrator handles: two storage nodes, two bit-lines.
pub const MAX_DIM: usize = 4;

/// Piecewise-linear source: `(time, value)` breakpoints, held constant
/// outside the first and last.
#[derive(Debug, Clone, PartialEq)]
pub struct Pwl {
    points: Vec<(f64, f64)>,
}

impl Pwl {
    pub fn constant(v: f64) -> Self {
        Self { points: vec![(0.0, v)] }
    }

    /// Build from breakpoints; times must be non-decreasing.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, TransientError> {
        if points.is_empty() {
            return Err(TransientError::Config("empty PWL schedule"));
        }
        if points.windows(2).any(|w| !(w[1].0 >= w[0].0)) {
            return Err(TransientError::Config("PWL times must be non-decreasing"));
        }
        Ok(Self { points })
    }

    /// Linear ramp from `v0` to `v1` starting at `t0` and lasting `slew`.
    pub fn ramp(t0: f64, slew: f64, v0: f64, v1: f64) -> Self {
        Self {
            points: vec![(t0, v0), (t0 + slew, v1)],
        }
    }

    /// Trapezoidal pulse: rise at `t0`, fall at `t1`, both lasting `slew`.
    pub fn pulse(t0: f64, t1: f64, slew: f64, low: f64, high: f64) -> Self {
        Self {
            points: vec![(t0, low), (t0 + slew, high), (t1, high), (t1 + slew, low)],
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let p = &self.points;
        if t <= p[0].0 {
            return p[0].1;
        }
        for w in p.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if t <= t1 {
                if t1 > t0 {
                    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                }
                return v1;
            }
        }
        p[p.len() - 1].1
    }
}

/// Which way collected charge moves the struck node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collection {
    /// Electrons collected at an nMOS drain: discharges the node.
    Electron,
    /// Holes collected at a pMOS drain: charges the node.
    Hole,
}

/// Double-exponential current pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Total collected charge, C.
    pub charge: f64,
    pub tau_r: f64,
    pub tau_f: f64,
    /// Onset time, s.
    pub t0: f64,
    pub node: Node,
    pub collection: Collection,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<(), TransientError> {
        if !(self.tau_r > 0.0 && self.tau_f > self.tau_r) {
            return Err(TransientError::Config("pulse needs tau_f > tau_r > 0"));
        }
        if !(self.charge >= 0.0) {
            return Err(TransientError::Config("pulse charge must be non-negative"));
        }
        Ok(())
    }

    /// Magnitude of the injected current at time `t`, A.
    pub fn current(&self, t: f64) -> f64 {
        let s = t - self.t0;
        if s <= 0.0 {
            return 0.0;
        }
        self.charge / (self.tau_f - self.tau_r) * ((-s / self.tau_f).exp() - (-s / self.tau_r).exp())
    }

    /// Current flowing into the struck node, with sign.
    pub fn inflow(&self, t: f64) -> f64 {
        match self.collection {
            Collection::Electron => -self.current(t),
            Collection::Hole => self.current(t),
        }
    }
}

/// Bit-line treatment during a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum BitLine {
    /// Ideal driver.
    Driven(Pwl),
    /// Lumped capacitor with an initial voltage and a constant sink current
    /// standing for the leakage of the unaccessed cells.
    Floating { capacitance: f64, v0: f64, sink: f64 },
}

/// Source schedule of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Stimulus {
    pub vcell: Pwl,
    pub vwl: Pwl,
    pub bl_a: BitLine,
    pub bl_b: BitLine,
    pub injection: Option<PulseSpec>,
}

impl Stimulus {
    /// Everything off except the cell supply; bit-lines driven at `vdd`.
    pub fn hold(vdd: f64) -> Self {
        Self {
            vcell: Pwl::constant(vdd),
            vwl: Pwl::constant(0.0),
            bl_a: BitLine::Driven(Pwl::constant(vdd)),
            bl_b: BitLine::Driven(Pwl::constant(vdd)),
            injection: None,
        }
    }

    fn bitline(&self, node: Node) -> &BitLine {
        match node {
            Node::A => &self.bl_a,
            Node::B => &self.bl_b,
        }
    }

    /// DC bias seen at time `t` with floating bit-lines at their initial
    /// level.
    fn bias_at(&self, vdd: f64, t: f64) -> BiasCondition {
        let bl = |b: &BitLine| match b {
            BitLine::Driven(p) => p.at(t),
            BitLine::Floating { v0, .. } => *v0,
        };
        BiasCondition {
            vdd,
            vcell: self.vcell.at(t),
            vwl: self.vwl.at(t),
            vbl_a: bl(&self.bl_a),
            vbl_b: bl(&self.bl_b),
        }
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientConfig {
    /// Fixed time step, s.
    pub step: f64,
    pub stop: f64,
    /// Newton convergence on the voltage update, V.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Word-line transition time used by the canned protocols, s.
    pub wl_slew: f64,
    /// Start of the word-line rise in the canned protocols, s.
    pub wl_start: f64,
}

impl Default for TransientConfig {
    fn default() -> Self {
        Self {
            step: 0.1e-12,
            stop: 2e-9,
            newton_tol: 1e-9,
            max_newton: 50,
            wl_slew: 10e-12,
            wl_start: 20e-12,
        }
    }
}

impl TransientConfig {
    pub fn validate(&self) -> Result<(), TransientError> {
        if !(self.step > 0.0) {
            return Err(TransientError::Config("step must be positive"));
        }
        if !(self.stop > 0.0) {
            return Err(TransientError::Config("stop time must be positive"));
        }
        if !(self.newton_tol > 0.0) || self.max_newton == 0 {
            return Err(TransientError::Config("invalid Newton settings"));
        }
        Ok(())
    }

    /// 50% point of the canned word-line rise.
    pub fn wl_mid(&self) -> f64 {
        self.wl_start + 0.5 * self.wl_slew
    }
}

/// A system `C·dx/dt = f(t, x)` with diagonal constant capacitance.
pub trait Dynamics {
    fn dim(&self) -> usize;
    fn capacitance(&self, i: usize) -> f64;
    /// Net inflow currents and their Jacobian `jac[i][j] = ∂f_i/∂x_j`.
    fn inflow(&self, t: f64, x: &[f64; MAX_DIM], f: &mut [f64; MAX_DIM], jac: &mut [[f64; MAX_DIM]; MAX_DIM]);
}

/// Whether the integration should continue after a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

fn solve_linear(n: usize, a: &mut [[f64; MAX_DIM]; MAX_DIM], b: &mut [f64; MAX_DIM]) -> bool {
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if !(a[p][k].abs() > 0.0) {
            return false;
        }
        a.swap(k, p);
        b.swap(k, p);
        let pivot = a[k];
        for i in k + 1..n {
            let m = a[i][k] / pivot[k];
            for (x, p) in a[i][k..n].iter_mut().zip(&pivot[k..n]) {
                *x -= m * p;
            }
            b[i] -= m * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * b[j];
        }
        b[k] = s / a[k][k];
    }
    true
}

/// Largest voltage change applied in one Newton update, V.
const NEWTON_CLAMP: f64 = 0.3;

/// One implicit step from `(t, x0)` with inflow `f0` already evaluated.
/// `theta = 0.5` is trapezoidal, `theta = 1` backward Euler.
fn implicit_step(
    sys: &impl Dynamics,
    cfg: &TransientConfig,
    t: f64,
    x0: &[f64; MAX_DIM],
    f0: &[f64; MAX_DIM],
    theta: f64,
) -> Option<[f64; MAX_DIM]> {
    let n = sys.dim();
    let h = cfg.step;
    let mut x = *x0;
    let mut f = [0.0; MAX_DIM];
    let mut jac = [[0.0; MAX_DIM]; MAX_DIM];
    for _ in 0..cfg.max_newton {
        sys.inflow(t + h, &x, &mut f, &mut jac);
        let mut r = [0.0; MAX_DIM];
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            let c = sys.capacitance(i) / h;
            r[i] = -(c * (x[i] - x0[i]) - theta * f[i] - (1.0 - theta) * f0[i]);
            for j in 0..n {
                a[i][j] = -theta * jac[i][j];
            }
            a[i][i] += c;
        }
        if !solve_linear(n, &mut a, &mut r) {
            return None;
        }
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let dx = r[i].clamp(-NEWTON_CLAMP, NEWTON_CLAMP);
            x[i] += dx;
            worst = worst.max(dx.abs());
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        if worst < cfg.newton_tol {
            return Some(x);
        }
    }
    None
}

/// Integrate from `x0` at t = 0 with a fixed step, reporting every accepted
/// point (including the initial one) to `observe`.
pub fn integrate(
    sys: &impl Dynamics,
    x0: [f64; MAX_DIM],
    cfg: &TransientConfig,
    mut observe: impl FnMut(f64, &[f64; MAX_DIM]) -> Control,
) -> Result<(), TransientError> {
    cfg.validate()?;
    let mut x = x0;
    let mut f = [0.0; MAX_DIM];
    let mut jac = [[0.0; MAX_DIM]; MAX_DIM];
    let steps = (cfg.stop / cfg.step).ceil() as usize;
    if observe(0.0, &x) == Control::Stop {
        return Ok(());
    }
    for k in 0..steps {
        let t = k as f64 * cfg.step;
        sys.inflow(t, &x, &mut f, &mut jac);
        x = implicit_step(sys, cfg, t, &x, &f, 0.5)
            .or_else(|| implicit_step(sys, cfg, t, &x, &f, 1.0))
            .ok_or(TransientError::NewtonFailure { time: t + cfg.step })?;
        if observe((k + 1) as f64 * cfg.step, &x) == Control::Stop {
            break;
        }
    }
    Ok(())
}

/// The 6T cell with its sources, as a [`Dynamics`] system.
///
/// Unknowns are `V_A`, `V_B`, then any floating bit-lines in A, B order.
pub struct CellNetwork<'a> {
    d: &'a CellDesign,
    stim: &'a Stimulus,
    c_node: [f64; 2],
    bl_index: [Option<usize>; 2],
    dim: usize,
}

/// Source-side quantities at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SourceCurrents {
    /// Current delivered by the cell supply, A.
    pub i_vcell: f64,
    /// Current delivered by each driven bit-line, A (0 if floating).
    pub i_bl: [f64; 2],
    /// Instantaneous power delivered by all sources, W.
    pub power: f64,
}

impl<'a> CellNetwork<'a> {
    pub fn new(d: &'a CellDesign, stim: &'a Stimulus) -> Self {
        let mut dim = 2;
        let mut bl_index = [None, None];
        for (k, node) in [Node::A, Node::B].into_iter().enumerate() {
            if matches!(stim.bitline(node), BitLine::Floating { .. }) {
                bl_index[k] = Some(dim);
                dim += 1;
            }
        }
        Self {
            d,
            stim,
            c_node: [d.node_capacitance(Node::A), d.node_capacitance(Node::B)],
            bl_index,
            dim,
        }
    }

    fn side(node: Node) -> usize {
        match node {
            Node::A => 0,
            Node::B => 1,
        }
    }

    fn bitline_voltage(&self, node: Node, t: f64, x: &[f64; MAX_DIM]) -> f64 {
        match (self.bl_index[Self::side(node)], self.stim.bitline(node)) {
            (Some(i), _) => x[i],
            (None, BitLine::Driven(p)) => p.at(t),
            (None, BitLine::Floating { v0, .. }) => *v0,
        }
    }

    /// Initial unknown vector for a cell resting in `state` under the
    /// t = 0 sources.
    pub fn initial_state(&self, state: CellState) -> Result<[f64; MAX_DIM], TransientError> {
        let bias = self.stim.bias_at(self.d.vdd, 0.0);
        let v = solve_node(self.d, &bias, Forced::Free(state))?;
        let mut x = [0.0; MAX_DIM];
        x[0] = v.a;
        x[1] = v.b;
        for (k, node) in [Node::A, Node::B].into_iter().enumerate() {
            if let (Some(i), BitLine::Floating { v0, .. }) = (self.bl_index[k], self.stim.bitline(node)) {
                x[i] = *v0;
            }
        }
        Ok(x)
    }

    /// Currents delivered by the ideal sources at `(t, x)`.
    pub fn sources(&self, t: f64, x: &[f64; MAX_DIM]) -> SourceCurrents {
        let vcell = self.stim.vcell.at(t);
        let vwl = self.stim.vwl.at(t);
        let mut out = SourceCurrents::default();
        for node in [Node::A, Node::B] {
            let k = Self::side(node);
            let (v_self, v_other) = (x[k], x[1 - k]);
            let p = channel_current(self.d.device(node.pull_up()), v_other, v_self, vcell);
            out.i_vcell -= p.i;
            if self.bl_index[k].is_none() {
                let vbl = self.bitline_voltage(node, t, x);
                let a = channel_current(self.d.device(node.access()), vwl, vbl, v_self);
                out.i_bl[k] = a.i;
                out.power += vbl * a.i;
            }
        }
        out.power += vcell * out.i_vcell;
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Dynamics for CellNetwork<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn capacitance(&self, i: usize) -> f64 {
        if i < 2 {
            return self.c_node[i];
        }
        match self
            .stim
            .bitline(if self.bl_index[0] == Some(i) { Node::A } else { Node::B })
        {
            BitLine::Floating { capacitance, .. } => *capacitance,
            BitLine::Driven(_) => unreachable!("driven bit-lines are not unknowns"),
        }
    }

    fn inflow(&self, t: f64, x: &[f64; MAX_DIM], f: &mut [f64; MAX_DIM], jac: &mut [[f64; MAX_DIM]; MAX_DIM]) {
        *f = [0.0; MAX_DIM];
        *jac = [[0.0; MAX_DIM]; MAX_DIM];
        let vcell = self.stim.vcell.at(t);
        let vwl = self.stim.vwl.at(t);
        for node in [Node::A, Node::B] {
            let k = Self::side(node);
            let o = 1 - k;
            let (v_self, v_other) = (x[k], x[o]);

            let n = channel_current(self.d.device(node.pull_down()), v_other, v_self, 0.0);
            f[k] -= n.i;
            jac[k][k] -= n.d_vd;
            jac[k][o] -= n.d_vg;

            let p = channel_current(self.d.device(node.pull_up()), v_other, v_self, vcell);
            f[k] -= p.i;
            jac[k][k] -= p.d_vd;
            jac[k][o] -= p.d_vg;

            let vbl = self.bitline_voltage(node, t, x);
            let a = channel_current(self.d.device(node.access()), vwl, vbl, v_self);
            f[k] += a.i;
            jac[k][k] += a.d_vs;
            if let Some(b) = self.bl_index[k] {
                jac[k][b] += a.d_vd;
                f[b] -= a.i;
                jac[b][b] -= a.d_vd;
                jac[b][k] -= a.d_vs;
                if let BitLine::Floating { sink, .. } = self.stim.bitline(node) {
                    f[b] -= sink;
                }
            }
        }
        if let Some(p) = &self.stim.injection {
            f[Self::side(p.node)] += p.inflow(t);
        }
    }
}

/// Recorded simulation output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Waveform {
    pub t: Vec<f64>,
    pub v_a: Vec<f64>,
    pub v_b: Vec<f64>,
    pub v_bl_a: Vec<f64>,
    pub v_bl_b: Vec<f64>,
    /// Current delivered by the cell supply, A.
    pub i_vdd: Vec<f64>,
    /// Power delivered by all ideal sources, W.
    pub power: Vec<f64>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn node(&self, node: Node) -> &[f64] {
        match node {
            Node::A => &self.v_a,
            Node::B => &self.v_b,
        }
    }

    /// Trapezoidal integral of the delivered power, J.
    pub fn energy(&self) -> f64 {
        (1..self.len())
            .map(|i| 0.5 * (self.power[i] + self.power[i - 1]) * (self.t[i] - self.t[i - 1]))
            .sum()
    }
}

/// Simulate a cell starting from the stable state `init` of the t = 0
/// sources.
pub fn simulate(
    d: &CellDesign,
    init: CellState,
    stim: &Stimulus,
    cfg: &TransientConfig,
) -> Result<Waveform, TransientError> {
    let net = CellNetwork::new(d, stim);
    let x0 = net.initial_state(init)?;
    let mut w = Waveform::default();
    integrate(&net, x0, cfg, |t, x| {
        let s = net.sources(t, x);
        w.t.push(t);
        w.v_a.push(x[0]);
        w.v_b.push(x[1]);
        w.v_bl_a.push(net.bitline_voltage(Node::A, t, x));
        w.v_bl_b.push(net.bitline_voltage(Node::B, t, x));
        w.i_vdd.push(s.i_vcell);
        w.power.push(s.power);
        Control::Continue
    })?;
    Ok(w)
}

/// Linear interpolation of the time at which a sampled signal crosses a
/// level between two consecutive samples.
fn crossing_time(t0: f64, y0: f64, t1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        return t1;
    }
    t0 + (t1 - t0) * (level - y0) / (y1 - y0)
}

/// Read access of a cell holding S1 with floating, precharged bit-lines.
pub fn read_stimulus(d: &CellDesign, vwl: f64, cfg: &TransientConfig) -> Stimulus {
    let vdd = d.vdd;
    let per_cell = power::leakage(d, CellState::S1, vdd).i_s3;
    let others = f64::from(d.caps.cells_per_bitline.saturating_sub(1));
    let bl = |node| BitLine::Floating {
        capacitance: d.bitline_capacitance(node),
        v0: vdd,
        sink: others * per_cell,
    };
    Stimulus {
        vcell: Pwl::constant(vdd),
        vwl: Pwl::ramp(cfg.wl_start, cfg.wl_slew, 0.0, vwl),
        bl_a: bl(Node::A),
        bl_b: bl(Node::B),
        injection: None,
    }
}

/// Default sense threshold: bit-line droop detected by the sense amplifier, V.
pub const SENSE_DV: f64 = 0.1;

/// Read delay: from the 50% point of the word-line rise until either
/// bit-line has drooped by `sense_dv`.
pub fn read_delay(d: &CellDesign, vwl: f64, sense_dv: f64, cfg: &TransientConfig) -> Result<f64, TransientError> {
    let stim = read_stimulus(d, vwl, cfg);
    let net = CellNetwork::new(d, &stim);
    let x0 = net.initial_state(CellState::S1)?;
    let level = d.vdd - sense_dv;
    let (ia, ib) = (net.bl_index[0].unwrap_or(0), net.bl_index[1].unwrap_or(0));
    let mut prev = (0.0, x0[ia].min(x0[ib]));
    let mut hit = None;
    integrate(&net, x0, cfg, |t, x| {
        let v = x[ia].min(x[ib]);
        if v <= level && prev.1 > level {
            hit = Some(crossing_time(prev.0, prev.1, t, v, level));
            return Control::Stop;
        }
        prev = (t, v);
        Control::Continue
    })?;
    hit.map(|t| t - cfg.wl_mid())
        .ok_or(TransientError::ReadTimeout { stop: cfg.stop })
}

/// Write drive towards `target` with the word-line at the nominal supply,
/// either left on or pulsed off at `wl_off`.
fn write_stimulus(d: &CellDesign, cfg: &TransientConfig, target: CellState, wl_off: Option<f64>) -> Stimulus {
    let vdd = d.vdd;
    let b = BiasCondition::write(vdd, vdd, target);
    let vwl = match wl_off {
        Some(t1) => Pwl::pulse(cfg.wl_start, t1, cfg.wl_slew, 0.0, vdd),
        None => Pwl::ramp(cfg.wl_start, cfg.wl_slew, 0.0, vdd),
    };
    Stimulus {
        vcell: Pwl::constant(vdd),
        vwl,
        bl_a: BitLine::Driven(Pwl::constant(b.vbl_a)),
        bl_b: BitLine::Driven(Pwl::constant(b.vbl_b)),
        injection: None,
    }
}

/// Write delay: writing S0 into a cell holding S1, from the 50% point of the
/// word-line rise until node B rises through `vdd/2`.
pub fn write_delay(d: &CellDesign, cfg: &TransientConfig) -> Result<f64, TransientError> {
    let stim = write_stimulus(d, cfg, CellState::S0, None);
    let net = CellNetwork::new(d, &stim);
    let x0 = net.initial_state(CellState::S1)?;
    let level = 0.5 * d.vdd;
    let mut prev = (0.0, x0[1]);
    let mut hit = None;
    integrate(&net, x0, cfg, |t, x| {
        if x[1] >= level && prev.1 < level {
            hit = Some(crossing_time(prev.0, prev.1, t, x[1], level));
            return Control::Stop;
        }
        prev = (t, x[1]);
        Control::Continue
    })?;
    hit.map(|t| t - cfg.wl_mid())
        .ok_or(TransientError::WriteFailure { stop: cfg.stop })
}

/// Word-line pulse width used by the write-energy and read-disturb
/// protocols, s.
pub const WL_PULSE: f64 = 500e-12;
/// Settling band for the write-energy window, V.
pub const SETTLE_BAND: f64 = 1e-3;

/// Energy drawn from the cell supply and the bit-line drivers while writing
/// S0 into S1: a [`WL_PULSE`] word-line pulse, integrated until both nodes
/// are within [`SETTLE_BAND`] of the final hold state after the word-line
/// has fallen.
pub fn write_energy(d: &CellDesign, cfg: &TransientConfig) -> Result<f64, TransientError> {
    let t_off = cfg.wl_start + cfg.wl_slew + WL_PULSE;
    let stim = write_stimulus(d, cfg, CellState::S0, Some(t_off));
    let net = CellNetwork::new(d, &stim);
    let x0 = net.initial_state(CellState::S1)?;
    let fin = solve_node(d, &BiasCondition::hold(d.vdd), Forced::Free(CellState::S0))?;
    let t_quiet = t_off + cfg.wl_slew;
    let mut energy = 0.0;
    let mut prev = (0.0, net.sources(0.0, &x0).power);
    let mut settled = false;
    integrate(&net, x0, cfg, |t, x| {
        let p = net.sources(t, x).power;
        energy += 0.5 * (p + prev.1) * (t - prev.0);
        prev = (t, p);
        if t >= t_quiet && (x[0] - fin.a).abs() < SETTLE_BAND && (x[1] - fin.b).abs() < SETTLE_BAND {
            settled = true;
            return Control::Stop;
        }
        Control::Continue
    })?;
    if !settled {
        return Err(TransientError::WriteFailure { stop: cfg.stop });
    }
    Ok(energy)
}

/// Outcome of a read-disturb simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadDisturb {
    /// Peak of the '0' node (node B for S1), V.
    pub peak: f64,
    /// Level of the '0' node at the end of the word-line pulse, V.
    pub settled: f64,
    /// The cell had flipped 1 ns after the word-line fell.
    pub destructive: bool,
}

/// Delay after the word-line falls at which the stored state is checked, s.
pub const DISTURB_CHECK: f64 = 1e-9;

/// Read access of a cell holding S1 with ideal bit-lines at `vdd` and a
/// [`WL_PULSE`] word-line pulse at `vwl`.
pub fn read_disturb(d: &CellDesign, vwl: f64, cfg: &TransientConfig) -> Result<ReadDisturb, TransientError> {
    let vdd = d.vdd;
    let t_off = cfg.wl_start + cfg.wl_slew + WL_PULSE;
    let stim = Stimulus {
        vcell: Pwl::constant(vdd),
        vwl: Pwl::pulse(cfg.wl_start, t_off, cfg.wl_slew, 0.0, vwl),
        bl_a: BitLine::Driven(Pwl::constant(vdd)),
        bl_b: BitLine::Driven(Pwl::constant(vdd)),
        injection: None,
    };
    let run = TransientConfig {
        stop: t_off + cfg.wl_slew + DISTURB_CHECK,
        ..*cfg
    };
    let net = CellNetwork::new(d, &stim);
    let x0 = net.initial_state(CellState::S1)?;
    let mut peak = x0[1];
    let mut settled = x0[1];
    let mut last = x0;
    integrate(&net, x0, &run, |t, x| {
        peak = peak.max(x[1]);
        if t <= t_off {
            settled = x[1];
        }
        last = *x;
        Control::Continue
    })?;
    Ok(ReadDisturb {
        peak,
        settled,
        destructive: last[1] > last[0],
    })
}

/// Default pulse rise constant, s.
pub const TAU_R: f64 = 5e-12;
/// Default pulse fall constant, s.
pub const TAU_F: f64 = 150e-12;
/// Resolution of the critical-charge search, fC.
pub const QCRIT_STEP_FC: f64 = 0.01;
/// Upper bracket of the critical-charge search, fC.
pub const QCRIT_MAX_FC: f64 = 100.0;
/// Onset of the injected pulse, s.
const STRIKE_T0: f64 = 10e-12;
/// Time after onset at which the outcome is judged, in fall constants.
const STRIKE_WINDOW: f64 = 12.0;

/// Whether a strike of `charge_fc` flips a cell in hold.
///
/// The cell rests in the state that makes `node` sensitive to the chosen
/// collection: high for electrons, low for holes.
pub fn strike_flips(
    d: &CellDesign,
    node: Node,
    collection: Collection,
    charge_fc: f64,
    tau_r: f64,
    tau_f: f64,
    cfg: &TransientConfig,
) -> Result<bool, TransientError> {
    let init = match collection {
        Collection::Electron => CellState::with_high(node),
        Collection::Hole => CellState::with_high(node.other()),
    };
    let pulse = PulseSpec {
        charge: charge_fc * FEMTO,
        tau_r,
        tau_f,
        t0: STRIKE_T0,
        node,
        collection,
    };
    pulse.validate()?;
    let stim = Stimulus {
        injection: Some(pulse),
        ..Stimulus::hold(d.vdd)
    };
    let run = TransientConfig {
        stop: STRIKE_T0 + STRIKE_WINDOW * tau_f,
        ..*cfg
    };
    let net = CellNetwork::new(d, &stim);
    let x0 = net.initial_state(init)?;
    let mut last = x0;
    integrate(&net, x0, &run, |_, x| {
        last = *x;
        Control::Continue
    })?;
    let end = if last[0] >= last[1] {
        CellState::S1
    } else {
        CellState::S0
    };
    Ok(end != init)
}

/// Critical charge in fC: the smallest multiple of [`QCRIT_STEP_FC`] that
/// flips the cell, found by bisection over `[0, QCRIT_MAX_FC]`.
pub fn critical_charge(
    d: &CellDesign,
    node: Node,
    collection: Collection,
    tau_r: f64,
    tau_f: f64,
    cfg: &TransientConfig,
) -> Result<f64, TransientError> {
    let n = (QCRIT_MAX_FC / QCRIT_STEP_FC).round() as usize;
    let q = |k: usize| k as f64 * QCRIT_STEP_FC;
    if !strike_flips(d, node, collection, q(n), tau_r, tau_f, cfg)? {
        return Err(TransientError::ChargeBracket { upper_fc: QCRIT_MAX_FC });
    }
    let (mut lo, mut hi) = (0, n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if strike_flips(d, node, collection, q(mid), tau_r, tau_f, cfg)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(q(hi))
}

/// Electron strike on the '1' node of S1 with the default pulse shape.
pub fn critical_charge_default(d: &CellDesign, cfg: &TransientConfig) -> Result<f64, TransientError> {
    critical_charge(d, Node::A, Collection::Electron, TAU_R, TAU_F, cfg)
}

/// The transistor whose drain collects charge for a strike on `node`.
pub fn struck_device(node: Node, collection: Collection) -> Transistor {
    match collection {
        Collection::Electron => node.pull_down(),
        Collection::Hole => node.pull_up(),
    }
}
