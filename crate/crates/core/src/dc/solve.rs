//! KCL at the storage nodes and the scalar/latch solvers built on it.

use crate::cell::{BiasCondition, CellDesign, CellState, Node};
use crate::device::channel_current;
use crate::error::SolverError;

/// Current residual tolerance at a solved node, A.
pub const CURRENT_TOL: f64 = 1e-14;
/// Bracket width at which a scalar solve is considered converged, V.
pub const VOLTAGE_TOL: f64 = 1e-13;
const MAX_ITER: usize = 200;

/// Grid step of the latch return-map scan, V.
pub const SCAN_STEP: f64 = 1e-3;

/// Net current flowing into a storage node from the three devices attached
/// to it, with derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inflow {
    pub i: f64,
    /// d(inflow)/d(own voltage); always negative.
    pub d_self: f64,
    /// d(inflow)/d(opposite node voltage), through the inverter gates.
    pub d_other: f64,
}

pub fn node_inflow(d: &CellDesign, bias: &BiasCondition, node: Node, v_self: f64, v_other: f64) -> Inflow {
    let n = channel_current(d.device(node.pull_down()), v_other, v_self, 0.0);
    let p = channel_current(d.device(node.pull_up()), v_other, v_self, bias.vcell);
    let a = channel_current(d.device(node.access()), bias.vwl, bias.bitline(node), v_self);
    Inflow {
        i: -n.i - p.i + a.i,
        d_self: -n.d_vd - p.d_vd + a.d_vs,
        d_other: -n.d_vg - p.d_vg,
    }
}

/// Output of the inverter driving `node` for a given input (opposite node)
/// voltage.
///
/// The inflow is strictly decreasing in the node voltage, non-negative at 0
/// and non-positive at the top rail, so the root is bracketed by
/// `[0, top_rail]`. Newton steps are taken when they stay inside the bracket
/// and shrink the residual quickly enough; otherwise the bracket is bisected.
pub fn solve_output(
    d: &CellDesign,
    bias: &BiasCondition,
    node: Node,
    v_in: f64,
    guess: f64,
) -> Result<f64, SolverError> {
    let mut lo = 0.0;
    let mut hi = bias.top_rail();
    if hi <= lo {
        return Ok(0.0);
    }
    let mut x = if guess.is_finite() {
        guess.clamp(lo, hi)
    } else {
        0.5 * hi
    };
    let mut dx_old = hi - lo;
    let mut last = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let f = node_inflow(d, bias, node, x, v_in);
        last = f.i;
        if f.i.abs() < CURRENT_TOL {
            return Ok(x);
        }
        if f.i > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo < VOLTAGE_TOL {
            return Ok(x);
        }
        let newton = x - f.i / f.d_self;
        let slow = (2.0 * f.i).abs() > (dx_old * f.d_self).abs();
        let next = if newton.is_finite() && newton > lo && newton < hi && !slow && f.d_self < 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        dx_old = (next - x).abs();
        x = next;
    }
    Err(SolverError::NoConvergence {
        iterations: MAX_ITER,
        residual: last,
    })
}

/// Slope of an inverter transfer characteristic by implicit differentiation.
pub fn transfer_slope(d: &CellDesign, bias: &BiasCondition, node: Node, v_in: f64, v_out: f64) -> f64 {
    let f = node_inflow(d, bias, node, v_out, v_in);
    -f.d_other / f.d_self
}

/// Solved storage-node voltages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeVoltages {
    pub a: f64,
    pub b: f64,
}

impl NodeVoltages {
    pub fn get(&self, node: Node) -> f64 {
        match node {
            Node::A => self.a,
            Node::B => self.b,
        }
    }

    /// Logical state implied by the voltages.
    pub fn state(&self) -> CellState {
        if self.a >= self.b {
            CellState::S1
        } else {
            CellState::S0
        }
    }
}

/// Which storage nodes are clamped by an ideal source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forced {
    /// Node A clamped; B solved.
    A(f64),
    /// Node B clamped; A solved.
    B(f64),
    Both {
        a: f64,
        b: f64,
    },
    /// Nothing clamped: return the stable equilibrium closest to the given
    /// logical state.
    Free(CellState),
}

/// Solve the free storage nodes under a bias.
pub fn solve_node(d: &CellDesign, bias: &BiasCondition, forced: Forced) -> Result<NodeVoltages, SolverError> {
    match forced {
        Forced::Both { a, b } => Ok(NodeVoltages { a, b }),
        Forced::A(a) => {
            let b = solve_output(d, bias, Node::B, a, bias.vcell - a)?;
            Ok(NodeVoltages { a, b })
        }
        Forced::B(b) => {
            let a = solve_output(d, bias, Node::A, b, bias.vcell - b)?;
            Ok(NodeVoltages { a, b })
        }
        Forced::Free(state) => {
            let (ta, tb) = state.node_voltages(bias.vcell);
            let eq = stable_states(d, bias)?;
            eq.into_iter()
                .map(|e| e.voltages)
                .min_by(|x, y| {
                    let dx = (x.a - ta).powi(2) + (x.b - tb).powi(2);
                    let dy = (y.a - ta).powi(2) + (y.b - tb).powi(2);
                    dx.total_cmp(&dy)
                })
                .ok_or(SolverError::NoEquilibrium)
        }
    }
}

/// A DC equilibrium of the cross-coupled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub voltages: NodeVoltages,
    pub stable: bool,
}

/// Latch return map `g(V_A) = f_A(f_B(V_A)) − V_A` sampled on a grid, with
/// the inner solves warm-started along the sweep.
struct ReturnMap<'a> {
    d: &'a CellDesign,
    bias: &'a BiasCondition,
    vb_guess: f64,
    va_guess: f64,
}

impl ReturnMap<'_> {
    fn eval(&mut self, va: f64) -> Result<(f64, f64), SolverError> {
        let vb = solve_output(self.d, self.bias, Node::B, va, self.vb_guess)?;
        let va_next = solve_output(self.d, self.bias, Node::A, vb, self.va_guess)?;
        self.vb_guess = vb;
        self.va_guess = va_next;
        Ok((va_next - va, vb))
    }

    fn slope(&self, va: f64, vb: f64) -> f64 {
        let va_next = self.va_guess;
        let sb = transfer_slope(self.d, self.bias, Node::B, va, vb);
        let sa = transfer_slope(self.d, self.bias, Node::A, vb, va_next);
        sa * sb - 1.0
    }
}

/// All equilibria, ordered by increasing `V_A`.
///
/// Found by scanning the return map at [`SCAN_STEP`] over `[0, top_rail]`
/// and polishing each sign change. A crossing from positive to negative is a
/// stable point (loop gain below one).
pub fn equilibria(d: &CellDesign, bias: &BiasCondition) -> Result<Vec<Equilibrium>, SolverError> {
    let top = bias.top_rail();
    let steps = (top / SCAN_STEP).round().max(1.0) as usize;
    let mut map = ReturnMap {
        d,
        bias,
        vb_guess: bias.vcell,
        va_guess: 0.0,
    };
    let grid = |k: usize| (k as f64 * top / steps as f64).min(top);
    let mut out = Vec::new();
    let (mut g_prev, _) = map.eval(0.0)?;
    for k in 1..=steps {
        let va = grid(k);
        let (g, _) = map.eval(va)?;
        let crossed = (g_prev > 0.0 && g <= 0.0) || (g_prev < 0.0 && g >= 0.0);
        if crossed {
            let stable = g_prev > 0.0;
            let root = polish(d, bias, grid(k - 1), va, g_prev)?;
            out.push(Equilibrium { voltages: root, stable });
        }
        g_prev = g;
    }
    Ok(out)
}

/// Only the stable equilibria.
pub fn stable_states(d: &CellDesign, bias: &BiasCondition) -> Result<Vec<Equilibrium>, SolverError> {
    Ok(equilibria(d, bias)?.into_iter().filter(|e| e.stable).collect())
}

fn polish(
    d: &CellDesign,
    bias: &BiasCondition,
    mut lo: f64,
    mut hi: f64,
    g_lo: f64,
) -> Result<NodeVoltages, SolverError> {
    let mut map = ReturnMap {
        d,
        bias,
        vb_guess: bias.vcell - lo,
        va_guess: lo,
    };
    let lo_positive = g_lo > 0.0;
    let mut x = 0.5 * (lo + hi);
    let mut vb = 0.0;
    for _ in 0..100 {
        let (g, b) = map.eval(x)?;
        vb = b;
        if g == 0.0 || hi - lo < 1e-12 {
            break;
        }
        if (g > 0.0) == lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        let s = map.slope(x, vb);
        let newton = x - g / s;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) < 1e-12 {
            break;
        }
    }
    Ok(NodeVoltages { a: x, b: vb })
}
