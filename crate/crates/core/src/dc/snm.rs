//! Square-fitting on butterfly curves in 45°-rotated coordinates.
//!
//! Plot axes are `x = V_B`, `y = V_A`. Curve 1 is inverter A, `y = f_A(x)`;
//! curve 2 is inverter B drawn transposed, `x = f_B(y)`. In the rotated frame
//! `u = (x + y)/√2`, `v = (y − x)/√2` both curves are single valued in `v`, and
//! an axis-aligned square whose diagonal lies on a line of constant `v` with
//! corners on the two curves has side `|u₁(v) − u₂(v)|/√2`.
//!
//! The sign of `D(v) = u₁ − u₂` tells which lobe a line crosses: positive in
//! the S1 lobe (upper left), negative in the S0 lobe.

use crate::cell::CellState;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// A transfer characteristic sampled on an increasing input grid.
pub trait Sampled {
    fn inputs(&self) -> &[f64];
    fn outputs(&self) -> &[f64];
}

/// Separation of the two curves along lines of constant `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    /// Strictly increasing `v` breakpoints.
    pub v: Vec<f64>,
    /// `u₁(v) − u₂(v)`: diagonal length of the square through each line.
    pub d: Vec<f64>,
}

/// Curve in rotated coordinates, ordered by increasing `v`.
fn rotate(points: impl Iterator<Item = (f64, f64)>) -> (Vec<f64>, Vec<f64>) {
    let mut vs = Vec::new();
    let mut us = Vec::new();
    for (x, y) in points {
        us.push((x + y) / SQRT2);
        vs.push((y - x) / SQRT2);
    }
    if vs.len() > 1 && vs[0] > vs[vs.len() - 1] {
        vs.reverse();
        us.reverse();
    }
    (vs, us)
}

fn interp(vs: &[f64], us: &[f64], v: f64, hint: &mut usize) -> f64 {
    let n = vs.len();
    if n == 1 {
        return us[0];
    }
    let mut i = (*hint).min(n - 2);
    while i + 1 < n - 1 && vs[i + 1] < v {
        i += 1;
    }
    while i > 0 && vs[i] > v {
        i -= 1;
    }
    *hint = i;
    let (v0, v1) = (vs[i], vs[i + 1]);
    let t = if v1 > v0 {
        ((v - v0) / (v1 - v0)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    us[i] + t * (us[i + 1] - us[i])
}

/// Build the separation profile of two sampled characteristics.
///
/// `inv_a` maps `V_B → V_A`, `inv_b` maps `V_A → V_B`. Both polylines are
/// interpolated linearly; the breakpoints of either curve become breakpoints
/// of the profile, so extrema of `D` on the polylines are exact.
pub fn profile(inv_a: &impl Sampled, inv_b: &impl Sampled) -> Profile {
    let (v1, u1) = rotate(inv_a.inputs().iter().copied().zip(inv_a.outputs().iter().copied()));
    let (v2, u2) = rotate(inv_b.outputs().iter().copied().zip(inv_b.inputs().iter().copied()));
    let lo = v1[0].max(v2[0]);
    let hi = v1[v1.len() - 1].min(v2[v2.len() - 1]);
    if !(hi > lo) {
        return Profile {
            v: Vec::new(),
            d: Vec::new(),
        };
    }
    let mut grid: Vec<f64> = v1
        .iter()
        .chain(v2.iter())
        .copied()
        .filter(|&v| v >= lo && v <= hi)
        .collect();
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let (mut h1, mut h2) = (0, 0);
    let d = grid
        .iter()
        .map(|&v| interp(&v1, &u1, v, &mut h1) - interp(&v2, &u2, v, &mut h2))
        .collect();
    Profile { v: grid, d }
}

impl Profile {
    /// `v` positions where `D` changes sign.
    pub fn crossings(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 1..self.d.len() {
            let (d0, d1) = (self.d[i - 1], self.d[i]);
            if (d0 > 0.0 && d1 <= 0.0) || (d0 < 0.0 && d1 >= 0.0) {
                let t = d0 / (d0 - d1);
                out.push(self.v[i - 1] + t * (self.v[i] - self.v[i - 1]));
            } else if d0 == 0.0 && i == 1 {
                out.push(self.v[0]);
            }
        }
        out
    }

    /// Index `i` of each crossing lying in `(v[i-1], v[i]]`; a profile that
    /// starts on a crossing contributes index 0.
    fn crossing_indices(&self) -> Vec<usize> {
        let start = (self.d.len() > 1 && self.d[0] == 0.0).then_some(0);
        start
            .into_iter()
            .chain((1..self.d.len()).filter(|&i| {
                let (d0, d1) = (self.d[i - 1], self.d[i]);
                (d0 > 0.0 && d1 <= 0.0) || (d0 < 0.0 && d1 >= 0.0)
            }))
            .collect()
    }
}

/// Largest inscribed square in each lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeSquares {
    /// Side of the largest square in the S1 lobe, V (0 if no lobe).
    pub s1: f64,
    /// `v` at which the S1 square sits.
    pub s1_at: f64,
    pub s0: f64,
    pub s0_at: f64,
}

impl LobeSquares {
    /// Noise margin: the smaller of the two lobes.
    pub fn margin(&self) -> f64 {
        self.s1.min(self.s0)
    }

    pub fn lobe(&self, state: CellState) -> (f64, f64) {
        match state {
            CellState::S1 => (self.s1, self.s1_at),
            CellState::S0 => (self.s0, self.s0_at),
        }
    }
}

/// Maximum-separation squares, restricted to lobes enclosed between two
/// crossings (regions beyond the outer stable points are not lobes).
pub fn lobe_squares(p: &Profile) -> LobeSquares {
    let mut sq = LobeSquares {
        s1: 0.0,
        s1_at: 0.0,
        s0: 0.0,
        s0_at: 0.0,
    };
    let idx = p.crossing_indices();
    for pair in idx.windows(2) {
        for i in pair[0]..pair[1] {
            let side = p.d[i].abs() / SQRT2;
            if p.d[i] > 0.0 && side > sq.s1 {
                sq.s1 = side;
                sq.s1_at = p.v[i];
            } else if p.d[i] < 0.0 && side > sq.s0 {
                sq.s0 = side;
                sq.s0_at = p.v[i];
            }
        }
    }
    sq
}

/// Narrowest gap between two write-mode characteristics.
///
/// Requires a single crossing (the written state). Walking from it towards
/// the side where the overwritten state used to be, the separation first
/// grows over the remnant of the target lobe and then pinches; the side of
/// the smallest square at the pinch is the write margin. Returns `None`
/// when the curves cross more than once, i.e. the cell stays bistable.
pub fn write_gap(p: &Profile, target: CellState) -> Option<(f64, f64)> {
    let idx = p.crossing_indices();
    if idx.len() != 1 {
        return None;
    }
    let c = idx[0];
    let walk: Vec<usize> = match target {
        // S0 sits at v < 0; the overwritten S1 lobe lies towards larger v.
        CellState::S0 => (c..p.d.len()).collect(),
        CellState::S1 => (0..c).rev().collect(),
    };
    if walk.is_empty() {
        return None;
    }
    let mag = |i: usize| p.d[i].abs() / SQRT2;
    let mut peak = walk.len() - 1;
    for k in 0..walk.len() - 1 {
        if mag(walk[k + 1]) < mag(walk[k]) {
            peak = k;
            break;
        }
    }
    walk[peak..]
        .iter()
        .map(|&i| (mag(i), p.v[i]))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}
