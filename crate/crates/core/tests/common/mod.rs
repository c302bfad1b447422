//! Independent oracles shared by the oracle suites and the acceptance run.
//!
//! Every check returns `Err` with a description of the first mismatch.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sram6t::dc::{self, node_inflow, Vtc, MARGIN_STEP};
use sram6t::transient::{
    critical_charge, integrate, strike_flips, Collection, Control, Dynamics, TransientConfig, MAX_DIM, QCRIT_STEP_FC,
};
use sram6t::{make_cell, BiasCondition, CellDesign, CellState, Node, Technology, Transistor};

pub type Check = Result<(), String>;

/// Random sizing in `[1, cr_max) × [1, pr_max)` with independent threshold
/// shifts of up to `dvt` on every device.
pub fn random_design(rng: &mut impl Rng, cr_max: f64, pr_max: f64, dvt: f64) -> CellDesign {
    let t = Technology::default();
    let cr = rng.random_range(1.0..cr_max);
    let pr = rng.random_range(1.0..pr_max);
    let mut d = make_cell(cr, pr, t.wmin_um, &t).unwrap();
    for tr in Transistor::ALL {
        d = d.with_vt_shift(tr, rng.random_range(-dvt..dvt));
    }
    d
}

// ---- inscribed squares ----

/// Piecewise-linear evaluation of a sampled curve with increasing inputs.
fn at(v: &Vtc, x: f64) -> f64 {
    let xs = &v.vin;
    let ys = &v.vout;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&p| p <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Largest `s` in `[0, hi]` with `fits(s)`, for a predicate true on a prefix.
fn largest(hi: f64, fits: impl Fn(f64) -> bool) -> f64 {
    if !fits(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Axes: x = V_B, y = V_A. Curve 1: y = f_A(x). Curve 2: x = f_B(y).
///
/// Upper-left lobe: an axis-aligned square `[x0, x0+s] × [y0, y0+s]` lies
/// between the curves iff its bottom-left corner is right of curve 2 and its
/// top-right corner is below curve 1. For a given `y0` the best `x0` is
/// `f_B(y0)`. The lower-right lobe is the mirror image.
pub fn brute_force_squares(bf: &dc::ButterflyCurve, vmax: f64) -> (f64, f64) {
    let fa = |x: f64| at(&bf.inv_a, x);
    let fb = |y: f64| at(&bf.inv_b, y);
    let steps = (vmax / 1e-4).round() as usize;
    let grid = |k: usize| vmax * k as f64 / steps as f64;
    let mut upper = 0.0f64;
    let mut lower = 0.0f64;
    for k in 0..=steps {
        let y0 = grid(k);
        let x0 = fb(y0);
        upper = upper.max(largest(vmax, |s| fa(x0 + s) >= y0 + s && y0 + s <= vmax));

        let x0 = grid(k);
        let y0 = fa(x0);
        lower = lower.max(largest(vmax, |s| fb(y0 + s) >= x0 + s && x0 + s <= vmax));
    }
    (upper, lower)
}

/// Max-square extraction against the brute force on `count` bistable
/// butterflies.
pub fn snm_suite(count: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < count {
        let d = random_design(&mut rng, 2.5, 2.0, 0.04);
        let vwl = if rng.random_bool(0.3) {
            0.0
        } else {
            rng.random_range(0.8..1.2)
        };
        let bias = BiasCondition::read(d.vdd, vwl);
        let bf = dc::butterfly(&d, &bias).map_err(|e| e.to_string())?;
        let sq = dc::butterfly_squares(&d, &bf).map_err(|e| e.to_string())?;
        if sq.margin() <= 0.0 {
            continue;
        }
        let (upper, lower) = brute_force_squares(&bf, bias.vcell);
        if (sq.s1 - upper).abs() >= 1e-3 || (sq.s0 - lower).abs() >= 1e-3 {
            return Err(format!(
                "lobes ({}, {}) vs brute force ({upper}, {lower})",
                sq.s1, sq.s0
            ));
        }
        let m = dc::snm(&d, &bias).map_err(|e| e.to_string())?.value;
        if (m - upper.min(lower)).abs() >= 1e-3 {
            return Err(format!("margin {m} vs brute force {}", upper.min(lower)));
        }
        checked += 1;
    }
    Ok(())
}

// ---- grid margins ----

/// Scan `k = 1, 2, …` until the predicate first fails; the last passing `k`.
pub fn linear_last_true(n: usize, ok: impl Fn(usize) -> bool) -> usize {
    for k in 1..=n {
        if !ok(k) {
            return k - 1;
        }
    }
    n
}

pub fn wlvm_suite(count: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..count {
        let d = random_design(&mut rng, 2.5, 1.5, 0.03);
        let vdd = d.vdd;
        let m = dc::wlvm(&d, vdd).map_err(|e| e.to_string())?;
        let k = linear_last_true(dc::margin_steps(vdd), |k| {
            dc::write_succeeds(&d, vdd, vdd - k as f64 * MARGIN_STEP, CellState::S0).unwrap()
        });
        let got = (m.value / MARGIN_STEP).round() as usize;
        if got != k {
            return Err(format!("cr {}: bisection {got} steps, sweep {k}", d.cr()));
        }
    }
    Ok(())
}

pub fn srrv_suite(count: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..count {
        let d = random_design(&mut rng, 1.3, 1.5, 0.03);
        let vdd = d.vdd;
        let vwl = if i % 2 == 0 { vdd } else { 1.0 };
        let m = dc::srrv(&d, vdd, vwl).map_err(|e| e.to_string())?;
        let k = linear_last_true(dc::margin_steps(vdd), |k| {
            dc::retains_in_read(&d, vdd, vwl, vdd - k as f64 * MARGIN_STEP).unwrap()
        });
        let got = (m.value / MARGIN_STEP).round() as usize;
        if got != k {
            return Err(format!("cr {}: bisection {got} steps, sweep {k}", d.cr()));
        }
    }
    Ok(())
}

/// Critical charge with a short pulse and a coarse step so that the sweep
/// from zero stays cheap.
pub fn qcrit_suite(count: usize) -> Check {
    let (tau_r, tau_f) = (5e-12, 20e-12);
    let cfg = TransientConfig {
        step: 0.5e-12,
        ..TransientConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..count {
        let d = random_design(&mut rng, 2.5, 1.5, 0.03);
        let q = critical_charge(&d, Node::A, Collection::Electron, tau_r, tau_f, &cfg).map_err(|e| e.to_string())?;
        let flips = |k: usize| {
            strike_flips(
                &d,
                Node::A,
                Collection::Electron,
                k as f64 * QCRIT_STEP_FC,
                tau_r,
                tau_f,
                &cfg,
            )
        };
        let mut k = 0usize;
        while !flips(k).map_err(|e| e.to_string())? {
            k += 1;
        }
        let swept = k as f64 * QCRIT_STEP_FC;
        if (q - swept).abs() > 1e-9 {
            return Err(format!("bisection {q} fC vs sweep {swept} fC"));
        }
    }
    Ok(())
}

// ---- equilibria ----

/// Equilibria located as 1 mV cells of the `(V_A, V_B)` plane in which both
/// node inflows change sign, merged when adjacent.
pub fn grid_equilibria(d: &CellDesign, bias: &BiasCondition) -> Vec<(f64, f64)> {
    let top = bias.top_rail();
    let n = (top / 1e-3).round() as usize;
    let v = |k: usize| top * k as f64 / n as f64;
    // Both tables indexed [V_A][V_B].
    let fa: Vec<Vec<f64>> = (0..=n)
        .map(|i| (0..=n).map(|j| node_inflow(d, bias, Node::A, v(i), v(j)).i).collect())
        .collect();
    let fb: Vec<Vec<f64>> = (0..=n)
        .map(|i| (0..=n).map(|j| node_inflow(d, bias, Node::B, v(j), v(i)).i).collect())
        .collect();
    let changes = |f: &Vec<Vec<f64>>, i: usize, j: usize| {
        let c = [f[i][j], f[i + 1][j], f[i][j + 1], f[i + 1][j + 1]];
        c.iter().any(|&x| x >= 0.0) && c.iter().any(|&x| x <= 0.0)
    };
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if changes(&fa, i, j) && changes(&fb, i, j) {
                cells.push((i, j));
            }
        }
    }
    let mut clusters: Vec<Vec<(usize, usize)>> = Vec::new();
    for c in cells {
        let near = |o: &(usize, usize)| o.0.abs_diff(c.0) <= 2 && o.1.abs_diff(c.1) <= 2;
        match clusters.iter_mut().find(|cl| cl.iter().any(near)) {
            Some(cl) => cl.push(c),
            None => clusters.push(vec![c]),
        }
    }
    let half = 0.5 * top / n as f64;
    clusters
        .iter()
        .map(|cl| {
            let m = cl.len() as f64;
            let a = cl.iter().map(|c| v(c.0) + half).sum::<f64>() / m;
            let b = cl.iter().map(|c| v(c.1) + half).sum::<f64>() / m;
            (a, b)
        })
        .collect()
}

pub fn equilibria_suite(count: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..count {
        let d = random_design(&mut rng, 2.5, 1.5, 0.03);
        let vdd = d.vdd;
        let bias = match i % 3 {
            0 => BiasCondition::hold(vdd),
            1 => BiasCondition::read(vdd, vdd),
            _ => BiasCondition::write(vdd, vdd - 0.5, CellState::S0),
        };
        let found = dc::equilibria(&d, &bias).map_err(|e| e.to_string())?;
        let oracle = grid_equilibria(&d, &bias);
        if found.len() != oracle.len() {
            return Err(format!("design {i}: {found:?} vs {oracle:?}"));
        }
        for e in &found {
            let (a, b) = (e.voltages.a, e.voltages.b);
            if !oracle
                .iter()
                .any(|&(oa, ob)| (oa - a).abs() < 3e-3 && (ob - b).abs() < 3e-3)
            {
                return Err(format!("design {i}: equilibrium ({a}, {b}) not in {oracle:?}"));
            }
        }
    }
    Ok(())
}

// ---- integrator ----

struct Rc {
    g: f64,
    c: f64,
}

impl Dynamics for Rc {
    fn dim(&self) -> usize {
        1
    }
    fn capacitance(&self, _: usize) -> f64 {
        self.c
    }
    fn inflow(&self, _: f64, x: &[f64; MAX_DIM], f: &mut [f64; MAX_DIM], jac: &mut [[f64; MAX_DIM]; MAX_DIM]) {
        f[0] = -self.g * x[0];
        jac[0][0] = -self.g;
    }
}

/// RC discharge against `exp(-t/τ)` over three time constants, at the
/// default step.
pub fn rc_suite() -> Check {
    for (g, c) in [(1e-5, 1e-15), (2e-6, 5e-15), (1e-4, 1e-13)] {
        let rc = Rc { g, c };
        let tau = c / g;
        let cfg = TransientConfig {
            stop: 3.0 * tau,
            ..TransientConfig::default()
        };
        let mut x0 = [0.0; MAX_DIM];
        x0[0] = 1.0;
        let mut worst = 0.0f64;
        integrate(&rc, x0, &cfg, |t, x| {
            let exact = (-t / tau).exp();
            worst = worst.max((x[0] / exact - 1.0).abs());
            Control::Continue
        })
        .map_err(|e| e.to_string())?;
        if worst >= 1e-3 {
            return Err(format!("tau {tau}: relative error {worst}"));
        }
    }
    Ok(())
}
