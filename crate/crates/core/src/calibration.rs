//! Shipped technology defaults and the procedure that produced them.
//!
//! The device shape parameters (thresholds, exponents, DIBL, channel-length
//! modulation, nMOS drive) are fixed inputs. [`calibrate`] then tunes, in
//! order:
//!
//! 1. the pMOS DIBL coefficient, so that pMOS off-current per width is a
//!    fixed fraction of the nMOS one;
//! 2. the pMOS drive `k_sat`, for the RSNM ratio between CR = 1 and CR = 2;
//! 3. the junction and node wiring capacitances, for the CR = 2 write delay
//!    and the CR = 1 / CR = 2 write-delay ratio;
//! 4. the bit-line wiring capacitance, for the CR = 2 read delay;
//! 5. the Pelgrom coefficient, for the Monte Carlo spread of the trip point.
//!
//! Each step is a deterministic one-dimensional root find. The output of a
//! run from the previous shipped values is what [`shipped_technology`]
//! returns.

use crate::cell::{make_cell, BiasCondition, CapModel, CellDesign, Technology};
use crate::dc;
use crate::device::{drain_current, subthreshold_current, BiasPoint, ModelCard, MosParams, Polarity};
use crate::error::{SizingError, SolverError, TransientError};
use crate::ser::SerParams;
use crate::transient::{self, TransientConfig};
use crate::variability::{monte_carlo, McConfig, Metric, PelgromModel};

pub fn shipped_technology() -> Technology {
    Technology {
        vdd: 1.2,
        temperature: 300.0,
        wmin_um: 0.12,
        l_um: 0.065,
        nmos: ModelCard {
            vt0: 0.39293,
            mu_csth: 200e-6,
            n_slope: 1.4,
            eta_dibl: 0.084165,
            k_sat: 50e-6,
            alpha: 1.6765,
            vdsat_coeff: 0.19727,
            lambda: 0.14795,
        },
        pmos: ModelCard {
            vt0: 0.41856,
            mu_csth: 100e-6,
            n_slope: 1.4,
            eta_dibl: 0.09879317511892739,
            k_sat: 3.149909265564653e-5,
            alpha: 1.0413,
            vdsat_coeff: 0.2,
            lambda: 0.0,
        },
        caps: CapModel {
            cj_f_per_um: 1.3607544594114317e-15,
            c_wire_node_f: 8.715781748467092e-16,
            c_bitline_wire_f: 1.2034763234128835e-13,
            cells_per_bitline: 256,
        },
        a_vt_mv_um: 4.145298822235544,
        ser: SerParams::default(),
    }
}

/// Anchors the calibration aims at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets {
    /// pMOS / nMOS subthreshold off-current per unit width.
    pub pmos_leak_ratio: f64,
    /// RSNM(CR = 1) / RSNM(CR = 2).
    pub rsnm_ratio: f64,
    /// Write delay of the CR = 2 cell, s.
    pub write_delay: f64,
    /// Write delay CR = 1 / CR = 2.
    pub write_ratio: f64,
    /// Read delay of the CR = 2 cell, s.
    pub read_delay: f64,
    /// Standard deviation of the trip point of the CR = 1 cell, V.
    pub sigma_vtrip: f64,
    pub mc_trials: usize,
    pub mc_seed: u64,
}

impl Default for Targets {
    fn default() -> Self {
        Self {
            pmos_leak_ratio: 0.4,
            rsnm_ratio: 0.75,
            write_delay: 30e-12,
            write_ratio: 0.8,
            read_delay: 190e-12,
            sigma_vtrip: 0.030,
            mc_trials: 4000,
            mc_seed: 0x5eed,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Sizing(#[from] SizingError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Transient(#[from] TransientError),
    #[error("calibration step `{step}` did not converge")]
    NoConvergence { step: &'static str },
    #[error("calibration step `{step}` left its valid range")]
    OutOfRange { step: &'static str },
}

/// Achieved values after calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub technology: Technology,
    pub pmos_leak_ratio: f64,
    pub rsnm_ratio: f64,
    pub write_delay_cr2: f64,
    pub write_ratio: f64,
    pub read_delay_cr2: f64,
    pub sigma_vtrip: f64,
    /// Minimum-width nMOS on-current at `Vgs = Vds = Vdd`, A.
    pub nmos_on_current: f64,
}

const MAX_STEPS: usize = 40;

fn cell(t: &Technology, cr: f64) -> Result<CellDesign, SizingError> {
    make_cell(cr, 1.0, t.wmin_um, t)
}

fn device(t: &Technology, polarity: Polarity) -> MosParams {
    let card = match polarity {
        Polarity::Nmos => t.nmos,
        Polarity::Pmos => t.pmos,
    };
    MosParams::new(polarity, t.wmin_um, t.l_um, t.temperature, card)
}

fn off_current(t: &Technology, polarity: Polarity) -> f64 {
    subthreshold_current(&device(t, polarity), BiasPoint::new(0.0, t.vdd))
}

pub fn pmos_leak_ratio(t: &Technology) -> f64 {
    off_current(t, Polarity::Pmos) / off_current(t, Polarity::Nmos)
}

pub fn nmos_on_current(t: &Technology) -> f64 {
    drain_current(&device(t, Polarity::Nmos), BiasPoint::new(t.vdd, t.vdd))
}

pub fn rsnm_ratio(t: &Technology) -> Result<f64, CalibrationError> {
    let read = BiasCondition::read(t.vdd, t.vdd);
    let r1 = dc::rsnm(&cell(t, 1.0)?, &read)?.value;
    let r2 = dc::rsnm(&cell(t, 2.0)?, &read)?.value;
    Ok(r1 / r2)
}

fn write_delays(t: &Technology, cfg: &TransientConfig) -> Result<(f64, f64), CalibrationError> {
    Ok((
        transient::write_delay(&cell(t, 1.0)?, cfg)?,
        transient::write_delay(&cell(t, 2.0)?, cfg)?,
    ))
}

pub fn read_delay_cr2(t: &Technology, cfg: &TransientConfig) -> Result<f64, CalibrationError> {
    Ok(transient::read_delay(&cell(t, 2.0)?, t.vdd, transient::SENSE_DV, cfg)?)
}

pub fn sigma_vtrip(t: &Technology, targets: &Targets) -> Result<f64, CalibrationError> {
    let d = cell(t, 1.0)?;
    let mc = McConfig::new(targets.mc_trials, targets.mc_seed);
    Ok(monte_carlo(&d, &PelgromModel::new(t.a_vt_mv_um), &mc, Metric::VTrip).std)
}

/// Secant iteration on `f(x) = 0` in `log x`, for a positive parameter on
/// which `f` depends monotonically.
fn log_secant(
    step: &'static str,
    x0: f64,
    tol: f64,
    mut f: impl FnMut(f64) -> Result<f64, CalibrationError>,
) -> Result<f64, CalibrationError> {
    let mut a = x0.ln();
    let mut fa = f(x0)?;
    if fa.abs() < tol {
        return Ok(x0);
    }
    let mut b = a + 0.05;
    for _ in 0..MAX_STEPS {
        let fb = f(b.exp())?;
        if fb.abs() < tol {
            return Ok(b.exp());
        }
        let slope = (fb - fa) / (b - a);
        if !(slope.abs() > 0.0) {
            break;
        }
        let next = b - fb / slope;
        let next = next.clamp(b - 0.7, b + 0.7);
        a = b;
        fa = fb;
        b = next;
    }
    Err(CalibrationError::NoConvergence { step })
}

/// Fixed-point update `x ← x · target / g(x)` for a quantity roughly
/// proportional to `x`.
fn proportional(
    step: &'static str,
    x0: f64,
    target: f64,
    rel_tol: f64,
    mut g: impl FnMut(f64) -> Result<f64, CalibrationError>,
) -> Result<f64, CalibrationError> {
    log_secant(step, x0, rel_tol, |x| Ok((g(x)? / target).ln()))
}

/// Run the full procedure starting from `start`.
pub fn calibrate(start: &Technology, targets: &Targets) -> Result<CalibrationReport, CalibrationError> {
    let cfg = TransientConfig::default();
    let mut t = start.clone();

    // 1. pMOS DIBL, closed form: the off-current at `Vds = Vdd` scales as
    //    exp(eta·Vdd / (n·kT/q)). DIBL barely moves the on-state pull-up,
    //    which sits at small Vds during a read.
    let n_vt = t.pmos.n_slope * crate::device::thermal_voltage(t.temperature);
    t.pmos.eta_dibl += n_vt * (targets.pmos_leak_ratio / pmos_leak_ratio(&t)).ln() / t.vdd;
    if t.pmos.eta_dibl < 0.0 {
        return Err(CalibrationError::OutOfRange { step: "pmos.eta_dibl" });
    }

    // 2. pMOS drive for the RSNM ratio.
    let base = t.clone();
    t.pmos.k_sat = log_secant("pmos.k_sat", t.pmos.k_sat, 2e-4, |k| {
        let mut x = base.clone();
        x.pmos.k_sat = k;
        Ok(rsnm_ratio(&x)? - targets.rsnm_ratio)
    })?;

    // 3. Node capacitances. The wiring share `kappa = C_wire / (cj·Wmin)`
    //    sets the CR dependence of the write delay; for each share the
    //    overall scale is fitted to the CR = 2 delay.
    let wmin = t.wmin_um;
    let base = t.clone();
    let fit_scale = |kappa: f64, cj0: f64| -> Result<(f64, f64), CalibrationError> {
        let mut ratio = 0.0;
        let cj = proportional("caps.cj_f_per_um", cj0, targets.write_delay, 1e-4, |cj| {
            let mut x = base.clone();
            x.caps.cj_f_per_um = cj;
            x.caps.c_wire_node_f = kappa * cj * wmin;
            let (w1, w2) = write_delays(&x, &cfg)?;
            ratio = w1 / w2;
            Ok(w2)
        })?;
        Ok((cj, ratio))
    };
    let mut cj = t.caps.cj_f_per_um;
    let kappa0 = (t.caps.c_wire_node_f / (t.caps.cj_f_per_um * wmin)).max(1e-3);
    let kappa = log_secant("caps.c_wire_node_f", kappa0, 2e-4, |kappa| {
        let (c, ratio) = fit_scale(kappa, cj)?;
        cj = c;
        Ok(ratio - targets.write_ratio)
    })?;
    let (cj, _) = fit_scale(kappa, cj)?;
    t.caps.cj_f_per_um = cj;
    t.caps.c_wire_node_f = kappa * cj * wmin;

    // 4. Bit-line wiring for the read delay.
    let junction = f64::from(t.caps.cells_per_bitline) * t.caps.cj_f_per_um * t.wmin_um;
    let base = t.clone();
    let total = proportional(
        "caps.c_bitline_wire_f",
        junction + t.caps.c_bitline_wire_f,
        targets.read_delay,
        1e-4,
        |c| {
            let mut x = base.clone();
            x.caps.c_bitline_wire_f = c - junction;
            read_delay_cr2(&x, &cfg)
        },
    )?;
    if total < junction {
        return Err(CalibrationError::OutOfRange {
            step: "caps.c_bitline_wire_f",
        });
    }
    t.caps.c_bitline_wire_f = total - junction;

    // 5. Pelgrom coefficient for the trip-point spread.
    let base = t.clone();
    t.a_vt_mv_um = proportional("a_vt_mv_um", t.a_vt_mv_um, targets.sigma_vtrip, 1e-4, |a| {
        let mut x = base.clone();
        x.a_vt_mv_um = a;
        sigma_vtrip(&x, targets)
    })?;

    let (w1, w2) = write_delays(&t, &cfg)?;
    Ok(CalibrationReport {
        pmos_leak_ratio: pmos_leak_ratio(&t),
        rsnm_ratio: rsnm_ratio(&t)?,
        write_delay_cr2: w2,
        write_ratio: w1 / w2,
        read_delay_cr2: read_delay_cr2(&t, &cfg)?,
        sigma_vtrip: sigma_vtrip(&t, targets)?,
        nmos_on_current: nmos_on_current(&t),
        technology: t,
    })
}
